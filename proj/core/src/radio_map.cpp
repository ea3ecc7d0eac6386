#include "qrprox/radio_map.hpp"

#include <algorithm>
#include <numeric>

#include "qrprox/error.hpp"

namespace qrprox {

void validate(const RadioMapEntry& entry) {
  if (entry.latitude < -90.0 || entry.latitude > 90.0) {
    throw Error(ErrorCode::InvalidArgument,
                "latitude " + std::to_string(entry.latitude) + " outside [-90, 90]");
  }
  if (entry.longitude < -180.0 || entry.longitude > 180.0) {
    throw Error(ErrorCode::InvalidArgument,
                "longitude " + std::to_string(entry.longitude) + " outside [-180, 180]");
  }
  if (entry.fingerprint.empty()) {
    throw Error(ErrorCode::InvalidArgument, "radio-map entry has an empty fingerprint");
  }
}

void validate(const KnnConfig& cfg) {
  if (cfg.k < 1) {
    throw Error(ErrorCode::InvalidArgument, "k must be >= 1, got " + std::to_string(cfg.k));
  }
  if (cfg.missing_rssi_floor > -90) {
    throw Error(ErrorCode::InvalidArgument, "missing_rssi_floor must be <= -90 dBm, got " +
                                                std::to_string(cfg.missing_rssi_floor));
  }
}

PositionEstimate knn_locate(const Fingerprint& query, const std::vector<RadioMapEntry>& map,
                            const KnnConfig& cfg) {
  validate(cfg);
  if (map.empty()) {
    throw Error(ErrorCode::EmptyRadioMap, "radio map has no entries");
  }
  if (query.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, "query fingerprint is empty");
  }
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    order.emplace_back(euclidean_distance(query, map[i].fingerprint, cfg.missing_rssi_floor), i);
  }
  // stable: equal distances keep map insertion order
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), order.size());

  PositionEstimate estimate;
  estimate.neighbors.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const RadioMapEntry& entry = map[order[i].second];
    estimate.neighbors.push_back(Neighbor{entry, order[i].first});
    estimate.latitude += entry.latitude;
    estimate.longitude += entry.longitude;
  }
  estimate.latitude /= static_cast<double>(take);
  estimate.longitude /= static_cast<double>(take);
  return estimate;
}

}  // namespace qrprox
