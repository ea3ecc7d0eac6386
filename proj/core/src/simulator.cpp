#include "qrprox/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "qrprox/error.hpp"

namespace qrprox::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-position RNG seed so simulate_scan is a pure function of
/// (cfg, x, y) regardless of call order.
std::uint64_t position_seed(std::uint64_t seed, double x, double y) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ std::bit_cast<std::uint64_t>(x));
  s = splitmix64(s ^ std::bit_cast<std::uint64_t>(y));
  return s;
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.area_size > 0.0) || cfg.area_size > 90.0) {
    throw Error(ErrorCode::InvalidArgument,
                "area_size must be in (0, 90] meters so planar coordinates remain valid "
                "radio-map values, got " + std::to_string(cfg.area_size));
  }
  if (!(cfg.grid_spacing > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid_spacing must be positive");
  }
  if (cfg.rssi_sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rssi_sigma must be non-negative");
  }
  if (!(cfg.detection.max_range > 0.0) || !(cfg.detection.shape > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "detection max_range and shape must be positive");
  }
  for (const ApSite& site : cfg.aps) {
    if (site.path_loss_exponent < 1.5 || site.path_loss_exponent > 6.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "path_loss_exponent must be in [1.5, 6] for " + site.bssid.to_string());
    }
    if (site.tx_power_dbm < -50.0 || site.tx_power_dbm > -20.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "tx_power_dbm must be in [-50, -20] for " + site.bssid.to_string());
    }
  }
}

double detection_probability(double distance, const DetectionModel& model) {
  double p = 1.0 - std::pow(distance / model.max_range, model.shape);
  return std::clamp(p, 0.0, 1.0);
}

Fingerprint simulate_scan(double x, double y, const SimConfig& cfg) {
  validate(cfg);
  if (x < 0.0 || x > cfg.area_size || y < 0.0 || y > cfg.area_size) {
    throw Error(ErrorCode::OutOfBounds,
                "position (" + std::to_string(x) + ", " + std::to_string(y) +
                    ") outside [0, " + std::to_string(cfg.area_size) + "]^2");
  }
  std::mt19937_64 rng(position_seed(cfg.seed, x, y));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<ApObservation> observations;
  for (const ApSite& site : cfg.aps) {
    double d = std::hypot(x - site.x, y - site.y);
    if (uniform(rng) >= detection_probability(d, cfg.detection)) continue;
    // Log-distance path loss from the 1 m reference, plus Gaussian
    // shadowing; quantized to whole dBm like real scan APIs.
    double rssi = site.tx_power_dbm -
                  10.0 * site.path_loss_exponent * std::log10(std::max(d, 1.0));
    if (cfg.rssi_sigma > 0.0) {
      rssi += std::normal_distribution<double>(0.0, cfg.rssi_sigma)(rng);
    }
    int quantized = static_cast<int>(std::lround(rssi));
    quantized = std::clamp(quantized, kMinRssiDbm, kMaxRssiDbm);
    observations.push_back(ApObservation{site.bssid, std::nullopt, quantized});
  }
  if (observations.empty()) return Fingerprint{};
  return normalize_fingerprint(observations);
}

std::vector<std::pair<double, double>> grid_positions(const SimConfig& cfg) {
  validate(cfg);
  auto points_per_axis =
      static_cast<std::size_t>(std::floor(cfg.area_size / cfg.grid_spacing + 1e-9)) + 1;
  std::vector<std::pair<double, double>> positions;
  positions.reserve(points_per_axis * points_per_axis);
  for (std::size_t i = 0; i < points_per_axis; ++i) {
    for (std::size_t j = 0; j < points_per_axis; ++j) {
      positions.emplace_back(static_cast<double>(i) * cfg.grid_spacing,
                             static_cast<double>(j) * cfg.grid_spacing);
    }
  }
  return positions;
}

std::vector<RadioMapEntry> generate_radio_map(const SimConfig& cfg) {
  if (cfg.aps.empty()) {
    throw Error(ErrorCode::InvalidArgument, "simulator config has no access points");
  }
  std::vector<RadioMapEntry> map;
  for (auto [x, y] : grid_positions(cfg)) {
    Fingerprint fp = simulate_scan(x, y, cfg);
    if (fp.empty()) continue;  // grid point out of radio reach
    map.push_back(RadioMapEntry{std::move(fp), x, y, std::nullopt});
  }
  return map;
}

AccuracyReport eval_accuracy_at(const std::vector<RadioMapEntry>& map,
                                const std::vector<std::pair<double, double>>& positions,
                                const SimConfig& cfg, const KnnConfig& knn) {
  if (map.empty()) {
    throw Error(ErrorCode::EmptyRadioMap, "radio map has no entries");
  }
  AccuracyReport report;
  report.k = knn.k;
  std::vector<double> errors;
  errors.reserve(positions.size());
  for (auto [x, y] : positions) {
    Fingerprint fp = simulate_scan(x, y, cfg);
    if (fp.empty()) {
      ++report.skipped;
      continue;
    }
    PositionEstimate estimate = knn_locate(fp, map, knn);
    errors.push_back(std::hypot(estimate.latitude - x, estimate.longitude - y));
  }
  report.queries = static_cast<int>(errors.size());
  if (errors.empty()) return report;
  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mean_err = sum / static_cast<double>(errors.size());
  std::sort(errors.begin(), errors.end());
  std::size_t n = errors.size();
  report.median_err = (n % 2 == 1) ? errors[n / 2] : (errors[n / 2 - 1] + errors[n / 2]) / 2.0;
  // nearest-rank p95
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  report.p95_err = errors[std::max<std::size_t>(rank, 1) - 1];
  return report;
}

AccuracyReport eval_accuracy(const std::vector<RadioMapEntry>& map, int n_queries,
                             const SimConfig& cfg, const KnnConfig& knn) {
  validate(cfg);
  if (n_queries < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_queries must be >= 1");
  }
  // Query positions come from a stream independent of the per-position
  // scan RNG, so the same seed always visits the same places.
  std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x71C7A9D5B22E301FULL));
  std::uniform_real_distribution<double> coord(0.0, cfg.area_size);
  std::vector<std::pair<double, double>> positions;
  positions.reserve(static_cast<std::size_t>(n_queries));
  for (int i = 0; i < n_queries; ++i) {
    double x = coord(rng);
    double y = coord(rng);
    positions.emplace_back(x, y);
  }
  return eval_accuracy_at(map, positions, cfg, knn);
}

}  // namespace qrprox::sim
