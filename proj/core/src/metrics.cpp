#include "qrprox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "qrprox/error.hpp"

namespace qrprox {

namespace {

void require_non_empty(const Fingerprint& fp, const char* which) {
  if (fp.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, std::string(which) + " fingerprint is empty");
  }
}

/// Average-rank transform of (bssid, value) pairs: strongest value gets
/// rank 1, ties share the mean of the positions they span.
std::map<MacAddress, double> rank_pairs(std::vector<std::pair<MacAddress, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::map<MacAddress, double> ranks;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j].second == pairs[i].second) ++j;
    // positions i+1 .. j span this tie group
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[pairs[t].first] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

double euclidean_distance(const Fingerprint& a, const Fingerprint& b, int floor) {
  require_non_empty(a, "left");
  require_non_empty(b, "right");
  std::set<MacAddress> union_bssids;
  for (const auto& obs : a.observations()) union_bssids.insert(obs.bssid);
  for (const auto& obs : b.observations()) union_bssids.insert(obs.bssid);
  double sum = 0.0;
  for (const MacAddress& bssid : union_bssids) {
    double va = static_cast<double>(a.rssi_of(bssid).value_or(floor));
    double vb = static_cast<double>(b.rssi_of(bssid).value_or(floor));
    sum += (va - vb) * (va - vb);
  }
  return std::sqrt(sum);
}

RankVector rank_transform(const Fingerprint& fp) {
  require_non_empty(fp, "input");
  std::vector<std::pair<MacAddress, double>> pairs;
  pairs.reserve(fp.size());
  for (const auto& obs : fp.observations()) {
    pairs.emplace_back(obs.bssid, static_cast<double>(obs.rssi));
  }
  return RankVector{rank_pairs(std::move(pairs))};
}

double spearman_correlation(const Fingerprint& a, const Fingerprint& b) {
  require_non_empty(a, "left");
  require_non_empty(b, "right");
  std::vector<MacAddress> shared;
  for (const auto& obs : a.observations()) {
    if (b.contains(obs.bssid)) shared.push_back(obs.bssid);
  }
  if (shared.size() < 2) {
    throw Error(ErrorCode::InsufficientOverlap,
                "only " + std::to_string(shared.size()) + " shared AP(s), need at least 2");
  }
  // Re-rank each fingerprint within the shared BSSID set.
  std::vector<std::pair<MacAddress, double>> pa, pb;
  for (const MacAddress& bssid : shared) {
    pa.emplace_back(bssid, static_cast<double>(*a.rssi_of(bssid)));
    pb.emplace_back(bssid, static_cast<double>(*b.rssi_of(bssid)));
  }
  auto ra = rank_pairs(std::move(pa));
  auto rb = rank_pairs(std::move(pb));

  double n = static_cast<double>(shared.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (const MacAddress& bssid : shared) {
    mean_a += ra[bssid];
    mean_b += rb[bssid];
  }
  mean_a /= n;
  mean_b /= n;
  double num = 0.0, var_a = 0.0, var_b = 0.0;
  for (const MacAddress& bssid : shared) {
    double da = ra[bssid] - mean_a;
    double db = rb[bssid] - mean_b;
    num += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw Error(ErrorCode::DegenerateRanks, "all shared APs tied, rank variance is zero");
  }
  double r = num / (std::sqrt(var_a) * std::sqrt(var_b));
  return std::clamp(r, -1.0, 1.0);
}

double visibility_overlap(const Fingerprint& a, const Fingerprint& b) {
  require_non_empty(a, "left");
  require_non_empty(b, "right");
  std::size_t shared = 0;
  for (const auto& obs : a.observations()) {
    if (b.contains(obs.bssid)) ++shared;
  }
  std::size_t united = a.size() + b.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(united);
}

}  // namespace qrprox
