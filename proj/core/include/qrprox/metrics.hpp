#pragma once

#include <map>

#include "qrprox/fingerprint.hpp"

namespace qrprox {

inline constexpr int kDefaultRssiFloorDbm = -100;

/// Relative ranking of the APs in one fingerprint. Rank 1 is the
/// strongest RSSI; equal RSSIs share the average of the ranks they span,
/// so ranks may be fractional. Ranks over n APs always sum to n(n+1)/2.
struct RankVector {
  std::map<MacAddress, double> ranks;

  double rank_of(const MacAddress& bssid) const { return ranks.at(bssid); }
  std::size_t size() const noexcept { return ranks.size(); }

  bool operator==(const RankVector&) const = default;
};

/// Signal-space Euclidean distance over the union of BSSIDs, substituting
/// `floor` dBm for an AP unseen in one of the fingerprints. Symmetric,
/// non-negative, zero exactly on identical union-RSSI vectors.
/// Throws EmptyFingerprint if either fingerprint is empty.
double euclidean_distance(const Fingerprint& a, const Fingerprint& b,
                          int floor = kDefaultRssiFloorDbm);

/// Throws EmptyFingerprint on an empty fingerprint.
RankVector rank_transform(const Fingerprint& fp);

/// Spearman rank-order correlation over the shared BSSID set. Both
/// fingerprints are restricted to the intersection and re-ranked within
/// it before the rank vectors are correlated.
/// Throws InsufficientOverlap when fewer than two BSSIDs are shared and
/// DegenerateRanks when either rank vector has zero variance.
double spearman_correlation(const Fingerprint& a, const Fingerprint& b);

/// Jaccard index of the two BSSID sets: |A n B| / |A u B|, in [0, 1].
/// Throws EmptyFingerprint if either fingerprint is empty.
double visibility_overlap(const Fingerprint& a, const Fingerprint& b);

}  // namespace qrprox
