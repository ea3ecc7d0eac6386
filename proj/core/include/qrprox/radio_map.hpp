#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qrprox/fingerprint.hpp"
#include "qrprox/metrics.hpp"

namespace qrprox {

/// A fingerprint labeled with coordinates; one row of the k-NN training
/// database. For desk-scale simulator output the lat/lon fields carry
/// planar meters instead of degrees (same ranges, documented in README).
struct RadioMapEntry {
  Fingerprint fingerprint;
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<std::string> label;

  bool operator==(const RadioMapEntry&) const = default;
};

/// Throws InvalidArgument on out-of-range coordinates or an empty
/// fingerprint.
void validate(const RadioMapEntry& entry);

struct KnnConfig {
  int k = 4;
  int missing_rssi_floor = kDefaultRssiFloorDbm;
};

/// Throws InvalidArgument unless k >= 1 and floor <= -90.
void validate(const KnnConfig& cfg);

struct Neighbor {
  RadioMapEntry entry;
  double distance = 0.0;
};

struct PositionEstimate {
  double latitude = 0.0;
  double longitude = 0.0;
  std::vector<Neighbor> neighbors;
};

/// Signal-space k-NN: sorts entries by Euclidean distance to the query
/// (ties broken by map order), keeps the min(k, |map|) nearest and
/// averages their coordinates unweighted.
/// Throws EmptyRadioMap on an empty map, EmptyFingerprint on an empty
/// query.
PositionEstimate knn_locate(const Fingerprint& query,
                            const std::vector<RadioMapEntry>& map,
                            const KnnConfig& cfg = {});

}  // namespace qrprox
