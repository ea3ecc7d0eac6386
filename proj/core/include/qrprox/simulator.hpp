#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qrprox/fingerprint.hpp"
#include "qrprox/radio_map.hpp"

namespace qrprox::sim {

/// One simulated access point: planar position plus log-distance
/// path-loss parameters (reference RSSI at 1 m and exponent).
struct ApSite {
  MacAddress bssid;
  double x = 0.0;  // meters
  double y = 0.0;
  double tx_power_dbm = -30.0;      // P0 at d0 = 1 m, in [-50, -20]
  double path_loss_exponent = 2.0;  // n, in [1.5, 6]
};

/// Probability of hearing an AP at all as a function of distance:
/// p(d) = clamp(1 - (d / max_range)^shape, 0, 1). Monotone non-increasing
/// in d for every parameterization.
struct DetectionModel {
  double max_range = 100.0;  // meters
  double shape = 2.0;
};

struct SimConfig {
  double area_size = 45.0;    // square side, meters; capped at 90 so the
                              // planar coords stay valid radio-map values
  double grid_spacing = 5.0;  // meters
  double rssi_sigma = 0.0;    // Gaussian noise on RSSI, dB
  DetectionModel detection;
  std::uint64_t seed = 0;     // fixes all randomness
  std::vector<ApSite> aps;
};

void validate(const SimConfig& cfg);

double detection_probability(double distance, const DetectionModel& model);

/// Simulates one scan at (x, y). Pure function of (cfg, x, y): the same
/// inputs always produce the same fingerprint. May be empty when no AP
/// passes its detection draw.
/// Throws OutOfBounds for positions outside the area.
Fingerprint simulate_scan(double x, double y, const SimConfig& cfg);

/// One radio-map entry per grid point (spacing cfg.grid_spacing, from 0
/// to area_size inclusive), lat = x and lon = y in meters.
std::vector<RadioMapEntry> generate_radio_map(const SimConfig& cfg);

struct AccuracyReport {
  int queries = 0;   // evaluated queries
  int skipped = 0;   // positions whose simulated scan heard no AP
  int k = 0;
  double mean_err = 0.0;    // meters
  double median_err = 0.0;
  double p95_err = 0.0;
};

/// Localization error statistics over explicit query positions.
AccuracyReport eval_accuracy_at(const std::vector<RadioMapEntry>& map,
                                const std::vector<std::pair<double, double>>& positions,
                                const SimConfig& cfg, const KnnConfig& knn);

/// Same, over n_queries positions sampled uniformly from the area
/// (seed-derived, reproducible).
AccuracyReport eval_accuracy(const std::vector<RadioMapEntry>& map, int n_queries,
                             const SimConfig& cfg, const KnnConfig& knn);

/// All grid points, the positions the radio map was trained on.
std::vector<std::pair<double, double>> grid_positions(const SimConfig& cfg);

}  // namespace qrprox::sim
