#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "qrprox/mac.hpp"

namespace qrprox {

inline constexpr int kMinRssiDbm = -120;
inline constexpr int kMaxRssiDbm = 0;

/// One visible access point: BSSID, optional SSID, RSSI in dBm.
struct ApObservation {
  MacAddress bssid;
  std::optional<std::string> ssid;
  int rssi = kMinRssiDbm;

  bool operator==(const ApObservation&) const = default;
};

/// Throws InvalidArgument if rssi is outside [-120, 0].
void validate(const ApObservation& obs);

/// A set of access-point observations captured in one scan, at most one
/// per BSSID. Observations are kept in canonical order: descending RSSI,
/// then ascending BSSID.
class Fingerprint {
public:
  Fingerprint() = default;

  const std::vector<ApObservation>& observations() const noexcept { return observations_; }

  bool empty() const noexcept { return observations_.empty(); }
  std::size_t size() const noexcept { return observations_.size(); }

  bool contains(const MacAddress& bssid) const;
  std::optional<int> rssi_of(const MacAddress& bssid) const;
  const ApObservation* find(const MacAddress& bssid) const;

  std::optional<std::chrono::sys_seconds> captured_at;

  bool operator==(const Fingerprint&) const = default;

private:
  friend Fingerprint normalize_fingerprint(const std::vector<ApObservation>& raw);
  std::vector<ApObservation> observations_;
};

/// Collapses duplicate BSSIDs keeping the strongest RSSI, canonicalizes
/// ordering, validates every observation. Throws EmptyFingerprint on an
/// empty input list.
Fingerprint normalize_fingerprint(const std::vector<ApObservation>& raw);

}  // namespace qrprox
