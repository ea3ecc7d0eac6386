#include "qrprox/fingerprint.hpp"

#include <algorithm>
#include <map>

#include "qrprox/error.hpp"

namespace qrprox {

void validate(const ApObservation& obs) {
  if (obs.rssi < kMinRssiDbm || obs.rssi > kMaxRssiDbm) {
    throw Error(ErrorCode::InvalidArgument,
                "rssi " + std::to_string(obs.rssi) + " dBm outside [" +
                    std::to_string(kMinRssiDbm) + ", " + std::to_string(kMaxRssiDbm) + "] for " +
                    obs.bssid.to_string());
  }
}

bool Fingerprint::contains(const MacAddress& bssid) const { return find(bssid) != nullptr; }

std::optional<int> Fingerprint::rssi_of(const MacAddress& bssid) const {
  const ApObservation* obs = find(bssid);
  if (!obs) return std::nullopt;
  return obs->rssi;
}

const ApObservation* Fingerprint::find(const MacAddress& bssid) const {
  for (const ApObservation& obs : observations_) {
    if (obs.bssid == bssid) return &obs;
  }
  return nullptr;
}

Fingerprint normalize_fingerprint(const std::vector<ApObservation>& raw) {
  if (raw.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, "scan contains no access points");
  }
  // Dedupe per BSSID keeping the strongest RSSI; first occurrence wins on
  // an exact tie.
  std::map<MacAddress, ApObservation> best;
  for (const ApObservation& obs : raw) {
    validate(obs);
    auto [it, inserted] = best.try_emplace(obs.bssid, obs);
    if (!inserted && obs.rssi > it->second.rssi) it->second = obs;
  }
  Fingerprint fp;
  fp.observations_.reserve(best.size());
  for (auto& [bssid, obs] : best) fp.observations_.push_back(std::move(obs));
  std::sort(fp.observations_.begin(), fp.observations_.end(),
            [](const ApObservation& a, const ApObservation& b) {
              if (a.rssi != b.rssi) return a.rssi > b.rssi;
              return a.bssid < b.bssid;
            });
  return fp;
}

}  // namespace qrprox
