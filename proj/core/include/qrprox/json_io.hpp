#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qrprox/fingerprint.hpp"
#include "qrprox/radio_map.hpp"
#include "qrprox/scan_store.hpp"
#include "qrprox/simulator.hpp"

namespace qrprox {

// All loaders throw Error(InvalidArgument) with a field-level detail on
// malformed input. Schemas:
//   observation     {"bssid": "AA-BB-CC-DD-EE-FF", "ssid"?: str, "rssi": int}
//   radio-map file  [{"lat": num, "lon": num, "label"?: str, "aps": [obs]}]
//   event line      {"id", "user", "ts", "url", "aps"} with ts RFC 3339 UTC
//   scan request    {"user", "url", "aps", "ts"?}

nlohmann::json to_json(const ApObservation& obs);
ApObservation observation_from_json(const nlohmann::json& j);

nlohmann::json aps_to_json(const Fingerprint& fp);
Fingerprint fingerprint_from_aps_json(const nlohmann::json& j);

nlohmann::json to_json(const RadioMapEntry& entry);
RadioMapEntry radio_map_entry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<RadioMapEntry>& map);
std::vector<RadioMapEntry> radio_map_from_json(const nlohmann::json& j);
std::vector<RadioMapEntry> load_radio_map(const std::string& path);
void save_radio_map(const std::vector<RadioMapEntry>& map, const std::string& path);

nlohmann::json to_json(const ScanEvent& event);
ScanEvent scan_event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PositionEstimate& estimate);

nlohmann::json to_json(const sim::AccuracyReport& report);

nlohmann::json to_json(const sim::SimConfig& cfg);
sim::SimConfig sim_config_from_json(const nlohmann::json& j);
sim::SimConfig load_sim_config(const std::string& path);

std::string read_text_file(const std::string& path);  // throws IoError
void write_text_file(const std::string& path, std::string_view content);

/// Wraps nlohmann parse errors into Error(InvalidArgument).
nlohmann::json parse_json(std::string_view text, std::string_view what);

}  // namespace qrprox
