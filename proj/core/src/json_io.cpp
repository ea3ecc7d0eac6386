#include "qrprox/json_io.hpp"

#include <fstream>
#include <sstream>

#include "qrprox/error.hpp"
#include "qrprox/time_window.hpp"

namespace qrprox {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "malformed " + what + ": " + why);
}

const json& require(const json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) malformed(what, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_string()) malformed(what, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

double require_number(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_number()) malformed(what, std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

json parse_json(std::string_view text, std::string_view what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) malformed(std::string(what), "invalid JSON");
  return j;
}

json to_json(const ApObservation& obs) {
  json j{{"bssid", obs.bssid.to_string()}, {"rssi", obs.rssi}};
  if (obs.ssid) j["ssid"] = *obs.ssid;
  return j;
}

ApObservation observation_from_json(const json& j) {
  const std::string what = "access-point observation";
  if (!j.is_object()) malformed(what, "not an object");
  std::string bssid_text = require_string(j, "bssid", what);
  auto bssid = MacAddress::parse(bssid_text);
  if (!bssid) malformed(what, "bad bssid '" + bssid_text + "'");
  const json& rssi = require(j, "rssi", what);
  if (!rssi.is_number_integer()) malformed(what, "rssi is not an integer");
  ApObservation obs{*bssid, std::nullopt, rssi.get<int>()};
  if (auto it = j.find("ssid"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) malformed(what, "ssid is not a string");
    obs.ssid = it->get<std::string>();
  }
  validate(obs);
  return obs;
}

json aps_to_json(const Fingerprint& fp) {
  json arr = json::array();
  for (const ApObservation& obs : fp.observations()) arr.push_back(to_json(obs));
  return arr;
}

Fingerprint fingerprint_from_aps_json(const json& j) {
  if (!j.is_array()) malformed("fingerprint", "'aps' is not an array");
  std::vector<ApObservation> raw;
  raw.reserve(j.size());
  for (const json& item : j) raw.push_back(observation_from_json(item));
  return normalize_fingerprint(raw);
}

json to_json(const RadioMapEntry& entry) {
  json j{{"lat", entry.latitude}, {"lon", entry.longitude}, {"aps", aps_to_json(entry.fingerprint)}};
  if (entry.label) j["label"] = *entry.label;
  return j;
}

RadioMapEntry radio_map_entry_from_json(const json& j) {
  const std::string what = "radio-map entry";
  if (!j.is_object()) malformed(what, "not an object");
  RadioMapEntry entry;
  entry.latitude = require_number(j, "lat", what);
  entry.longitude = require_number(j, "lon", what);
  entry.fingerprint = fingerprint_from_aps_json(require(j, "aps", what));
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) malformed(what, "label is not a string");
    entry.label = it->get<std::string>();
  }
  validate(entry);
  return entry;
}

json to_json(const std::vector<RadioMapEntry>& map) {
  json arr = json::array();
  for (const RadioMapEntry& entry : map) arr.push_back(to_json(entry));
  return arr;
}

std::vector<RadioMapEntry> radio_map_from_json(const json& j) {
  if (!j.is_array()) malformed("radio map", "top level is not an array");
  std::vector<RadioMapEntry> map;
  map.reserve(j.size());
  for (const json& item : j) map.push_back(radio_map_entry_from_json(item));
  return map;
}

std::vector<RadioMapEntry> load_radio_map(const std::string& path) {
  return radio_map_from_json(parse_json(read_text_file(path), "radio map"));
}

void save_radio_map(const std::vector<RadioMapEntry>& map, const std::string& path) {
  write_text_file(path, to_json(map).dump(2) + "\n");
}

json to_json(const ScanEvent& event) {
  return json{{"id", event.id},
              {"user", event.user_token},
              {"ts", format_rfc3339(event.timestamp)},
              {"url", event.target_url},
              {"aps", aps_to_json(event.fingerprint)}};
}

ScanEvent scan_event_from_json(const json& j) {
  const std::string what = "scan event";
  if (!j.is_object()) malformed(what, "not an object");
  ScanEvent event;
  event.id = require_string(j, "id", what);
  event.user_token = require_string(j, "user", what);
  event.timestamp = parse_rfc3339(require_string(j, "ts", what));
  event.target_url = require_string(j, "url", what);
  event.fingerprint = fingerprint_from_aps_json(require(j, "aps", what));
  return event;
}

json to_json(const PositionEstimate& estimate) {
  json neighbors = json::array();
  for (const Neighbor& n : estimate.neighbors) {
    json entry{{"lat", n.entry.latitude}, {"lon", n.entry.longitude}, {"distance", n.distance}};
    if (n.entry.label) entry["label"] = *n.entry.label;
    neighbors.push_back(std::move(entry));
  }
  return json{{"lat", estimate.latitude}, {"lon", estimate.longitude}, {"neighbors", neighbors}};
}

json to_json(const sim::AccuracyReport& report) {
  return json{{"queries", report.queries},   {"skipped", report.skipped},
              {"k", report.k},               {"mean_err", report.mean_err},
              {"median_err", report.median_err}, {"p95_err", report.p95_err}};
}

json to_json(const sim::SimConfig& cfg) {
  json aps = json::array();
  for (const sim::ApSite& site : cfg.aps) {
    aps.push_back(json{{"bssid", site.bssid.to_string()},
                       {"x", site.x},
                       {"y", site.y},
                       {"tx_power_dbm", site.tx_power_dbm},
                       {"path_loss_exponent", site.path_loss_exponent}});
  }
  return json{{"area_size", cfg.area_size},
              {"grid_spacing", cfg.grid_spacing},
              {"rssi_sigma", cfg.rssi_sigma},
              {"seed", cfg.seed},
              {"detection", json{{"max_range", cfg.detection.max_range}, {"shape", cfg.detection.shape}}},
              {"aps", aps}};
}

sim::SimConfig sim_config_from_json(const json& j) {
  const std::string what = "simulator config";
  if (!j.is_object()) malformed(what, "not an object");
  sim::SimConfig cfg;
  cfg.area_size = require_number(j, "area_size", what);
  cfg.grid_spacing = require_number(j, "grid_spacing", what);
  if (auto it = j.find("rssi_sigma"); it != j.end()) cfg.rssi_sigma = it->get<double>();
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) malformed(what, "seed is not an integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("detection"); it != j.end()) {
    cfg.detection.max_range = require_number(*it, "max_range", what);
    cfg.detection.shape = require_number(*it, "shape", what);
  }
  const json& aps = require(j, "aps", what);
  if (!aps.is_array()) malformed(what, "'aps' is not an array");
  for (const json& site_json : aps) {
    sim::ApSite site;
    std::string bssid_text = require_string(site_json, "bssid", what);
    auto bssid = MacAddress::parse(bssid_text);
    if (!bssid) malformed(what, "bad AP bssid '" + bssid_text + "'");
    site.bssid = *bssid;
    site.x = require_number(site_json, "x", what);
    site.y = require_number(site_json, "y", what);
    site.tx_power_dbm = require_number(site_json, "tx_power_dbm", what);
    site.path_loss_exponent = require_number(site_json, "path_loss_exponent", what);
    cfg.aps.push_back(site);
  }
  validate(cfg);
  return cfg;
}

sim::SimConfig load_sim_config(const std::string& path) {
  return sim_config_from_json(parse_json(read_text_file(path), "simulator config"));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace qrprox
