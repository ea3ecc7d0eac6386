// qrprox — Wi-Fi context toolkit CLI.
//
// Exit codes: 0 success, 1 input error (bad arguments, malformed files,
// unknown ids), 2 internal error.

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrprox/error.hpp"
#include "qrprox/json_io.hpp"
#include "qrprox/metrics.hpp"
#include "qrprox/qr_context.hpp"
#include "qrprox/radio_map.hpp"
#include "qrprox/rules.hpp"
#include "qrprox/scan_store.hpp"
#include "qrprox/service.hpp"
#include "qrprox/simulator.hpp"
#include "qrprox/time_window.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return qrprox::read_text_file(path);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-")
    std::cout << text << "\n";
  else
    qrprox::write_text_file(out_path, text + "\n");
}

void emit(const json& j, const std::string& out_path = "") { emit(j.dump(2), out_path); }

qrprox::Fingerprint load_aps(const std::string& path) {
  return qrprox::fingerprint_from_aps_json(qrprox::parse_json(slurp(path), path));
}

json params_to_json(const qrprox::ContextParams& params) {
  json j;
  j["mode"] = params.mode == qrprox::ContextMode::Stored ? "stored" : "inline";
  if (params.context_id) j["context_id"] = *params.context_id;
  if (params.fingerprint) j["aps"] = qrprox::aps_to_json(*params.fingerprint);
  if (!params.pseudonym_aps.empty()) {
    json aps = json::array();
    for (const auto& ap : params.pseudonym_aps)
      aps.push_back({{"token", ap.token}, {"rssi", ap.rssi}});
    j["pseudonym_aps"] = std::move(aps);
  }
  if (params.lat) j["lat"] = *params.lat;
  if (params.lng) j["lng"] = *params.lng;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi fingerprint context toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  // rewrite: QR payload -> augmented URL
  auto* rewrite = app.add_subcommand("rewrite", "Append context parameters to a QR payload URL");
  std::string rw_payload, rw_aps, rw_context_id, rw_salt;
  int rw_max_aps = 16;
  bool rw_pseudonymize = false;
  rewrite->add_option("payload", rw_payload, "QR payload text (must be an http/https URL)")
      ->required();
  rewrite->add_option("--aps", rw_aps, "Scan JSON file for inline mode ('-' = stdin)");
  rewrite->add_option("--context-id", rw_context_id, "Stored-context id for stored mode");
  rewrite->add_option("--max-aps", rw_max_aps, "Inline AP cap")->capture_default_str();
  rewrite->add_flag("--pseudonymize", rw_pseudonymize, "Hash BSSIDs with --salt");
  rewrite->add_option("--salt", rw_salt, "Pseudonymization salt");
  rewrite->callback([&] {
    auto payload = qrprox::classify_payload(rw_payload);
    if (payload.kind != qrprox::PayloadKind::HttpUrl)
      throw qrprox::Error(qrprox::ErrorCode::NotAUrl,
                          "payload is not an absolute http(s) URL");
    if (!rw_context_id.empty()) {
      emit(qrprox::rewrite_url_stored(rw_payload, rw_context_id), "");
      return;
    }
    if (rw_aps.empty())
      throw qrprox::Error(qrprox::ErrorCode::InvalidArgument,
                          "rewrite needs --aps (inline) or --context-id (stored)");
    qrprox::RewriteConfig cfg{qrprox::ContextMode::Inline, rw_max_aps, rw_pseudonymize, rw_salt};
    emit(qrprox::rewrite_url_inline(rw_payload, load_aps(rw_aps), cfg), "");
  });

  // parse: augmented URL -> context JSON
  auto* parse = app.add_subcommand("parse", "Extract context parameters from an augmented URL");
  std::string pr_url;
  parse->add_option("url", pr_url, "URL to parse")->required();
  parse->callback([&] { emit(params_to_json(qrprox::parse_context_params(pr_url))); });

  // store: ingest one scan into a store file
  auto* store_cmd = app.add_subcommand("store", "Append a scan event to a store file");
  std::string st_store, st_user, st_url, st_aps, st_ts;
  store_cmd->add_option("--store", st_store, "JSONL store file")->required();
  store_cmd->add_option("--user", st_user, "User identity token")->required();
  store_cmd->add_option("--url", st_url, "Target URL")->required();
  store_cmd->add_option("--aps", st_aps, "Scan JSON file ('-' = stdin)")->required();
  store_cmd->add_option("--ts", st_ts, "RFC 3339 UTC timestamp (default: now)");
  store_cmd->callback([&] {
    qrprox::FileScanStore store(st_store);
    auto ts = st_ts.empty() ? qrprox::system_clock_utc()() : qrprox::parse_rfc3339(st_ts);
    std::string id = store.store_scan({st_user, ts, load_aps(st_aps), st_url});
    emit(json{{"context_id", id},
              {"augmented_url", qrprox::rewrite_url_stored(st_url, id)}});
  });

  // resolve: look a stored context back up
  auto* resolve = app.add_subcommand("resolve", "Resolve a context id against a store file");
  std::string rs_store, rs_id, rs_param;
  bool rs_names = false;
  resolve->add_option("--store", rs_store, "JSONL store file")->required();
  resolve->add_option("--id", rs_id, "Context id")->required();
  resolve->add_flag("--params", rs_names, "List parameter names instead of the event");
  resolve->add_option("--param", rs_param, "Print the values of one parameter");
  resolve->callback([&] {
    qrprox::FileScanStore store(rs_store);
    if (!rs_param.empty())
      emit(json(store.get_parameter_values(rs_id, rs_param)));
    else if (rs_names)
      emit(json(store.get_parameter_names(rs_id)));
    else
      emit(qrprox::to_json(store.get_context(rs_id)));
  });

  // locate: k-NN position estimate
  auto* locate = app.add_subcommand("locate", "Estimate a position from a scan and a radio map");
  std::string lc_map, lc_aps, lc_store, lc_id;
  int lc_k = 4, lc_floor = qrprox::kDefaultRssiFloorDbm;
  locate->add_option("--map", lc_map, "Radio-map JSON file")->required();
  locate->add_option("--aps", lc_aps, "Scan JSON file ('-' = stdin)");
  locate->add_option("--store", lc_store, "Store file (with --id)");
  locate->add_option("--id", lc_id, "Context id whose fingerprint to locate");
  locate->add_option("--k", lc_k, "Neighbor count")->capture_default_str();
  locate->add_option("--floor", lc_floor, "Missing-RSSI floor, dBm")->capture_default_str();
  locate->callback([&] {
    qrprox::Fingerprint fp;
    if (!lc_aps.empty()) {
      fp = load_aps(lc_aps);
    } else if (!lc_store.empty() && !lc_id.empty()) {
      fp = qrprox::FileScanStore(lc_store).get_context(lc_id).fingerprint;
    } else {
      throw qrprox::Error(qrprox::ErrorCode::InvalidArgument,
                          "locate needs --aps or --store + --id");
    }
    auto map = qrprox::load_radio_map(lc_map);
    emit(qrprox::to_json(qrprox::knn_locate(fp, map, {lc_k, lc_floor})));
  });

  // rules check
  auto* rules_cmd = app.add_subcommand("rules", "Rule-text operations");
  rules_cmd->require_subcommand(1);
  auto* check = rules_cmd->add_subcommand("check", "Parse rule text and print the canonical form");
  std::string ck_file;
  check->add_option("file", ck_file, "Rule text file ('-' = stdin)")->required();
  check->callback([&] {
    auto rules = qrprox::rules::parse_rules(slurp(ck_file));
    std::cerr << "OK, " << rules.size() << (rules.size() == 1 ? " rule\n" : " rules\n");
    std::cout << qrprox::rules::to_text(rules);
  });

  // evaluate: run rules against a scan + history
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate rules for one scan");
  std::string ev_rules, ev_store, ev_user, ev_aps, ev_now;
  int ev_floor = qrprox::kDefaultRssiFloorDbm;
  evaluate->add_option("--rules", ev_rules, "Rule text file")->required();
  evaluate->add_option("--store", ev_store, "JSONL store file backing COUNTER/FIRST");
  evaluate->add_option("--user", ev_user, "User identity token")->required();
  evaluate->add_option("--aps", ev_aps, "Scan JSON file ('-' = stdin)")->required();
  evaluate->add_option("--now", ev_now, "RFC 3339 evaluation time (default: now)");
  evaluate->add_option("--floor", ev_floor, "Missing-RSSI floor, dBm")->capture_default_str();
  evaluate->callback([&] {
    auto rules = qrprox::rules::parse_rules(slurp(ev_rules));
    auto fp = load_aps(ev_aps);
    auto now = ev_now.empty() ? qrprox::system_clock_utc()() : qrprox::parse_rfc3339(ev_now);
    std::optional<qrprox::FileScanStore> store;
    if (!ev_store.empty()) store.emplace(ev_store);
    qrprox::rules::EvalContext ctx{ev_user, now, store ? &*store : nullptr, &fp, ev_floor};
    emit(json{{"actions", qrprox::rules::evaluate_all(rules, ctx)}});
  });

  // simulate: one synthetic scan
  auto* simulate = app.add_subcommand("simulate", "Simulate one scan at a position");
  std::string sm_config, sm_out;
  double sm_x = 0.0, sm_y = 0.0;
  std::optional<std::uint64_t> sm_seed;
  simulate->add_option("--config", sm_config, "Simulation config JSON")->required();
  simulate->add_option("--x", sm_x, "X position, meters")->required();
  simulate->add_option("--y", sm_y, "Y position, meters")->required();
  simulate->add_option("--seed", sm_seed, "Override config seed");
  simulate->add_option("--out", sm_out, "Output file (default stdout)");
  simulate->callback([&] {
    auto cfg = qrprox::load_sim_config(sm_config);
    if (sm_seed) cfg.seed = *sm_seed;
    emit(qrprox::aps_to_json(qrprox::sim::simulate_scan(sm_x, sm_y, cfg)), sm_out);
  });

  // radiomap: synthetic training grid
  auto* radiomap = app.add_subcommand("radiomap", "Generate a radio map over the config grid");
  std::string rm_config, rm_out;
  std::optional<std::uint64_t> rm_seed;
  radiomap->add_option("--config", rm_config, "Simulation config JSON")->required();
  radiomap->add_option("--seed", rm_seed, "Override config seed");
  radiomap->add_option("--out", rm_out, "Output file (default stdout)");
  radiomap->callback([&] {
    auto cfg = qrprox::load_sim_config(rm_config);
    if (rm_seed) cfg.seed = *rm_seed;
    emit(qrprox::to_json(qrprox::sim::generate_radio_map(cfg)), rm_out);
  });

  // accuracy: localization error statistics
  auto* accuracy = app.add_subcommand("accuracy", "Localization error statistics on simulated scans");
  std::string ac_config, ac_map;
  int ac_queries = 500, ac_k = 4, ac_floor = qrprox::kDefaultRssiFloorDbm;
  bool ac_grid = false;
  std::optional<std::uint64_t> ac_seed;
  accuracy->add_option("--config", ac_config, "Simulation config JSON")->required();
  accuracy->add_option("--map", ac_map, "Radio-map file (default: generate from config)");
  accuracy->add_option("--queries", ac_queries, "Random query count")->capture_default_str();
  accuracy->add_flag("--grid", ac_grid, "Query at the grid points instead of random positions");
  accuracy->add_option("--seed", ac_seed, "Override config seed");
  accuracy->add_option("--k", ac_k, "Neighbor count")->capture_default_str();
  accuracy->add_option("--floor", ac_floor, "Missing-RSSI floor, dBm")->capture_default_str();
  accuracy->callback([&] {
    auto cfg = qrprox::load_sim_config(ac_config);
    if (ac_seed) cfg.seed = *ac_seed;
    auto map = ac_map.empty() ? qrprox::sim::generate_radio_map(cfg)
                              : qrprox::load_radio_map(ac_map);
    qrprox::KnnConfig knn{ac_k, ac_floor};
    auto report = ac_grid
        ? qrprox::sim::eval_accuracy_at(map, qrprox::sim::grid_positions(cfg), cfg, knn)
        : qrprox::sim::eval_accuracy(map, ac_queries, cfg, knn);
    emit(qrprox::to_json(report));
  });

  // serve: run the HTTP service
  auto* serve = app.add_subcommand("serve", "Run the proximity HTTP service");
  std::string sv_config, sv_host, sv_store, sv_rules, sv_map, sv_salt;
  int sv_port = -1, sv_ttl = -1;
  bool sv_pseudonymize = false;
  serve->add_option("--config", sv_config, "Service config file (key = value lines)");
  serve->add_option("--host", sv_host, "Bind host");
  serve->add_option("--port", sv_port, "Bind port (0 = ephemeral)");
  serve->add_option("--store", sv_store, "JSONL store file (default: in-memory)");
  serve->add_option("--rules", sv_rules, "Rule text preload");
  serve->add_option("--map", sv_map, "Radio-map preload");
  serve->add_option("--salt", sv_salt, "Pseudonymization salt");
  serve->add_flag("--pseudonymize", sv_pseudonymize, "Hash MAC-shaped user identities");
  serve->add_option("--ttl", sv_ttl, "Context TTL in seconds (0 = none)");
  serve->callback([&] {
    auto cfg = sv_config.empty() ? qrprox::ServiceConfig{}
                                 : qrprox::ServiceConfig::from_file(sv_config);
    if (!sv_host.empty()) cfg.host = sv_host;
    if (sv_port >= 0) cfg.port = sv_port;
    if (!sv_store.empty()) cfg.store_path = sv_store;
    if (!sv_rules.empty()) cfg.rules_path = sv_rules;
    if (!sv_map.empty()) cfg.radiomap_path = sv_map;
    if (!sv_salt.empty()) cfg.salt = sv_salt;
    if (sv_pseudonymize) cfg.pseudonymize = true;
    if (sv_ttl == 0) cfg.context_ttl.reset();
    if (sv_ttl > 0) cfg.context_ttl = std::chrono::seconds(sv_ttl);
    cfg.apply_env();
    cfg.validate();
    std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
    qrprox::ProximityService service(std::move(cfg));
    exit_code = service.run();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qrprox::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
