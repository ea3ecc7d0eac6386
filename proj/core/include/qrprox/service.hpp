#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "qrprox/scan_store.hpp"

namespace qrprox {

/// Service wiring. File format: `key = value` lines, '#' comments.
/// Recognized keys: listen (host:port), store, rules, radiomap, salt,
/// pseudonymize (true/false), knn_k, rssi_floor, context_ttl_seconds.
/// Environment overrides: QRPROX_LISTEN, QRPROX_SALT.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_path;     // empty -> in-memory store
  std::string rules_path;     // optional preload
  std::string radiomap_path;  // optional preload
  std::string salt;
  bool pseudonymize = false;
  int knn_k = 4;
  int rssi_floor = -100;
  std::optional<std::chrono::seconds> context_ttl;

  static ServiceConfig from_file(const std::string& path);
  static ServiceConfig from_text(std::string_view text);
  void apply_env();

  /// Throws InvalidArgument when pseudonymization is on without a salt
  /// or numeric fields are out of range.
  void validate() const;
};

/// JSON-over-HTTP endpoint tying the toolkit together:
///   POST /api/scans                      ingest, returns id + stored-mode URL
///   GET  /api/contexts/{id}              stored event
///   GET  /api/contexts/{id}/params[/{name}]
///   POST /api/evaluate                   {context_id} or {user, aps}
///   GET  /api/evaluate                   inline landing (?ap=..&user=.. or ?context_id=..)
///   POST /api/locate                     {context_id} or {aps}
///   PUT/GET /api/rules                   rule text, atomic swap
///   PUT/GET /api/radiomap                radio-map JSON
/// Error bodies are {"error": code, "detail": text}.
class ProximityService {
public:
  explicit ProximityService(ServiceConfig config, Clock clock = system_clock_utc());
  ~ProximityService();

  ProximityService(const ProximityService&) = delete;
  ProximityService& operator=(const ProximityService&) = delete;

  /// Blocking serve loop on config host:port (CLI path).
  int run();

  /// Background-thread serve for tests; picks a free port when
  /// config.port == 0. Returns the bound port.
  int start();
  void stop();

  int port() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qrprox
