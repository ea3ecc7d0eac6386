#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrprox/fingerprint.hpp"
#include "qrprox/time_window.hpp"

namespace qrprox {

/// One stored context record.
struct ScanEvent {
  std::string id;
  std::string user_token;
  std::chrono::sys_seconds timestamp;
  Fingerprint fingerprint;
  std::string target_url;

  bool operator==(const ScanEvent&) const = default;
};

/// A scan as submitted, before the store assigns its id.
struct NewScan {
  std::string user_token;
  std::chrono::sys_seconds timestamp;
  Fingerprint fingerprint;
  std::string target_url;
};

using Clock = std::function<std::chrono::sys_seconds()>;

Clock system_clock_utc();

struct StoreOptions {
  /// Events older than ttl (against the store clock) resolve as unknown.
  std::optional<std::chrono::seconds> ttl;
  /// Injectable for deterministic expiry tests; defaults to the system
  /// clock. Only consulted when ttl is set.
  Clock clock = system_clock_utc();
};

/// Centralized scan-event persistence plus the behavioral queries behind
/// the COUNTER/FIRST built-ins. Writes are serialized internally; reads
/// may run concurrently and always see fully-written events.
class ScanStore {
public:
  explicit ScanStore(StoreOptions options = {});
  virtual ~ScanStore() = default;

  ScanStore(const ScanStore&) = delete;
  ScanStore& operator=(const ScanStore&) = delete;

  /// Assigns a fresh id, persists durably, returns the id.
  /// Throws EmptyFingerprint / InvalidArgument(empty user token).
  std::string store_scan(const NewScan& scan);

  /// Throws UnknownContext for never-issued or expired ids.
  ScanEvent get_context(const std::string& id) const;

  /// Flat parameter view of a stored context: "timestamp", "user_token",
  /// "target_url", then one "ap.<BSSID>" per observation.
  std::vector<std::string> get_parameter_names(const std::string& id) const;

  /// "ap.<BSSID>" -> {rssi, ssid-or-empty}; scalars -> one element;
  /// unknown name -> empty list.
  std::vector<std::string> get_parameter_values(const std::string& id,
                                                std::string_view name) const;

  /// Number of events for user_token inside the calendar window of `now`.
  std::int64_t count_scans(const std::string& user_token, TimeInterval interval,
                           std::chrono::sys_seconds now) const;

  /// True iff no event for user_token is strictly earlier than `now`
  /// within the same window. The scan being evaluated is assumed stored
  /// at `now` and never disqualifies itself.
  bool is_first_scan(const std::string& user_token, TimeInterval interval,
                     std::chrono::sys_seconds now) const;

  std::size_t size() const;

  /// Snapshot of all live (unexpired) events in ingestion order.
  std::vector<ScanEvent> export_events() const;

protected:
  /// Durability hook; runs under the write lock. Must not return until
  /// the event would survive a process restart.
  virtual void persist_event(const ScanEvent& /*event*/) {}

  void load_event(ScanEvent event);  // backend restore path, no persist

private:
  bool expired(const ScanEvent& event) const;
  const ScanEvent* find_locked(const std::string& id) const;

  mutable std::shared_mutex mutex_;
  std::vector<ScanEvent> events_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::uint64_t next_id_ = 1;
  StoreOptions options_;
};

class MemoryScanStore final : public ScanStore {
public:
  explicit MemoryScanStore(StoreOptions options = {}) : ScanStore(std::move(options)) {}
};

/// Append-only JSONL file backend, one event object per line. store_scan
/// returns only after the line is flushed and fsynced. A torn final line
/// (crash mid-append) is dropped on reopen; corruption anywhere else is
/// an error.
class FileScanStore final : public ScanStore {
public:
  explicit FileScanStore(const std::string& path, StoreOptions options = {});
  ~FileScanStore() override;

protected:
  void persist_event(const ScanEvent& event) override;

private:
  std::FILE* file_ = nullptr;
};

}  // namespace qrprox
