#include "qrprox/scan_store.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <string>

#include "qrprox/error.hpp"
#include "qrprox/json_io.hpp"

namespace qrprox {

using namespace std::chrono;

Clock system_clock_utc() {
  return [] { return time_point_cast<seconds>(system_clock::now()); };
}

ScanStore::ScanStore(StoreOptions options) : options_(std::move(options)) {}

bool ScanStore::expired(const ScanEvent& event) const {
  if (!options_.ttl) return false;
  return event.timestamp + *options_.ttl < options_.clock();
}

const ScanEvent* ScanStore::find_locked(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return nullptr;
  const ScanEvent& event = events_[it->second];
  if (expired(event)) return nullptr;
  return &event;
}

std::string ScanStore::store_scan(const NewScan& scan) {
  if (scan.fingerprint.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, "refusing to store a scan with no access points");
  }
  if (scan.user_token.empty()) {
    throw Error(ErrorCode::InvalidArgument, "user token is empty");
  }
  std::unique_lock lock(mutex_);
  ScanEvent event{std::to_string(next_id_++), scan.user_token, scan.timestamp, scan.fingerprint,
                  scan.target_url};
  persist_event(event);  // durable before the id escapes
  by_id_.emplace(event.id, events_.size());
  events_.push_back(std::move(event));
  return events_.back().id;
}

ScanEvent ScanStore::get_context(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const ScanEvent* event = find_locked(id);
  if (!event) {
    throw Error(ErrorCode::UnknownContext, "no stored context with id '" + id + "'");
  }
  return *event;
}

std::vector<std::string> ScanStore::get_parameter_names(const std::string& id) const {
  ScanEvent event = get_context(id);
  std::vector<std::string> names = {"timestamp", "user_token", "target_url"};
  names.reserve(3 + event.fingerprint.size());
  for (const ApObservation& obs : event.fingerprint.observations()) {
    names.push_back("ap." + obs.bssid.to_string());
  }
  return names;
}

std::vector<std::string> ScanStore::get_parameter_values(const std::string& id,
                                                         std::string_view name) const {
  ScanEvent event = get_context(id);
  if (name == "timestamp") return {format_rfc3339(event.timestamp)};
  if (name == "user_token") return {event.user_token};
  if (name == "target_url") return {event.target_url};
  if (name.starts_with("ap.")) {
    if (auto mac = MacAddress::parse(name.substr(3))) {
      if (const ApObservation* obs = event.fingerprint.find(*mac)) {
        return {std::to_string(obs->rssi), obs->ssid.value_or("")};
      }
    }
  }
  return {};  // unknown name: absent = empty, like missing HTTP parameters
}

std::int64_t ScanStore::count_scans(const std::string& user_token, TimeInterval interval,
                                    sys_seconds now) const {
  std::shared_lock lock(mutex_);
  std::int64_t count = 0;
  for (const ScanEvent& event : events_) {
    if (event.user_token != user_token || expired(event)) continue;
    if (same_window(event.timestamp, now, interval)) ++count;
  }
  return count;
}

bool ScanStore::is_first_scan(const std::string& user_token, TimeInterval interval,
                              sys_seconds now) const {
  std::shared_lock lock(mutex_);
  for (const ScanEvent& event : events_) {
    if (event.user_token != user_token || expired(event)) continue;
    if (event.timestamp < now && same_window(event.timestamp, now, interval)) return false;
  }
  return true;
}

std::size_t ScanStore::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const ScanEvent& event : events_) {
    if (!expired(event)) ++n;
  }
  return n;
}

std::vector<ScanEvent> ScanStore::export_events() const {
  std::shared_lock lock(mutex_);
  std::vector<ScanEvent> out;
  out.reserve(events_.size());
  for (const ScanEvent& event : events_) {
    if (!expired(event)) out.push_back(event);
  }
  return out;
}

void ScanStore::load_event(ScanEvent event) {
  // Restore path: no lock contention possible (runs from the backend
  // constructor), ids must stay unique for the store lifetime.
  if (by_id_.contains(event.id)) {
    throw Error(ErrorCode::InvalidArgument, "duplicate event id in backing file: " + event.id);
  }
  char* end = nullptr;
  errno = 0;
  unsigned long long numeric = std::strtoull(event.id.c_str(), &end, 10);
  if (errno == 0 && end && *end == '\0' && numeric >= next_id_) next_id_ = numeric + 1;
  by_id_.emplace(event.id, events_.size());
  events_.push_back(std::move(event));
}

FileScanStore::FileScanStore(const std::string& path, StoreOptions options)
    : ScanStore(std::move(options)) {
  // Replay the journal, then keep the handle open for appends.
  if (std::FILE* existing = std::fopen(path.c_str(), "rb")) {
    std::string line;
    int c;
    std::size_t line_no = 0;
    std::size_t pos = 0;        // bytes consumed so far
    std::size_t valid_end = 0;  // end of the last complete line
    while ((c = std::fgetc(existing)) != EOF) {
      ++pos;
      if (c == '\n') {
        ++line_no;
        valid_end = pos;
        if (!line.empty()) {
          try {
            load_event(scan_event_from_json(parse_json(line, "stored event")));
          } catch (const Error&) {
            std::fclose(existing);
            throw Error(ErrorCode::IoError,
                        path + ":" + std::to_string(line_no) + ": corrupt event record");
          }
          line.clear();
        }
      } else {
        line += static_cast<char>(c);
      }
    }
    std::fclose(existing);
    // A final line without '\n' is a torn append from a crash. Cut it off
    // before reopening for append, or the next event would be welded onto
    // the fragment and corrupt the journal for good.
    if (pos > valid_end && ::truncate(path.c_str(), static_cast<off_t>(valid_end)) != 0) {
      throw Error(ErrorCode::IoError,
                  "cannot drop torn record from " + path + ": " + std::strerror(errno));
    }
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) {
    throw Error(ErrorCode::IoError, "cannot open store file for append: " + path + ": " +
                                        std::strerror(errno));
  }
}

FileScanStore::~FileScanStore() {
  if (file_) std::fclose(file_);
}

void FileScanStore::persist_event(const ScanEvent& event) {
  std::string line = to_json(event).dump();
  line += '\n';
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
    throw Error(ErrorCode::IoError, std::string("store append failed: ") + std::strerror(errno));
  }
}

}  // namespace qrprox
