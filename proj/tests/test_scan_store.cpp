#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "oracle_helpers.hpp"
#include "qrprox/error.hpp"
#include "qrprox/json_io.hpp"
#include "qrprox/scan_store.hpp"

using namespace qrprox;
using std::chrono::sys_seconds;

static MacAddress mac(const char* text) { return *MacAddress::parse(text); }

static sys_seconds ts(const char* text) { return parse_rfc3339(text); }

static Fingerprint fp(int rssi = -50) {
  return normalize_fingerprint({{mac("0A-00-00-00-00-01"), std::string("net"), rssi}});
}

static NewScan scan(const char* user, const char* when, int rssi = -50) {
  return {user, ts(when), fp(rssi), "https://e.com/target"};
}

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("qrprox-test-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("ids are sequential decimal strings and never reused") {
  MemoryScanStore store;
  CHECK(store.store_scan(scan("u", "2026-07-01T10:00:00Z")) == "1");
  CHECK(store.store_scan(scan("u", "2026-07-01T10:00:00Z")) == "2");
  CHECK(store.store_scan(scan("v", "2026-07-01T10:00:00Z")) == "3");
  CHECK(store.size() == 3);
}

TEST_CASE("store rejects empty fingerprint and empty user") {
  MemoryScanStore store;
  try {
    store.store_scan({"u", ts("2026-07-01T10:00:00Z"), Fingerprint{}, "https://e.com"});
    FAIL("expected EmptyFingerprint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyFingerprint);
  }
  CHECK_THROWS_AS(store.store_scan({"", ts("2026-07-01T10:00:00Z"), fp(), "https://e.com"}),
                  Error);
  CHECK(store.size() == 0);
}

TEST_CASE("get_context round-trips every field; unknown id raises") {
  MemoryScanStore store;
  NewScan s = scan("A4-0B-CD-12-34-56", "2026-07-03T10:00:00Z", -42);
  std::string id = store.store_scan(s);
  ScanEvent got = store.get_context(id);
  CHECK(got.id == id);
  CHECK(got.user_token == s.user_token);
  CHECK(got.timestamp == s.timestamp);
  CHECK(got.fingerprint == s.fingerprint);
  CHECK(got.target_url == s.target_url);
  try {
    store.get_context("999");
    FAIL("expected UnknownContext");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownContext);
  }
}

TEST_CASE("parameter view exposes scalars plus one name per ap") {
  MemoryScanStore store;
  Fingerprint two = normalize_fingerprint({
      {mac("0A-00-00-00-00-01"), std::string("cafe"), -40},
      {mac("0A-00-00-00-00-02"), std::nullopt, -70},
  });
  std::string id = store.store_scan({"u", ts("2026-07-03T10:00:00Z"), two, "https://e.com"});

  auto names = store.get_parameter_names(id);
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "timestamp");
  CHECK(names[1] == "user_token");
  CHECK(names[2] == "target_url");
  CHECK(names[3] == "ap.0A-00-00-00-00-01");  // strongest first
  CHECK(names[4] == "ap.0A-00-00-00-00-02");

  CHECK(store.get_parameter_values(id, "timestamp") ==
        std::vector<std::string>{"2026-07-03T10:00:00Z"});
  CHECK(store.get_parameter_values(id, "user_token") == std::vector<std::string>{"u"});
  CHECK(store.get_parameter_values(id, "target_url") ==
        std::vector<std::string>{"https://e.com"});
  CHECK(store.get_parameter_values(id, "ap.0A-00-00-00-00-01") ==
        std::vector<std::string>{"-40", "cafe"});
  CHECK(store.get_parameter_values(id, "ap.0A-00-00-00-00-02") ==
        std::vector<std::string>{"-70", ""});
  CHECK(store.get_parameter_values(id, "nonsense").empty());
  CHECK(store.get_parameter_values(id, "ap.0A-00-00-00-00-09").empty());
}

TEST_CASE("count_scans: window filtering and user isolation") {
  MemoryScanStore store;
  store.store_scan(scan("u", "2026-07-03T10:00:00Z"));  // Friday, week of 06-29
  store.store_scan(scan("u", "2026-07-10T10:00:00Z"));
  store.store_scan(scan("u", "2026-07-17T09:00:00Z"));
  store.store_scan(scan("u", "2026-07-17T15:00:00Z"));
  store.store_scan(scan("v", "2026-07-17T12:00:00Z"));  // other user

  sys_seconds now = ts("2026-07-17T18:00:00Z");
  CHECK(store.count_scans("u", TimeInterval::AllTime, now) == 4);
  CHECK(store.count_scans("u", TimeInterval::Day, now) == 2);
  CHECK(store.count_scans("u", TimeInterval::Week, now) == 2);  // week of 07-13
  CHECK(store.count_scans("u", TimeInterval::Month, now) == 4);
  CHECK(store.count_scans("v", TimeInterval::AllTime, now) == 1);
  CHECK(store.count_scans("nobody", TimeInterval::AllTime, now) == 0);
  // All-time dominates every calendar window.
  for (auto interval : {TimeInterval::Day, TimeInterval::Week, TimeInterval::Month}) {
    CHECK(store.count_scans("u", TimeInterval::AllTime, now) >=
          store.count_scans("u", interval, now));
  }
}

TEST_CASE("is_first_scan: strictly-earlier events in the window disqualify") {
  MemoryScanStore store;
  sys_seconds now = ts("2026-07-17T12:00:00Z");
  // Empty history: first for every code.
  for (auto interval : {TimeInterval::AllTime, TimeInterval::Day, TimeInterval::Week,
                        TimeInterval::Month}) {
    CHECK(store.is_first_scan("u", interval, now));
  }
  store.store_scan(scan("u", "2026-07-16T12:00:00Z"));  // yesterday, same week
  CHECK(store.is_first_scan("u", TimeInterval::Day, now));
  CHECK_FALSE(store.is_first_scan("u", TimeInterval::Week, now));
  CHECK_FALSE(store.is_first_scan("u", TimeInterval::Month, now));
  CHECK_FALSE(store.is_first_scan("u", TimeInterval::AllTime, now));
  // An event at exactly `now` (the scan under evaluation) never
  // disqualifies.
  store.store_scan(scan("u", "2026-07-17T12:00:00Z"));
  CHECK(store.is_first_scan("u", TimeInterval::Day, now));
  // A strictly earlier same-day event does.
  store.store_scan(scan("u", "2026-07-17T11:59:59Z"));
  CHECK_FALSE(store.is_first_scan("u", TimeInterval::Day, now));
  // Other users are invisible.
  CHECK(store.is_first_scan("w", TimeInterval::AllTime, now));
}

TEST_CASE("count and first agree with the exhaustive oracle on random logs") {
  std::mt19937_64 rng(20260823);
  for (int log = 0; log < 20; ++log) {
    MemoryScanStore store;
    std::vector<ScanEvent> shadow;
    int n = 50 + static_cast<int>(rng() % 150);
    std::uniform_int_distribution<std::int64_t> instant(1'750'000'000, 1'765'000'000);
    const char* users[] = {"ua", "ub", "uc"};
    for (int i = 0; i < n; ++i) {
      sys_seconds when{std::chrono::seconds(instant(rng))};
      const char* user = users[rng() % 3];
      std::string id = store.store_scan({user, when, fp(), "https://e.com"});
      shadow.push_back({id, user, when, fp(), "https://e.com"});
    }
    for (int probe = 0; probe < 25; ++probe) {
      sys_seconds now{std::chrono::seconds(instant(rng))};
      const char* user = users[rng() % 3];
      for (auto interval : {TimeInterval::AllTime, TimeInterval::Day, TimeInterval::Week,
                            TimeInterval::Month}) {
        CHECK(store.count_scans(user, interval, now) ==
              testutil::oracle_count(shadow, user, interval, now));
        CHECK(store.is_first_scan(user, interval, now) ==
              testutil::oracle_first(shadow, user, interval, now));
      }
    }
  }
}

TEST_CASE("export preserves ingestion order") {
  MemoryScanStore store;
  store.store_scan(scan("u", "2026-07-03T10:00:00Z"));
  store.store_scan(scan("v", "2026-07-01T10:00:00Z"));  // earlier ts, later insert
  auto events = store.export_events();
  REQUIRE(events.size() == 2);
  CHECK(events[0].id == "1");
  CHECK(events[1].id == "2");
}

TEST_CASE("ttl expiry against an injected clock") {
  sys_seconds now = ts("2026-07-17T12:00:00Z");
  StoreOptions opts;
  opts.ttl = std::chrono::seconds(3600);
  opts.clock = [&now] { return now; };
  MemoryScanStore store(opts);
  std::string id = store.store_scan({"u", now, fp(), "https://e.com"});
  CHECK_NOTHROW(store.get_context(id));
  CHECK(store.count_scans("u", TimeInterval::AllTime, now) == 1);

  now += std::chrono::seconds(3600);  // exactly at the limit: still alive
  CHECK_NOTHROW(store.get_context(id));

  now += std::chrono::seconds(1);  // one past: expired everywhere
  CHECK_THROWS_AS(store.get_context(id), Error);
  CHECK(store.count_scans("u", TimeInterval::AllTime, now) == 0);
  CHECK(store.is_first_scan("u", TimeInterval::AllTime, now));
  CHECK(store.size() == 0);
  CHECK(store.export_events().empty());
}

TEST_CASE("file store: events survive reopen and ids continue") {
  TempDir dir;
  std::string path = dir.file("events.jsonl");
  {
    FileScanStore store(path);
    CHECK(store.store_scan(scan("u", "2026-07-03T10:00:00Z", -40)) == "1");
    CHECK(store.store_scan(scan("v", "2026-07-04T10:00:00Z", -60)) == "2");
  }
  {
    FileScanStore store(path);
    CHECK(store.size() == 2);
    ScanEvent got = store.get_context("1");
    CHECK(got.user_token == "u");
    CHECK(got.fingerprint.observations()[0].rssi == -40);
    CHECK(store.store_scan(scan("w", "2026-07-05T10:00:00Z")) == "3");
  }
  FileScanStore store(path);
  CHECK(store.size() == 3);
  CHECK(store.get_context("3").user_token == "w");
}

TEST_CASE("file store: torn final line is dropped and overwritten cleanly") {
  TempDir dir;
  std::string path = dir.file("events.jsonl");
  {
    FileScanStore store(path);
    store.store_scan(scan("u", "2026-07-03T10:00:00Z"));
  }
  {  // simulate a crash mid-append
    std::FILE* f = std::fopen(path.c_str(), "ab");
    REQUIRE(f);
    const char* torn = "{\"id\":\"2\",\"user\":\"v\",\"ts\":\"2026-07-0";
    std::fwrite(torn, 1, std::strlen(torn), f);
    std::fclose(f);
  }
  {
    FileScanStore store(path);
    CHECK(store.size() == 1);  // torn record ignored
    CHECK(store.store_scan(scan("w", "2026-07-05T10:00:00Z")) == "2");
  }
  // The store written after the torn line must replay cleanly.
  FileScanStore store(path);
  CHECK(store.size() == 2);
  CHECK(store.get_context("2").user_token == "w");
}

TEST_CASE("file store: interior corruption is an explicit error") {
  TempDir dir;
  std::string path = dir.file("events.jsonl");
  {
    FileScanStore store(path);
    store.store_scan(scan("u", "2026-07-03T10:00:00Z"));
    store.store_scan(scan("v", "2026-07-04T10:00:00Z"));
  }
  // Clobber the first line, keeping its length and the line structure.
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fputs("###garbage", f);
    std::fclose(f);
  }
  try {
    FileScanStore store(path);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);  // line number
  }
}

TEST_CASE("file store: concurrent writers get unique ids and a consistent file") {
  TempDir dir;
  std::string path = dir.file("events.jsonl");
  constexpr int kThreads = 4;
  constexpr int kPerThread = 25;
  {
    FileScanStore store(path);
    std::vector<std::thread> threads;
    std::vector<std::vector<std::string>> ids(kThreads);
    for (int t = 0; t < kThreads; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < kPerThread; ++i) {
          ids[t].push_back(store.store_scan(scan("u", "2026-07-03T10:00:00Z")));
        }
      });
    }
    for (auto& th : threads) th.join();
    std::set<std::string> unique;
    for (const auto& batch : ids) unique.insert(batch.begin(), batch.end());
    CHECK(unique.size() == kThreads * kPerThread);
    CHECK(store.size() == kThreads * kPerThread);
  }
  FileScanStore reopened(path);
  CHECK(reopened.size() == kThreads * kPerThread);
}

TEST_CASE("readers see consistent events while a writer appends") {
  MemoryScanStore store;
  std::atomic<bool> stop{false};
  std::thread writer([&] {
    for (int i = 0; i < 500; ++i) {
      store.store_scan(scan("u", "2026-07-03T10:00:00Z"));
    }
    stop = true;
  });
  // Every event a reader can observe must be fully formed.
  while (!stop) {
    for (const ScanEvent& e : store.export_events()) {
      REQUIRE(e.user_token == "u");
      REQUIRE_FALSE(e.fingerprint.empty());
    }
  }
  writer.join();
  CHECK(store.size() == 500);
}
