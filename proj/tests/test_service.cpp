#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "qrprox/error.hpp"
#include "qrprox/json_io.hpp"
#include "qrprox/pseudonym.hpp"
#include "qrprox/service.hpp"
#include "qrprox/time_window.hpp"

using namespace qrprox;
using nlohmann::json;
using std::chrono::sys_seconds;

static MacAddress mac(const char* text) { return *MacAddress::parse(text); }

static sys_seconds ts(const char* text) { return parse_rfc3339(text); }

namespace {

constexpr const char* kNow = "2026-07-28T12:00:00Z";

constexpr const char* kRules =
    "IF COUNTER(0) >= 1 THEN { welcome }\n"
    "IF VISIBLE(AA-00-00-00-00-01) AND RSSI(AA-00-00-00-00-01) > -60 THEN { near the desk }\n";

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("qrprox-svc-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

/// Service on an ephemeral port plus a client bound to it. The clock is
/// a shared atomic so tests can move time while the server is serving.
struct LiveService {
  std::shared_ptr<std::atomic<std::int64_t>> now;
  ProximityService service;
  int port;
  httplib::Client client;

  explicit LiveService(ServiceConfig cfg, const char* start_at = kNow)
      : now(std::make_shared<std::atomic<std::int64_t>>(
            ts(start_at).time_since_epoch().count())),
        service([&cfg] { cfg.port = 0; return std::move(cfg); }(),
                [shared = now] {
                  return sys_seconds(std::chrono::seconds(shared->load()));
                }),
        port(service.start()),
        client("127.0.0.1", port) {}

  void advance(std::int64_t seconds) { now->fetch_add(seconds); }
};

json body_of(const httplib::Result& res) {
  REQUIRE(res);
  return json::parse(res->body);
}

json scan_request(const char* user, int rssi_1 = -52, int rssi_2 = -70) {
  return json{{"user", user},
              {"url", "https://shop.example/offer"},
              {"aps", json::array({
                          json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", rssi_1}},
                          json{{"bssid", "AA-00-00-00-00-02"}, {"ssid", "cafe"}, {"rssi", rssi_2}},
                      })}};
}

void put_rules(LiveService& s, const char* text = kRules) {
  auto res = s.client.Put("/api/rules", text, "text/plain");
  REQUIRE(res);
  REQUIRE(res->status == 200);
}

}  // namespace

TEST_CASE("service: scan ingest, context lookup, and evaluation end to end") {
  LiveService s{ServiceConfig{}};
  put_rules(s);

  auto posted = s.client.Post("/api/scans", scan_request("alice").dump(), "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 201);
  json created = json::parse(posted->body);
  CHECK(created["context_id"] == "1");
  CHECK(created["augmented_url"] == "https://shop.example/offer?context_id=1");

  json event = body_of(s.client.Get("/api/contexts/1"));
  CHECK(event["id"] == "1");
  CHECK(event["user"] == "alice");
  CHECK(event["ts"] == kNow);
  CHECK(event["url"] == "https://shop.example/offer");
  REQUIRE(event["aps"].size() == 2);
  CHECK(event["aps"][0]["bssid"] == "AA-00-00-00-00-01");  // strongest first
  CHECK(event["aps"][0]["rssi"] == -52);
  CHECK(event["aps"][1]["ssid"] == "cafe");

  json names = body_of(s.client.Get("/api/contexts/1/params"));
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "timestamp");
  CHECK(names[1] == "user_token");
  CHECK(names[2] == "target_url");
  CHECK(names[3] == "ap.AA-00-00-00-00-01");
  CHECK(names[4] == "ap.AA-00-00-00-00-02");

  CHECK(body_of(s.client.Get("/api/contexts/1/params/user_token")) == json({"alice"}));
  CHECK(body_of(s.client.Get("/api/contexts/1/params/ap.AA-00-00-00-00-02")) ==
        json({"-70", "cafe"}));
  CHECK(body_of(s.client.Get("/api/contexts/1/params/no_such_param")) == json::array());

  json actions = body_of(
      s.client.Post("/api/evaluate", json{{"context_id", "1"}}.dump(), "application/json"));
  CHECK(actions == json{{"actions", {"welcome", "near the desk"}}});

  // Inline evaluation: counts see alice's stored scan, the weak live
  // fingerprint misses the RSSI rule, and nothing new is stored.
  json inline_req{{"user", "alice"},
                  {"aps", json::array({json{{"bssid", "AA-00-00-00-00-03"}, {"rssi", -40}}})}};
  json inline_actions =
      body_of(s.client.Post("/api/evaluate", inline_req.dump(), "application/json"));
  CHECK(inline_actions == json{{"actions", {"welcome"}}});
  auto missing = s.client.Get("/api/contexts/2");
  REQUIRE(missing);
  CHECK(missing->status == 404);
}

TEST_CASE("service: GET evaluate serves landing-page URLs directly") {
  LiveService s{ServiceConfig{}};
  put_rules(s);
  auto posted = s.client.Post("/api/scans", scan_request("alice").dump(), "application/json");
  REQUIRE(posted);
  REQUIRE(posted->status == 201);

  json stored = body_of(s.client.Get("/api/evaluate?context_id=1"));
  CHECK(stored == json{{"actions", {"welcome", "near the desk"}}});

  json inline_hit = body_of(s.client.Get("/api/evaluate?ap=AA-00-00-00-00-01:-50&user=bob"));
  CHECK(inline_hit == json{{"actions", {"near the desk"}}});  // bob has no history

  auto no_user = s.client.Get("/api/evaluate?ap=AA-00-00-00-00-01:-50");
  REQUIRE(no_user);
  CHECK(no_user->status == 400);
  CHECK(json::parse(no_user->body)["error"] == "InvalidArgument");

  auto pseudonymized = s.client.Get("/api/evaluate?ap=0123456789abcdef:-50&user=bob");
  REQUIRE(pseudonymized);
  CHECK(pseudonymized->status == 400);
  CHECK(json::parse(pseudonymized->body)["error"] == "MalformedApParam");

  auto bare = s.client.Get("/api/evaluate");
  REQUIRE(bare);
  CHECK(bare->status == 400);
  CHECK(json::parse(bare->body)["error"] == "NoContext");

  auto both = s.client.Get("/api/evaluate?ap=AA-00-00-00-00-01:-50&context_id=1&user=bob");
  REQUIRE(both);
  CHECK(both->status == 409);
  CHECK(json::parse(both->body)["error"] == "AmbiguousContext");
}

TEST_CASE("service: error taxonomy maps onto HTTP statuses") {
  LiveService s{ServiceConfig{}};

  auto unknown = s.client.Get("/api/contexts/999");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
  json body = json::parse(unknown->body);
  CHECK(body["error"] == "UnknownContext");
  CHECK(body.contains("detail"));

  auto not_a_url = s.client.Post(
      "/api/scans",
      json{{"user", "u"}, {"url", "ftp://x"}, {"aps", json::array()}}.dump(),
      "application/json");
  REQUIRE(not_a_url);
  CHECK(not_a_url->status == 400);
  CHECK(json::parse(not_a_url->body)["error"] == "NotAUrl");

  auto bad_json = s.client.Post("/api/scans", "{not json", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);
  CHECK(json::parse(bad_json->body)["error"] == "InvalidArgument");

  auto ambiguous = s.client.Post(
      "/api/evaluate", json{{"context_id", "1"}, {"aps", json::array()}}.dump(),
      "application/json");
  REQUIRE(ambiguous);
  CHECK(ambiguous->status == 409);

  auto neither = s.client.Post("/api/evaluate", "{}", "application/json");
  REQUIRE(neither);
  CHECK(neither->status == 400);
  CHECK(json::parse(neither->body)["error"] == "NoContext");

  auto empty_map = s.client.Post(
      "/api/locate",
      json{{"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -40}}})}}.dump(),
      "application/json");
  REQUIRE(empty_map);
  CHECK(empty_map->status == 422);
  CHECK(json::parse(empty_map->body)["error"] == "EmptyRadioMap");

  auto bad_interval = s.client.Put("/api/rules", "IF COUNTER(7) > 1 THEN { x }", "text/plain");
  REQUIRE(bad_interval);
  CHECK(bad_interval->status == 422);
  CHECK(json::parse(bad_interval->body)["error"] == "InvalidInterval");
}

TEST_CASE("service: a rejected rule update leaves the old rules serving") {
  LiveService s{ServiceConfig{}};
  put_rules(s, "IF TRUE THEN { always }\n");

  auto rejected = s.client.Put("/api/rules", "IF AND THEN { broken }", "text/plain");
  REQUIRE(rejected);
  CHECK(rejected->status == 422);
  CHECK(json::parse(rejected->body)["error"] == "ParseError");

  auto current = s.client.Get("/api/rules");
  REQUIRE(current);
  CHECK(current->status == 200);
  CHECK(current->body == "IF TRUE THEN { always }\n");

  json actions = body_of(s.client.Post(
      "/api/evaluate",
      json{{"user", "u"},
           {"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -40}}})}}
          .dump(),
      "application/json"));
  CHECK(actions == json{{"actions", {"always"}}});
}

TEST_CASE("service: radio map upload, retrieval, and locate") {
  ServiceConfig cfg;
  cfg.knn_k = 1;
  LiveService s{std::move(cfg)};

  json map = json::array(
      {json{{"lat", 10.0},
            {"lon", 20.0},
            {"label", "desk"},
            {"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -40}}})}},
       json{{"lat", 30.0},
            {"lon", 40.0},
            {"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -80}}})}}});
  auto put = s.client.Put("/api/radiomap", map.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(json::parse(put->body) == json{{"entry_count", 2}});

  json round = body_of(s.client.Get("/api/radiomap"));
  REQUIRE(round.size() == 2);
  CHECK(round[0]["label"] == "desk");
  CHECK(round[1]["lat"] == 30.0);

  json located = body_of(s.client.Post(
      "/api/locate",
      json{{"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -42}}})}}.dump(),
      "application/json"));
  CHECK(located["lat"] == 10.0);
  CHECK(located["lon"] == 20.0);
  REQUIRE(located["neighbors"].size() == 1);
  CHECK(located["neighbors"][0]["label"] == "desk");
  CHECK(located["neighbors"][0]["distance"] == 2.0);

  // Locate by stored context id uses the stored fingerprint.
  auto posted = s.client.Post(
      "/api/scans",
      json{{"user", "u"},
           {"url", "https://e.com/x"},
           {"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -78}}})}}
          .dump(),
      "application/json");
  REQUIRE(posted);
  REQUIRE(posted->status == 201);
  json by_ctx = body_of(s.client.Post("/api/locate", json{{"context_id", "1"}}.dump(),
                                      "application/json"));
  CHECK(by_ctx["lat"] == 30.0);
  CHECK(by_ctx["lon"] == 40.0);
}

TEST_CASE("service: pseudonymization hashes MAC-shaped users at the door") {
  ServiceConfig cfg;
  cfg.pseudonymize = true;
  cfg.salt = "test-salt";
  LiveService s{std::move(cfg)};
  put_rules(s, "IF COUNTER(0) >= 1 THEN { welcome }\n");

  auto posted =
      s.client.Post("/api/scans", scan_request("aa:bb:cc:dd:ee:ff").dump(), "application/json");
  REQUIRE(posted);
  REQUIRE(posted->status == 201);

  json event = body_of(s.client.Get("/api/contexts/1"));
  CHECK(event["user"] == "c72ec0bd6ba1066d");  // HMAC(salt, MAC), first 8 bytes hex
  CHECK(event["user"] == pseudonymize_mac(mac("AA-BB-CC-DD-EE-FF"), "test-salt"));

  // The same MAC in any spelling resolves to the same history bucket.
  json inline_req{{"user", "AA-BB-CC-DD-EE-FF"},
                  {"aps", json::array({json{{"bssid", "AA-00-00-00-00-09"}, {"rssi", -40}}})}};
  json actions = body_of(s.client.Post("/api/evaluate", inline_req.dump(), "application/json"));
  CHECK(actions == json{{"actions", {"welcome"}}});

  // Non-MAC identities are already opaque tokens and pass through.
  auto other = s.client.Post("/api/scans", scan_request("alice").dump(), "application/json");
  REQUIRE(other);
  json event2 = body_of(s.client.Get("/api/contexts/2"));
  CHECK(event2["user"] == "alice");
}

TEST_CASE("service: context TTL against the injected clock") {
  ServiceConfig cfg;
  cfg.context_ttl = std::chrono::seconds(3600);
  LiveService s{std::move(cfg)};

  auto posted = s.client.Post("/api/scans", scan_request("u").dump(), "application/json");
  REQUIRE(posted);
  REQUIRE(posted->status == 201);

  auto fresh = s.client.Get("/api/contexts/1");
  REQUIRE(fresh);
  CHECK(fresh->status == 200);

  s.advance(3600);  // exactly ttl old: still alive
  auto boundary = s.client.Get("/api/contexts/1");
  REQUIRE(boundary);
  CHECK(boundary->status == 200);

  s.advance(1);  // one second past ttl: gone
  auto expired = s.client.Get("/api/contexts/1");
  REQUIRE(expired);
  CHECK(expired->status == 404);
}

TEST_CASE("service: scan timestamps can be supplied by the client") {
  LiveService s{ServiceConfig{}};
  json req = scan_request("u");
  req["ts"] = "2026-07-03T08:15:00Z";
  auto posted = s.client.Post("/api/scans", req.dump(), "application/json");
  REQUIRE(posted);
  REQUIRE(posted->status == 201);
  json event = body_of(s.client.Get("/api/contexts/1"));
  CHECK(event["ts"] == "2026-07-03T08:15:00Z");
}

TEST_CASE("service: file-backed store survives a restart") {
  TempDir dir;
  ServiceConfig cfg;
  cfg.store_path = dir.file("events.jsonl");
  {
    LiveService s{cfg};
    auto a = s.client.Post("/api/scans", scan_request("u").dump(), "application/json");
    auto b = s.client.Post("/api/scans", scan_request("v").dump(), "application/json");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(json::parse(a->body)["context_id"] == "1");
    CHECK(json::parse(b->body)["context_id"] == "2");
  }
  LiveService again{cfg};
  json event = body_of(again.client.Get("/api/contexts/2"));
  CHECK(event["user"] == "v");
  auto next = again.client.Post("/api/scans", scan_request("w").dump(), "application/json");
  REQUIRE(next);
  CHECK(json::parse(next->body)["context_id"] == "3");  // ids continue, never reused
}

TEST_CASE("service: rules and radio map preload from files, failing fast") {
  TempDir dir;
  write_text_file(dir.file("rules.txt"), "IF TRUE THEN { preloaded }\n");
  json map = json::array(
      {json{{"lat", 1.0},
            {"lon", 2.0},
            {"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -40}}})}}});
  write_text_file(dir.file("map.json"), map.dump());

  ServiceConfig cfg;
  cfg.rules_path = dir.file("rules.txt");
  cfg.radiomap_path = dir.file("map.json");
  cfg.knn_k = 1;
  LiveService s{std::move(cfg)};

  auto rules = s.client.Get("/api/rules");
  REQUIRE(rules);
  CHECK(rules->body == "IF TRUE THEN { preloaded }\n");

  json located = body_of(s.client.Post(
      "/api/locate",
      json{{"aps", json::array({json{{"bssid", "AA-00-00-00-00-01"}, {"rssi", -40}}})}}.dump(),
      "application/json"));
  CHECK(located["lat"] == 1.0);

  write_text_file(dir.file("broken.txt"), "IF THEN {}");
  ServiceConfig broken;
  broken.rules_path = dir.file("broken.txt");
  CHECK_THROWS_AS(ProximityService(std::move(broken)), Error);

  write_text_file(dir.file("broken.json"), "[{\"lat\": oops");
  ServiceConfig broken2;
  broken2.radiomap_path = dir.file("broken.json");
  CHECK_THROWS_AS(ProximityService(std::move(broken2)), Error);
}

TEST_CASE("service config: parsing, defaults, and rejects") {
  ServiceConfig cfg = ServiceConfig::from_text(
      "# deployment\n"
      "listen = 0.0.0.0:9090\n"
      "store = /var/lib/qrprox/events.jsonl\n"
      "rules = rules.txt\n"
      "radiomap = map.json\n"
      "salt = s3cret\n"
      "pseudonymize = true\n"
      "knn_k = 6\n"
      "rssi_floor = -95\n"
      "context_ttl_seconds = 120\n"
      "\n");
  CHECK(cfg.host == "0.0.0.0");
  CHECK(cfg.port == 9090);
  CHECK(cfg.store_path == "/var/lib/qrprox/events.jsonl");
  CHECK(cfg.rules_path == "rules.txt");
  CHECK(cfg.radiomap_path == "map.json");
  CHECK(cfg.salt == "s3cret");
  CHECK(cfg.pseudonymize);
  CHECK(cfg.knn_k == 6);
  CHECK(cfg.rssi_floor == -95);
  REQUIRE(cfg.context_ttl.has_value());
  CHECK(cfg.context_ttl->count() == 120);
  CHECK_NOTHROW(cfg.validate());

  ServiceConfig defaults = ServiceConfig::from_text("");
  CHECK(defaults.host == "127.0.0.1");
  CHECK(defaults.port == 8080);
  CHECK_FALSE(defaults.pseudonymize);
  CHECK_FALSE(defaults.context_ttl.has_value());

  // ttl 0 means "no expiry", clearing any earlier setting
  ServiceConfig no_ttl =
      ServiceConfig::from_text("context_ttl_seconds = 60\ncontext_ttl_seconds = 0\n");
  CHECK_FALSE(no_ttl.context_ttl.has_value());

  // the last colon splits host from port, so IPv6-ish hosts work
  ServiceConfig v6 = ServiceConfig::from_text("listen = ::1:8080\n");
  CHECK(v6.host == "::1");
  CHECK(v6.port == 8080);

  auto rejects = [](const char* text) {
    CHECK_THROWS_AS(ServiceConfig::from_text(text), Error);
  };
  rejects("volume = 11\n");              // unknown key
  rejects("listen 0.0.0.0:80\n");        // missing '='
  rejects("listen = 8080\n");            // no host
  rejects("listen = 0.0.0.0:70000\n");   // port out of range
  rejects("listen = 0.0.0.0:http\n");    // non-numeric port
  rejects("pseudonymize = maybe\n");
  rejects("knn_k = four\n");
  rejects("context_ttl_seconds = -5\n");

  try {
    ServiceConfig::from_text("listen = 127.0.0.1:80\nvolume = 11\n");
    FAIL("expected unknown-key error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(e.detail().find("volume") != std::string::npos);
    CHECK(e.detail().find("2") != std::string::npos);  // line number
  }
}

TEST_CASE("service config: validation limits") {
  ServiceConfig cfg;
  cfg.knn_k = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  ServiceConfig floor;
  floor.rssi_floor = -89;
  CHECK_THROWS_AS(floor.validate(), Error);

  ServiceConfig salted;
  salted.pseudonymize = true;
  try {
    salted.validate();
    FAIL("expected MissingSalt");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSalt);
  }
  salted.salt = "s";
  CHECK_NOTHROW(salted.validate());

  ServiceConfig port;
  port.port = 65536;
  CHECK_THROWS_AS(port.validate(), Error);
}

TEST_CASE("service config: environment overrides") {
  ::unsetenv("QRPROX_LISTEN");
  ::unsetenv("QRPROX_SALT");
  ServiceConfig untouched = ServiceConfig::from_text("listen = 10.0.0.1:81\nsalt = file\n");
  untouched.apply_env();
  CHECK(untouched.host == "10.0.0.1");
  CHECK(untouched.port == 81);
  CHECK(untouched.salt == "file");

  ::setenv("QRPROX_LISTEN", "127.0.0.1:7777", 1);
  ::setenv("QRPROX_SALT", "envsalt", 1);
  ServiceConfig overridden = ServiceConfig::from_text("listen = 10.0.0.1:81\nsalt = file\n");
  overridden.apply_env();
  CHECK(overridden.host == "127.0.0.1");
  CHECK(overridden.port == 7777);
  CHECK(overridden.salt == "envsalt");
  ::unsetenv("QRPROX_LISTEN");
  ::unsetenv("QRPROX_SALT");
}
