#include "qrprox/service.hpp"

#include <cstdlib>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "qrprox/error.hpp"
#include "qrprox/json_io.hpp"
#include "qrprox/mac.hpp"
#include "qrprox/pseudonym.hpp"
#include "qrprox/qr_context.hpp"
#include "qrprox/radio_map.hpp"
#include "qrprox/rules.hpp"
#include "qrprox/time_window.hpp"

namespace qrprox {
namespace {

using nlohmann::json;

std::string trim_copy(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& value, const std::string& what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, what + " must be an integer, got '" + value + "'");
  }
}

void parse_listen(const std::string& value, ServiceConfig& cfg) {
  std::size_t colon = value.rfind(':');
  if (colon == std::string::npos || colon == 0)
    throw Error(ErrorCode::InvalidArgument, "listen must be host:port, got '" + value + "'");
  int port = to_int(value.substr(colon + 1), "listen port");
  if (port < 0 || port > 65535)
    throw Error(ErrorCode::InvalidArgument, "listen port out of range: " + std::to_string(port));
  cfg.host = value.substr(0, colon);
  cfg.port = port;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownContext: return 404;
    case ErrorCode::AmbiguousContext: return 409;
    case ErrorCode::ParseError:
    case ErrorCode::InvalidInterval:
    case ErrorCode::EmptyRadioMap: return 422;
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

void set_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::string get_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("missing or non-string field '") + key + "'");
  return it->get<std::string>();
}

/// Rule text plus its parse, swapped as one unit so a failed update can
/// never leave the two out of sync.
struct RuleSet {
  std::string text;
  std::vector<rules::Rule> parsed;
};

}  // namespace

ServiceConfig ServiceConfig::from_text(std::string_view text) {
  ServiceConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim_copy(raw);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim_copy(std::string_view(line).substr(0, eq));
    std::string value = trim_copy(std::string_view(line).substr(eq + 1));
    if (key == "listen") {
      parse_listen(value, cfg);
    } else if (key == "store") {
      cfg.store_path = value;
    } else if (key == "rules") {
      cfg.rules_path = value;
    } else if (key == "radiomap") {
      cfg.radiomap_path = value;
    } else if (key == "salt") {
      cfg.salt = value;
    } else if (key == "pseudonymize") {
      if (value == "true" || value == "1") cfg.pseudonymize = true;
      else if (value == "false" || value == "0") cfg.pseudonymize = false;
      else
        throw Error(ErrorCode::InvalidArgument,
                    "pseudonymize must be true or false, got '" + value + "'");
    } else if (key == "knn_k") {
      cfg.knn_k = to_int(value, "knn_k");
    } else if (key == "rssi_floor") {
      cfg.rssi_floor = to_int(value, "rssi_floor");
    } else if (key == "context_ttl_seconds") {
      int ttl = to_int(value, "context_ttl_seconds");
      if (ttl < 0)
        throw Error(ErrorCode::InvalidArgument, "context_ttl_seconds must be >= 0");
      if (ttl == 0) cfg.context_ttl.reset();
      else cfg.context_ttl = std::chrono::seconds(ttl);
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  "unknown config key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }
  return cfg;
}

ServiceConfig ServiceConfig::from_file(const std::string& path) {
  return from_text(read_text_file(path));
}

void ServiceConfig::apply_env() {
  if (const char* listen = std::getenv("QRPROX_LISTEN")) parse_listen(listen, *this);
  if (const char* s = std::getenv("QRPROX_SALT")) salt = s;
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535)
    throw Error(ErrorCode::InvalidArgument, "port out of range: " + std::to_string(port));
  if (knn_k < 1)
    throw Error(ErrorCode::InvalidArgument, "knn_k must be >= 1, got " + std::to_string(knn_k));
  if (rssi_floor > -90)
    throw Error(ErrorCode::InvalidArgument,
                "rssi_floor must be <= -90 dBm, got " + std::to_string(rssi_floor));
  if (pseudonymize && salt.empty())
    throw Error(ErrorCode::MissingSalt, "pseudonymization enabled without a salt");
}

struct ProximityService::Impl {
  ServiceConfig config;
  Clock clock;
  std::unique_ptr<ScanStore> store;

  mutable std::shared_mutex swap_mutex;
  std::shared_ptr<const RuleSet> rule_set = std::make_shared<const RuleSet>();
  std::shared_ptr<const std::vector<RadioMapEntry>> radio_map =
      std::make_shared<const std::vector<RadioMapEntry>>();

  httplib::Server server;
  std::thread serve_thread;
  int bound_port = 0;

  Impl(ServiceConfig cfg, Clock clk) : config(std::move(cfg)), clock(std::move(clk)) {
    config.validate();
    StoreOptions opts{config.context_ttl, clock};
    if (config.store_path.empty())
      store = std::make_unique<MemoryScanStore>(std::move(opts));
    else
      store = std::make_unique<FileScanStore>(config.store_path, std::move(opts));
    if (!config.rules_path.empty()) {
      std::string text = read_text_file(config.rules_path);
      rule_set = std::make_shared<const RuleSet>(RuleSet{text, rules::parse_rules(text)});
    }
    if (!config.radiomap_path.empty())
      radio_map = std::make_shared<const std::vector<RadioMapEntry>>(
          load_radio_map(config.radiomap_path));
    setup_routes();
  }

  std::shared_ptr<const RuleSet> snapshot_rules() const {
    std::shared_lock lock(swap_mutex);
    return rule_set;
  }

  std::shared_ptr<const std::vector<RadioMapEntry>> snapshot_map() const {
    std::shared_lock lock(swap_mutex);
    return radio_map;
  }

  /// Maps an incoming user identity onto the token stored and matched by
  /// COUNTER/FIRST. MAC-shaped identities are canonicalized, and hashed
  /// when pseudonymization is on; anything else passes through verbatim
  /// (it is already an opaque token).
  std::string resolve_user_token(const std::string& user) const {
    if (user.empty()) throw Error(ErrorCode::InvalidArgument, "user must be non-empty");
    if (auto mac = MacAddress::parse(user)) {
      if (config.pseudonymize) return pseudonymize_mac(*mac, config.salt);
      return mac->to_string();
    }
    return user;
  }

  void evaluate_and_reply(const std::string& token, const Fingerprint& fp,
                          std::chrono::sys_seconds now, httplib::Response& res) const {
    auto rs = snapshot_rules();
    rules::EvalContext ctx{token, now, store.get(), &fp, config.rssi_floor};
    set_json(res, json{{"actions", rules::evaluate_all(rs->parsed, ctx)}});
  }

  void handle_post_scan(const httplib::Request& req, httplib::Response& res) {
    json body = parse_json(req.body, "scan request");
    std::string url = get_string(body, "url");
    if (classify_payload(url).kind != PayloadKind::HttpUrl)
      throw Error(ErrorCode::NotAUrl, "target is not an absolute http(s) URL");
    std::string token = resolve_user_token(get_string(body, "user"));
    auto aps = body.find("aps");
    if (aps == body.end())
      throw Error(ErrorCode::InvalidArgument, "missing or non-string field 'aps'");
    Fingerprint fp = fingerprint_from_aps_json(*aps);
    auto ts = body.contains("ts") ? parse_rfc3339(get_string(body, "ts")) : clock();
    std::string id = store->store_scan({token, ts, fp, url});
    set_json(res, json{{"context_id", id}, {"augmented_url", rewrite_url_stored(url, id)}}, 201);
  }

  void handle_get_context(const httplib::Request& req, httplib::Response& res) {
    set_json(res, to_json(store->get_context(req.path_params.at("id"))));
  }

  void handle_get_param_names(const httplib::Request& req, httplib::Response& res) {
    set_json(res, json(store->get_parameter_names(req.path_params.at("id"))));
  }

  void handle_get_param_values(const httplib::Request& req, httplib::Response& res) {
    set_json(res, json(store->get_parameter_values(req.path_params.at("id"),
                                                   req.path_params.at("name"))));
  }

  void handle_post_evaluate(const httplib::Request& req, httplib::Response& res) {
    json body = parse_json(req.body, "evaluate request");
    bool has_ctx = body.contains("context_id");
    bool has_aps = body.contains("aps");
    if (has_ctx && has_aps)
      throw Error(ErrorCode::AmbiguousContext, "provide either context_id or aps, not both");
    auto now = clock();
    if (has_ctx) {
      ScanEvent ev = store->get_context(get_string(body, "context_id"));
      evaluate_and_reply(ev.user_token, ev.fingerprint, now, res);
    } else if (has_aps) {
      std::string token = resolve_user_token(get_string(body, "user"));
      Fingerprint fp = fingerprint_from_aps_json(body["aps"]);
      evaluate_and_reply(token, fp, now, res);
    } else {
      throw Error(ErrorCode::NoContext, "request carries neither context_id nor aps");
    }
  }

  // The landing-page path: the target URL as the QR client requested it,
  // query intact, goes straight through the augmented-URL parser.
  void handle_get_evaluate(const httplib::Request& req, httplib::Response& res) {
    ContextParams params = parse_context_params("http://q" + req.target);
    auto now = clock();
    if (params.mode == ContextMode::Stored) {
      ScanEvent ev = store->get_context(*params.context_id);
      evaluate_and_reply(ev.user_token, ev.fingerprint, now, res);
      return;
    }
    if (!params.pseudonym_aps.empty())
      throw Error(ErrorCode::MalformedApParam,
                  "pseudonymized ap parameters cannot be evaluated inline");
    if (!req.has_param("user"))
      throw Error(ErrorCode::InvalidArgument, "inline evaluation requires a user parameter");
    std::string token = resolve_user_token(req.get_param_value("user"));
    evaluate_and_reply(token, *params.fingerprint, now, res);
  }

  void handle_post_locate(const httplib::Request& req, httplib::Response& res) {
    json body = parse_json(req.body, "locate request");
    bool has_ctx = body.contains("context_id");
    bool has_aps = body.contains("aps");
    if (has_ctx && has_aps)
      throw Error(ErrorCode::AmbiguousContext, "provide either context_id or aps, not both");
    if (!has_ctx && !has_aps)
      throw Error(ErrorCode::NoContext, "request carries neither context_id nor aps");
    Fingerprint fp = has_ctx
        ? store->get_context(get_string(body, "context_id")).fingerprint
        : fingerprint_from_aps_json(body["aps"]);
    auto map = snapshot_map();
    KnnConfig cfg{config.knn_k, config.rssi_floor};
    set_json(res, to_json(knn_locate(fp, *map, cfg)));
  }

  void handle_put_rules(const httplib::Request& req, httplib::Response& res) {
    auto next = std::make_shared<const RuleSet>(RuleSet{req.body, rules::parse_rules(req.body)});
    {
      std::unique_lock lock(swap_mutex);
      rule_set = next;
    }
    set_json(res, json{{"rule_count", next->parsed.size()}});
  }

  void handle_get_rules(const httplib::Request&, httplib::Response& res) {
    res.set_content(snapshot_rules()->text, "text/plain");
  }

  void handle_put_radiomap(const httplib::Request& req, httplib::Response& res) {
    auto next = std::make_shared<const std::vector<RadioMapEntry>>(
        radio_map_from_json(parse_json(req.body, "radio map")));
    {
      std::unique_lock lock(swap_mutex);
      radio_map = next;
    }
    set_json(res, json{{"entry_count", next->size()}});
  }

  void handle_get_radiomap(const httplib::Request&, httplib::Response& res) {
    set_json(res, to_json(*snapshot_map()));
  }

  void setup_routes() {
    auto wrap = [this](void (Impl::*fn)(const httplib::Request&, httplib::Response&)) {
      return [this, fn](const httplib::Request& req, httplib::Response& res) {
        try {
          (this->*fn)(req, res);
        } catch (const Error& e) {
          set_json(res, json{{"error", to_string(e.code())}, {"detail", e.detail()}},
                   http_status_for(e.code()));
        } catch (const std::exception& e) {
          set_json(res, json{{"error", "Internal"}, {"detail", e.what()}}, 500);
        }
      };
    };
    server.Post("/api/scans", wrap(&Impl::handle_post_scan));
    server.Get("/api/contexts/:id", wrap(&Impl::handle_get_context));
    server.Get("/api/contexts/:id/params", wrap(&Impl::handle_get_param_names));
    server.Get("/api/contexts/:id/params/:name", wrap(&Impl::handle_get_param_values));
    server.Post("/api/evaluate", wrap(&Impl::handle_post_evaluate));
    server.Get("/api/evaluate", wrap(&Impl::handle_get_evaluate));
    server.Post("/api/locate", wrap(&Impl::handle_post_locate));
    server.Put("/api/rules", wrap(&Impl::handle_put_rules));
    server.Get("/api/rules", wrap(&Impl::handle_get_rules));
    server.Put("/api/radiomap", wrap(&Impl::handle_put_radiomap));
    server.Get("/api/radiomap", wrap(&Impl::handle_get_radiomap));
  }
};

ProximityService::ProximityService(ServiceConfig config, Clock clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(clock))) {}

ProximityService::~ProximityService() { stop(); }

int ProximityService::run() {
  impl_->bound_port = impl_->config.port;
  return impl_->server.listen(impl_->config.host, impl_->config.port) ? 0 : 2;
}

int ProximityService::start() {
  auto& s = impl_->server;
  int port = impl_->config.port;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->config.host);
    if (port <= 0) port = -1;
  } else if (!s.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0)
    throw Error(ErrorCode::IoError, "failed to bind " + impl_->config.host + ":" +
                                        std::to_string(impl_->config.port));
  impl_->bound_port = port;
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void ProximityService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
}

int ProximityService::port() const { return impl_->bound_port; }

}  // namespace qrprox
