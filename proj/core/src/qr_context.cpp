#include "qrprox/qr_context.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "qrprox/error.hpp"
#include "qrprox/pseudonym.hpp"
#include "qrprox/url.hpp"

namespace qrprox {

namespace {

UrlParts require_http_url(std::string_view url) {
  if (!is_http_url(url)) {
    throw Error(ErrorCode::NotAUrl, "payload is not an absolute http(s) URL: " +
                                        std::string(url.substr(0, 128)));
  }
  return *split_url(url);
}

bool is_canonical_mac_text(std::string_view text) {
  // ^[0-9A-F]{2}(-[0-9A-F]{2}){5}$
  if (text.size() != 17) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i % 3 == 2) {
      if (text[i] != '-') return false;
    } else if (!((text[i] >= '0' && text[i] <= '9') || (text[i] >= 'A' && text[i] <= 'F'))) {
      return false;
    }
  }
  return true;
}

/// -?[0-9]{1,3}, value range enforced by the observation invariant later.
std::optional<int> parse_ap_rssi(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = text[0] == '-';
  std::string_view digits = negative ? text.substr(1) : text;
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  int value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return negative ? -value : value;
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

QrPayload classify_payload(std::string_view text) {
  QrPayload payload;
  payload.text = std::string(text);
  payload.kind = is_http_url(text) ? PayloadKind::HttpUrl : PayloadKind::Other;
  return payload;
}

void validate(const RewriteConfig& cfg) {
  if (cfg.max_aps < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "max_aps must be >= 1, got " + std::to_string(cfg.max_aps));
  }
  if (cfg.pseudonymize && cfg.salt.empty()) {
    throw Error(ErrorCode::MissingSalt, "pseudonymization requires a salt");
  }
}

std::string rewrite_url_inline(std::string_view url, const Fingerprint& fp,
                               const RewriteConfig& cfg) {
  validate(cfg);
  UrlParts parts = require_http_url(url);
  if (fp.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, "cannot rewrite with an empty fingerprint");
  }
  // Observations are already ordered strongest-first; keep the strongest
  // max_aps of them.
  std::size_t take = std::min<std::size_t>(fp.size(), static_cast<std::size_t>(cfg.max_aps));
  for (std::size_t i = 0; i < take; ++i) {
    const ApObservation& obs = fp.observations()[i];
    std::string value = cfg.pseudonymize ? pseudonymize_mac(obs.bssid, cfg.salt)
                                         : obs.bssid.to_string();
    value += ':';
    value += std::to_string(obs.rssi);
    parts.append_query_param("ap", value);
  }
  return parts.recompose();
}

std::string rewrite_url_stored(std::string_view url, std::string_view context_id) {
  UrlParts parts = require_http_url(url);
  if (!is_valid_context_id(context_id)) {
    throw Error(ErrorCode::InvalidContextId,
                context_id.empty() ? "context id is empty"
                                   : "context id violates ^[A-Za-z0-9_-]{1,64}$");
  }
  parts.append_query_param("context_id", context_id);
  return parts.recompose();
}

ContextParams parse_context_params(std::string_view url) {
  UrlParts parts = require_http_url(url);
  std::vector<std::pair<std::string, std::string>> params =
      parts.query ? parse_query(*parts.query) : std::vector<std::pair<std::string, std::string>>{};

  std::vector<std::string> ap_values;
  std::vector<std::string> context_ids;
  ContextParams result;
  for (const auto& [key, value] : params) {
    if (key == "ap") {
      ap_values.push_back(value);
    } else if (key == "context_id") {
      context_ids.push_back(value);
    } else if (key == "lat") {
      result.lat = parse_double(value);
    } else if (key == "lng") {
      result.lng = parse_double(value);
    }
  }

  if (!context_ids.empty() && !ap_values.empty()) {
    throw Error(ErrorCode::AmbiguousContext, "URL carries both context_id and ap parameters");
  }
  if (context_ids.size() > 1) {
    throw Error(ErrorCode::AmbiguousContext, "URL carries multiple context_id parameters");
  }
  if (!context_ids.empty()) {
    if (!is_valid_context_id(context_ids.front())) {
      throw Error(ErrorCode::InvalidContextId, "context_id violates ^[A-Za-z0-9_-]{1,64}$");
    }
    result.mode = ContextMode::Stored;
    result.context_id = context_ids.front();
    return result;
  }
  if (ap_values.empty()) {
    throw Error(ErrorCode::NoContext, "URL carries neither context_id nor ap parameters");
  }

  result.mode = ContextMode::Inline;
  std::vector<ApObservation> plain;
  for (const std::string& value : ap_values) {
    std::size_t colon = value.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::MalformedApParam, "ap value has no ':' separator: " + value);
    }
    std::string_view id(value.data(), colon);
    std::optional<int> rssi = parse_ap_rssi(std::string_view(value).substr(colon + 1));
    if (!rssi) {
      throw Error(ErrorCode::MalformedApParam, "ap value has a malformed RSSI: " + value);
    }
    if (*rssi < kMinRssiDbm || *rssi > kMaxRssiDbm) {
      throw Error(ErrorCode::MalformedApParam,
                  "ap RSSI outside [" + std::to_string(kMinRssiDbm) + ", " +
                      std::to_string(kMaxRssiDbm) + "]: " + value);
    }
    if (is_canonical_mac_text(id)) {
      plain.push_back(ApObservation{*MacAddress::parse(id), std::nullopt, *rssi});
    } else if (is_pseudonym_token(id)) {
      result.pseudonym_aps.push_back(PseudonymObservation{std::string(id), *rssi});
    } else {
      throw Error(ErrorCode::MalformedApParam,
                  "ap id is neither a canonical BSSID nor a pseudonym token: " + value);
    }
  }
  if (!plain.empty()) result.fingerprint = normalize_fingerprint(plain);
  return result;
}

bool is_valid_context_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

}  // namespace qrprox
