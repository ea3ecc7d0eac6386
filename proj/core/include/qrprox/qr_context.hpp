#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrprox/fingerprint.hpp"

namespace qrprox {

enum class PayloadKind { HttpUrl, Other };

/// A decoded QR payload. Only absolute http(s) URLs are rewritable;
/// everything else (plain text, vCard, SMS forms) passes through
/// untouched.
struct QrPayload {
  std::string text;
  PayloadKind kind = PayloadKind::Other;
};

QrPayload classify_payload(std::string_view text);

enum class ContextMode { Inline, Stored };

struct RewriteConfig {
  ContextMode mode = ContextMode::Inline;
  int max_aps = 16;           // cap on inline `ap` parameters, strongest first
  bool pseudonymize = false;  // replace BSSIDs with keyed hash tokens
  std::string salt;
};

void validate(const RewriteConfig& cfg);

/// An inline `ap` parameter whose BSSID was pseudonymized at rewrite
/// time; the MAC is not recoverable, only the token and RSSI are.
struct PseudonymObservation {
  std::string token;  // 16 lowercase hex chars
  int rssi = 0;

  bool operator==(const PseudonymObservation&) const = default;
};

/// What the target server extracts from an augmented URL.
struct ContextParams {
  ContextMode mode = ContextMode::Inline;
  std::optional<Fingerprint> fingerprint;            // inline, plain BSSIDs
  std::vector<PseudonymObservation> pseudonym_aps;   // inline, hashed BSSIDs
  std::optional<std::string> context_id;             // stored
  // lat/lng GET parameters are recognized and passed through; no
  // positioning source is implemented behind them.
  std::optional<double> lat;
  std::optional<double> lng;
};

/// Appends one `ap=<BSSID>:<RSSI>` query parameter per observation,
/// strongest first, truncated to cfg.max_aps. SSIDs are never carried
/// inline. Existing query and fragment are preserved byte-for-byte.
/// Throws NotAUrl / EmptyFingerprint.
std::string rewrite_url_inline(std::string_view url, const Fingerprint& fp,
                               const RewriteConfig& cfg);

/// Appends the single parameter `context_id=<id>`.
/// Throws NotAUrl / InvalidContextId.
std::string rewrite_url_stored(std::string_view url, std::string_view context_id);

/// Inverse of the two rewrites; what the target server runs on the URL
/// it receives. Stored mode wins when `context_id` is present; both
/// `context_id` and `ap` present is an error.
/// Throws NotAUrl, AmbiguousContext, MalformedApParam, InvalidContextId,
/// NoContext.
ContextParams parse_context_params(std::string_view url);

/// Opaque context identifier grammar: ^[A-Za-z0-9_-]{1,64}$.
bool is_valid_context_id(std::string_view id);

}  // namespace qrprox
