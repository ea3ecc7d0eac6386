#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrprox {

/// Byte-preserving decomposition of a URL. Recomposing untouched parts
/// always reproduces the original text; rewrites only ever append to the
/// query, so scheme, host, path, existing parameters and fragment come
/// back verbatim.
struct UrlParts {
  std::string scheme;                 // as written, compare case-insensitively
  std::string authority;              // host[:port], may include userinfo
  std::string path;                   // possibly empty
  std::optional<std::string> query;   // without '?', raw bytes
  std::optional<std::string> fragment;  // without '#', raw bytes

  std::string recompose() const;

  /// Appends key=value to the query; no percent-encoding is applied, the
  /// caller guarantees the value needs none (true for all grammars used
  /// here).
  void append_query_param(std::string_view key, std::string_view value);
};

/// Splits on the first scheme separator. Returns nullopt when the text
/// does not have the form scheme://...
std::optional<UrlParts> split_url(std::string_view text);

/// True iff text is an absolute URL with scheme http or https and a
/// non-empty authority.
bool is_http_url(std::string_view text);

/// Raw query split: "a=1&b&c=x" -> {("a","1"), ("b",""), ("c","x")}.
/// Keys and values are percent-decoded; '+' is left as-is.
std::vector<std::pair<std::string, std::string>> parse_query(std::string_view query);

std::string percent_decode(std::string_view text);

}  // namespace qrprox
