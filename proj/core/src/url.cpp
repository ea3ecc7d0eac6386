#include "qrprox/url.hpp"

#include <cctype>

namespace qrprox {

namespace {

bool scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string UrlParts::recompose() const {
  std::string out = scheme;
  out += "://";
  out += authority;
  out += path;
  if (query) {
    out += '?';
    out += *query;
  }
  if (fragment) {
    out += '#';
    out += *fragment;
  }
  return out;
}

void UrlParts::append_query_param(std::string_view key, std::string_view value) {
  std::string param;
  param.reserve(key.size() + value.size() + 1);
  param.append(key);
  param += '=';
  param.append(value);
  if (!query) {
    query = std::move(param);
  } else if (query->empty()) {
    *query = std::move(param);
  } else {
    *query += '&';
    *query += param;
  }
}

std::optional<UrlParts> split_url(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text[0]))) return std::nullopt;
  std::size_t i = 1;
  while (i < text.size() && scheme_char(text[i])) ++i;
  if (i + 2 >= text.size() || text[i] != ':' || text[i + 1] != '/' || text[i + 2] != '/') {
    return std::nullopt;
  }
  UrlParts parts;
  parts.scheme = std::string(text.substr(0, i));
  std::size_t pos = i + 3;
  std::size_t auth_end = pos;
  while (auth_end < text.size() && text[auth_end] != '/' && text[auth_end] != '?' &&
         text[auth_end] != '#') {
    ++auth_end;
  }
  parts.authority = std::string(text.substr(pos, auth_end - pos));
  pos = auth_end;
  std::size_t path_end = pos;
  while (path_end < text.size() && text[path_end] != '?' && text[path_end] != '#') ++path_end;
  parts.path = std::string(text.substr(pos, path_end - pos));
  pos = path_end;
  if (pos < text.size() && text[pos] == '?') {
    std::size_t query_end = text.find('#', pos + 1);
    if (query_end == std::string_view::npos) query_end = text.size();
    parts.query = std::string(text.substr(pos + 1, query_end - pos - 1));
    pos = query_end;
  }
  if (pos < text.size() && text[pos] == '#') {
    parts.fragment = std::string(text.substr(pos + 1));
  }
  return parts;
}

bool is_http_url(std::string_view text) {
  auto parts = split_url(text);
  if (!parts) return false;
  return (iequals(parts->scheme, "http") || iequals(parts->scheme, "https")) &&
         !parts->authority.empty();
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size()) {
      int hi = hex_value(text[i + 1]);
      int lo = hex_value(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        continue;
      }
    }
    out += text[i];
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_query(std::string_view query) {
  std::vector<std::pair<std::string, std::string>> params;
  std::size_t pos = 0;
  while (pos <= query.size()) {
    std::size_t amp = query.find('&', pos);
    if (amp == std::string_view::npos) amp = query.size();
    std::string_view piece = query.substr(pos, amp - pos);
    if (!piece.empty()) {
      std::size_t eq = piece.find('=');
      if (eq == std::string_view::npos) {
        params.emplace_back(percent_decode(piece), "");
      } else {
        params.emplace_back(percent_decode(piece.substr(0, eq)),
                            percent_decode(piece.substr(eq + 1)));
      }
    }
    if (amp == query.size()) break;
    pos = amp + 1;
  }
  return params;
}

}  // namespace qrprox
