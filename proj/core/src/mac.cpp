#include "qrprox/mac.hpp"

#include <cctype>
#include <cstdio>

namespace qrprox {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  char sep = text[2];
  if (sep != '-' && sep != ':') return std::nullopt;
  std::array<std::uint8_t, 6> octets{};
  for (int i = 0; i < 6; ++i) {
    std::size_t off = static_cast<std::size_t>(i) * 3;
    if (i > 0 && text[off - 1] != sep) return std::nullopt;
    int hi = hex_value(text[off]);
    int lo = hex_value(text[off + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MacAddress(octets);
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02X-%02X-%02X-%02X-%02X-%02X", octets_[0], octets_[1],
                octets_[2], octets_[3], octets_[4], octets_[5]);
  return buf;
}

}  // namespace qrprox
