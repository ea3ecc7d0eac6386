#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qrprox {

/// 6-octet IEEE 802 MAC address (a Wi-Fi BSSID). Canonical text form is
/// uppercase hex, hyphen separated: "AA-BB-CC-DD-EE-FF".
class MacAddress {
public:
  MacAddress() = default;
  explicit MacAddress(const std::array<std::uint8_t, 6>& octets) : octets_(octets) {}

  /// Accepts hyphen- or colon-separated hex pairs, any case.
  /// Returns nullopt on anything that is not exactly six octets.
  static std::optional<MacAddress> parse(std::string_view text);

  std::string to_string() const;

  const std::array<std::uint8_t, 6>& octets() const noexcept { return octets_; }

  auto operator<=>(const MacAddress&) const = default;

private:
  std::array<std::uint8_t, 6> octets_{};
};

}  // namespace qrprox
