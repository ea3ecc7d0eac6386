#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "qrprox/mac.hpp"

namespace qrprox {

namespace detail {
/// HMAC-SHA256 (OpenSSL-backed).
std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                         std::span<const std::uint8_t> data);
}  // namespace detail

/// Privacy token for a MAC address: HMAC-SHA256 of the canonical text
/// form keyed with `salt`, truncated to the first 8 bytes and rendered
/// as 16 lowercase hex characters. Deterministic per (mac, salt),
/// infeasible to invert without the salt.
/// Throws MissingSalt on an empty salt.
std::string pseudonymize_mac(const MacAddress& mac, std::string_view salt);

/// Matches ^[0-9a-f]{16}$.
bool is_pseudonym_token(std::string_view text);

}  // namespace qrprox
