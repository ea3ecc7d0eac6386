#include "qrprox/pseudonym.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <stdexcept>

#include "qrprox/error.hpp"

namespace qrprox {

namespace detail {

std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                         std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
  if (!mac) throw std::runtime_error("EVP_MAC_fetch(HMAC) failed");
  EVP_MAC_CTX* ctx = EVP_MAC_CTX_new(mac);
  EVP_MAC_free(mac);
  if (!ctx) throw std::runtime_error("EVP_MAC_CTX_new failed");

  char digest[] = "SHA256";
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_end(),
  };
  std::size_t out_len = 0;
  int ok = EVP_MAC_init(ctx, key.data(), key.size(), params) &&
           EVP_MAC_update(ctx, data.data(), data.size()) &&
           EVP_MAC_final(ctx, out.data(), &out_len, out.size());
  EVP_MAC_CTX_free(ctx);
  if (!ok || out_len != out.size()) throw std::runtime_error("HMAC-SHA256 computation failed");
  return out;
}

}  // namespace detail

std::string pseudonymize_mac(const MacAddress& mac, std::string_view salt) {
  if (salt.empty()) {
    throw Error(ErrorCode::MissingSalt, "pseudonymization requires a non-empty salt");
  }
  std::string text = mac.to_string();
  auto digest = detail::hmac_sha256(
      {reinterpret_cast<const std::uint8_t*>(salt.data()), salt.size()},
      {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  static const char hex[] = "0123456789abcdef";
  std::string token;
  token.reserve(16);
  for (int i = 0; i < 8; ++i) {
    token += hex[digest[static_cast<std::size_t>(i)] >> 4];
    token += hex[digest[static_cast<std::size_t>(i)] & 0x0F];
  }
  return token;
}

bool is_pseudonym_token(std::string_view text) {
  if (text.size() != 16) return false;
  for (char c : text) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace qrprox
