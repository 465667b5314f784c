// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/hash.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <memory>

#include "mmcr/common/error.hpp"

namespace mmcr {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> hashed_unit_vector(std::string_view key, std::uint64_t seed, std::size_t dim) {
  SplitMix64 gen(combine(fnv1a64(key), seed));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = gen.uniform(-1.0, 1.0);
    norm2 += x * x;
  }
  const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (auto& x : v) x *= inv;
  return v;
}

namespace {

std::string digest_hex(const void* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out, &len) != 1) {
    fail(ErrorCode::IoError, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex(static_cast<std::size_t>(len) * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    hex[2 * i] = kHex[out[i] >> 4];
    hex[2 * i + 1] = kHex[out[i] & 0x0f];
  }
  return hex;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) { return digest_hex(bytes.data(), bytes.size()); }

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  return digest_hex(bytes.data(), bytes.size());
}

}  // namespace mmcr
