#include "trove/hash.hpp"

#include <array>

namespace trove {

namespace {
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}

std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

void Hasher64::update(std::span<const std::byte> bytes) noexcept {
  std::uint64_t h = state_;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= kFnvPrime;
  }
  state_ = h;
}

void Hasher64::update(std::string_view bytes) noexcept {
  update(std::as_bytes(std::span(bytes.data(), bytes.size())));
}

void Hasher64::update_u64_le(std::uint64_t value) noexcept {
  std::array<std::byte, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
  update(std::span<const std::byte>(le));
}

std::uint64_t Hasher64::digest() const noexcept { return fmix64(state_); }

std::uint64_t hash64(std::span<const std::byte> bytes) noexcept {
  Hasher64 h;
  h.update(bytes);
  return h.digest();
}

std::uint64_t hash64(std::string_view bytes) noexcept {
  Hasher64 h;
  h.update(bytes);
  return h.digest();
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace trove
