#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace trove {

/// The one hash primitive used repo-wide (token buckets, n-gram fingerprints,
/// subsampling, checksums).
///
/// hash64(bytes) = fmix64(FNV-1a-64(bytes)), where FNV-1a starts from the
/// offset basis 0xcbf29ce484222325 and multiplies by the prime 0x100000001b3,
/// and fmix64 is the MurmurHash3 64-bit finalizer. The result depends only on
/// the byte sequence, so it is identical across platforms.
std::uint64_t hash64(std::span<const std::byte> bytes) noexcept;
std::uint64_t hash64(std::string_view bytes) noexcept;

/// Incremental form of hash64; feeding the same bytes in any chunking yields
/// the same digest.
class Hasher64 {
 public:
  void update(std::span<const std::byte> bytes) noexcept;
  void update(std::string_view bytes) noexcept;
  void update_u64_le(std::uint64_t value) noexcept;
  std::uint64_t digest() const noexcept;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fmix64(std::uint64_t k) noexcept;

/// Lower-case, zero-padded 16 character hex rendering.
std::string to_hex(std::uint64_t value);

}  // namespace trove
