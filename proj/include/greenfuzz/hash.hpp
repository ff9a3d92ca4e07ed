// hash.hpp
//
// FNV-1a 64-bit hashing for trace digests, artifact names and config
// fingerprints. Stable across platforms and runs.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace greenfuzz {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                             std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Fixed-width lowercase hex, suitable for file names.
std::string to_hex(std::uint64_t value);

}  // namespace greenfuzz
