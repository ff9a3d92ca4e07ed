// mutate.hpp
//
// Havoc-style stacked mutations and splice crossover. Fully determined by
// (input, rng state, stack count); output length stays in [1, max_len].

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "greenfuzz/rng.hpp"

namespace greenfuzz {

inline constexpr std::size_t kDefaultMaxInputLen = 1u << 20;  // 1 MiB
inline constexpr std::uint32_t kArithMax = 35;
inline constexpr std::size_t kMaxBlock = 64;

// Applies `stack_count` randomly chosen operators from: bit flip, byte set,
// delete range, insert range, arithmetic +/- on 1/2/4-byte words,
// interesting-value overwrite, block duplicate. Operators that need content
// fall back to insertion on empty buffers. Throws std::invalid_argument
// when stack_count == 0.
std::vector<std::uint8_t> havoc_mutate(std::span<const std::uint8_t> input,
                                       Rng& rng, unsigned stack_count,
                                       std::size_t max_len = kDefaultMaxInputLen);

// Crossover: keeps a prefix of `a` and the tail of `b` from a shared cut
// point. Output is never empty; an empty parent yields the other parent.
std::vector<std::uint8_t> splice(std::span<const std::uint8_t> a,
                                 std::span<const std::uint8_t> b, Rng& rng);

}  // namespace greenfuzz
