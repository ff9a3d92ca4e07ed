#include "greenfuzz/mutate.hpp"

#include <cstring>
#include <stdexcept>

namespace greenfuzz {

namespace {

const std::int8_t kInteresting8[] = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
const std::int16_t kInteresting16[] = {-32768, -129, 128,  255,  256,
                                       512,    1000, 1024, 4096, 32767};
const std::int32_t kInteresting32[] = {-2147483647 - 1, -100663046, -32769,
                                       32768,           65535,      65536,
                                       100663045,       2147483647};

enum class Op : std::uint64_t {
  bit_flip,
  byte_set,
  delete_range,
  insert_range,
  arith,
  interesting,
  block_duplicate,
  count_,
};

std::size_t block_len(Rng& rng, std::size_t limit) {
  return 1 + rng.below(std::min(limit, kMaxBlock));
}

template <typename T>
void store_le(std::vector<std::uint8_t>& buf, std::size_t pos, T value) {
  std::memcpy(buf.data() + pos, &value, sizeof(T));
}

template <typename T>
T load_le(const std::vector<std::uint8_t>& buf, std::size_t pos) {
  T value;
  std::memcpy(&value, buf.data() + pos, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::uint8_t> havoc_mutate(std::span<const std::uint8_t> input,
                                       Rng& rng, unsigned stack_count,
                                       std::size_t max_len) {
  if (stack_count == 0)
    throw std::invalid_argument("havoc stack count must be >= 1");

  std::vector<std::uint8_t> buf(input.begin(), input.end());
  buf.reserve(std::min(max_len, buf.size() + 64));

  for (unsigned step = 0; step < stack_count; ++step) {
    Op op = static_cast<Op>(rng.below(static_cast<std::uint64_t>(Op::count_)));

    // Content-dependent operators degrade to insertion on an empty buffer;
    // insertion degrades to a byte set at the length cap.
    if (buf.empty()) op = Op::insert_range;
    if (op == Op::insert_range && buf.size() >= max_len) op = Op::byte_set;
    if (op == Op::delete_range && buf.size() < 2) op = Op::insert_range;

    switch (op) {
      case Op::bit_flip: {
        const std::size_t pos = rng.below(buf.size());
        buf[pos] ^= static_cast<std::uint8_t>(1u << rng.below(8));
        break;
      }
      case Op::byte_set: {
        const std::size_t pos = rng.below(buf.size());
        buf[pos] = static_cast<std::uint8_t>(rng.below(256));
        break;
      }
      case Op::delete_range: {
        // Keeps at least one byte.
        const std::size_t len = block_len(rng, buf.size() - 1);
        const std::size_t pos = rng.below(buf.size() - len + 1);
        buf.erase(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                  buf.begin() + static_cast<std::ptrdiff_t>(pos + len));
        break;
      }
      case Op::insert_range: {
        const std::size_t len = block_len(rng, max_len - buf.size());
        const std::size_t pos = rng.below(buf.size() + 1);
        std::vector<std::uint8_t> chunk(len);
        for (auto& b : chunk) b = static_cast<std::uint8_t>(rng.below(256));
        buf.insert(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                   chunk.begin(), chunk.end());
        break;
      }
      case Op::arith: {
        const std::size_t widths[] = {1, 2, 4};
        const std::size_t width = widths[rng.below(3)];
        if (buf.size() < width) break;
        const std::size_t pos = rng.below(buf.size() - width + 1);
        const std::uint32_t delta = 1 + rng.below(kArithMax);
        const bool subtract = rng.below(2) == 0;
        if (width == 1) {
          std::uint8_t v = buf[pos];
          buf[pos] = static_cast<std::uint8_t>(subtract ? v - delta : v + delta);
        } else if (width == 2) {
          auto v = load_le<std::uint16_t>(buf, pos);
          store_le<std::uint16_t>(
              buf, pos,
              static_cast<std::uint16_t>(subtract ? v - delta : v + delta));
        } else {
          auto v = load_le<std::uint32_t>(buf, pos);
          store_le<std::uint32_t>(buf, pos, subtract ? v - delta : v + delta);
        }
        break;
      }
      case Op::interesting: {
        const std::size_t widths[] = {1, 2, 4};
        const std::size_t width = widths[rng.below(3)];
        if (buf.size() < width) break;
        const std::size_t pos = rng.below(buf.size() - width + 1);
        if (width == 1) {
          buf[pos] = static_cast<std::uint8_t>(
              kInteresting8[rng.below(std::size(kInteresting8))]);
        } else if (width == 2) {
          store_le<std::uint16_t>(
              buf, pos,
              static_cast<std::uint16_t>(
                  kInteresting16[rng.below(std::size(kInteresting16))]));
        } else {
          store_le<std::uint32_t>(
              buf, pos,
              static_cast<std::uint32_t>(
                  kInteresting32[rng.below(std::size(kInteresting32))]));
        }
        break;
      }
      case Op::block_duplicate: {
        if (buf.size() >= max_len) break;
        const std::size_t len =
            block_len(rng, std::min(buf.size(), max_len - buf.size()));
        const std::size_t src = rng.below(buf.size() - len + 1);
        const std::size_t dst = rng.below(buf.size() + 1);
        std::vector<std::uint8_t> chunk(
            buf.begin() + static_cast<std::ptrdiff_t>(src),
            buf.begin() + static_cast<std::ptrdiff_t>(src + len));
        buf.insert(buf.begin() + static_cast<std::ptrdiff_t>(dst),
                   chunk.begin(), chunk.end());
        break;
      }
      case Op::count_:
        break;
    }
  }

  if (buf.empty()) buf.push_back(static_cast<std::uint8_t>(rng.below(256)));
  if (buf.size() > max_len) buf.resize(max_len);
  return buf;
}

std::vector<std::uint8_t> splice(std::span<const std::uint8_t> a,
                                 std::span<const std::uint8_t> b, Rng& rng) {
  if (a.empty() && b.empty())
    return {static_cast<std::uint8_t>(rng.below(256))};
  if (a.empty()) return {b.begin(), b.end()};
  if (b.empty()) return {a.begin(), a.end()};

  // Shared cut point: output = a[:k] + b[k:]. k == 0 reproduces b,
  // k == len(b) extends a's prefix with nothing past b's end.
  const std::size_t k = rng.below(std::min(a.size(), b.size()) + 1);
  std::vector<std::uint8_t> out;
  out.reserve(b.size());
  out.insert(out.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(k), b.end());
  return out;
}

}  // namespace greenfuzz
