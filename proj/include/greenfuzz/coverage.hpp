// coverage.hpp
//
// Edge-coverage representation: per-run traces with AFL-style hit-count
// classes, and the campaign-global map used for novelty detection and
// champion indexing.
//
// An edge is an index into a fixed-size map (power of two, default 65536).
// Raw hit counts are bucketed into the class set {0,1,2,3,4,8,16,32,128}
// so that small loop-count variations do not register as novelty. The
// campaign map accumulates the bitwise union of observed classes per edge.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace greenfuzz {

using EdgeId = std::uint32_t;

inline constexpr std::size_t kDefaultMapSize = 65536;

// Buckets a raw hit count: 0->0, 1->1, 2->2, 3->3, 4..7->4, 8..15->8,
// 16..31->16, 32..127->32, >=128->128. Idempotent on already-classified
// values.
constexpr std::uint8_t classify_count(std::uint32_t raw) {
  if (raw < 4) return static_cast<std::uint8_t>(raw);
  if (raw < 8) return 4;
  if (raw < 16) return 8;
  if (raw < 32) return 16;
  if (raw < 128) return 32;
  return 128;
}

// Classified per-execution edge trace. Immutable after construction.
class EdgeTrace {
 public:
  explicit EdgeTrace(std::size_t map_size) : buckets_(map_size, 0) {}

  // Classifies a raw hit-count array into a trace.
  static EdgeTrace from_counts(std::span<const std::uint32_t> raw);

  // Parses "edge:value" lines (the showmap channel format). Values are
  // classified on ingest, so both raw counts and already-classified
  // values are accepted. Throws ConfigError on indices >= map_size or
  // unparsable lines.
  static EdgeTrace from_showmap(std::istream& in, std::size_t map_size);

  void write_showmap(std::ostream& out) const;

  std::size_t map_size() const { return buckets_.size(); }
  std::uint8_t operator[](std::size_t i) const { return buckets_[i]; }
  const std::vector<std::uint8_t>& buckets() const { return buckets_; }

  // Indices with a nonzero class, ascending.
  std::vector<EdgeId> edges() const;

  // Number of distinct edges hit (AFL's bitmap_size).
  std::size_t edge_count() const;

  bool any() const { return edge_count() > 0; }

  // Stable digest of the classified buckets, used for crash dedup.
  std::uint64_t digest() const;

 private:
  std::vector<std::uint8_t> buckets_;
};

struct NoveltyReport {
  std::size_t new_edges = 0;    // edges hit for the first time
  std::size_t new_classes = 0;  // already-hit edges gaining an unseen class

  bool any() const { return new_edges > 0 || new_classes > 0; }
};

// Campaign-global accumulated coverage. Single writer; unique_edges is
// monotonically nondecreasing over a campaign.
class CoverageMap {
 public:
  explicit CoverageMap(std::size_t map_size) : virgin_(map_size, 0) {}

  // ORs the trace's classes into the map and reports what was new.
  // Idempotent: merging the same trace twice changes nothing the second
  // time. Throws ConfigError when trace and map sizes differ.
  NoveltyReport merge(const EdgeTrace& trace);

  std::size_t map_size() const { return virgin_.size(); }
  std::size_t unique_edges() const { return unique_edges_; }
  const std::vector<std::uint8_t>& virgin() const { return virgin_; }

 private:
  std::vector<std::uint8_t> virgin_;
  std::size_t unique_edges_ = 0;
};

}  // namespace greenfuzz
