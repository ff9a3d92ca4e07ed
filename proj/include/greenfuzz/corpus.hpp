// corpus.hpp
//
// Corpus profiling and minimisation. Profiling runs each seed exactly once,
// recording its edge trace and the energy of that same run. Two minimisers
// operate on the profiled records:
//
//   green_minimise    — per edge, keep the seed with the lowest measured
//                       total energy (ties: smaller size, lower exec time,
//                       lexicographically smaller id).
//   coverage_minimise — the coverage-only baseline: greedy walk over edges
//                       in index order, keeping the smallest-then-fastest
//                       seed for each still-uncovered edge.
//
// Both preserve the union of covered edges exactly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "greenfuzz/coverage.hpp"
#include "greenfuzz/energy.hpp"
#include "greenfuzz/exec.hpp"

namespace greenfuzz {

struct SeedRecord {
  std::string id;  // source file name or synthesized queue id
  std::vector<std::uint8_t> bytes;
  EdgeTrace trace;
  EnergyReading energy;
  std::uint64_t exec_time_us = 0;
  std::size_t size_bytes = 0;

  SeedRecord() : trace(0) {}
};

struct SeedInput {
  std::string id;
  std::vector<std::uint8_t> bytes;
};

// Reads regular files from a directory, sorted by file name. Unreadable
// entries are skipped with a warning pushed to `warnings`.
std::vector<SeedInput> load_seed_dir(const std::filesystem::path& dir,
                                     std::size_t max_len,
                                     std::vector<std::string>* warnings);

struct CrashedSeed {
  std::string id;
  int term_signal = 0;
};

struct ProfileResult {
  std::vector<SeedRecord> records;   // non-crashing seeds, input order
  std::vector<CrashedSeed> crashes;  // flagged, excluded from minimisation
  std::vector<std::string> warnings;
  std::size_t total_execs = 0;
  double cpu_joules = 0.0;
  double ram_joules = 0.0;
  std::uint64_t elapsed_us = 0;
};

// One execution per seed; records preserve input order. Timeouts are
// treated like crashes for minimisation purposes (no usable trace+energy
// pair) and land in `crashes`.
ProfileResult profile_corpus(std::span<const SeedInput> seeds,
                             const ExecuteFn& run);

// Champion assignment: per covered edge, the id of the cheapest seed.
struct ChampionAssignment {
  std::map<EdgeId, std::string> by_edge;
};

struct MinimiseResult {
  std::vector<std::string> kept;  // sorted, unique
  ChampionAssignment champions;
  // Set when no record produced any edge: the smallest seed is kept so a
  // non-empty corpus never minimises to nothing.
  bool kept_fallback = false;
};

MinimiseResult green_minimise(std::span<const SeedRecord> records);

std::vector<std::string> coverage_minimise(std::span<const SeedRecord> records);

// Orders records like the minimisers' tie chain (total energy, size,
// exec time, id). Exposed for scheduling and reporting.
bool cheaper_seed(const SeedRecord& a, const SeedRecord& b);

struct ManifestEntry {
  std::string id;
  std::string file_name;
  std::size_t edges = 0;
  double energy_total_j = 0.0;
  double cpu_j = 0.0;
  double ram_j = 0.0;
  std::size_t size_bytes = 0;
  std::uint64_t exec_time_us = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::size_t kept_count = 0;
  std::size_t input_count = 0;
  std::size_t union_edges = 0;
  double energy_total_j = 0.0;
  std::size_t size_total_bytes = 0;
};

// Copies the kept seeds into out_dir with stable names (source file name,
// hash-suffixed on collisions) and writes manifest.json. Throws on
// unwritable directories.
Manifest write_minimised(std::span<const SeedRecord> records,
                         std::span<const std::string> kept,
                         const std::filesystem::path& out_dir,
                         const std::string& mode_label);

// Total measured energy of the kept subset; the cmin summary metric.
double kept_energy_total(std::span<const SeedRecord> records,
                         std::span<const std::string> kept);

}  // namespace greenfuzz
