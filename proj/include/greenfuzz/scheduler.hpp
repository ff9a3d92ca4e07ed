// scheduler.hpp
//
// Seed scheduling: the classic performance score that sets a seed's
// mutation airtime, the energy multipliers that rescale it, and the
// per-edge champion table behind favoured-seed selection.
//
// Airtime multiplier (per energy domain, bounds taken over the campaign):
//     s    = clamp((e - min) / (max - min), 0, 1)
//     mult = hi * (hi/lo)^(-s)            defaults hi=5, lo=0.2
// so the cheapest seed gets 5x the mutation cycles and the costliest 1/5x,
// with geometric interpolation between. Degenerate bounds return 1.
//
// Favoured factor (total energy, log-normalised):
//     t      = clamp((ln e - ln min) / (ln max - ln min), 0, 1)
//     factor = lo * (hi/lo)^t            defaults lo=0.8, hi=1.25
// applied to the champion score exec_time * input_size; lower wins, so
// cheap seeds take edges from expensive ones. Readings of zero are
// epsilon-clamped before the log.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "greenfuzz/corpus.hpp"
#include "greenfuzz/energy.hpp"

namespace greenfuzz {

// Campaign-global energy extremes; min only decreases, max only increases.
struct EnergyBounds {
  double min_total = 0.0, max_total = 0.0;
  double min_cpu = 0.0, max_cpu = 0.0;
  double min_ram = 0.0, max_ram = 0.0;

  void observe(const EnergyReading& reading);
  bool initialised() const { return initialised_; }

 private:
  bool initialised_ = false;
};

struct ScheduleConstants {
  double airtime_min_mult = 0.2;
  double airtime_max_mult = 5.0;
  double favoured_min_mult = 0.8;
  double favoured_max_mult = 1.25;
  double havoc_divisor = 4.0;
  std::uint32_t havoc_min_execs = 16;
  std::uint32_t havoc_max_mult = 16;  // perf score cap = 100 * this
  double skip_with_pending_favoured = 0.99;
  double skip_fuzzed = 0.95;
  double skip_unfuzzed = 0.75;
};

struct QueueEntry {
  SeedRecord seed;
  double perf_score = 0.0;
  bool favoured = false;
  std::uint32_t depth = 0;
  std::uint32_t handicap = 0;
  bool was_fuzzed = false;
};

struct QueueAverages {
  double mean_exec_us = 0.0;
  double mean_trace_edges = 0.0;
};

QueueAverages queue_averages(const std::vector<QueueEntry>& queue);

// Classic airtime score: 100 scaled by exec-time vs average (x0.1..x3),
// trace size vs average (x0.25..x3), handicap (x2/x4) and depth tier
// (x2..x5), clamped to [1, 100*havoc_max_mult].
double base_perf_score(const QueueEntry& entry, const QueueAverages& avg,
                       const ScheduleConstants& k = {});

// Core interpolation shared by both energy heuristics; exposed for tests.
double energy_scale(double value, double lo_bound, double hi_bound,
                    double mult_at_lo, double mult_at_hi, bool log_scale);

// Airtime multiplier from total energy vs total-energy bounds.
double energy_perf_multiplier(const EnergyReading& e, const EnergyBounds& b,
                              const ScheduleConstants& k = {});

// base_perf_score rescaled by the geometric mean of the CPU- and
// RAM-domain multipliers (CPU alone when RAM is unmetered), clamped to
// [1, 100*havoc_max_mult].
double scaled_perf_score(const QueueEntry& entry, const EnergyBounds& b,
                         const QueueAverages& avg, bool ram_metered,
                         const ScheduleConstants& k = {});

// Log-normalised favoured-selection factor in [0.8, 1.25].
double favoured_factor(const EnergyReading& e, const EnergyBounds& b,
                       const ScheduleConstants& k = {});

// Champion comparison score: exec_time * size * favoured_factor. Lower is
// better.
double favoured_score(const SeedRecord& seed, const EnergyBounds& b,
                      const ScheduleConstants& k = {});

// Energy-blind score for the baseline arm: exec_time * size.
double coverage_only_score(const SeedRecord& seed);

// Per-edge best seed. Scores are frozen at evaluation time; bounds moving
// later do not rewrite history.
class ChampionTable {
 public:
  struct Champion {
    std::size_t entry_index;
    double score;
  };

  explicit ChampionTable(std::size_t map_size) : table_(map_size) {}

  // Offers `entry_index` (with `score`) as champion for every edge in the
  // trace; strict improvement replaces, ties keep the incumbent. Returns
  // the edges whose champion changed.
  std::vector<EdgeId> update(std::size_t entry_index, const EdgeTrace& trace,
                             double score);

  const std::optional<Champion>& at(EdgeId edge) const { return table_[edge]; }
  std::size_t map_size() const { return table_.size(); }
  std::size_t championed_edges() const { return championed_; }

 private:
  std::vector<std::optional<Champion>> table_;
  std::size_t championed_ = 0;
};

// Greedy favoured marking: walk edges in index order; each yet-uncovered
// championed edge marks its champion favoured and consumes that seed's
// whole edge set. Everything else is unfavoured. Returns the favoured
// count.
std::size_t cull_queue(std::vector<QueueEntry>& queue,
                       const ChampionTable& table);

// Probability the scheduler skips this entry in the current pass.
double skip_probability(const QueueEntry& entry, bool pending_favoured,
                        const ScheduleConstants& k = {});

}  // namespace greenfuzz
