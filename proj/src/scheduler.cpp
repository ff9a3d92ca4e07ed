#include "greenfuzz/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace greenfuzz {

namespace {
// Zero-reading guard for the logarithmic normalisation.
constexpr double kEpsilonJoules = 1e-9;
}  // namespace

void EnergyBounds::observe(const EnergyReading& reading) {
  const double total = reading.total();
  if (!initialised_) {
    min_total = max_total = total;
    min_cpu = max_cpu = reading.cpu_joules;
    min_ram = max_ram = reading.ram_joules;
    initialised_ = true;
    return;
  }
  min_total = std::min(min_total, total);
  max_total = std::max(max_total, total);
  min_cpu = std::min(min_cpu, reading.cpu_joules);
  max_cpu = std::max(max_cpu, reading.cpu_joules);
  min_ram = std::min(min_ram, reading.ram_joules);
  max_ram = std::max(max_ram, reading.ram_joules);
}

QueueAverages queue_averages(const std::vector<QueueEntry>& queue) {
  QueueAverages avg;
  if (queue.empty()) return avg;
  double exec_sum = 0.0;
  double edge_sum = 0.0;
  for (const auto& entry : queue) {
    exec_sum += static_cast<double>(entry.seed.exec_time_us);
    edge_sum += static_cast<double>(entry.seed.trace.edge_count());
  }
  avg.mean_exec_us = exec_sum / static_cast<double>(queue.size());
  avg.mean_trace_edges = edge_sum / static_cast<double>(queue.size());
  return avg;
}

double base_perf_score(const QueueEntry& entry, const QueueAverages& avg,
                       const ScheduleConstants& k) {
  double score = 100.0;

  // Slow seeds lose airtime, fast ones gain it.
  if (avg.mean_exec_us > 0.0) {
    const double ratio =
        static_cast<double>(entry.seed.exec_time_us) / avg.mean_exec_us;
    if (ratio >= 4.0)
      score *= 0.1;
    else if (ratio >= 3.0)
      score *= 0.25;
    else if (ratio >= 2.0)
      score *= 0.5;
    else if (ratio >= 1.5)
      score *= 0.75;
    else if (ratio <= 0.25)
      score *= 3.0;
    else if (ratio <= 1.0 / 3.0)
      score *= 2.0;
    else if (ratio <= 0.5)
      score *= 1.5;
  }

  // Seeds with a larger coverage footprint are better mutation bases.
  if (avg.mean_trace_edges > 0.0) {
    const double ratio =
        static_cast<double>(entry.seed.trace.edge_count()) /
        avg.mean_trace_edges;
    if (ratio >= 10.0 / 3.0)
      score *= 3.0;
    else if (ratio >= 2.0)
      score *= 2.0;
    else if (ratio >= 4.0 / 3.0)
      score *= 1.5;
    else if (ratio <= 1.0 / 3.0)
      score *= 0.25;
    else if (ratio <= 0.5)
      score *= 0.5;
    else if (ratio <= 2.0 / 3.0)
      score *= 0.75;
  }

  // Late arrivals catch up.
  if (entry.handicap >= 4)
    score *= 4.0;
  else if (entry.handicap >= 1)
    score *= 2.0;

  if (entry.depth >= 4 && entry.depth <= 7)
    score *= 2.0;
  else if (entry.depth >= 8 && entry.depth <= 13)
    score *= 3.0;
  else if (entry.depth >= 14 && entry.depth <= 25)
    score *= 4.0;
  else if (entry.depth > 25)
    score *= 5.0;

  return std::clamp(score, 1.0, 100.0 * k.havoc_max_mult);
}

double energy_scale(double value, double lo_bound, double hi_bound,
                    double mult_at_lo, double mult_at_hi, bool log_scale) {
  double lo = lo_bound;
  double hi = hi_bound;
  double v = value;
  if (log_scale) {
    lo = std::max(lo, kEpsilonJoules);
    hi = std::max(hi, kEpsilonJoules);
    v = std::max(v, kEpsilonJoules);
  }
  if (!(hi > lo)) return 1.0;  // no signal yet; stay neutral

  double t;
  if (log_scale)
    t = (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo));
  else
    t = (v - lo) / (hi - lo);
  t = std::clamp(t, 0.0, 1.0);

  // Geometric interpolation from mult_at_lo (t=0) to mult_at_hi (t=1).
  return mult_at_lo * std::pow(mult_at_hi / mult_at_lo, t);
}

double energy_perf_multiplier(const EnergyReading& e, const EnergyBounds& b,
                              const ScheduleConstants& k) {
  return energy_scale(e.total(), b.min_total, b.max_total, k.airtime_max_mult,
                      k.airtime_min_mult, /*log_scale=*/false);
}

double scaled_perf_score(const QueueEntry& entry, const EnergyBounds& b,
                         const QueueAverages& avg, bool ram_metered,
                         const ScheduleConstants& k) {
  const double base = base_perf_score(entry, avg, k);
  const double cpu_mult =
      energy_scale(entry.seed.energy.cpu_joules, b.min_cpu, b.max_cpu,
                   k.airtime_max_mult, k.airtime_min_mult, false);
  double mult = cpu_mult;
  if (ram_metered) {
    const double ram_mult =
        energy_scale(entry.seed.energy.ram_joules, b.min_ram, b.max_ram,
                     k.airtime_max_mult, k.airtime_min_mult, false);
    mult = std::sqrt(cpu_mult * ram_mult);
  }
  return std::clamp(base * mult, 1.0, 100.0 * k.havoc_max_mult);
}

double favoured_factor(const EnergyReading& e, const EnergyBounds& b,
                       const ScheduleConstants& k) {
  return energy_scale(e.total(), b.min_total, b.max_total,
                      k.favoured_min_mult, k.favoured_max_mult,
                      /*log_scale=*/true);
}

double favoured_score(const SeedRecord& seed, const EnergyBounds& b,
                      const ScheduleConstants& k) {
  return coverage_only_score(seed) * favoured_factor(seed.energy, b, k);
}

double coverage_only_score(const SeedRecord& seed) {
  return static_cast<double>(seed.exec_time_us) *
         static_cast<double>(seed.size_bytes);
}

std::vector<EdgeId> ChampionTable::update(std::size_t entry_index,
                                          const EdgeTrace& trace,
                                          double score) {
  std::vector<EdgeId> changed;
  for (EdgeId edge : trace.edges()) {
    auto& slot = table_[edge];
    if (!slot) {
      slot = Champion{entry_index, score};
      ++championed_;
      changed.push_back(edge);
    } else if (score < slot->score) {  // ties keep the incumbent
      slot = Champion{entry_index, score};
      changed.push_back(edge);
    }
  }
  return changed;
}

std::size_t cull_queue(std::vector<QueueEntry>& queue,
                       const ChampionTable& table) {
  for (auto& entry : queue) entry.favoured = false;

  std::vector<std::uint8_t> covered(table.map_size(), 0);
  std::size_t favoured = 0;
  for (std::size_t edge = 0; edge < table.map_size(); ++edge) {
    if (covered[edge]) continue;
    const auto& champ = table.at(static_cast<EdgeId>(edge));
    if (!champ) continue;
    QueueEntry& winner = queue[champ->entry_index];
    if (!winner.favoured) {
      winner.favoured = true;
      ++favoured;
    }
    for (EdgeId e : winner.seed.trace.edges()) covered[e] = 1;
  }
  return favoured;
}

double skip_probability(const QueueEntry& entry, bool pending_favoured,
                        const ScheduleConstants& k) {
  if (entry.favoured) return 0.0;
  if (pending_favoured) return k.skip_with_pending_favoured;
  return entry.was_fuzzed ? k.skip_fuzzed : k.skip_unfuzzed;
}

}  // namespace greenfuzz
