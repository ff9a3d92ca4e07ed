#include <doctest.h>

#include <cmath>

#include "greenfuzz/rng.hpp"
#include "greenfuzz/scheduler.hpp"

using namespace greenfuzz;

namespace {

constexpr std::size_t kMap = 64;

SeedRecord seed_of(std::string id, std::vector<EdgeId> edges, double cpu_j,
                   double ram_j, std::uint64_t exec_us, std::size_t size) {
  std::vector<std::uint32_t> raw(kMap, 0);
  for (EdgeId e : edges) raw[e] = 1;
  SeedRecord record;
  record.id = std::move(id);
  record.bytes.assign(size, 0x11);
  record.trace = EdgeTrace::from_counts(raw);
  record.energy = {cpu_j, ram_j, exec_us};
  record.exec_time_us = exec_us;
  record.size_bytes = size;
  return record;
}

QueueEntry entry_of(SeedRecord seed, std::uint32_t depth = 0,
                    std::uint32_t handicap = 0) {
  QueueEntry entry;
  entry.seed = std::move(seed);
  entry.depth = depth;
  entry.handicap = handicap;
  return entry;
}

EnergyBounds bounds_of(double min_total, double max_total) {
  // Per-domain bounds follow the totals: cpu carries it all, ram zero.
  EnergyBounds bounds;
  bounds.observe({min_total, 0.0, 1});
  bounds.observe({max_total, 0.0, 1});
  return bounds;
}

EnergyReading cpu_only(double joules) { return {joules, 0.0, 1}; }

}  // namespace

TEST_CASE("energy bounds track per-domain extremes monotonically") {
  EnergyBounds bounds;
  CHECK_FALSE(bounds.initialised());
  bounds.observe({2.0, 0.5, 1});
  CHECK(bounds.initialised());
  CHECK(bounds.min_total == doctest::Approx(2.5));
  CHECK(bounds.max_total == doctest::Approx(2.5));
  bounds.observe({1.0, 1.0, 1});
  CHECK(bounds.min_total == doctest::Approx(2.0));
  CHECK(bounds.max_total == doctest::Approx(2.5));
  CHECK(bounds.min_cpu == doctest::Approx(1.0));
  CHECK(bounds.max_cpu == doctest::Approx(2.0));
  CHECK(bounds.min_ram == doctest::Approx(0.5));
  CHECK(bounds.max_ram == doctest::Approx(1.0));
}

TEST_CASE("energy_perf_multiplier spans [0.2, 5.0] inversely in energy") {
  const EnergyBounds bounds = bounds_of(1.0, 3.0);

  CHECK(energy_perf_multiplier(cpu_only(1.0), bounds) ==
        doctest::Approx(5.0).epsilon(1e-9));
  CHECK(energy_perf_multiplier(cpu_only(3.0), bounds) ==
        doctest::Approx(0.2).epsilon(1e-9));
  // Linear midpoint s = 0.5.
  CHECK(energy_perf_multiplier(cpu_only(2.0), bounds) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // Values beyond the observed range clamp to the endpoints.
  CHECK(energy_perf_multiplier(cpu_only(0.5), bounds) == doctest::Approx(5.0));
  CHECK(energy_perf_multiplier(cpu_only(9.0), bounds) == doctest::Approx(0.2));

  SUBCASE("degenerate bounds are neutral") {
    CHECK(energy_perf_multiplier(cpu_only(4.0), bounds_of(2.0, 2.0)) == 1.0);
    CHECK(energy_perf_multiplier(cpu_only(4.0), EnergyBounds{}) == 1.0);
  }

  SUBCASE("monotone nonincreasing in energy") {
    Rng rng(12);
    double prev_e = 0.0;
    double prev_m = energy_perf_multiplier(cpu_only(prev_e), bounds);
    for (int i = 0; i < 1000; ++i) {
      const double e = prev_e + rng.unit() * 0.01;
      const double m = energy_perf_multiplier(cpu_only(e), bounds);
      CHECK(m <= prev_m + 1e-12);
      CHECK(m >= 0.2 - 1e-12);
      CHECK(m <= 5.0 + 1e-12);
      prev_e = e;
      prev_m = m;
    }
  }
}

TEST_CASE("favoured_factor spans [0.8, 1.25] increasing in energy") {
  const EnergyBounds bounds = bounds_of(1.0, 4.0);

  CHECK(favoured_factor(cpu_only(1.0), bounds) ==
        doctest::Approx(0.8).epsilon(1e-9));
  CHECK(favoured_factor(cpu_only(4.0), bounds) ==
        doctest::Approx(1.25).epsilon(1e-9));
  // Logarithmic midpoint sqrt(min*max) = 2.
  CHECK(favoured_factor(cpu_only(2.0), bounds) ==
        doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("zero readings clamp to the cheap endpoint") {
    CHECK(favoured_factor(cpu_only(0.0), bounds) == doctest::Approx(0.8));
  }

  SUBCASE("degenerate bounds are neutral") {
    CHECK(favoured_factor(cpu_only(7.0), bounds_of(3.0, 3.0)) == 1.0);
  }

  SUBCASE("monotone nondecreasing in energy") {
    Rng rng(13);
    double prev_e = 0.5;
    double prev_f = favoured_factor(cpu_only(prev_e), bounds);
    for (int i = 0; i < 1000; ++i) {
      const double e = prev_e + rng.unit() * 0.01;
      const double f = favoured_factor(cpu_only(e), bounds);
      CHECK(f >= prev_f - 1e-12);
      CHECK(f >= 0.8 - 1e-12);
      CHECK(f <= 1.25 + 1e-12);
      prev_e = e;
      prev_f = f;
    }
  }
}

TEST_CASE("favoured_score scales exec_time x size by the energy factor") {
  const EnergyBounds bounds = bounds_of(1.0, 4.0);
  auto seed = seed_of("s", {1}, 2.0, 0.0, 1000, 100);
  CHECK(favoured_score(seed, bounds) == doctest::Approx(100000.0));  // x1.0

  seed.energy = cpu_only(1.0);
  CHECK(favoured_score(seed, bounds) == doctest::Approx(80000.0));  // x0.8

  seed.energy = cpu_only(4.0);
  CHECK(favoured_score(seed, bounds) == doctest::Approx(125000.0));  // x1.25

  CHECK(coverage_only_score(seed) == doctest::Approx(100000.0));
}

TEST_CASE("base_perf_score follows the factor tiers") {
  const QueueAverages avg{1000.0, 10.0};

  SUBCASE("a perfectly average entry scores 100") {
    const auto entry = entry_of(seed_of("s", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                                        0.0, 0.0, 1000, 10));
    CHECK(base_perf_score(entry, avg) == doctest::Approx(100.0));
  }

  SUBCASE("4x slower than average lands in the slowest tier") {
    const auto entry = entry_of(seed_of("s", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                                        0.0, 0.0, 4000, 10));
    CHECK(base_perf_score(entry, avg) == doctest::Approx(10.0));
  }

  SUBCASE("factors multiply past the cap and clamp at 1600") {
    // Fast (x3), huge trace (x3), handicapped (x4), deep (x5) = x180.
    std::vector<EdgeId> many;
    for (EdgeId e = 0; e < 40; ++e) many.push_back(e);
    const auto entry =
        entry_of(seed_of("s", many, 0.0, 0.0, 100, 10), /*depth=*/30,
                 /*handicap=*/4);
    CHECK(base_perf_score(entry, avg) == doctest::Approx(1600.0));
  }

  SUBCASE("score floor is 1") {
    const auto entry = entry_of(seed_of("s", {1}, 0.0, 0.0, 100000, 10));
    ScheduleConstants k;
    CHECK(base_perf_score(entry, avg, k) >= 1.0);
  }

  SUBCASE("zero averages stay neutral") {
    const auto entry = entry_of(seed_of("s", {1}, 0.0, 0.0, 1000, 10));
    CHECK(base_perf_score(entry, QueueAverages{0.0, 0.0}) ==
          doctest::Approx(100.0));
  }
}

TEST_CASE("scaled_perf_score combines domain multipliers geometrically") {
  const QueueAverages avg{1000.0, 1.0};
  EnergyBounds bounds;
  bounds.observe({1.0, 1.0, 1});
  bounds.observe({3.0, 3.0, 1});

  SUBCASE("neutral multipliers reproduce the base score") {
    auto entry = entry_of(seed_of("s", {1}, 2.0, 2.0, 1000, 10));
    // Linear midpoints in both domains: cpu mult 1, ram mult 1.
    CHECK(scaled_perf_score(entry, bounds, avg, true) ==
          doctest::Approx(base_perf_score(entry, avg)));
  }

  SUBCASE("opposite extremes cancel out via the geometric mean") {
    // cpu at min (x5), ram at max (x0.2): sqrt(5 * 0.2) = 1.
    auto entry = entry_of(seed_of("s", {1}, 1.0, 3.0, 1000, 10));
    CHECK(scaled_perf_score(entry, bounds, avg, true) ==
          doctest::Approx(base_perf_score(entry, avg)).epsilon(1e-9));
  }

  SUBCASE("cpu-only metering uses the cpu multiplier alone") {
    auto entry = entry_of(seed_of("s", {1}, 1.0, 0.0, 1000, 10));
    CHECK(scaled_perf_score(entry, bounds, avg, false) ==
          doctest::Approx(5.0 * base_perf_score(entry, avg)).epsilon(1e-9));
  }

  SUBCASE("result clamps to [1, 1600]") {
    auto cheap = entry_of(seed_of("s", {1}, 1.0, 1.0, 100, 10));
    CHECK(scaled_perf_score(cheap, bounds, avg, true) <= 1600.0);
    auto costly = entry_of(seed_of("s", {1}, 3.0, 3.0, 100000, 10));
    CHECK(scaled_perf_score(costly, bounds, avg, true) >= 1.0);
  }

  SUBCASE("uniform energies degenerate to the baseline score") {
    EnergyBounds flat;
    flat.observe({2.0, 0.2, 1});
    auto entry = entry_of(seed_of("s", {1}, 2.0, 0.2, 1000, 10));
    CHECK(scaled_perf_score(entry, flat, avg, true) ==
          base_perf_score(entry, avg));
    CHECK(favoured_score(entry.seed, flat) ==
          coverage_only_score(entry.seed));
  }
}

TEST_CASE("argmin preservation: cheaper seed wins champion comparisons") {
  const EnergyBounds bounds = bounds_of(1.0, 4.0);
  const auto cheap = seed_of("cheap", {1}, 1.5, 0.0, 700, 42);
  const auto costly = seed_of("costly", {1}, 3.5, 0.0, 700, 42);
  CHECK(favoured_score(cheap, bounds) < favoured_score(costly, bounds));
}

TEST_CASE("champion table replaces on strictly lower scores") {
  ChampionTable table(kMap);
  const auto seed = seed_of("s0", {1}, 1.0, 0.0, 100, 10);

  SUBCASE("first arrival claims the edge") {
    const auto changed = table.update(0, seed.trace, 100.0);
    CHECK(changed == std::vector<EdgeId>{1});
    CHECK(table.at(1)->entry_index == 0);
    CHECK(table.at(1)->score == 100.0);
  }

  SUBCASE("lower score replaces, tie keeps the incumbent") {
    table.update(0, seed.trace, 100.0);
    CHECK(table.update(1, seed.trace, 99.0).size() == 1);
    CHECK(table.at(1)->entry_index == 1);
    CHECK(table.update(2, seed.trace, 99.0).empty());
    CHECK(table.at(1)->entry_index == 1);
    CHECK(table.update(2, seed.trace, 120.0).empty());
  }
}

TEST_CASE("cull_queue marks a greedy edge cover of champions as favoured") {
  SUBCASE("one champion covering everything") {
    std::vector<QueueEntry> queue;
    queue.push_back(entry_of(seed_of("a", {1, 2, 3}, 1.0, 0.0, 100, 10)));
    queue.push_back(entry_of(seed_of("b", {2}, 1.0, 0.0, 100, 10)));
    ChampionTable table(kMap);
    table.update(0, queue[0].seed.trace, 10.0);
    table.update(1, queue[1].seed.trace, 20.0);
    CHECK(cull_queue(queue, table) == 1);
    CHECK(queue[0].favoured);
    CHECK_FALSE(queue[1].favoured);
  }

  SUBCASE("disjoint champions are both favoured") {
    std::vector<QueueEntry> queue;
    queue.push_back(entry_of(seed_of("a", {1}, 1.0, 0.0, 100, 10)));
    queue.push_back(entry_of(seed_of("b", {5}, 1.0, 0.0, 100, 10)));
    ChampionTable table(kMap);
    table.update(0, queue[0].seed.trace, 10.0);
    table.update(1, queue[1].seed.trace, 10.0);
    CHECK(cull_queue(queue, table) == 2);
    CHECK(queue[0].favoured);
    CHECK(queue[1].favoured);
  }

  SUBCASE("consumed edges unfavour later champions") {
    // A champions e1 and covers e2; B champions only e2.
    std::vector<QueueEntry> queue;
    queue.push_back(entry_of(seed_of("a", {1, 2}, 1.0, 0.0, 100, 10)));
    queue.push_back(entry_of(seed_of("b", {2}, 1.0, 0.0, 100, 10)));
    ChampionTable table(kMap);
    table.update(0, queue[0].seed.trace, 10.0);  // claims e1 and e2
    table.update(1, queue[1].seed.trace, 5.0);   // takes e2
    CHECK(cull_queue(queue, table) == 1);
    CHECK(queue[0].favoured);   // via e1, consumes e2
    CHECK_FALSE(queue[1].favoured);
  }

  SUBCASE("re-culling is idempotent") {
    std::vector<QueueEntry> queue;
    queue.push_back(entry_of(seed_of("a", {1, 2}, 1.0, 0.0, 100, 10)));
    ChampionTable table(kMap);
    table.update(0, queue[0].seed.trace, 10.0);
    CHECK(cull_queue(queue, table) == 1);
    CHECK(cull_queue(queue, table) == 1);
  }
}

TEST_CASE("skip_probability follows the favoured/pending table") {
  QueueEntry entry;
  entry.favoured = true;
  CHECK(skip_probability(entry, true) == 0.0);
  CHECK(skip_probability(entry, false) == 0.0);

  entry.favoured = false;
  CHECK(skip_probability(entry, true) == doctest::Approx(0.99));
  entry.was_fuzzed = true;
  CHECK(skip_probability(entry, false) == doctest::Approx(0.95));
  entry.was_fuzzed = false;
  CHECK(skip_probability(entry, false) == doctest::Approx(0.75));
}
