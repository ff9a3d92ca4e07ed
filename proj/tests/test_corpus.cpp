#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "greenfuzz/corpus.hpp"
#include "greenfuzz/errors.hpp"
#include "greenfuzz/rng.hpp"

using namespace greenfuzz;

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMap = 64;

SeedRecord record_of(std::string id, std::vector<EdgeId> edges, double energy_j,
                     std::size_t size = 10, std::uint64_t exec_us = 100) {
  std::vector<std::uint32_t> raw(kMap, 0);
  for (EdgeId e : edges) raw[e] = 1;
  SeedRecord record;
  record.id = std::move(id);
  record.bytes.assign(size, 0xab);
  record.trace = EdgeTrace::from_counts(raw);
  record.energy = {energy_j, 0.0, exec_us};
  record.exec_time_us = exec_us;
  record.size_bytes = size;
  return record;
}

// Brute-force oracle, independent of the library: for every covered edge,
// scan all records and pick the minimum by (energy, size, exec, id).
std::map<EdgeId, std::string> oracle_champions(
    const std::vector<SeedRecord>& records) {
  std::map<EdgeId, std::string> champions;
  for (std::size_t e = 0; e < kMap; ++e) {
    const SeedRecord* best = nullptr;
    for (const auto& r : records) {
      if (!r.trace[e]) continue;
      if (!best) {
        best = &r;
        continue;
      }
      const auto key = [](const SeedRecord& s) {
        return std::make_tuple(s.energy.total(), s.size_bytes, s.exec_time_us,
                               s.id);
      };
      if (key(r) < key(*best)) best = &r;
    }
    if (best) champions[static_cast<EdgeId>(e)] = best->id;
  }
  return champions;
}

std::set<EdgeId> edge_union(const std::vector<SeedRecord>& records,
                            const std::vector<std::string>& kept) {
  std::set<std::string> keep(kept.begin(), kept.end());
  std::set<EdgeId> edges;
  for (const auto& r : records)
    if (keep.count(r.id))
      for (EdgeId e : r.trace.edges()) edges.insert(e);
  return edges;
}

std::set<EdgeId> edge_union_all(const std::vector<SeedRecord>& records) {
  std::set<EdgeId> edges;
  for (const auto& r : records)
    for (EdgeId e : r.trace.edges()) edges.insert(e);
  return edges;
}

fs::path make_temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("gf_corpus_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("green_minimise keeps the cheapest seed per edge") {
  SUBCASE("distinct champions") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("A", {1, 2}, 10.0));
    records.push_back(record_of("B", {2}, 2.0));
    records.push_back(record_of("C", {3}, 5.0));
    const auto result = green_minimise(records);
    CHECK(result.kept == std::vector<std::string>{"A", "B", "C"});
    CHECK(result.champions.by_edge.at(1) == "A");
    CHECK(result.champions.by_edge.at(2) == "B");
    CHECK(result.champions.by_edge.at(3) == "C");
  }

  SUBCASE("dominated seed is dropped") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("A", {1, 2}, 10.0));
    records.push_back(record_of("B", {1, 2}, 2.0));
    const auto result = green_minimise(records);
    CHECK(result.kept == std::vector<std::string>{"B"});
  }

  SUBCASE("single seed is kept") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("only", {5}, 1.0));
    const auto result = green_minimise(records);
    CHECK(result.kept == std::vector<std::string>{"only"});
  }

  SUBCASE("empty input is legal") {
    const auto result = green_minimise({});
    CHECK(result.kept.empty());
    CHECK_FALSE(result.kept_fallback);
  }

  SUBCASE("all-empty traces fall back to the smallest seed") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("big", {}, 1.0, 20));
    records.push_back(record_of("small", {}, 9.0, 3));
    const auto result = green_minimise(records);
    CHECK(result.kept == std::vector<std::string>{"small"});
    CHECK(result.kept_fallback);
  }
}

TEST_CASE("green_minimise matches the brute-force oracle on random corpora") {
  Rng rng(20250810);
  for (int round = 0; round < 100; ++round) {
    std::vector<SeedRecord> records;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      std::vector<EdgeId> edges;
      const int k = static_cast<int>(rng.below(8));
      for (int j = 0; j < k; ++j)
        edges.push_back(static_cast<EdgeId>(rng.below(kMap)));
      // Small discrete energy grid so ties happen regularly.
      const double energy = 0.5 * static_cast<double>(1 + rng.below(6));
      records.push_back(record_of("seed_" + std::to_string(i), edges, energy,
                                  5 + rng.below(10), 50 + rng.below(100)));
    }

    const auto oracle = oracle_champions(records);
    const auto result = green_minimise(records);

    CHECK(result.champions.by_edge.size() == oracle.size());
    for (const auto& [edge, id] : oracle)
      CHECK(result.champions.by_edge.at(edge) == id);

    std::set<std::string> oracle_kept;
    for (const auto& [edge, id] : oracle) oracle_kept.insert(id);
    CHECK(result.kept ==
          std::vector<std::string>(oracle_kept.begin(), oracle_kept.end()));

    // Coverage preservation (when any edge exists at all).
    if (!oracle.empty())
      CHECK(edge_union(records, result.kept) == edge_union_all(records));

    // Champion minimality.
    for (const auto& [edge, id] : result.champions.by_edge) {
      double champion_energy = 0.0;
      for (const auto& r : records)
        if (r.id == id) champion_energy = r.energy.total();
      for (const auto& r : records)
        if (r.trace[edge]) CHECK(champion_energy <= r.energy.total());
    }
  }
}

TEST_CASE("green_minimise is independent of record order") {
  Rng rng(99);
  std::vector<SeedRecord> records;
  for (int i = 0; i < 12; ++i) {
    std::vector<EdgeId> edges;
    for (int j = 0; j < 4; ++j)
      edges.push_back(static_cast<EdgeId>(rng.below(16)));
    records.push_back(record_of("s" + std::to_string(i), edges,
                                0.5 * static_cast<double>(1 + rng.below(3)),
                                4 + rng.below(4)));
  }
  const auto forward = green_minimise(records);
  std::reverse(records.begin(), records.end());
  const auto backward = green_minimise(records);
  CHECK(forward.kept == backward.kept);
  CHECK(forward.champions.by_edge == backward.champions.by_edge);
}

TEST_CASE("green champion assignment minimises total kept energy") {
  // Against exhaustive per-edge assignment enumeration on small corpora:
  // no other coverage-preserving champion assignment yields a cheaper
  // kept-set energy sum.
  Rng rng(31337);
  for (int round = 0; round < 20; ++round) {
    std::vector<SeedRecord> records;
    const int n = 2 + static_cast<int>(rng.below(5));  // <= 6 seeds
    for (int i = 0; i < n; ++i) {
      std::vector<EdgeId> edges;
      const int k = 1 + static_cast<int>(rng.below(3));
      for (int j = 0; j < k; ++j)
        edges.push_back(static_cast<EdgeId>(rng.below(6)));
      records.push_back(record_of("s" + std::to_string(i), edges,
                                  0.25 * static_cast<double>(1 + rng.below(8)),
                                  4 + rng.below(4)));
    }
    const auto result = green_minimise(records);
    const double green_energy = kept_energy_total(records, result.kept);

    // Enumerate every per-edge champion assignment.
    std::vector<EdgeId> edges(edge_union_all(records).begin(),
                              edge_union_all(records).end());
    std::vector<std::vector<const SeedRecord*>> candidates;
    for (EdgeId e : edges) {
      std::vector<const SeedRecord*> hitting;
      for (const auto& r : records)
        if (r.trace[e]) hitting.push_back(&r);
      candidates.push_back(hitting);
    }
    std::vector<std::size_t> pick(edges.size(), 0);
    bool done = edges.empty();
    double best = green_energy;
    while (!done) {
      std::set<std::string> kept_ids;
      for (std::size_t i = 0; i < edges.size(); ++i)
        kept_ids.insert(candidates[i][pick[i]]->id);
      const std::vector<std::string> kept(kept_ids.begin(), kept_ids.end());
      best = std::min(best, kept_energy_total(records, kept));
      std::size_t carry = 0;
      while (carry < pick.size()) {
        if (++pick[carry] < candidates[carry].size()) break;
        pick[carry] = 0;
        ++carry;
      }
      done = carry == pick.size();
    }
    CHECK(green_energy <= best + 1e-12);
  }
}

TEST_CASE("coverage_minimise follows the greedy edge walk") {
  SUBCASE("covering seed beats the smaller latecomer") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("A", {1, 2}, 1.0, 10));
    records.push_back(record_of("B", {2}, 1.0, 2));
    CHECK(coverage_minimise(records) == std::vector<std::string>{"A"});
  }

  SUBCASE("disjoint seeds are all kept") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("A", {1}, 1.0));
    records.push_back(record_of("B", {2}, 1.0));
    records.push_back(record_of("C", {3}, 1.0));
    CHECK(coverage_minimise(records) ==
          std::vector<std::string>{"A", "B", "C"});
  }

  SUBCASE("duplicate traces keep exactly one winner") {
    std::vector<SeedRecord> records;
    records.push_back(record_of("dup_b", {4, 5}, 1.0, 8));
    records.push_back(record_of("dup_a", {4, 5}, 1.0, 8));
    CHECK(coverage_minimise(records) == std::vector<std::string>{"dup_a"});
  }

  SUBCASE("coverage is preserved on random corpora") {
    Rng rng(555);
    for (int round = 0; round < 50; ++round) {
      std::vector<SeedRecord> records;
      const int n = 1 + static_cast<int>(rng.below(15));
      for (int i = 0; i < n; ++i) {
        std::vector<EdgeId> edges;
        const int k = static_cast<int>(rng.below(6));
        for (int j = 0; j < k; ++j)
          edges.push_back(static_cast<EdgeId>(rng.below(kMap)));
        records.push_back(record_of("s" + std::to_string(i), edges, 1.0,
                                    4 + rng.below(16)));
      }
      const auto kept = coverage_minimise(records);
      CHECK(edge_union(records, kept) == edge_union_all(records));
    }
  }
}

TEST_CASE("profile_corpus runs each seed once and flags crashes") {
  // A stub executor doubles as the oracle: deterministic trace and energy
  // per input, crash on a marker byte.
  std::size_t calls = 0;
  const ExecuteFn run = [&calls](std::span<const std::uint8_t> input) {
    ++calls;
    ExecResult result(kMap);
    if (!input.empty() && input[0] == 0xEE) {
      result.status = ExecResult::Status::crash;
      result.term_signal = 6;
      return result;
    }
    std::vector<std::uint32_t> raw(kMap, 0);
    for (auto b : input) raw[b % kMap] += 1;
    result.trace = EdgeTrace::from_counts(raw);
    result.energy = {0.001 * static_cast<double>(input.size()), 0.0, 50};
    result.exec_time_us = 50;
    return result;
  };

  SUBCASE("three healthy seeds") {
    std::vector<SeedInput> seeds = {{"a", {1, 2}}, {"b", {3}}, {"c", {4, 5, 6}}};
    const auto profile = profile_corpus(seeds, run);
    CHECK(calls == 3);
    CHECK(profile.total_execs == 3);
    CHECK(profile.records.size() == 3);
    CHECK(profile.crashes.empty());
    CHECK(profile.records[0].id == "a");
    CHECK(profile.records[0].size_bytes == 2);
    CHECK(profile.records[0].energy.cpu_joules == doctest::Approx(0.002));
    CHECK(profile.records[2].trace.edge_count() == 3);
  }

  SUBCASE("empty corpus") {
    const auto profile = profile_corpus({}, run);
    CHECK(profile.records.empty());
    CHECK(profile.total_execs == 0);
  }

  SUBCASE("crashing seed is excluded but reported") {
    std::vector<SeedInput> seeds = {{"ok1", {1}}, {"bad", {0xEE}}, {"ok2", {2}}};
    const auto profile = profile_corpus(seeds, run);
    CHECK(profile.records.size() == 2);
    REQUIRE(profile.crashes.size() == 1);
    CHECK(profile.crashes[0].id == "bad");
    CHECK(profile.crashes[0].term_signal == 6);
  }
}

TEST_CASE("load_seed_dir sorts, skips unreadable entries, and caps size") {
  const fs::path dir = make_temp_dir("load");
  std::ofstream(dir / "b.bin", std::ios::binary) << "BB";
  std::ofstream(dir / "a.bin", std::ios::binary) << "A";
  std::ofstream(dir / "big.bin", std::ios::binary) << std::string(100, 'x');
  fs::create_symlink(dir / "gone.bin", dir / "dangling.bin");

  std::vector<std::string> warnings;
  const auto seeds = load_seed_dir(dir, 10, &warnings);
  REQUIRE(seeds.size() == 2);
  CHECK(seeds[0].id == "a.bin");
  CHECK(seeds[1].id == "b.bin");
  CHECK(warnings.size() == 2);  // oversize + dangling symlink

  CHECK_THROWS_AS(load_seed_dir(dir / "missing", 10, nullptr), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("write_minimised copies kept seeds and writes a manifest") {
  const fs::path dir = make_temp_dir("write");

  std::vector<SeedRecord> records;
  records.push_back(record_of("k1", {1}, 1.0, 4));
  records.push_back(record_of("k2", {2}, 2.0, 4));
  records.push_back(record_of("dropped", {1}, 9.0, 4));

  SUBCASE("kept seeds land on disk with a manifest") {
    const std::vector<std::string> kept = {"k1", "k2"};
    const auto manifest = write_minimised(records, kept, dir, "green");
    CHECK(manifest.kept_count == 2);
    CHECK(manifest.union_edges == 2);
    CHECK(fs::exists(dir / "k1"));
    CHECK(fs::exists(dir / "k2"));
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK_FALSE(fs::exists(dir / "dropped"));
  }

  SUBCASE("empty kept set still writes a manifest") {
    const auto manifest = write_minimised(records, {}, dir, "green");
    CHECK(manifest.kept_count == 0);
    CHECK(fs::exists(dir / "manifest.json"));
  }

  SUBCASE("colliding sanitized names get a hash suffix") {
    std::vector<SeedRecord> clash;
    clash.push_back(record_of("x/y", {1}, 1.0, 4));
    clash.push_back(record_of("x?y", {2}, 2.0, 4));
    const std::vector<std::string> kept = {"x/y", "x?y"};
    const auto manifest = write_minimised(clash, kept, dir, "green");
    REQUIRE(manifest.entries.size() == 2);
    CHECK(manifest.entries[0].file_name != manifest.entries[1].file_name);
    for (const auto& entry : manifest.entries)
      CHECK(fs::exists(dir / entry.file_name));
  }

  fs::remove_all(dir);
}
