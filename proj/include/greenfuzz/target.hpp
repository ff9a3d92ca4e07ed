// target.hpp
//
// Fuzz-target descriptions. Two kinds:
//
//   synthetic — in-process models with deterministic edge traces and a
//     declared cost model (per-edge joules, joules per input byte, fixed
//     overheads) plus a time model. They make every heuristic testable
//     without energy-measurement hardware.
//
//   external — a spawned command fed the input via stdin or a file
//     argument, reporting its trace through the showmap channel.
//
// Built-in models double as experiment fixtures:
//   fork3         — small branchy demo target with a crash trigger.
//   keymatch      — two input families with identical coverage and a 10x
//                   energy gap between them; the cheap/expensive corpus
//                   minimisation fixture.
//   nested_parser — depth-structured parser whose deep edges are easy to
//                   reach from structured seeds and hard to reach from
//                   the equal-coverage replay blobs; the edge-growth
//                   fixture.
//   uniform       — constant per-execution energy; control for baseline
//                   equivalence checks.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greenfuzz/coverage.hpp"
#include "greenfuzz/energy.hpp"

namespace greenfuzz {

struct SyntheticOutcome {
  bool crashed = false;
};

// Declared energy/time model of a synthetic target. Joules accumulate as
//   cpu = base_cpu + byte_cost * len(input) + sum(count[e] * edge_cost(e))
//   ram = base_ram + ram_fraction * cpu
// and the execution takes time_base_us + time_per_byte_us * len(input).
// All constants should be whole microjoules so credited readings stay
// exact.
struct CostModel {
  std::vector<std::pair<EdgeId, double>> edge_cost;  // joules per hit
  double default_edge_cost = 0.0;
  double byte_cost = 0.0;
  double base_cpu = 0.0;
  double base_ram = 0.0;
  double ram_fraction = 0.0;
  std::uint64_t time_base_us = 0;
  std::uint64_t time_per_byte_us = 0;
};

// Evaluates a cost model over one execution's raw hit counts.
EnergyReading synthetic_cost(std::size_t input_len,
                             std::span<const std::uint32_t> counts,
                             const CostModel& model);

class SyntheticTarget {
 public:
  virtual ~SyntheticTarget() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t map_size() const = 0;

  // Count of edges this model can ever emit; the coverage-percentage
  // denominator.
  virtual std::uint64_t total_edges() const = 0;

  // Fills raw hit counts (caller provides a zeroed map_size() buffer).
  virtual SyntheticOutcome run(std::span<const std::uint8_t> input,
                               std::span<std::uint32_t> counts) const = 0;

  // Deterministic energy/time for the run that produced `counts`.
  virtual EnergyReading cost(std::span<const std::uint8_t> input,
                             std::span<const std::uint32_t> counts) const = 0;

  // Canonical seed corpus for experiments with this model; empty when the
  // model has no designated fixture.
  virtual std::vector<std::pair<std::string, std::vector<std::uint8_t>>>
  fixture_corpus() const {
    return {};
  }
};

// Name lookup over built-in models plus any registered extras. Returns
// nullptr when unknown.
const SyntheticTarget* find_synthetic_target(const std::string& name);

// Registers an extra model (tests, experiments). Not thread-safe; call
// before campaigns start.
void register_synthetic_target(std::unique_ptr<SyntheticTarget> target);

std::vector<std::string> synthetic_target_names();

// Writes a model's fixture corpus into `dir`; returns file count.
// Throws ConfigError for unknown models or models without a fixture.
std::size_t write_fixture_corpus(const std::string& model_name,
                                 const std::filesystem::path& dir);

struct TargetSpec {
  enum class Kind { synthetic, external };
  enum class InputMode { stdin_pipe, file_arg };

  Kind kind = Kind::synthetic;
  std::string model;                  // synthetic model name
  std::vector<std::string> command;   // external argv; "@@" -> input path
  InputMode input_mode = InputMode::stdin_pipe;
  std::uint32_t timeout_ms = 1000;
  std::size_t map_size = kDefaultMapSize;
  std::optional<std::uint64_t> total_edges_declared;

  // Parses "synthetic:<model>" or "external:<argv0> [args...]" and
  // resolves map size / declared edges for synthetic models.
  static TargetSpec parse(const std::string& text);

  std::string describe() const;
};

}  // namespace greenfuzz
