// campaign.hpp
//
// Campaign orchestration: profile the seed corpus, optionally minimise it,
// then run the fuzzing loop (cull -> select -> mutate -> execute -> update
// bounds/champions) until the execution budget or time budget runs out.
//
// Two independent toggles mirror the experiment matrix:
//   cmin        green | coverage | off   (corpus minimisation)
//   heuristics  green | baseline        (energy-guided scheduling)
// With `baseline`, scheduling never consults energy readings; they are
// still accumulated for the stats series.
//
// With a deterministic meter the campaign runs on a virtual clock advanced
// by the targets' declared execution times, making reports and plot data
// byte-reproducible for a fixed rng seed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "greenfuzz/corpus.hpp"
#include "greenfuzz/energy.hpp"
#include "greenfuzz/mutate.hpp"
#include "greenfuzz/scheduler.hpp"
#include "greenfuzz/stats.hpp"
#include "greenfuzz/target.hpp"

namespace greenfuzz {

enum class CminMode { green, coverage, off };
enum class HeuristicsMode { green, baseline };

std::string to_string(CminMode mode);
std::string to_string(HeuristicsMode mode);
CminMode cmin_mode_from_string(const std::string& s);
HeuristicsMode heuristics_from_string(const std::string& s);

struct CampaignConfig {
  TargetSpec target;
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  std::string meter = "synthetic";
  CminMode cmin = CminMode::off;
  HeuristicsMode heuristics = HeuristicsMode::baseline;
  std::optional<std::uint64_t> max_execs;  // fuzzing-execution budget
  std::optional<double> duration_s;        // campaign-clock budget
  std::uint64_t rng_seed = 1;
  ScheduleConstants sched;
  std::size_t max_input_len = kDefaultMaxInputLen;
  bool write_artifacts = true;  // queue/, crashes/, cmin/, report files

  // Throws ConfigError unless exactly one stop condition is set and the
  // directories/target are plausible.
  void validate() const;
};

struct ScheduleEvent {
  std::string entry_id;
  std::uint64_t havoc_execs = 0;
};

struct CminSummary {
  std::string mode;
  std::size_t input_seeds = 0;
  std::size_t kept = 0;
  double kept_energy_j = 0.0;
  // Energy of the set the other minimiser would have kept; lets reports
  // quote the saving without a second profiling pass.
  double alternative_energy_j = 0.0;
  bool fallback = false;
};

struct CampaignReport {
  std::string target;
  std::string meter;
  std::size_t map_size = 0;
  std::string cmin;
  std::string heuristics;
  std::uint64_t rng_seed = 0;
  std::string config_digest;
  std::optional<std::uint64_t> max_execs;
  std::optional<double> duration_s;

  std::size_t corpus_seeds = 0;
  std::size_t crashed_seeds = 0;  // rejected during profiling
  std::uint64_t profile_execs = 0;
  CminSummary cmin_summary;

  std::uint64_t total_execs = 0;
  std::uint64_t fuzz_execs = 0;
  std::uint64_t unique_edges = 0;
  std::optional<double> coverage_pct;
  double cpu_j = 0.0;
  double ram_j = 0.0;
  double elapsed_s = 0.0;
  double execs_per_sec = 0.0;
  std::size_t queue_len = 0;
  std::size_t favoured_count = 0;
  std::size_t unique_crashes = 0;
  std::uint64_t timeouts = 0;

  std::vector<ScheduleEvent> schedule;
  std::vector<StatsTick> ticks;
  std::vector<std::string> warnings;

  double energy_total_j() const { return cpu_j + ram_j; }

  nlohmann::ordered_json to_json() const;
  static CampaignReport from_json(const nlohmann::ordered_json& doc);

  // report.json + plot_data.csv
  void write(const std::filesystem::path& dir) const;
  static CampaignReport read(const std::filesystem::path& dir);
};

// Runs one campaign with an injected meter (must match the config's
// declared kind for reports to make sense).
CampaignReport run_campaign(const CampaignConfig& config, Meter& meter);

// Convenience: builds the meter named by config.meter.
CampaignReport run_campaign(const CampaignConfig& config);

// Fingerprint over everything except the two toggles and file-system
// locations: target, meter, stop condition, rng seed, constants, and the
// corpus content itself. Configuration arms of one experiment share it.
std::string campaign_config_digest(const CampaignConfig& config,
                                   std::span<const SeedInput> seeds);

}  // namespace greenfuzz
