// cli.hpp
//
// Operator surface: the `greenfuzz` subcommands and the ablation/report
// machinery behind them. Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error. The GREENFUZZ_METER environment
// variable overrides the configured meter backend.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "greenfuzz/campaign.hpp"

namespace greenfuzz {

inline constexpr const char* kMeterEnv = "GREENFUZZ_METER";

// ---------------------------------------------------------------------------
// Ablation: the 2x2 (cmin x heuristics) matrix, R repetitions each.

struct AblationArm {
  CminMode cmin;
  HeuristicsMode heuristics;

  std::string label() const {
    return (cmin == CminMode::green ? std::string("green") : "afl") + "," +
           (heuristics == HeuristicsMode::green ? "green" : "afl");
  }
  std::string dir_name() const {
    return (cmin == CminMode::green ? std::string("green") : "afl") + "_" +
           (heuristics == HeuristicsMode::green ? "green" : "afl");
  }
};

// Fixed arm order matching the usual results-table layout.
std::vector<AblationArm> ablation_arms();

struct AblateOptions {
  CampaignConfig base;        // cmin/heuristics/output ignored; rng_seed is
                              // the base seed reps derive from
  std::filesystem::path output_dir;
  std::uint32_t repetitions = 3;
  bool parallel = false;      // synthetic meter only
};

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population variance; 0 for a single repetition
};

MeanVar mean_variance(const std::vector<double>& samples);

struct ArmSummary {
  AblationArm arm;
  std::uint32_t repetitions = 0;
  MeanVar throughput;   // execs per second
  MeanVar energy_kj;    // campaign total, kilojoules
  MeanVar coverage;     // percent when declared, else unique edges
  bool coverage_is_pct = false;
  std::vector<CampaignReport> reports;  // one per repetition
};

struct AblationResult {
  std::vector<ArmSummary> arms;
  std::filesystem::path summary_csv;
  std::filesystem::path summary_txt;
};

// Runs the full matrix sequentially (or arm-parallel with the synthetic
// meter), writes per-campaign directories plus summary.csv / summary.txt
// under options.output_dir, and returns the aggregated result.
AblationResult run_ablation(const AblateOptions& options);

std::string format_summary_csv(const std::vector<ArmSummary>& arms);
std::string format_summary_text(const std::vector<ArmSummary>& arms);

// ---------------------------------------------------------------------------
// Report aggregation (edges-over-time mean curves).

struct ReportOptions {
  std::vector<std::filesystem::path> inputs;  // campaign dirs or roots
  std::filesystem::path output_dir;
  double bin_seconds = 1.0;
};

struct ReportResult {
  std::filesystem::path curves_csv;
  std::filesystem::path summary_txt;
  std::size_t runs = 0;
  std::size_t groups = 0;
};

ReportResult run_report(const ReportOptions& options);

// ---------------------------------------------------------------------------
// Entry point shared by the binary and the tests.

int run_cli(int argc, const char* const* argv);

}  // namespace greenfuzz
