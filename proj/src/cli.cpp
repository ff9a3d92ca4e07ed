#include "greenfuzz/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "greenfuzz/config.hpp"
#include "greenfuzz/errors.hpp"
#include "greenfuzz/rng.hpp"
#include "greenfuzz/stats.hpp"

namespace greenfuzz {

namespace fs = std::filesystem;

std::vector<AblationArm> ablation_arms() {
  return {{CminMode::coverage, HeuristicsMode::baseline},
          {CminMode::green, HeuristicsMode::baseline},
          {CminMode::coverage, HeuristicsMode::green},
          {CminMode::green, HeuristicsMode::green}};
}

MeanVar mean_variance(const std::vector<double>& samples) {
  MeanVar mv;
  if (samples.empty()) return mv;
  for (double s : samples) mv.mean += s;
  mv.mean /= static_cast<double>(samples.size());
  for (double s : samples) mv.variance += (s - mv.mean) * (s - mv.mean);
  mv.variance /= static_cast<double>(samples.size());
  return mv;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

ArmSummary summarise_arm(const AblationArm& arm,
                         std::vector<CampaignReport> reports) {
  ArmSummary summary;
  summary.arm = arm;
  summary.repetitions = static_cast<std::uint32_t>(reports.size());
  std::vector<double> throughput, energy_kj, coverage;
  for (const auto& report : reports) {
    throughput.push_back(report.execs_per_sec);
    energy_kj.push_back(report.energy_total_j() / 1000.0);
    if (report.coverage_pct) {
      coverage.push_back(*report.coverage_pct);
      summary.coverage_is_pct = true;
    } else {
      coverage.push_back(static_cast<double>(report.unique_edges));
    }
  }
  summary.throughput = mean_variance(throughput);
  summary.energy_kj = mean_variance(energy_kj);
  summary.coverage = mean_variance(coverage);
  summary.reports = std::move(reports);
  return summary;
}

}  // namespace

std::string format_summary_csv(const std::vector<ArmSummary>& arms) {
  std::string out =
      "cmin,fuzz,repetitions,throughput_mean,throughput_var,"
      "energy_kj_mean,energy_kj_var,coverage_mean,coverage_var,"
      "coverage_unit\n";
  for (const auto& arm : arms) {
    out += arm.arm.cmin == CminMode::green ? "green" : "afl";
    out += ',';
    out += arm.arm.heuristics == HeuristicsMode::green ? "green" : "afl";
    out += ',';
    out += std::to_string(arm.repetitions);
    out += ',';
    out += fixed6(arm.throughput.mean) + ',' + fixed6(arm.throughput.variance);
    out += ',';
    out += fixed6(arm.energy_kj.mean) + ',' + fixed6(arm.energy_kj.variance);
    out += ',';
    out += fixed6(arm.coverage.mean) + ',' + fixed6(arm.coverage.variance);
    out += ',';
    out += arm.coverage_is_pct ? "percent" : "unique_edges";
    out += '\n';
  }
  return out;
}

std::string format_summary_text(const std::vector<ArmSummary>& arms) {
  // Best per column: highest throughput and coverage, lowest energy.
  double best_throughput = -1.0, best_coverage = -1.0;
  double best_energy = std::numeric_limits<double>::max();
  for (const auto& arm : arms) {
    best_throughput = std::max(best_throughput, arm.throughput.mean);
    best_coverage = std::max(best_coverage, arm.coverage.mean);
    best_energy = std::min(best_energy, arm.energy_kj.mean);
  }

  std::ostringstream out;
  out << "cmin      fuzz      throughput (execs/s)      energy (kJ)        "
         "       coverage\n";
  for (const auto& arm : arms) {
    auto cell = [](const MeanVar& mv, bool best) {
      std::string s = fixed6(mv.mean) + " +/- " + fixed6(mv.variance);
      if (best) s += " *";
      return s;
    };
    char line[256];
    std::snprintf(line, sizeof(line), "%-9s %-9s %-25s %-25s %s\n",
                  arm.arm.cmin == CminMode::green ? "green" : "afl",
                  arm.arm.heuristics == HeuristicsMode::green ? "green" : "afl",
                  cell(arm.throughput, arm.throughput.mean == best_throughput)
                      .c_str(),
                  cell(arm.energy_kj, arm.energy_kj.mean == best_energy)
                      .c_str(),
                  cell(arm.coverage, arm.coverage.mean == best_coverage)
                      .c_str());
    out << line;
  }
  if (!arms.empty())
    out << "(coverage in "
        << (arms.front().coverage_is_pct ? "percent of declared edges"
                                         : "unique edges")
        << "; * marks the best column value; variance over "
        << arms.front().repetitions << " repetitions)\n";
  return out.str();
}

AblationResult run_ablation(const AblateOptions& options) {
  if (options.repetitions < 1)
    throw ConfigError("ablation needs at least one repetition");
  if (options.parallel && options.base.meter != "synthetic")
    throw ConfigError("--parallel is only available with the synthetic meter");

  fs::create_directories(options.output_dir);

  struct Job {
    AblationArm arm;
    std::uint32_t rep;
    CampaignConfig config;
  };
  std::vector<Job> jobs;
  for (const auto& arm : ablation_arms()) {
    for (std::uint32_t rep = 0; rep < options.repetitions; ++rep) {
      CampaignConfig config = options.base;
      config.cmin = arm.cmin;
      config.heuristics = arm.heuristics;
      config.rng_seed = derive_rep_seed(options.base.rng_seed, rep);
      config.output_dir =
          options.output_dir / arm.dir_name() / ("rep" + std::to_string(rep));
      config.validate();
      jobs.push_back({arm, rep, std::move(config)});
    }
  }

  std::vector<CampaignReport> reports(jobs.size());
  if (options.parallel) {
    std::vector<std::future<CampaignReport>> futures;
    futures.reserve(jobs.size());
    for (const auto& job : jobs)
      futures.push_back(std::async(std::launch::async, [&job] {
        return run_campaign(job.config);
      }));
    for (std::size_t i = 0; i < futures.size(); ++i)
      reports[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      reports[i] = run_campaign(jobs[i].config);
  }

  AblationResult result;
  const auto arms = ablation_arms();
  for (const auto& arm : arms) {
    std::vector<CampaignReport> arm_reports;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].arm.dir_name() == arm.dir_name())
        arm_reports.push_back(reports[i]);
    result.arms.push_back(summarise_arm(arm, std::move(arm_reports)));
  }

  result.summary_csv = options.output_dir / "summary.csv";
  result.summary_txt = options.output_dir / "summary.txt";
  {
    std::ofstream csv(result.summary_csv, std::ios::trunc);
    if (!csv)
      throw std::runtime_error("cannot write " + result.summary_csv.string());
    csv << format_summary_csv(result.arms);
    std::ofstream txt(result.summary_txt, std::ios::trunc);
    txt << format_summary_text(result.arms);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report aggregation

namespace {

void collect_campaign_dirs(const fs::path& path, std::vector<fs::path>& out) {
  std::error_code ec;
  if (fs::exists(path / "plot_data.csv", ec)) {
    out.push_back(path);
    return;
  }
  if (!fs::is_directory(path, ec)) return;
  std::vector<fs::path> children;
  for (const auto& entry : fs::directory_iterator(path, ec))
    if (entry.is_directory()) children.push_back(entry.path());
  std::sort(children.begin(), children.end());
  for (const auto& child : children) collect_campaign_dirs(child, out);
}

}  // namespace

ReportResult run_report(const ReportOptions& options) {
  if (options.inputs.empty()) throw ConfigError("no campaign inputs given");
  if (options.bin_seconds <= 0.0)
    throw ConfigError("time bin must be positive");

  std::vector<fs::path> campaign_dirs;
  for (const auto& input : options.inputs)
    collect_campaign_dirs(input, campaign_dirs);
  if (campaign_dirs.empty())
    throw ConfigError("no plot_data.csv found under the given inputs");

  struct Run {
    fs::path dir;
    std::vector<StatsTick> ticks;
  };
  std::map<std::string, std::vector<Run>> groups;
  double t_end = 0.0;
  for (const auto& dir : campaign_dirs) {
    Run run{dir, read_plot_data(dir / "plot_data.csv")};
    if (!run.ticks.empty())
      t_end = std::max(t_end, run.ticks.back().t_seconds);
    std::string label = "unknown";
    std::error_code ec;
    if (fs::exists(dir / "report.json", ec)) {
      const CampaignReport report = CampaignReport::read(dir);
      label = report.cmin + "_" + report.heuristics;
    }
    groups[label].push_back(std::move(run));
  }

  fs::create_directories(options.output_dir);
  ReportResult result;
  result.runs = campaign_dirs.size();
  result.groups = groups.size();
  result.curves_csv = options.output_dir / "edges_over_time.csv";
  result.summary_txt = options.output_dir / "report_summary.txt";

  // Shared 1-bin grid across every run; per-group mean of step-resampled
  // unique_edges.
  std::map<std::string, std::vector<double>> mean_by_group;
  std::size_t grid_len = 0;
  for (const auto& [label, runs] : groups) {
    std::vector<std::vector<double>> curves;
    for (const auto& run : runs)
      curves.push_back(
          resample_edges_over_time(run.ticks, options.bin_seconds, t_end));
    mean_by_group[label] = mean_curve(curves);
    grid_len = std::max(grid_len, mean_by_group[label].size());
  }

  {
    std::ofstream csv(result.curves_csv, std::ios::trunc);
    if (!csv)
      throw std::runtime_error("cannot write " + result.curves_csv.string());
    csv << "t_seconds";
    for (const auto& [label, curve] : mean_by_group) csv << ',' << label;
    csv << '\n';
    for (std::size_t i = 0; i < grid_len; ++i) {
      csv << fixed6(static_cast<double>(i) * options.bin_seconds);
      for (const auto& [label, curve] : mean_by_group)
        csv << ',' << fixed6(i < curve.size() ? curve[i] : 0.0);
      csv << '\n';
    }
  }

  {
    std::ofstream txt(result.summary_txt, std::ios::trunc);
    txt << "edges-over-time report (" << options.bin_seconds
        << " s bins, mean per configuration)\n\n";
    for (const auto& [label, runs] : groups) {
      txt << label << ": " << runs.size() << " run(s)\n";
      std::vector<double> to80;
      for (const auto& run : runs) {
        txt << "  " << run.dir.string() << '\n';
        to80.push_back(static_cast<double>(
            execs_to_reach_fraction(run.ticks, 0.8)));
      }
      const MeanVar mv = mean_variance(to80);
      txt << "  mean final edges: "
          << fixed6(mean_by_group[label].empty()
                        ? 0.0
                        : mean_by_group[label].back())
          << ", mean execs to 80% of final: " << fixed6(mv.mean) << "\n";
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Command-line front end

namespace {

// Merged file/flag configuration. Flags override file values; the meter
// environment variable overrides both.
class OptionSet {
 public:
  void load_file(const std::string& path) {
    file_values_ = parse_config_file(path);
  }

  void set_flag(const std::string& key, const std::string& value) {
    flag_values_[key] = value;
  }

  bool has(const std::string& key) const {
    return flag_values_.count(key) || file_values_.count(key);
  }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    if (auto it = flag_values_.find(key); it != flag_values_.end())
      return it->second;
    if (auto it = file_values_.find(key); it != file_values_.end())
      return it->second;
    return fallback;
  }

  std::uint64_t get_u64(const std::string& key) const {
    ConfigValues one{{key, get(key)}};
    return config_u64(one, key);
  }

  double get_double(const std::string& key) const {
    ConfigValues one{{key, get(key)}};
    return config_double(one, key);
  }

 private:
  ConfigValues file_values_;
  ConfigValues flag_values_;
};

std::string resolve_meter(const OptionSet& opts) {
  if (const char* env = std::getenv(kMeterEnv); env && *env) return env;
  return opts.get("meter", "synthetic");
}

ScheduleConstants sched_from_options(const OptionSet& opts) {
  ScheduleConstants k;
  if (opts.has("airtime_min_mult"))
    k.airtime_min_mult = opts.get_double("airtime_min_mult");
  if (opts.has("airtime_max_mult"))
    k.airtime_max_mult = opts.get_double("airtime_max_mult");
  if (opts.has("favoured_min_mult"))
    k.favoured_min_mult = opts.get_double("favoured_min_mult");
  if (opts.has("favoured_max_mult"))
    k.favoured_max_mult = opts.get_double("favoured_max_mult");
  if (opts.has("havoc_divisor"))
    k.havoc_divisor = opts.get_double("havoc_divisor");
  if (opts.has("havoc_min_execs"))
    k.havoc_min_execs = static_cast<std::uint32_t>(opts.get_u64("havoc_min_execs"));
  if (opts.has("havoc_max_mult"))
    k.havoc_max_mult = static_cast<std::uint32_t>(opts.get_u64("havoc_max_mult"));
  return k;
}

CampaignConfig campaign_from_options(const OptionSet& opts,
                                     bool need_output = true) {
  CampaignConfig config;
  if (!opts.has("target")) throw ConfigError("no target given (--target)");
  config.target = TargetSpec::parse(opts.get("target"));
  if (opts.has("timeout_ms"))
    config.target.timeout_ms =
        static_cast<std::uint32_t>(opts.get_u64("timeout_ms"));
  if (!opts.has("input"))
    throw ConfigError("no seed corpus given (--input)");
  config.corpus_dir = opts.get("input");
  if (need_output) {
    if (!opts.has("output")) throw ConfigError("no output directory (--output)");
    config.output_dir = opts.get("output");
  }
  config.meter = resolve_meter(opts);
  if (opts.has("cmin")) config.cmin = cmin_mode_from_string(opts.get("cmin"));
  if (opts.has("energy_heuristics"))
    config.heuristics = heuristics_from_string(opts.get("energy_heuristics"));
  if (opts.has("max_execs")) config.max_execs = opts.get_u64("max_execs");
  if (opts.has("duration"))
    config.duration_s = parse_duration_seconds(opts.get("duration"));
  if (opts.has("rng_seed")) config.rng_seed = opts.get_u64("rng_seed");
  if (opts.has("max_input_len"))
    config.max_input_len = opts.get_u64("max_input_len");
  config.sched = sched_from_options(opts);
  return config;
}

int cmd_fuzz(const OptionSet& opts) {
  CampaignConfig config = campaign_from_options(opts);
  config.validate();
  const CampaignReport report = run_campaign(config);
  std::cout << "campaign done: " << report.total_execs << " execs ("
            << report.profile_execs << " profiling), "
            << report.unique_edges << " unique edges, "
            << report.energy_total_j() << " J, "
            << report.unique_crashes << " unique crash(es)\n"
            << "corpus: " << report.cmin_summary.kept << "/"
            << report.cmin_summary.input_seeds << " seeds kept ("
            << report.cmin << " cmin)\n"
            << "report: " << (config.output_dir / "report.json").string()
            << '\n';
  return 0;
}

int cmd_cmin(const OptionSet& opts) {
  CampaignConfig config = campaign_from_options(opts);
  const std::string mode = opts.get("mode", "green");
  if (mode != "green" && mode != "coverage")
    throw ConfigError("cmin --mode must be green or coverage");

  std::vector<std::string> warnings;
  const auto seeds =
      load_seed_dir(config.corpus_dir, config.max_input_len, &warnings);
  for (const auto& warning : warnings)
    std::cerr << "warning: " << warning << '\n';
  if (seeds.empty())
    throw ConfigError("no usable seeds in '" + config.corpus_dir.string() +
                      "'");

  auto meter = make_meter(config.meter);
  const fs::path scratch = config.output_dir / "scratch";
  const ExecuteFn run = make_executor(config.target, *meter, scratch);
  const ProfileResult profile = profile_corpus(seeds, run);
  for (const auto& warning : profile.warnings)
    std::cerr << "warning: " << warning << '\n';
  for (const auto& crash : profile.crashes)
    std::cerr << "crash during profiling: " << crash.id << " (signal "
              << crash.term_signal << "), excluded\n";

  const MinimiseResult green = green_minimise(profile.records);
  const std::vector<std::string> coverage_kept =
      coverage_minimise(profile.records);
  const auto& kept = mode == "green" ? green.kept : coverage_kept;
  if (green.kept_fallback && mode == "green")
    std::cerr << "warning: no seed produced coverage; keeping the smallest "
                 "seed only\n";

  const Manifest manifest =
      write_minimised(profile.records, kept, config.output_dir, mode);

  const double green_energy = kept_energy_total(profile.records, green.kept);
  const double coverage_energy =
      kept_energy_total(profile.records, coverage_kept);

  std::cout << "kept " << manifest.kept_count << "/" << seeds.size()
            << " seeds, union " << manifest.union_edges << " edges\n";
  if (mode == "green") {
    const double saved = coverage_energy - green_energy;
    const double pct =
        coverage_energy > 0.0 ? 100.0 * saved / coverage_energy : 0.0;
    std::cout << "kept-corpus energy: " << green_energy
              << " J vs coverage-rule " << coverage_energy << " J ("
              << fixed6(pct) << "% saved)\n";
  }
  std::cout << "manifest: " << (config.output_dir / "manifest.json").string()
            << '\n';
  return 0;
}

int cmd_ablate(const OptionSet& opts, bool parallel) {
  AblateOptions options;
  options.base = campaign_from_options(opts);
  options.output_dir = options.base.output_dir;
  options.repetitions =
      opts.has("repetitions")
          ? static_cast<std::uint32_t>(opts.get_u64("repetitions"))
          : 3;
  options.parallel = parallel;

  const AblationResult result = run_ablation(options);
  std::cout << format_summary_text(result.arms);
  std::cout << "summary: " << result.summary_csv.string() << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs,
               const std::string& output, double bin_seconds) {
  ReportOptions options;
  for (const auto& input : inputs) options.inputs.emplace_back(input);
  options.output_dir = output;
  options.bin_seconds = bin_seconds;
  const ReportResult result = run_report(options);
  std::cout << "aggregated " << result.runs << " run(s) into "
            << result.groups << " configuration group(s)\n"
            << "curves: " << result.curves_csv.string() << '\n'
            << "summary: " << result.summary_txt.string() << '\n';
  return 0;
}

int cmd_fixture(const std::string& model, const std::string& out) {
  const std::size_t n = write_fixture_corpus(model, out);
  std::cout << "wrote " << n << " fixture seed(s) for model '" << model
            << "' to " << out << '\n';
  return 0;
}

// Registers the flags shared by fuzz/cmin/ablate on a subcommand and wires
// them into the OptionSet.
void add_common_flags(CLI::App* cmd, const std::shared_ptr<OptionSet>& opts,
                      bool with_toggles) {
  auto bind = [cmd, opts](const std::string& flag, const std::string& key,
                          const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [opts, key](const std::string& v) { opts->set_flag(key, v); },
        help);
  };
  cmd->add_option_function<std::string>(
      "--config",
      [opts](const std::string& path) { opts->load_file(path); },
      "key = value configuration file (flags override it)");
  bind("--target", "target", "synthetic:<model> or external:<command>");
  bind("--input,-i", "input", "seed corpus directory");
  bind("--output,-o", "output", "output directory");
  bind("--meter", "meter", "rapl|synthetic (GREENFUZZ_METER overrides)");
  bind("--timeout-ms", "timeout_ms", "external target timeout");
  bind("--max-input-len", "max_input_len", "input length cap in bytes");
  bind("--rng", "rng_seed", "campaign rng seed");
  bind("--max-execs", "max_execs", "stop after this many fuzzing executions");
  bind("--duration", "duration", "stop after this much campaign time (e.g. 90s)");
  bind("--airtime-min-mult", "airtime_min_mult", "energy airtime floor");
  bind("--airtime-max-mult", "airtime_max_mult", "energy airtime ceiling");
  bind("--favoured-min-mult", "favoured_min_mult", "favoured factor floor");
  bind("--favoured-max-mult", "favoured_max_mult", "favoured factor ceiling");
  bind("--havoc-divisor", "havoc_divisor", "perf score to havoc-exec divisor");
  bind("--havoc-min-execs", "havoc_min_execs", "havoc executions floor");
  bind("--havoc-max-mult", "havoc_max_mult", "perf score cap / 100");
  if (with_toggles) {
    bind("--cmin", "cmin", "corpus minimisation: green|coverage|off");
    cmd->add_option_function<std::string>(
        "--heuristics",
        [opts](const std::string& v) { opts->set_flag("energy_heuristics", v); },
        "scheduling: green|baseline (config key energy_heuristics = on|off)");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"greenfuzz — energy-aware coverage-guided fuzzer"};
  app.require_subcommand(1);

  auto fuzz_opts = std::make_shared<OptionSet>();
  CLI::App* fuzz = app.add_subcommand("fuzz", "run one fuzzing campaign");
  add_common_flags(fuzz, fuzz_opts, /*with_toggles=*/true);

  auto cmin_opts = std::make_shared<OptionSet>();
  CLI::App* cmin = app.add_subcommand("cmin", "minimise a seed corpus");
  add_common_flags(cmin, cmin_opts, /*with_toggles=*/false);
  cmin->add_option_function<std::string>(
      "--mode",
      [cmin_opts](const std::string& v) { cmin_opts->set_flag("mode", v); },
      "green|coverage");

  auto ablate_opts = std::make_shared<OptionSet>();
  bool ablate_parallel = false;
  CLI::App* ablate =
      app.add_subcommand("ablate", "run the 2x2 cmin/heuristics matrix");
  add_common_flags(ablate, ablate_opts, /*with_toggles=*/false);
  ablate->add_option_function<std::string>(
      "--repetitions,-R",
      [ablate_opts](const std::string& v) {
        ablate_opts->set_flag("repetitions", v);
      },
      "repetitions per configuration (default 3)");
  ablate->add_flag("--parallel", ablate_parallel,
                   "run campaigns concurrently (synthetic meter only)");

  std::vector<std::string> report_inputs;
  std::string report_output = "report_out";
  double report_bin = 1.0;
  CLI::App* report =
      app.add_subcommand("report", "aggregate edges-over-time curves");
  report->add_option("inputs", report_inputs,
                     "campaign directories or ablation roots")
      ->required();
  report->add_option("--output,-o", report_output, "output directory");
  report->add_option("--bin", report_bin, "time bin in seconds (default 1)");

  std::string fixture_model;
  std::string fixture_out = "seeds";
  CLI::App* fixture =
      app.add_subcommand("fixture", "write a built-in model's seed corpus");
  fixture->add_option("--model", fixture_model, "synthetic model name")
      ->required();
  fixture->add_option("--output,-o", fixture_out, "seed directory to create");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fuzz)) return cmd_fuzz(*fuzz_opts);
    if (app.got_subcommand(cmin)) return cmd_cmin(*cmin_opts);
    if (app.got_subcommand(ablate)) return cmd_ablate(*ablate_opts, ablate_parallel);
    if (app.got_subcommand(report))
      return cmd_report(report_inputs, report_output, report_bin);
    if (app.got_subcommand(fixture))
      return cmd_fixture(fixture_model, fixture_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace greenfuzz
