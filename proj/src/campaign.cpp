#include "greenfuzz/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "greenfuzz/errors.hpp"
#include "greenfuzz/exec.hpp"
#include "greenfuzz/hash.hpp"
#include "greenfuzz/mutate.hpp"
#include "greenfuzz/rng.hpp"

namespace greenfuzz {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string to_string(CminMode mode) {
  switch (mode) {
    case CminMode::green: return "green";
    case CminMode::coverage: return "coverage";
    case CminMode::off: return "off";
  }
  return "off";
}

std::string to_string(HeuristicsMode mode) {
  return mode == HeuristicsMode::green ? "green" : "baseline";
}

CminMode cmin_mode_from_string(const std::string& s) {
  if (s == "green") return CminMode::green;
  if (s == "coverage" || s == "afl") return CminMode::coverage;
  if (s == "off" || s == "none") return CminMode::off;
  throw ConfigError("unknown cmin mode '" + s + "' (green|coverage|off)");
}

HeuristicsMode heuristics_from_string(const std::string& s) {
  if (s == "green" || s == "on") return HeuristicsMode::green;
  if (s == "baseline" || s == "afl" || s == "off")
    return HeuristicsMode::baseline;
  throw ConfigError("unknown heuristics mode '" + s + "' (green|baseline)");
}

void CampaignConfig::validate() const {
  if (max_execs.has_value() == duration_s.has_value())
    throw ConfigError("set exactly one stop condition (max_execs xor duration)");
  if (duration_s && *duration_s < 0.0)
    throw ConfigError("duration must be nonnegative");
  if (corpus_dir.empty()) throw ConfigError("corpus directory not set");
  if (output_dir.empty()) throw ConfigError("output directory not set");
  if (target.kind == TargetSpec::Kind::synthetic &&
      !find_synthetic_target(target.model))
    throw ConfigError("unknown synthetic model '" + target.model + "'");
  if (target.kind == TargetSpec::Kind::external && target.command.empty())
    throw ConfigError("external target has no command");
  if (sched.havoc_divisor <= 0.0)
    throw ConfigError("havoc divisor must be positive");
}

std::string campaign_config_digest(const CampaignConfig& config,
                                   std::span<const SeedInput> seeds) {
  std::uint64_t h = fnv1a64(config.target.describe());
  h = fnv1a64(config.meter, h);
  h = fnv1a64(std::to_string(config.target.map_size), h);
  h = fnv1a64(config.max_execs ? "execs:" + std::to_string(*config.max_execs)
                               : "duration:" + std::to_string(*config.duration_s),
              h);
  h = fnv1a64(std::to_string(config.rng_seed), h);
  h = fnv1a64(std::to_string(config.max_input_len), h);
  const auto& k = config.sched;
  for (double v : {k.airtime_min_mult, k.airtime_max_mult, k.favoured_min_mult,
                   k.favoured_max_mult, k.havoc_divisor})
    h = fnv1a64(std::to_string(v), h);
  h = fnv1a64(std::to_string(k.havoc_min_execs), h);
  h = fnv1a64(std::to_string(k.havoc_max_mult), h);
  for (const auto& seed : seeds) {
    h = fnv1a64(seed.id, h);
    h = fnv1a64(std::span<const std::uint8_t>(seed.bytes), h);
  }
  return to_hex(h);
}

namespace {

// Virtual when the meter is deterministic, wall otherwise.
class CampaignClock {
 public:
  explicit CampaignClock(bool virtual_time)
      : virtual_(virtual_time),
        wall_start_(std::chrono::steady_clock::now()) {}

  void advance_us(std::uint64_t us) { virtual_us_ += us; }

  std::uint64_t elapsed_us() const {
    if (virtual_) return virtual_us_;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - wall_start_)
            .count());
  }

  double elapsed_s() const {
    return static_cast<double>(elapsed_us()) / 1e6;
  }

 private:
  bool virtual_;
  std::uint64_t virtual_us_ = 0;
  std::chrono::steady_clock::time_point wall_start_;
};

std::string queue_entry_name(std::size_t seq, const std::string& origin) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id_%06zu_", seq);
  return buf + origin;
}

class CampaignRun {
 public:
  CampaignRun(const CampaignConfig& config, Meter& meter)
      : cfg_(config),
        meter_(meter),
        caps_(meter.capabilities()),
        clock_(caps_.deterministic),
        rng_(config.rng_seed),
        map_(config.target.map_size),
        champions_(config.target.map_size) {}

  CampaignReport run();

 private:
  bool green() const { return cfg_.heuristics == HeuristicsMode::green; }

  double entry_score(const SeedRecord& seed) const {
    return green() ? favoured_score(seed, bounds_, cfg_.sched)
                   : coverage_only_score(seed);
  }

  std::uint64_t remaining_budget() const {
    if (!cfg_.max_execs) return UINT64_MAX;
    return *cfg_.max_execs - std::min(*cfg_.max_execs, fuzz_execs_);
  }

  bool stop_reached() const {
    if (cfg_.max_execs) return remaining_budget() == 0;
    return clock_.elapsed_s() >= *cfg_.duration_s;
  }

  void account(const ExecResult& result) {
    ++total_execs_;
    cpu_j_ += result.energy.cpu_joules;
    ram_j_ += result.energy.ram_joules;
    clock_.advance_us(result.exec_time_us);
  }

  void maybe_tick(bool force = false) {
    const double t = clock_.elapsed_s();
    const bool due = total_execs_ >= last_tick_execs_ + 100 ||
                     t >= last_tick_t_ + 1.0;
    if (!force && !due) return;
    if (!ticks_.empty() && t <= ticks_.back().t_seconds) return;
    StatsTick tick;
    tick.t_seconds = t;
    tick.total_execs = total_execs_;
    tick.unique_edges = map_.unique_edges();
    tick.cumulative_cpu_j = cpu_j_;
    tick.cumulative_ram_j = ram_j_;
    tick.execs_per_sec =
        t > 0.0 ? static_cast<double>(total_execs_) / t : 0.0;
    tick.queue_len = queue_.size();
    tick.favoured_count = favoured_count_;
    ticks_.push_back(tick);
    last_tick_execs_ = total_execs_;
    last_tick_t_ = t;
  }

  void save_crash(const ExecResult& result,
                  std::span<const std::uint8_t> bytes) {
    const std::uint64_t digest = result.trace.digest();
    if (!crash_digests_.insert(digest).second) return;
    ++unique_crashes_;
    if (!cfg_.write_artifacts) return;
    const fs::path path = cfg_.output_dir / "crashes" / (to_hex(digest) + ".bin");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out)
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
  }

  void enqueue(SeedRecord record, std::uint32_t depth, std::uint32_t handicap) {
    if (cfg_.write_artifacts && depth > 0) {
      const fs::path path = cfg_.output_dir / "queue" / (record.id + ".bin");
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (out)
        out.write(reinterpret_cast<const char*>(record.bytes.data()),
                  static_cast<std::streamsize>(record.bytes.size()));
    }
    QueueEntry entry;
    entry.seed = std::move(record);
    entry.depth = depth;
    entry.handicap = handicap;
    queue_.push_back(std::move(entry));
  }

  void fuzz_one(std::size_t idx, const ExecuteFn& run);

  const CampaignConfig& cfg_;
  Meter& meter_;
  MeterCapabilities caps_;
  CampaignClock clock_;
  Rng rng_;

  CoverageMap map_;
  ChampionTable champions_;
  EnergyBounds bounds_;
  std::vector<QueueEntry> queue_;

  std::uint64_t total_execs_ = 0;
  std::uint64_t fuzz_execs_ = 0;
  double cpu_j_ = 0.0;
  double ram_j_ = 0.0;
  std::uint64_t timeouts_ = 0;
  std::size_t unique_crashes_ = 0;
  std::size_t favoured_count_ = 0;
  std::uint32_t cycles_done_ = 0;

  std::unordered_set<std::uint64_t> crash_digests_;
  std::vector<StatsTick> ticks_;
  std::uint64_t last_tick_execs_ = 0;
  double last_tick_t_ = 0.0;
  std::vector<ScheduleEvent> schedule_;
  std::vector<std::string> warnings_;

  friend CampaignReport run_campaign(const CampaignConfig&, Meter&);
};

void CampaignRun::fuzz_one(std::size_t idx, const ExecuteFn& run) {
  const QueueAverages avgs = queue_averages(queue_);
  const double score =
      green() ? scaled_perf_score(queue_[idx], bounds_, avgs, caps_.has_ram,
                                  cfg_.sched)
              : base_perf_score(queue_[idx], avgs, cfg_.sched);

  const auto wanted = static_cast<std::uint64_t>(std::max<long long>(
      cfg_.sched.havoc_min_execs,
      std::llround(score / cfg_.sched.havoc_divisor)));
  const std::uint64_t budgeted = std::min(wanted, remaining_budget());

  // Parent data is copied up front: growing the queue below may reallocate.
  const std::vector<std::uint8_t> parent_bytes = queue_[idx].seed.bytes;
  const std::string parent_id = queue_[idx].seed.id;
  const std::uint32_t parent_depth = queue_[idx].depth;

  std::uint64_t executed = 0;
  for (std::uint64_t i = 0; i < budgeted; ++i) {
    if (cfg_.duration_s && stop_reached()) break;

    const unsigned stack = 1u << (1 + rng_.below(7));  // 2..128 stacked ops
    std::vector<std::uint8_t> base = parent_bytes;
    if (queue_.size() >= 2 && rng_.one_in(4)) {
      const std::size_t partner = rng_.below(queue_.size());
      if (partner != idx)
        base = splice(parent_bytes, queue_[partner].seed.bytes, rng_);
    }
    std::vector<std::uint8_t> child =
        havoc_mutate(base, rng_, stack, cfg_.max_input_len);

    ExecResult result = run(child);
    ++executed;
    ++fuzz_execs_;
    account(result);
    if (green()) bounds_.observe(result.energy);

    if (result.status == ExecResult::Status::crash) {
      save_crash(result, child);
    } else if (result.status == ExecResult::Status::timeout) {
      ++timeouts_;
    } else {
      const NoveltyReport novelty = map_.merge(result.trace);
      if (novelty.any()) {
        SeedRecord record;
        record.id = queue_entry_name(
            queue_.size(), "p" + std::to_string(idx));
        record.bytes = std::move(child);
        record.trace = std::move(result.trace);
        record.energy = result.energy;
        record.exec_time_us = result.exec_time_us;
        record.size_bytes = record.bytes.size();
        const double child_score = entry_score(record);
        const EdgeTrace trace_copy = record.trace;
        enqueue(std::move(record), parent_depth + 1, cycles_done_);
        champions_.update(queue_.size() - 1, trace_copy, child_score);
      }
    }
    maybe_tick();
  }

  schedule_.push_back({parent_id, executed});
  queue_[idx].was_fuzzed = true;
  queue_[idx].handicap = 0;
}

CampaignReport CampaignRun::run() {
  cfg_.validate();

  if (cfg_.write_artifacts) {
    fs::create_directories(cfg_.output_dir / "queue");
    fs::create_directories(cfg_.output_dir / "crashes");
  } else {
    fs::create_directories(cfg_.output_dir);
  }

  const auto seeds =
      load_seed_dir(cfg_.corpus_dir, cfg_.max_input_len, &warnings_);
  if (seeds.empty())
    throw ConfigError("no usable seeds in '" + cfg_.corpus_dir.string() +
                      "' — the corpus directory is empty or unreadable");

  CampaignReport report;
  report.target = cfg_.target.describe();
  report.meter = cfg_.meter;
  report.map_size = cfg_.target.map_size;
  report.cmin = to_string(cfg_.cmin);
  report.heuristics = to_string(cfg_.heuristics);
  report.rng_seed = cfg_.rng_seed;
  report.max_execs = cfg_.max_execs;
  report.duration_s = cfg_.duration_s;
  report.config_digest = campaign_config_digest(cfg_, seeds);
  report.corpus_seeds = seeds.size();

  const fs::path scratch = cfg_.output_dir / "scratch";
  const ExecuteFn run_target = make_executor(cfg_.target, meter_, scratch);

  // Stage 1: one measured execution per seed.
  ProfileResult profile = profile_corpus(seeds, run_target);
  total_execs_ = profile.total_execs;
  cpu_j_ = profile.cpu_joules;
  ram_j_ = profile.ram_joules;
  clock_.advance_us(profile.elapsed_us);
  for (const auto& w : profile.warnings) warnings_.push_back(w);
  report.profile_execs = profile.total_execs;
  report.crashed_seeds = profile.crashes.size();

  // Stage 2: corpus minimisation per the configured mode.
  std::vector<std::string> kept;
  CminSummary summary;
  summary.mode = to_string(cfg_.cmin);
  summary.input_seeds = profile.records.size();
  {
    MinimiseResult green_result = green_minimise(profile.records);
    std::vector<std::string> coverage_kept =
        coverage_minimise(profile.records);
    const double green_energy =
        kept_energy_total(profile.records, green_result.kept);
    const double coverage_energy =
        kept_energy_total(profile.records, coverage_kept);
    switch (cfg_.cmin) {
      case CminMode::green:
        kept = green_result.kept;
        summary.kept_energy_j = green_energy;
        summary.alternative_energy_j = coverage_energy;
        summary.fallback = green_result.kept_fallback;
        break;
      case CminMode::coverage:
        kept = std::move(coverage_kept);
        summary.kept_energy_j = coverage_energy;
        summary.alternative_energy_j = green_energy;
        break;
      case CminMode::off:
        for (const auto& record : profile.records) kept.push_back(record.id);
        summary.kept_energy_j =
            kept_energy_total(profile.records, kept);
        summary.alternative_energy_j = summary.kept_energy_j;
        break;
    }
  }
  summary.kept = kept.size();
  report.cmin_summary = summary;

  if (cfg_.write_artifacts && cfg_.cmin != CminMode::off)
    write_minimised(profile.records, kept, cfg_.output_dir / "cmin",
                    to_string(cfg_.cmin));

  // Stage 3: seed the queue (input order, filtered by the kept set).
  {
    std::unordered_set<std::string> keep(kept.begin(), kept.end());
    for (auto& record : profile.records) {
      if (!keep.count(record.id)) continue;
      enqueue(std::move(record), 0, 0);
    }
  }
  if (queue_.empty())
    throw ConfigError("every seed crashed during profiling; nothing to fuzz");

  if (green())
    for (const auto& entry : queue_) bounds_.observe(entry.seed.energy);
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    map_.merge(queue_[i].seed.trace);
    champions_.update(i, queue_[i].seed.trace, entry_score(queue_[i].seed));
  }

  maybe_tick(/*force=*/true);

  // Stage 4: the loop.
  while (!stop_reached()) {
    favoured_count_ = cull_queue(queue_, champions_);
    for (std::size_t idx = 0; idx < queue_.size(); ++idx) {
      if (stop_reached()) break;
      bool pending_favoured = false;
      for (const auto& entry : queue_)
        if (entry.favoured && !entry.was_fuzzed) {
          pending_favoured = true;
          break;
        }
      const double p =
          skip_probability(queue_[idx], pending_favoured, cfg_.sched);
      if (rng_.unit() < p) continue;
      fuzz_one(idx, run_target);
    }
    ++cycles_done_;
  }
  favoured_count_ = cull_queue(queue_, champions_);
  maybe_tick(/*force=*/true);

  report.total_execs = total_execs_;
  report.fuzz_execs = fuzz_execs_;
  report.unique_edges = map_.unique_edges();
  if (cfg_.target.total_edges_declared && *cfg_.target.total_edges_declared > 0)
    report.coverage_pct = 100.0 * static_cast<double>(map_.unique_edges()) /
                          static_cast<double>(*cfg_.target.total_edges_declared);
  report.cpu_j = cpu_j_;
  report.ram_j = ram_j_;
  report.elapsed_s = clock_.elapsed_s();
  report.execs_per_sec =
      report.elapsed_s > 0.0
          ? static_cast<double>(total_execs_) / report.elapsed_s
          : 0.0;
  report.queue_len = queue_.size();
  report.favoured_count = favoured_count_;
  report.unique_crashes = unique_crashes_;
  report.timeouts = timeouts_;
  report.schedule = std::move(schedule_);
  report.ticks = std::move(ticks_);
  report.warnings = std::move(warnings_);

  if (cfg_.write_artifacts) report.write(cfg_.output_dir);
  return report;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& config, Meter& meter) {
  CampaignRun run(config, meter);
  return run.run();
}

CampaignReport run_campaign(const CampaignConfig& config) {
  auto meter = make_meter(config.meter);
  return run_campaign(config, *meter);
}

// ---------------------------------------------------------------------------
// Report serialisation

ordered_json CampaignReport::to_json() const {
  ordered_json doc;
  doc["schema"] = "greenfuzz-report-v1";
  doc["target"] = target;
  doc["meter"] = meter;
  doc["map_size"] = map_size;
  doc["cmin"] = cmin;
  doc["heuristics"] = heuristics;
  doc["rng_seed"] = rng_seed;
  doc["config_digest"] = config_digest;
  if (max_execs) doc["max_execs"] = *max_execs;
  if (duration_s) doc["duration_s"] = *duration_s;

  ordered_json corpus;
  corpus["seeds"] = corpus_seeds;
  corpus["rejected"] = crashed_seeds;
  corpus["profile_execs"] = profile_execs;
  corpus["cmin_mode"] = cmin_summary.mode;
  corpus["cmin_input"] = cmin_summary.input_seeds;
  corpus["cmin_kept"] = cmin_summary.kept;
  corpus["kept_energy_j"] = cmin_summary.kept_energy_j;
  corpus["alternative_energy_j"] = cmin_summary.alternative_energy_j;
  corpus["cmin_fallback"] = cmin_summary.fallback;
  doc["corpus"] = corpus;

  ordered_json totals;
  totals["execs"] = total_execs;
  totals["fuzz_execs"] = fuzz_execs;
  totals["unique_edges"] = unique_edges;
  if (coverage_pct) totals["coverage_pct"] = *coverage_pct;
  totals["cpu_j"] = cpu_j;
  totals["ram_j"] = ram_j;
  totals["energy_j"] = energy_total_j();
  totals["elapsed_s"] = elapsed_s;
  totals["execs_per_sec"] = execs_per_sec;
  totals["queue_len"] = queue_len;
  totals["favoured"] = favoured_count;
  totals["unique_crashes"] = unique_crashes;
  totals["timeouts"] = timeouts;
  doc["totals"] = totals;

  ordered_json sched = ordered_json::array();
  for (const auto& event : schedule)
    sched.push_back(ordered_json::array({event.entry_id, event.havoc_execs}));
  doc["schedule"] = sched;
  doc["warnings"] = warnings;
  return doc;
}

CampaignReport CampaignReport::from_json(const ordered_json& doc) {
  CampaignReport report;
  report.target = doc.at("target").get<std::string>();
  report.meter = doc.at("meter").get<std::string>();
  report.map_size = doc.at("map_size").get<std::size_t>();
  report.cmin = doc.at("cmin").get<std::string>();
  report.heuristics = doc.at("heuristics").get<std::string>();
  report.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
  report.config_digest = doc.at("config_digest").get<std::string>();
  if (doc.contains("max_execs"))
    report.max_execs = doc.at("max_execs").get<std::uint64_t>();
  if (doc.contains("duration_s"))
    report.duration_s = doc.at("duration_s").get<double>();

  const auto& corpus = doc.at("corpus");
  report.corpus_seeds = corpus.at("seeds").get<std::size_t>();
  report.crashed_seeds = corpus.at("rejected").get<std::size_t>();
  report.profile_execs = corpus.at("profile_execs").get<std::uint64_t>();
  report.cmin_summary.mode = corpus.at("cmin_mode").get<std::string>();
  report.cmin_summary.input_seeds = corpus.at("cmin_input").get<std::size_t>();
  report.cmin_summary.kept = corpus.at("cmin_kept").get<std::size_t>();
  report.cmin_summary.kept_energy_j = corpus.at("kept_energy_j").get<double>();
  report.cmin_summary.alternative_energy_j =
      corpus.at("alternative_energy_j").get<double>();
  report.cmin_summary.fallback = corpus.at("cmin_fallback").get<bool>();

  const auto& totals = doc.at("totals");
  report.total_execs = totals.at("execs").get<std::uint64_t>();
  report.fuzz_execs = totals.at("fuzz_execs").get<std::uint64_t>();
  report.unique_edges = totals.at("unique_edges").get<std::uint64_t>();
  if (totals.contains("coverage_pct"))
    report.coverage_pct = totals.at("coverage_pct").get<double>();
  report.cpu_j = totals.at("cpu_j").get<double>();
  report.ram_j = totals.at("ram_j").get<double>();
  report.elapsed_s = totals.at("elapsed_s").get<double>();
  report.execs_per_sec = totals.at("execs_per_sec").get<double>();
  report.queue_len = totals.at("queue_len").get<std::size_t>();
  report.favoured_count = totals.at("favoured").get<std::size_t>();
  report.unique_crashes = totals.at("unique_crashes").get<std::size_t>();
  report.timeouts = totals.at("timeouts").get<std::uint64_t>();

  for (const auto& event : doc.at("schedule"))
    report.schedule.push_back(
        {event.at(0).get<std::string>(), event.at(1).get<std::uint64_t>()});
  for (const auto& warning : doc.at("warnings"))
    report.warnings.push_back(warning.get<std::string>());
  return report;
}

void CampaignReport::write(const fs::path& dir) const {
  fs::create_directories(dir);
  std::ofstream out(dir / "report.json", std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write report.json in " + dir.string());
  out << to_json().dump(2) << '\n';
  write_plot_data(dir / "plot_data.csv", ticks);
}

CampaignReport CampaignReport::read(const fs::path& dir) {
  std::ifstream in(dir / "report.json");
  if (!in)
    throw std::runtime_error("cannot read " + (dir / "report.json").string());
  ordered_json doc = ordered_json::parse(in);
  CampaignReport report = from_json(doc);
  report.ticks = read_plot_data(dir / "plot_data.csv");
  return report;
}

}  // namespace greenfuzz
