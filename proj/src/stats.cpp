#include "greenfuzz/stats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace greenfuzz {

namespace {

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string format_plot_data(std::span<const StatsTick> ticks) {
  std::string out = kPlotDataHeader;
  out += '\n';
  for (const auto& tick : ticks) {
    out += format_double(tick.t_seconds, 6);
    out += ',';
    out += std::to_string(tick.total_execs);
    out += ',';
    out += std::to_string(tick.unique_edges);
    out += ',';
    out += format_double(tick.cumulative_cpu_j, 9);
    out += ',';
    out += format_double(tick.cumulative_ram_j, 9);
    out += ',';
    out += format_double(tick.execs_per_sec, 6);
    out += ',';
    out += std::to_string(tick.queue_len);
    out += ',';
    out += std::to_string(tick.favoured_count);
    out += '\n';
  }
  return out;
}

void write_plot_data(const std::filesystem::path& path,
                     std::span<const StatsTick> ticks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write plot data to " + path.string());
  out << format_plot_data(ticks);
}

std::vector<StatsTick> parse_plot_data(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kPlotDataHeader)
    throw std::runtime_error("plot data missing canonical header");

  std::vector<StatsTick> ticks;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    StatsTick tick;
    unsigned long long execs = 0, edges = 0, queue_len = 0, favoured = 0;
    char trailing = 0;
    const int got = std::sscanf(line.c_str(), "%lf,%llu,%llu,%lf,%lf,%lf,%llu,%llu%c",
                                &tick.t_seconds, &execs, &edges,
                                &tick.cumulative_cpu_j, &tick.cumulative_ram_j,
                                &tick.execs_per_sec, &queue_len, &favoured,
                                &trailing);
    if (got != 8)
      throw std::runtime_error("malformed plot data row " +
                               std::to_string(lineno) + ": " + line);
    tick.total_execs = execs;
    tick.unique_edges = edges;
    tick.queue_len = queue_len;
    tick.favoured_count = favoured;
    ticks.push_back(tick);
  }
  return ticks;
}

std::vector<StatsTick> read_plot_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read plot data " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plot_data(buf.str());
}

std::string check_tick_invariants(std::span<const StatsTick> ticks) {
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const auto& tick = ticks[i];
    if (!std::isfinite(tick.t_seconds) || tick.t_seconds < 0.0)
      return "tick " + std::to_string(i) + " has invalid time";
    if (i == 0) continue;
    const auto& prev = ticks[i - 1];
    if (tick.t_seconds <= prev.t_seconds)
      return "tick " + std::to_string(i) + " time not increasing";
    if (tick.total_execs < prev.total_execs)
      return "tick " + std::to_string(i) + " executions decreased";
    if (tick.unique_edges < prev.unique_edges)
      return "tick " + std::to_string(i) + " unique edges decreased";
    if (tick.cumulative_cpu_j < prev.cumulative_cpu_j ||
        tick.cumulative_ram_j < prev.cumulative_ram_j)
      return "tick " + std::to_string(i) + " cumulative energy decreased";
  }
  return {};
}

std::vector<double> resample_edges_over_time(std::span<const StatsTick> ticks,
                                             double bin_seconds,
                                             double t_end) {
  std::vector<double> curve;
  if (bin_seconds <= 0.0) return curve;
  std::size_t next = 0;
  double value = 0.0;
  for (double t = 0.0; t <= t_end + bin_seconds / 2; t += bin_seconds) {
    while (next < ticks.size() && ticks[next].t_seconds <= t) {
      value = static_cast<double>(ticks[next].unique_edges);
      ++next;
    }
    curve.push_back(value);
  }
  return curve;
}

std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves) {
  std::vector<double> mean;
  if (curves.empty()) return mean;
  const std::size_t n = curves.front().size();
  mean.assign(n, 0.0);
  for (const auto& curve : curves)
    for (std::size_t i = 0; i < n; ++i) mean[i] += curve[i];
  for (auto& v : mean) v /= static_cast<double>(curves.size());
  return mean;
}

std::uint64_t execs_to_reach_fraction(std::span<const StatsTick> ticks,
                                      double fraction) {
  if (ticks.empty()) return 0;
  const double final_edges =
      static_cast<double>(ticks.back().unique_edges);
  const double threshold = std::ceil(fraction * final_edges);
  for (const auto& tick : ticks)
    if (static_cast<double>(tick.unique_edges) >= threshold)
      return tick.total_execs;
  return ticks.back().total_execs + 1;
}

std::vector<double> resample_edges_over_execs(std::span<const StatsTick> ticks,
                                              std::uint64_t bin_execs,
                                              std::uint64_t execs_end) {
  std::vector<double> curve;
  if (bin_execs == 0) return curve;
  std::size_t next = 0;
  double value = 0.0;
  for (std::uint64_t x = 0; x <= execs_end; x += bin_execs) {
    while (next < ticks.size() && ticks[next].total_execs <= x) {
      value = static_cast<double>(ticks[next].unique_edges);
      ++next;
    }
    curve.push_back(value);
  }
  return curve;
}

}  // namespace greenfuzz
