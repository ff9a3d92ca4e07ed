// stats.hpp
//
// Campaign time series. A tick is appended every second of campaign time
// or every 100 executions, whichever comes first; plot_data.csv is the
// canonical on-disk form and parses back losslessly. Helpers resample
// tick series onto shared grids for cross-run mean curves.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace greenfuzz {

struct StatsTick {
  double t_seconds = 0.0;
  std::uint64_t total_execs = 0;
  std::uint64_t unique_edges = 0;
  double cumulative_cpu_j = 0.0;
  double cumulative_ram_j = 0.0;
  double execs_per_sec = 0.0;  // campaign average at tick time
  std::uint64_t queue_len = 0;
  std::uint64_t favoured_count = 0;

  bool operator==(const StatsTick&) const = default;
};

inline constexpr const char* kPlotDataHeader =
    "t_seconds,total_execs,unique_edges,cumulative_cpu_j,cumulative_ram_j,"
    "execs_per_sec,queue_len,favoured_count";

std::string format_plot_data(std::span<const StatsTick> ticks);
void write_plot_data(const std::filesystem::path& path,
                     std::span<const StatsTick> ticks);

// Throws std::runtime_error on missing header or malformed rows.
std::vector<StatsTick> parse_plot_data(const std::string& text);
std::vector<StatsTick> read_plot_data(const std::filesystem::path& path);

// Checks tick invariants: strictly increasing time, nondecreasing
// executions, edges and cumulative energy. Returns an empty string when
// fine, else a description of the first violation.
std::string check_tick_invariants(std::span<const StatsTick> ticks);

// Step-samples unique_edges at time grid points 0, bin, 2*bin, ... up to
// the last tick (carry last value forward; 0 before the first tick).
std::vector<double> resample_edges_over_time(std::span<const StatsTick> ticks,
                                             double bin_seconds,
                                             double t_end);

// Pointwise mean of equally long curves.
std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves);

// Executions needed until unique_edges first reaches
// ceil(fraction * final_edges). Returns the final tick's total_execs + 1
// when the threshold is never reached (cannot happen for fraction <= 1).
std::uint64_t execs_to_reach_fraction(std::span<const StatsTick> ticks,
                                      double fraction);

// Step-samples unique_edges on an execution grid 0, bin, 2*bin, ...
std::vector<double> resample_edges_over_execs(std::span<const StatsTick> ticks,
                                              std::uint64_t bin_execs,
                                              std::uint64_t execs_end);

}  // namespace greenfuzz
