// exec.hpp
//
// One target execution: run the input, collect the classified edge trace,
// and attribute the bracketed energy interval to it. External targets are
// spawned per execution (no fork server) so the measured interval maps to
// exactly one run; they report coverage by writing showmap-format lines
// ("edge:value") to the file named by GREENFUZZ_TRACE_FILE before exiting.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>

#include "greenfuzz/coverage.hpp"
#include "greenfuzz/energy.hpp"
#include "greenfuzz/target.hpp"

namespace greenfuzz {

inline constexpr const char* kTraceFileEnv = "GREENFUZZ_TRACE_FILE";

struct ExecResult {
  enum class Status { ok, crash, timeout };

  Status status = Status::ok;
  int term_signal = 0;  // crash only
  EdgeTrace trace;
  EnergyReading energy;
  std::uint64_t exec_time_us = 0;

  ExecResult() : trace(0) {}
  explicit ExecResult(std::size_t map_size) : trace(map_size) {}
};

// Executes `input` against the target once, measuring energy around the
// run. Synthetic targets run in-process and credit their modelled cost to
// the meter; external ones are spawned with the timeout enforced by
// killing the process group. Spawn failures and unknown models throw
// ConfigError.
ExecResult execute(const TargetSpec& target, std::span<const std::uint8_t> input,
                   Meter& meter,
                   const std::filesystem::path& scratch_dir = {});

using ExecuteFn = std::function<ExecResult(std::span<const std::uint8_t>)>;

// Convenience binding of (target, meter) for callers that only need the
// execution function.
ExecuteFn make_executor(const TargetSpec& target, Meter& meter,
                        const std::filesystem::path& scratch_dir = {});

}  // namespace greenfuzz
