// energy.hpp
//
// Energy measurement for target executions. A meter exposes monotonically
// increasing per-domain counters (microjoules); a measurement snapshots
// them around an execution and attributes the whole delta to it:
//
//   before = counters();  run();  after = counters();
//   reading = (after - before) corrected for counter wraparound
//
// Two backends: RaplMeter reads the Linux powercap sysfs counters
// (package and, when present, DRAM domains); SyntheticMeter is a
// deterministic stand-in whose counters advance only through credit()
// calls made by synthetic targets while a measurement is in flight.
//
// A meter is an exclusive resource: at most one measurement in flight.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenfuzz {

struct EnergyReading {
  double cpu_joules = 0.0;  // package domain
  double ram_joules = 0.0;  // DRAM domain, 0 when unavailable
  std::uint64_t duration_us = 0;

  double total() const { return cpu_joules + ram_joules; }
};

struct MeterCapabilities {
  bool has_cpu = false;
  bool has_ram = false;
  std::uint64_t resolution_uj = 1;
  // True when readings and durations are a pure function of the measured
  // work (synthetic backend). Campaigns use this to switch to a virtual
  // clock so runs are reproducible.
  bool deterministic = false;
};

class MeterError : public std::runtime_error {
 public:
  explicit MeterError(const std::string& what) : std::runtime_error(what) {}
};

// Counter source missing: no powercap hierarchy, absent domain.
class MeterUnavailable : public MeterError {
 public:
  explicit MeterUnavailable(const std::string& what) : MeterError(what) {}
};

// Counter source present but not readable by this process.
class MeterPermissionError : public MeterError {
 public:
  explicit MeterPermissionError(const std::string& what) : MeterError(what) {}
};

// Inconsistent counter data: malformed file, value beyond declared range,
// counters running backwards. Never silently clamped.
class MeterFault : public MeterError {
 public:
  explicit MeterFault(const std::string& what) : MeterError(what) {}
};

// Wraparound-corrected counter delta: (after - before) mod range.
// Requires range > 0 and both values < range, else MeterFault.
std::uint64_t counter_delta(std::uint64_t before, std::uint64_t after,
                            std::uint64_t range);

enum class EnergyDomain { cpu, ram };

class Meter {
 public:
  struct CounterSpec {
    EnergyDomain domain;
    std::uint64_t range_uj;  // counter wraps at this value
  };

  virtual ~Meter() = default;

  virtual MeterCapabilities capabilities() const = 0;

  // Energy attribution channel for in-process synthetic targets. Hardware
  // meters ignore it; the synthetic meter advances its counters by the
  // credited amounts.
  virtual void credit(double cpu_joules, double ram_joules,
                      std::uint64_t duration_us) {
    (void)cpu_joules;
    (void)ram_joules;
    (void)duration_us;
  }

  // Brackets `body` between two counter snapshots and returns the
  // wraparound-corrected delta. duration_us comes from the meter's clock
  // (monotonic for hardware, virtual for the synthetic backend).
  EnergyReading measure_around(const std::function<void()>& body);

 protected:
  struct Sample {
    std::uint64_t time_us = 0;
    std::vector<std::uint64_t> counters_uj;  // parallel to counter_specs()
  };

  virtual const std::vector<CounterSpec>& counter_specs() const = 0;
  virtual Sample sample() = 0;

 private:
  bool in_flight_ = false;
};

// Deterministic meter: counters advance only via credit(). Readings are
// bit-for-bit reproducible for a given sequence of credited executions.
class SyntheticMeter : public Meter {
 public:
  SyntheticMeter();

  MeterCapabilities capabilities() const override;
  void credit(double cpu_joules, double ram_joules,
              std::uint64_t duration_us) override;

  std::uint64_t virtual_time_us() const { return time_us_; }

 protected:
  const std::vector<CounterSpec>& counter_specs() const override {
    return specs_;
  }
  Sample sample() override;

 private:
  std::vector<CounterSpec> specs_;
  std::uint64_t cpu_uj_ = 0;
  std::uint64_t ram_uj_ = 0;
  std::uint64_t time_us_ = 0;
};

// Reads one powercap counter file: ASCII decimal, newline-terminated.
// Missing file -> MeterUnavailable; EACCES -> MeterPermissionError with a
// remediation hint; malformed content -> MeterFault.
std::uint64_t read_counter_file(const std::filesystem::path& path);

// Intel RAPL backend over /sys/class/powercap. Sums all package domains
// into cpu and all dram subdomains into ram. The DRAM domain is optional;
// the meter degrades to cpu-only when it is absent.
class RaplMeter final : public Meter {
 public:
  // Probes the hierarchy at construction. Throws MeterUnavailable when no
  // package domain is readable. `root` is overridable for tests.
  explicit RaplMeter(
      const std::filesystem::path& root = "/sys/class/powercap");

  MeterCapabilities capabilities() const override;

  // True when a usable powercap hierarchy exists at `root`.
  static bool available(
      const std::filesystem::path& root = "/sys/class/powercap");

 protected:
  const std::vector<CounterSpec>& counter_specs() const override {
    return specs_;
  }
  Sample sample() override;

 private:
  struct Node {
    std::filesystem::path energy_file;
  };

  std::vector<CounterSpec> specs_;
  std::vector<Node> nodes_;
  bool has_ram_ = false;
};

// Builds the meter named by `kind` ("synthetic" or "rapl").
std::unique_ptr<Meter> make_meter(const std::string& kind);

}  // namespace greenfuzz
