#include "greenfuzz/energy.hpp"

#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "greenfuzz/errors.hpp"

namespace greenfuzz {

namespace fs = std::filesystem;

std::uint64_t counter_delta(std::uint64_t before, std::uint64_t after,
                            std::uint64_t range) {
  if (range == 0) throw MeterFault("counter range is zero");
  if (before >= range || after >= range)
    throw MeterFault("counter value exceeds declared range " +
                     std::to_string(range));
  if (after >= before) return after - before;
  return after + (range - before);
}

namespace {

// RAII guard: a meter serves one measurement at a time.
class InFlightGuard {
 public:
  explicit InFlightGuard(bool& flag) : flag_(flag) {
    if (flag_) throw MeterFault("measurement already in flight on this meter");
    flag_ = true;
  }
  ~InFlightGuard() { flag_ = false; }

 private:
  bool& flag_;
};

std::uint64_t monotonic_us() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

}  // namespace

EnergyReading Meter::measure_around(const std::function<void()>& body) {
  InFlightGuard guard(in_flight_);
  const Sample before = sample();
  body();
  const Sample after = sample();

  const auto& specs = counter_specs();
  if (before.counters_uj.size() != specs.size() ||
      after.counters_uj.size() != specs.size())
    throw MeterFault("meter produced inconsistent counter sets");

  std::uint64_t cpu_uj = 0;
  std::uint64_t ram_uj = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::uint64_t delta = counter_delta(
        before.counters_uj[i], after.counters_uj[i], specs[i].range_uj);
    if (specs[i].domain == EnergyDomain::cpu)
      cpu_uj += delta;
    else
      ram_uj += delta;
  }

  EnergyReading reading;
  reading.cpu_joules = static_cast<double>(cpu_uj) * 1e-6;
  reading.ram_joules = static_cast<double>(ram_uj) * 1e-6;
  reading.duration_us =
      after.time_us >= before.time_us ? after.time_us - before.time_us : 0;
  return reading;
}

// ---------------------------------------------------------------------------
// SyntheticMeter

namespace {
// Far beyond any credited total; keeps the shared wraparound math live.
constexpr std::uint64_t kSyntheticRangeUj = 1ULL << 62;
}  // namespace

SyntheticMeter::SyntheticMeter()
    : specs_{{EnergyDomain::cpu, kSyntheticRangeUj},
             {EnergyDomain::ram, kSyntheticRangeUj}} {}

MeterCapabilities SyntheticMeter::capabilities() const {
  MeterCapabilities caps;
  caps.has_cpu = true;
  caps.has_ram = true;
  caps.resolution_uj = 1;
  caps.deterministic = true;
  return caps;
}

void SyntheticMeter::credit(double cpu_joules, double ram_joules,
                            std::uint64_t duration_us) {
  if (!(cpu_joules >= 0.0) || !(ram_joules >= 0.0))
    throw MeterFault("credited energy must be finite and nonnegative");
  cpu_uj_ += static_cast<std::uint64_t>(std::llround(cpu_joules * 1e6));
  ram_uj_ += static_cast<std::uint64_t>(std::llround(ram_joules * 1e6));
  time_us_ += duration_us;
}

Meter::Sample SyntheticMeter::sample() {
  Sample s;
  s.time_us = time_us_;
  s.counters_uj = {cpu_uj_, ram_uj_};
  return s;
}

// ---------------------------------------------------------------------------
// RAPL backend

std::uint64_t read_counter_file(const fs::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) {
    if (errno == EACCES || errno == EPERM)
      throw MeterPermissionError(
          "permission denied reading " + path.string() +
          " (powercap counters are often root-only; run as root or relax "
          "permissions on /sys/class/powercap)");
    throw MeterUnavailable("cannot open " + path.string() + ": " +
                           std::strerror(errno));
  }
  char buf[64];
  const char* got = std::fgets(buf, sizeof(buf), f);
  std::fclose(f);
  if (!got) throw MeterFault("empty counter file " + path.string());

  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(buf, &end, 10);
  if (errno != 0 || end == buf)
    throw MeterFault("malformed counter file " + path.string());
  while (*end == '\n' || *end == '\r' || *end == ' ') ++end;
  if (*end != '\0')
    throw MeterFault("trailing garbage in counter file " + path.string());
  return value;
}

namespace {

std::string read_name(const fs::path& dir) {
  std::ifstream in(dir / "name");
  std::string name;
  if (in) std::getline(in, name);
  return name;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

RaplMeter::RaplMeter(const fs::path& root) {
  std::error_code ec;
  if (!fs::exists(root, ec) || ec)
    throw MeterUnavailable("no powercap hierarchy at " + root.string());

  for (const auto& entry : fs::directory_iterator(root, ec)) {
    const std::string base = entry.path().filename().string();
    // Top-level packages are "intel-rapl:<n>"; subzones have a second colon.
    if (!starts_with(base, "intel-rapl:")) continue;
    if (base.find(':', std::string("intel-rapl:").size()) != std::string::npos)
      continue;
    if (!starts_with(read_name(entry.path()), "package")) continue;

    const std::uint64_t range =
        read_counter_file(entry.path() / "max_energy_range_uj");
    read_counter_file(entry.path() / "energy_uj");  // probe readability
    nodes_.push_back({entry.path() / "energy_uj"});
    specs_.push_back({EnergyDomain::cpu, range});

    // DRAM lives in a subzone of the package.
    std::error_code sub_ec;
    for (const auto& sub : fs::directory_iterator(entry.path(), sub_ec)) {
      if (!sub.is_directory()) continue;
      if (!starts_with(sub.path().filename().string(), base + ":")) continue;
      if (read_name(sub.path()) != "dram") continue;
      try {
        const std::uint64_t sub_range =
            read_counter_file(sub.path() / "max_energy_range_uj");
        read_counter_file(sub.path() / "energy_uj");
        nodes_.push_back({sub.path() / "energy_uj"});
        specs_.push_back({EnergyDomain::ram, sub_range});
        has_ram_ = true;
      } catch (const MeterUnavailable&) {
        // Package stays usable without its DRAM domain.
      }
    }
  }

  if (nodes_.empty())
    throw MeterUnavailable("no readable RAPL package domain under " +
                           root.string());
}

MeterCapabilities RaplMeter::capabilities() const {
  MeterCapabilities caps;
  caps.has_cpu = true;
  caps.has_ram = has_ram_;
  caps.resolution_uj = 1;  // powercap exposes microjoules
  caps.deterministic = false;
  return caps;
}

bool RaplMeter::available(const fs::path& root) {
  try {
    RaplMeter probe(root);
    return true;
  } catch (const MeterError&) {
    return false;
  }
}

Meter::Sample RaplMeter::sample() {
  Sample s;
  s.time_us = monotonic_us();
  s.counters_uj.reserve(nodes_.size());
  for (const auto& node : nodes_)
    s.counters_uj.push_back(read_counter_file(node.energy_file));
  return s;
}

std::unique_ptr<Meter> make_meter(const std::string& kind) {
  if (kind == "synthetic") return std::make_unique<SyntheticMeter>();
  if (kind == "rapl") return std::make_unique<RaplMeter>();
  throw ConfigError("unknown meter '" + kind + "' (expected rapl|synthetic)");
}

}  // namespace greenfuzz
