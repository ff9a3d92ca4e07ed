#include "greenfuzz/target.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "greenfuzz/errors.hpp"

namespace greenfuzz {

EnergyReading synthetic_cost(std::size_t input_len,
                             std::span<const std::uint32_t> counts,
                             const CostModel& model) {
  double cpu = model.base_cpu +
               model.byte_cost * static_cast<double>(input_len);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!counts[i]) continue;
    double per_hit = model.default_edge_cost;
    for (const auto& [edge, cost] : model.edge_cost) {
      if (edge == static_cast<EdgeId>(i)) {
        per_hit = cost;
        break;
      }
    }
    cpu += per_hit * static_cast<double>(counts[i]);
  }
  EnergyReading reading;
  reading.cpu_joules = cpu;
  reading.ram_joules = model.base_ram + model.ram_fraction * cpu;
  reading.duration_us =
      model.time_base_us + model.time_per_byte_us * input_len;
  return reading;
}

namespace {

constexpr EdgeId kEntryEdge = 1;

void hit(std::span<std::uint32_t> counts, EdgeId edge) { ++counts[edge]; }

// ---------------------------------------------------------------------------
// fork3: three-way branch on the first byte plus per-byte class edges.
// Input starting with "BOOM" crashes.

class Fork3Target final : public SyntheticTarget {
 public:
  const std::string& name() const override {
    static const std::string n = "fork3";
    return n;
  }
  std::size_t map_size() const override { return 64; }
  std::uint64_t total_edges() const override { return 12; }  // 1 + 3 + 8

  SyntheticOutcome run(std::span<const std::uint8_t> input,
                       std::span<std::uint32_t> counts) const override {
    hit(counts, kEntryEdge);
    if (input.empty()) return {};
    if (input.size() >= 4 && input[0] == 'B' && input[1] == 'O' &&
        input[2] == 'O' && input[3] == 'M')
      return {.crashed = true};
    hit(counts, static_cast<EdgeId>(2 + input[0] % 3));
    const std::size_t scan = std::min<std::size_t>(input.size(), 9);
    for (std::size_t i = 1; i < scan; ++i)
      hit(counts, static_cast<EdgeId>(8 + (input[i] & 7)));
    return {};
  }

  EnergyReading cost(std::span<const std::uint8_t> input,
                     std::span<const std::uint32_t> counts) const override {
    CostModel model;
    model.edge_cost = {{2, 0.001}, {3, 0.005}, {4, 0.025}};
    model.default_edge_cost = 0.0001;
    model.byte_cost = 0.00001;
    model.ram_fraction = 0.1;
    model.time_base_us = 100;
    model.time_per_byte_us = 2;
    return synthetic_cost(input.size(), counts, model);
  }

  std::vector<std::pair<std::string, std::vector<std::uint8_t>>>
  fixture_corpus() const override {
    auto bytes = [](const char* s) {
      return std::vector<std::uint8_t>(s, s + std::string(s).size());
    };
    return {{"seed_a.bin", bytes("Ahello")},
            {"seed_b.bin", bytes("Bworld!")},
            {"seed_c.bin", bytes("Czz")}};
  }
};

// ---------------------------------------------------------------------------
// keymatch: first byte selects a cheap or expensive processing mode with a
// 20x per-byte cost gap; every other byte hits a value-class edge. The mode
// byte itself emits no edge, so inputs differing only there have identical
// coverage.

class KeymatchTarget final : public SyntheticTarget {
 public:
  const std::string& name() const override {
    static const std::string n = "keymatch";
    return n;
  }
  std::size_t map_size() const override { return 256; }
  std::uint64_t total_edges() const override { return 17; }  // 1 + 16

  SyntheticOutcome run(std::span<const std::uint8_t> input,
                       std::span<std::uint32_t> counts) const override {
    hit(counts, kEntryEdge);
    for (std::size_t i = 1; i < input.size(); ++i)
      hit(counts, static_cast<EdgeId>(32 + (input[i] & 15)));
    return {};
  }

  EnergyReading cost(std::span<const std::uint8_t> input,
                     std::span<const std::uint32_t> counts) const override {
    const bool expensive = !input.empty() && input[0] == 'X';
    CostModel model;
    model.byte_cost = expensive ? 0.05 : 0.0025;
    model.ram_fraction = 0.1;
    model.time_base_us = 100;
    model.time_per_byte_us = 50;
    return synthetic_cost(input.size(), counts, model);
  }

  std::vector<std::pair<std::string, std::vector<std::uint8_t>>>
  fixture_corpus() const override {
    auto bytes = [](const char* s) {
      return std::vector<std::uint8_t>(s, s + std::string(s).size());
    };
    // Classes 0..7 live in "@ABCDEFG", classes 8..15 in "HIJKLMNO".
    // Cheap seeds: 18 bytes at 2.5 mJ/byte = 45 mJ. Expensive seeds:
    // 9 bytes at 50 mJ/byte = 450 mJ. Same coverage, exactly 10x energy.
    return {{"cheap_a.bin", bytes("C@ABCDEFG@ABCDEFG@")},
            {"cheap_b.bin", bytes("CHIJKLMNOHIJKLMNOH")},
            {"exp_a.bin", bytes("X@ABCDEFG")},
            {"exp_b.bin", bytes("XHIJKLMNO")}};
  }
};

// ---------------------------------------------------------------------------
// nested_parser: parenthesis nesting with depth-tiered edges. Structured
// inputs earn edges through actual nesting; a replay mode (first byte 0xFF)
// hits edges directly from validated byte pairs, so a short blob can mirror
// any structured seed's coverage at a much higher energy cost — but its
// mutants rarely form new valid pairs, making it a poor base for discovery.

class NestedParserTarget final : public SyntheticTarget {
 public:
  static constexpr EdgeId kOpenBase = 8;    // 8..15 by depth tier
  static constexpr EdgeId kCloseEdge = 16;
  static constexpr EdgeId kErrorEdge = 17;
  static constexpr EdgeId kContentBase = 18;  // 18..81: bucket*16 + class
  static constexpr std::size_t kEdgeSpan = 74;  // replay window, edges 8..81
  static constexpr int kCrashDepth = 10;

  const std::string& name() const override {
    static const std::string n = "nested_parser";
    return n;
  }
  std::size_t map_size() const override { return 512; }
  std::uint64_t total_edges() const override { return 75; }  // 1+8+1+1+64

  SyntheticOutcome run(std::span<const std::uint8_t> input,
                       std::span<std::uint32_t> counts) const override {
    hit(counts, kEntryEdge);
    if (input.empty()) return {};

    if (input[0] == 0xFF) {
      for (std::size_t i = 1; i + 1 < input.size(); i += 2) {
        const std::uint8_t key = input[i];
        const std::uint8_t value = input[i + 1];
        if (key == (value ^ 0x5A))
          hit(counts, static_cast<EdgeId>(kOpenBase + value % kEdgeSpan));
      }
      return {};
    }

    int depth = 0;
    for (std::uint8_t b : input) {
      if (b == '(') {
        ++depth;
        if (depth >= kCrashDepth) return {.crashed = true};
        hit(counts, static_cast<EdgeId>(kOpenBase + std::min(depth - 1, 7)));
      } else if (b == ')') {
        if (depth > 0) {
          --depth;
          hit(counts, kCloseEdge);
        } else {
          hit(counts, kErrorEdge);
        }
      } else {
        const int bucket = std::min(depth, 3);
        hit(counts,
            static_cast<EdgeId>(kContentBase + bucket * 16 + (b & 15)));
      }
    }
    return {};
  }

  EnergyReading cost(std::span<const std::uint8_t> input,
                     std::span<const std::uint32_t> counts) const override {
    const bool replay = !input.empty() && input[0] == 0xFF;
    CostModel model;
    model.byte_cost = replay ? 0.1 : 0.002;
    model.ram_fraction = 0.1;
    model.time_base_us = 100;
    model.time_per_byte_us = 5;
    return synthetic_cost(input.size(), counts, model);
  }

  std::vector<std::pair<std::string, std::vector<std::uint8_t>>>
  fixture_corpus() const override {
    auto bytes = [](const char* s) {
      return std::vector<std::uint8_t>(s, s + std::string(s).size());
    };
    // Each blob mirrors one structured seed's edge set exactly (pairs are
    // key = value ^ 0x5A, edge = 8 + value % 74) while being smaller and
    // ~40x more energy-hungry.
    return {
        {"deep_a.bin", bytes("((AAAAAAAA))")},
        {"blob_a.bin", {0xFF, 0x5A, 0x00, 0x5B, 0x01, 0x71, 0x2B, 0x52, 0x08}},
        {"deep_b.bin", bytes("(QQQQ)mmmm")},
        {"blob_b.bin", {0xFF, 0x5A, 0x00, 0x41, 0x1B, 0x52, 0x08, 0x4D, 0x17}},
        {"crash_depth.bin", bytes("((((((((((")},
    };
  }
};

// ---------------------------------------------------------------------------
// uniform: constant per-execution energy regardless of input; a control
// model for checking that heuristics degenerate to the baseline when there
// is no energy signal.

class UniformTarget final : public SyntheticTarget {
 public:
  const std::string& name() const override {
    static const std::string n = "uniform";
    return n;
  }
  std::size_t map_size() const override { return 64; }
  std::uint64_t total_edges() const override { return 9; }  // 1 + 8

  SyntheticOutcome run(std::span<const std::uint8_t> input,
                       std::span<std::uint32_t> counts) const override {
    hit(counts, kEntryEdge);
    if (!input.empty())
      hit(counts, static_cast<EdgeId>(8 + (input[0] & 7)));
    return {};
  }

  EnergyReading cost(std::span<const std::uint8_t> input,
                     std::span<const std::uint32_t> counts) const override {
    (void)counts;
    CostModel model;
    model.base_cpu = 0.001;
    model.base_ram = 0.0001;
    model.time_base_us = 100;
    model.time_per_byte_us = 2;
    return synthetic_cost(input.size(), {}, model);
  }

  std::vector<std::pair<std::string, std::vector<std::uint8_t>>>
  fixture_corpus() const override {
    return {{"s0.bin", {0x00}},
            {"s1.bin", {0x01}},
            {"s2.bin", {0x02}},
            {"s3.bin", {0x03}}};
  }
};

std::vector<std::unique_ptr<SyntheticTarget>>& registry() {
  static std::vector<std::unique_ptr<SyntheticTarget>> targets = [] {
    std::vector<std::unique_ptr<SyntheticTarget>> t;
    t.push_back(std::make_unique<Fork3Target>());
    t.push_back(std::make_unique<KeymatchTarget>());
    t.push_back(std::make_unique<NestedParserTarget>());
    t.push_back(std::make_unique<UniformTarget>());
    return t;
  }();
  return targets;
}

}  // namespace

const SyntheticTarget* find_synthetic_target(const std::string& name) {
  for (const auto& target : registry())
    if (target->name() == name) return target.get();
  return nullptr;
}

void register_synthetic_target(std::unique_ptr<SyntheticTarget> target) {
  registry().push_back(std::move(target));
}

std::vector<std::string> synthetic_target_names() {
  std::vector<std::string> names;
  for (const auto& target : registry()) names.push_back(target->name());
  return names;
}

std::size_t write_fixture_corpus(const std::string& model_name,
                                 const std::filesystem::path& dir) {
  const SyntheticTarget* target = find_synthetic_target(model_name);
  if (!target) throw ConfigError("unknown synthetic model '" + model_name + "'");
  const auto corpus = target->fixture_corpus();
  if (corpus.empty())
    throw ConfigError("model '" + model_name + "' has no fixture corpus");
  std::filesystem::create_directories(dir);
  for (const auto& [file_name, bytes] : corpus) {
    std::ofstream out(dir / file_name, std::ios::binary);
    if (!out)
      throw ConfigError("cannot write fixture seed " +
                        (dir / file_name).string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  return corpus.size();
}

TargetSpec TargetSpec::parse(const std::string& text) {
  TargetSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("target '" + text +
                      "' must be synthetic:<model> or external:<command>");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "synthetic") {
    const SyntheticTarget* model = find_synthetic_target(rest);
    if (!model) {
      std::string known;
      for (const auto& n : synthetic_target_names())
        known += (known.empty() ? "" : ", ") + n;
      throw ConfigError("unknown synthetic model '" + rest + "' (have: " +
                        known + ")");
    }
    spec.kind = Kind::synthetic;
    spec.model = rest;
    spec.map_size = model->map_size();
    spec.total_edges_declared = model->total_edges();
  } else if (kind == "external") {
    spec.kind = Kind::external;
    std::istringstream words(rest);
    std::string word;
    while (words >> word) spec.command.push_back(word);
    if (spec.command.empty())
      throw ConfigError("external target needs a command");
    if (std::find(spec.command.begin(), spec.command.end(), "@@") !=
        spec.command.end())
      spec.input_mode = InputMode::file_arg;
  } else {
    throw ConfigError("unknown target kind '" + kind + "'");
  }
  return spec;
}

std::string TargetSpec::describe() const {
  if (kind == Kind::synthetic) return "synthetic:" + model;
  std::string joined;
  for (const auto& word : command)
    joined += (joined.empty() ? "" : " ") + word;
  return "external:" + joined;
}

}  // namespace greenfuzz
