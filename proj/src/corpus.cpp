#include "greenfuzz/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "greenfuzz/errors.hpp"
#include "greenfuzz/hash.hpp"

namespace greenfuzz {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<SeedInput> load_seed_dir(const fs::path& dir, std::size_t max_len,
                                     std::vector<std::string>* warnings) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec) || ec)
    throw ConfigError("seed directory '" + dir.string() + "' does not exist");

  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());

  std::vector<SeedInput> seeds;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      if (warnings)
        warnings->push_back("skipping unreadable seed " + path.string());
      continue;
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
      if (warnings)
        warnings->push_back("skipping unreadable seed " + path.string());
      continue;
    }
    if (bytes.size() > max_len) {
      if (warnings)
        warnings->push_back("skipping oversize seed " + path.string() + " (" +
                            std::to_string(bytes.size()) + " bytes)");
      continue;
    }
    seeds.push_back({path.filename().string(), std::move(bytes)});
  }
  return seeds;
}

ProfileResult profile_corpus(std::span<const SeedInput> seeds,
                             const ExecuteFn& run) {
  ProfileResult result;
  for (const auto& seed : seeds) {
    ExecResult exec = run(seed.bytes);
    ++result.total_execs;
    result.cpu_joules += exec.energy.cpu_joules;
    result.ram_joules += exec.energy.ram_joules;
    result.elapsed_us += exec.exec_time_us;

    if (exec.status != ExecResult::Status::ok) {
      result.crashes.push_back({seed.id, exec.term_signal});
      continue;
    }
    SeedRecord record;
    record.id = seed.id;
    record.bytes = seed.bytes;
    record.trace = std::move(exec.trace);
    record.energy = exec.energy;
    record.exec_time_us = exec.exec_time_us;
    record.size_bytes = record.bytes.size();
    result.records.push_back(std::move(record));
  }
  return result;
}

bool cheaper_seed(const SeedRecord& a, const SeedRecord& b) {
  if (a.energy.total() != b.energy.total())
    return a.energy.total() < b.energy.total();
  if (a.size_bytes != b.size_bytes) return a.size_bytes < b.size_bytes;
  if (a.exec_time_us != b.exec_time_us) return a.exec_time_us < b.exec_time_us;
  return a.id < b.id;
}

namespace {

// coverage_minimise preference: smaller, then faster, then id.
bool smaller_seed(const SeedRecord& a, const SeedRecord& b) {
  if (a.size_bytes != b.size_bytes) return a.size_bytes < b.size_bytes;
  if (a.exec_time_us != b.exec_time_us) return a.exec_time_us < b.exec_time_us;
  return a.id < b.id;
}

std::vector<std::string> sorted_unique(std::set<std::string>&& ids) {
  return {ids.begin(), ids.end()};
}

}  // namespace

MinimiseResult green_minimise(std::span<const SeedRecord> records) {
  MinimiseResult result;
  std::unordered_map<EdgeId, const SeedRecord*> champion;
  for (const auto& record : records) {
    for (EdgeId edge : record.trace.edges()) {
      auto [it, inserted] = champion.try_emplace(edge, &record);
      if (!inserted && cheaper_seed(record, *it->second)) it->second = &record;
    }
  }

  std::set<std::string> kept;
  for (const auto& [edge, record] : champion) {
    result.champions.by_edge[edge] = record->id;
    kept.insert(record->id);
  }

  if (kept.empty() && !records.empty()) {
    // No seed produced a trace; keep the smallest rather than emptying the
    // corpus (over-aggressive minimisation starves the fuzzing loop).
    const SeedRecord* smallest = &records[0];
    for (const auto& record : records)
      if (smaller_seed(record, *smallest)) smallest = &record;
    kept.insert(smallest->id);
    result.kept_fallback = true;
  }

  result.kept = sorted_unique(std::move(kept));
  return result;
}

std::vector<std::string> coverage_minimise(std::span<const SeedRecord> records) {
  // Union of edges, walked in index order.
  std::set<EdgeId> all_edges;
  for (const auto& record : records)
    for (EdgeId edge : record.trace.edges()) all_edges.insert(edge);

  std::set<std::string> kept;
  std::unordered_set<EdgeId> covered;
  for (EdgeId edge : all_edges) {
    if (covered.count(edge)) continue;
    const SeedRecord* winner = nullptr;
    for (const auto& record : records) {
      if (!record.trace[edge]) continue;
      if (!winner || smaller_seed(record, *winner)) winner = &record;
    }
    kept.insert(winner->id);
    for (EdgeId e : winner->trace.edges()) covered.insert(e);
  }

  if (kept.empty() && !records.empty()) {
    const SeedRecord* smallest = &records[0];
    for (const auto& record : records)
      if (smaller_seed(record, *smallest)) smallest = &record;
    kept.insert(smallest->id);
  }
  return sorted_unique(std::move(kept));
}

namespace {

std::string sanitize_name(const std::string& id) {
  std::string out;
  for (char c : id)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
            c == '-' || c == '_')
               ? c
               : '_';
  if (out.empty()) out = "seed";
  return out;
}

}  // namespace

Manifest write_minimised(std::span<const SeedRecord> records,
                         std::span<const std::string> kept,
                         const fs::path& out_dir,
                         const std::string& mode_label) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " +
                             out_dir.string() + ": " + ec.message());

  std::unordered_map<std::string, const SeedRecord*> by_id;
  for (const auto& record : records) by_id[record.id] = &record;

  Manifest manifest;
  manifest.input_count = records.size();
  manifest.kept_count = kept.size();

  CoverageMap union_map(records.empty() ? 1 : records[0].trace.map_size());
  std::unordered_set<std::string> used_names;

  for (const auto& id : kept) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::runtime_error("kept id '" + id + "' has no profiled record");
    const SeedRecord& record = *it->second;

    std::string file_name = sanitize_name(id);
    if (!used_names.insert(file_name).second) {
      file_name += "_" + to_hex(fnv1a64(id)).substr(0, 8);
      used_names.insert(file_name);
    }

    std::ofstream out(out_dir / file_name, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " +
                               (out_dir / file_name).string());
    out.write(reinterpret_cast<const char*>(record.bytes.data()),
              static_cast<std::streamsize>(record.bytes.size()));
    if (!out)
      throw std::runtime_error("short write to " +
                               (out_dir / file_name).string());

    ManifestEntry entry;
    entry.id = id;
    entry.file_name = file_name;
    entry.edges = record.trace.edge_count();
    entry.energy_total_j = record.energy.total();
    entry.cpu_j = record.energy.cpu_joules;
    entry.ram_j = record.energy.ram_joules;
    entry.size_bytes = record.size_bytes;
    entry.exec_time_us = record.exec_time_us;
    manifest.entries.push_back(entry);

    manifest.energy_total_j += record.energy.total();
    manifest.size_total_bytes += record.size_bytes;
    union_map.merge(record.trace);
  }
  manifest.union_edges = union_map.unique_edges();

  ordered_json doc;
  doc["schema"] = "greenfuzz-cmin-manifest-v1";
  doc["mode"] = mode_label;
  doc["kept"] = manifest.kept_count;
  doc["input"] = manifest.input_count;
  doc["union_edges"] = manifest.union_edges;
  doc["energy_total_j"] = manifest.energy_total_j;
  doc["size_total_bytes"] = manifest.size_total_bytes;
  doc["seeds"] = ordered_json::array();
  for (const auto& entry : manifest.entries) {
    ordered_json seed;
    seed["id"] = entry.id;
    seed["file"] = entry.file_name;
    seed["edges"] = entry.edges;
    seed["energy_total_j"] = entry.energy_total_j;
    seed["cpu_j"] = entry.cpu_j;
    seed["ram_j"] = entry.ram_j;
    seed["size_bytes"] = entry.size_bytes;
    seed["exec_time_us"] = entry.exec_time_us;
    doc["seeds"].push_back(seed);
  }

  std::ofstream manifest_out(out_dir / "manifest.json", std::ios::trunc);
  if (!manifest_out)
    throw std::runtime_error("cannot write manifest.json in " +
                             out_dir.string());
  manifest_out << doc.dump(2) << '\n';
  return manifest;
}

double kept_energy_total(std::span<const SeedRecord> records,
                         std::span<const std::string> kept) {
  std::unordered_set<std::string> keep(kept.begin(), kept.end());
  double total = 0.0;
  for (const auto& record : records)
    if (keep.count(record.id)) total += record.energy.total();
  return total;
}

}  // namespace greenfuzz
