#include "greenfuzz/coverage.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "greenfuzz/errors.hpp"
#include "greenfuzz/hash.hpp"

namespace greenfuzz {

EdgeTrace EdgeTrace::from_counts(std::span<const std::uint32_t> raw) {
  EdgeTrace trace(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    trace.buckets_[i] = classify_count(raw[i]);
  return trace;
}

EdgeTrace EdgeTrace::from_showmap(std::istream& in, std::size_t map_size) {
  EdgeTrace trace(map_size);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* begin = line.data();
    const char* end = begin + line.size();
    std::uint64_t index = 0;
    auto [sep, ec] = std::from_chars(begin, end, index);
    if (ec != std::errc{} || sep == end || *sep != ':')
      throw ConfigError("showmap line " + std::to_string(lineno) +
                        " is not 'edge:value': " + line);
    std::uint64_t value = 0;
    auto [tail, ec2] = std::from_chars(sep + 1, end, value);
    if (ec2 != std::errc{} || tail != end)
      throw ConfigError("showmap line " + std::to_string(lineno) +
                        " has a bad value: " + line);
    if (index >= map_size)
      throw ConfigError("showmap edge " + std::to_string(index) +
                        " exceeds map size " + std::to_string(map_size));
    const std::uint32_t clamped =
        value > 0xffffffffULL ? 0xffffffffu : static_cast<std::uint32_t>(value);
    const std::uint8_t cls = classify_count(clamped);
    if (cls > trace.buckets_[index]) trace.buckets_[index] = cls;
  }
  return trace;
}

void EdgeTrace::write_showmap(std::ostream& out) const {
  for (std::size_t i = 0; i < buckets_.size(); ++i)
    if (buckets_[i])
      out << i << ':' << static_cast<unsigned>(buckets_[i]) << '\n';
}

std::vector<EdgeId> EdgeTrace::edges() const {
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < buckets_.size(); ++i)
    if (buckets_[i]) out.push_back(static_cast<EdgeId>(i));
  return out;
}

std::size_t EdgeTrace::edge_count() const {
  std::size_t n = 0;
  for (std::uint8_t b : buckets_)
    if (b) ++n;
  return n;
}

std::uint64_t EdgeTrace::digest() const {
  return fnv1a64(std::span<const std::uint8_t>(buckets_));
}

NoveltyReport CoverageMap::merge(const EdgeTrace& trace) {
  if (trace.map_size() != virgin_.size())
    throw ConfigError("trace map size " + std::to_string(trace.map_size()) +
                      " does not match coverage map size " +
                      std::to_string(virgin_.size()));
  NoveltyReport report;
  const auto& buckets = trace.buckets();
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const std::uint8_t cls = buckets[i];
    if (!cls) continue;
    const std::uint8_t seen = virgin_[i];
    if (seen == 0) {
      ++report.new_edges;
      ++unique_edges_;
      virgin_[i] = cls;
    } else if ((seen | cls) != seen) {
      ++report.new_classes;
      virgin_[i] = static_cast<std::uint8_t>(seen | cls);
    }
  }
  return report;
}

}  // namespace greenfuzz
