// config.hpp
//
// Flat key/value configuration files: `key = value` lines, `#` comments,
// optional double quotes around values. Every CLI flag has a config-file
// equivalent; flags override file values.

#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace greenfuzz {

using ConfigValues = std::map<std::string, std::string>;

// Throws ConfigError on unreadable files or lines that are not
// `key = value`.
ConfigValues parse_config_file(const std::filesystem::path& path);
ConfigValues parse_config_text(const std::string& text);

// Typed accessors; throw ConfigError on unparsable values.
std::uint64_t config_u64(const ConfigValues& values, const std::string& key);
double config_double(const ConfigValues& values, const std::string& key);
bool config_bool(const ConfigValues& values, const std::string& key);

// Parses a duration like "90", "90s", "5m", "2h" into seconds.
double parse_duration_seconds(const std::string& text);

}  // namespace greenfuzz
