// errors.hpp
//
// Exception types shared across the fuzzer. Configuration problems
// (bad flags, mismatched map sizes, missing targets) are distinct from
// runtime faults so the CLI can map them to exit code 2.

#pragma once

#include <stdexcept>
#include <string>

namespace greenfuzz {

// Invalid configuration: wrong sizes, unknown targets, bad flag combos.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace greenfuzz
