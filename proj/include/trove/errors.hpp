#pragma once

#include <stdexcept>
#include <string>

namespace trove {

/// Invalid arguments or configuration supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Corrupt, truncated or inconsistent data on disk or in memory.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trove
