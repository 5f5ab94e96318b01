#pragma once

#include <stdexcept>
#include <string>

namespace mframes {

/// Bad run configuration (CLI flags, config file, invalid k/task combos).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (corpus files, prediction files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Completion service failure after retries, or a missing scripted key.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every generation for a vote abstained; surfaced per item.
class AllAbstainedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mframes
