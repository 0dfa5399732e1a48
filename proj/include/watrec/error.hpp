#pragma once

#include <stdexcept>
#include <string>

namespace watrec {

// Bad input: malformed JSON, schema violations, infeasible parameter combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while executing an otherwise valid request (I/O, non-convergence).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace watrec
