#pragma once

#include <stdexcept>
#include <string>

namespace citevec {

// Unreadable or malformed input data (files, rows, fields).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: out-of-range thresholds, bad flag combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke an operation's precondition (zero vector passed to
// distance, k out of range, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace citevec
