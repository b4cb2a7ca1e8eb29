#pragma once

#include <stdexcept>
#include <string>

namespace pmrf {

// Bad user-supplied data (files, edge lists, labels). CLI exit code 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad run configuration (flags, config file, incompatible options). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values encountered during optimization. CLI exit code 4.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke an interface contract (dimension mismatch etc).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

inline void check_contract(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace pmrf
