#pragma once

#include <stdexcept>
#include <string>

namespace rangelab {

/// Violated precondition or malformed input. The CLI maps this to exit code 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured memory or time budget. Exit code 3.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace rangelab
