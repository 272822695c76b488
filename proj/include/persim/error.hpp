#pragma once

#include <stdexcept>
#include <string>

namespace persim {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model/config invariant violations (CLI exit code 2).
struct InvariantError : Error {
  explicit InvariantError(const std::string& msg) : Error(msg) {}
};

// Numerical blow-up: NaN/Inf or positivity failure beyond tolerance (exit 3).
struct BlowupError : Error {
  explicit BlowupError(const std::string& msg) : Error(msg) {}
};

}  // namespace persim
