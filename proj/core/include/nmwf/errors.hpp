#pragma once

#include <stdexcept>
#include <string>

namespace nmwf {

// Invalid run configuration or malformed input file.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical guard tripped (step too large, scaling too aggressive,
// per-trajectory cumulative probability out of the one-jump regime).
struct GuardError : std::runtime_error {
  explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

// Population escaped through the top of the truncated Fock basis.
struct LeakageError : std::runtime_error {
  explicit LeakageError(const std::string& msg) : std::runtime_error(msg) {}
};

// An integrator invariant (trace, hermiticity, norm) was breached.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nmwf
