#pragma once
// Error taxonomy shared by all modules. Each maps to a CLI exit code:
// config errors -> 2, InvalidDims -> 3, InsufficientData -> 4.

#include <stdexcept>
#include <string>

namespace relaylab {

// A matrix inverse hit condition number > 1e14: degenerate channel draw.
// Callers discard the trial, resample from a reserved stream, and count it.
struct SingularSystem : std::runtime_error {
  explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

// Antenna configuration violates a scheme precondition
// (e.g. ZF requires N_S <= min(N_R, N_D)).
struct InvalidDims : std::invalid_argument {
  explicit InvalidDims(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside a documented domain (e.g. multiplexing gain r > N/2).
struct OutOfRange : std::domain_error {
  explicit OutOfRange(const std::string& what) : std::domain_error(what) {}
};

// Too few admissible points for a statistical fit.
struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relaylab
