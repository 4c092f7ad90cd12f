#pragma once

#include <stdexcept>
#include <string>

namespace switchtrack {

// Base for all library errors. Exit-code mapping lives in the CLI.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments or config values (CLI exit code 2).
struct InvalidInputError : Error {
  using Error::Error;
};

// Malformed or inconsistent data files (CLI exit code 3).
struct ParseError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

// Numerical failures (CLI exit code 4).
struct NumericalError : Error {
  using Error::Error;
};
struct SingularModelError : NumericalError {
  using NumericalError::NumericalError;
};
struct RankDeficiencyError : NumericalError {
  using NumericalError::NumericalError;
};
struct DegenerateIntervalError : NumericalError {
  using NumericalError::NumericalError;
};
struct IdentifiabilityViolationError : NumericalError {
  using NumericalError::NumericalError;
};
struct ZeroSusceptibilityError : NumericalError {
  using NumericalError::NumericalError;
};
struct DivergenceError : NumericalError {
  using NumericalError::NumericalError;
};
struct UndefinedMetricError : NumericalError {
  using NumericalError::NumericalError;
};

// Combinatorial guards on the brute-force validators.
struct ResourceGuardError : Error {
  using Error::Error;
};

}  // namespace switchtrack
