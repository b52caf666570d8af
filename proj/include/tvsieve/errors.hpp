#pragma once

#include <stdexcept>
#include <string>

namespace tvsieve {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised for invalid configurations (bad sizes, unsupported orders, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a design matrix is numerically rank deficient.
class SingularDesignError : public std::runtime_error {
 public:
  SingularDesignError(const std::string& what, double condition)
      : std::runtime_error(what), condition_number(condition) {}
  double condition_number;
};

/// Raised when a simulated recursion produces a non-finite value.
class SimulationDivergence : public std::runtime_error {
 public:
  SimulationDivergence(const std::string& what, long index)
      : std::runtime_error(what), sample_index(index) {}
  long sample_index;
};

/// Raised when a data file cannot be parsed; carries row/column context.
class IngestError : public std::runtime_error {
 public:
  explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the separability factorization when the normalizing integral vanishes.
class DegenerateNormalization : public std::runtime_error {
 public:
  explicit DegenerateNormalization(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when model selection cannot evaluate any candidate.
class TuningError : public std::runtime_error {
 public:
  explicit TuningError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tvsieve
