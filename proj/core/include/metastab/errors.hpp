#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace metastab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A potential evaluated negative, or a claimed zero is not a zero.
class InvalidPotentialError : public Error {
 public:
  using Error::Error;
};

/// Non-degeneracy of the wells fails (Hessian not positive definite at a zero).
class HypothesisViolationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Damping positivity could not be certified. Carries the worst sample.
class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, double alpha, std::vector<double> worst_point)
      : Error(what), alpha_(alpha), worst_point_(std::move(worst_point)) {}
  double alpha() const noexcept { return alpha_; }
  const std::vector<double>& worst_point() const noexcept { return worst_point_; }

 private:
  double alpha_;
  std::vector<double> worst_point_;
};

/// Path optimizer stopped before meeting its tolerance. Carries the best action found,
/// which is an upper bound on the metric value.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double best_value)
      : Error(what), best_value_(best_value) {}
  double best_value() const noexcept { return best_value_; }

 private:
  double best_value_;
};

/// Transition-layer bookkeeping contradicts the energy lower bound.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Persisted data does not match its recorded hash.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Too few usable samples for a fit.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace metastab
