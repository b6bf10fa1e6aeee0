#ifndef OULDP_ERROR_HPP
#define OULDP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ouldp {

/// Argument outside the region where a quantity is defined.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Operation only defined for some drift regimes (e.g. theta > 0).
class UnsupportedRegime : public DomainError {
 public:
  explicit UnsupportedRegime(const std::string& what) : DomainError(what) {}
};

/// Estimator undefined for the given path (zero energy).
class UndefinedEstimator : public DomainError {
 public:
  explicit UndefinedEstimator(const std::string& what) : DomainError(what) {}
};

/// Explosive path left the floating range.
class OverflowError : public std::overflow_error {
 public:
  OverflowError(const std::string& what, long step)
      : std::overflow_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// An optimizer failed to converge; carries the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_x, double last_value)
      : std::runtime_error(what), last_x_(last_x), last_value_(last_value) {}
  double last_iterate() const noexcept { return last_x_; }
  double last_value() const noexcept { return last_value_; }

 private:
  double last_x_;
  double last_value_;
};

}  // namespace ouldp

#endif  // OULDP_ERROR_HPP
