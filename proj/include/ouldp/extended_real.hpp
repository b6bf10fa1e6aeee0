#ifndef OULDP_EXTENDED_REAL_HPP
#define OULDP_EXTENDED_REAL_HPP

#include <cmath>
#include <ostream>

#include "ouldp/error.hpp"

namespace ouldp {

/// A real number or +infinity. Infinity is a tag, never a floating inf, so
/// it cannot leak into arithmetic unnoticed.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const noexcept { return !infinite_; }
  constexpr bool is_infinite() const noexcept { return infinite_; }

  /// Finite value; throws if infinite.
  double value() const {
    if (infinite_) throw DomainError("ExtendedReal: value() on +infinity");
    return value_;
  }

  /// Finite value or std::numeric_limits<double>::infinity(), for reporting.
  double to_double() const noexcept {
    return infinite_ ? HUGE_VAL : value_;
  }

  friend constexpr bool operator==(const ExtendedReal& l, const ExtendedReal& r) {
    if (l.infinite_ || r.infinite_) return l.infinite_ == r.infinite_;
    return l.value_ == r.value_;
  }
  friend constexpr bool operator<(const ExtendedReal& l, const ExtendedReal& r) {
    if (l.infinite_) return false;
    if (r.infinite_) return true;
    return l.value_ < r.value_;
  }
  friend constexpr bool operator<=(const ExtendedReal& l, const ExtendedReal& r) {
    return !(r < l);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& v) {
    if (v.infinite_) return os << "+inf";
    return os << v.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace ouldp

#endif  // OULDP_EXTENDED_REAL_HPP
