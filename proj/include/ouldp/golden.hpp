#ifndef OULDP_GOLDEN_HPP
#define OULDP_GOLDEN_HPP

// One-dimensional maximization: golden-section search on a bracket and a
// geometric bracket expansion for functions on (0, infinity).

#include <cmath>
#include <utility>

namespace ouldp {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi]. Stops
/// when the bracket is narrower than tol * (1 + |x|) or after max_iter steps.
template <class F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double tol = 1e-10,
                             int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498948482;
  if (hi < lo) std::swap(lo, hi);
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol * (1.0 + std::abs(mid))) break;
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  ScalarMax best{c, fc, it};
  if (fd > fc) best = {d, fd, it};
  // The endpoints can win when the maximum sits on the bracket edge.
  if (const double flo = f(lo); flo > best.value) best = {lo, flo, it};
  if (const double fhi = f(hi); fhi > best.value) best = {hi, fhi, it};
  return best;
}

/// Result of expanding a bracket geometrically around a starting point.
struct GeometricBracket {
  double lo = 0.0;
  double mid = 0.0;
  double hi = 0.0;
  bool hit_upper = false;  ///< f still increasing at upper_limit
  bool hit_lower = false;  ///< f still increasing toward lower_limit
};

/// Walks start * factor^k up or down until f(mid) beats both neighbours,
/// staying within [lower_limit, upper_limit].
template <class F>
GeometricBracket expand_bracket(F&& f, double start, double factor, double lower_limit,
                                double upper_limit) {
  double mid = start;
  double f_mid = f(mid);
  double up = mid * factor;
  double f_up = f(up);
  double down = mid / factor;
  double f_down = f(down);
  while (f_up > f_mid) {
    if (up >= upper_limit) return {mid, up, up, true, false};
    down = mid;
    f_down = f_mid;
    mid = up;
    f_mid = f_up;
    up = mid * factor;
    f_up = f(up);
  }
  while (f_down > f_mid) {
    if (down <= lower_limit) return {down, down, mid, false, true};
    up = mid;
    f_up = f_mid;
    mid = down;
    f_mid = f_down;
    down = mid / factor;
    f_down = f(down);
  }
  return {down, mid, up, false, false};
}

}  // namespace ouldp

#endif  // OULDP_GOLDEN_HPP
