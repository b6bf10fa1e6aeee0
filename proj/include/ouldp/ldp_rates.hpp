#ifndef OULDP_LDP_RATES_HPP
#define OULDP_LDP_RATES_HPP

/** @file
 * Large deviation rate functions of V_T = (X_T/sqrt(T), S_T/T) and of the
 * MLE theta_hat_T = f(V_T), f(x, y) = (x^2 - 1)/(2y).
 *
 * Closed forms are exact piecewise evaluations. numeric_legendre computes
 * the Fenchel-Legendre transform of the limiting CGF directly, and
 * contraction_infimum minimizes the joint rate over the fibre f(x, y) = z;
 * both serve as independent routes to the closed forms.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ouldp/cgf.hpp"
#include "ouldp/error.hpp"
#include "ouldp/extended_real.hpp"
#include "ouldp/golden.hpp"

namespace ouldp {

enum class RateBranch {
  infinite,        ///< y <= 0
  smooth,          ///< quadratic-over-linear part of the joint rate
  plateau,         ///< constant theta part (explosive regime)
  border,          ///< MLE rate attained on the border 1 + 2yz = 0
  interior,        ///< MLE rate attained at the interior critical point
  truth,           ///< z = theta in the explosive regime
  asymptote,       ///< infimum approached as y -> infinity
  numeric,         ///< interior supremum of the numeric transform
  boundary_limit,  ///< numeric supremum reached at the domain boundary
};

inline std::string_view to_string(RateBranch b) noexcept {
  switch (b) {
    case RateBranch::infinite: return "infinite";
    case RateBranch::smooth: return "smooth";
    case RateBranch::plateau: return "plateau";
    case RateBranch::border: return "border";
    case RateBranch::interior: return "interior";
    case RateBranch::truth: return "truth";
    case RateBranch::asymptote: return "asymptote";
    case RateBranch::numeric: return "numeric";
    case RateBranch::boundary_limit: return "boundary_limit";
  }
  return "unknown";
}

struct RateValue {
  ExtendedReal value;
  RateBranch branch = RateBranch::smooth;
};

namespace detail {
// Normalizes -0.0 so that printed rates read 0.
inline double clean_zero(double v) noexcept { return v + 0.0; }
}  // namespace detail

/// Joint rate of V_T. For theta > 0 the smooth part applies on the exposed
/// set 0 < y < (1 + x^2)/(2 theta) and the rate is constant theta beyond it.
inline RateValue joint_rate(double theta, double x, double y) noexcept {
  if (!(y > 0.0)) return {ExtendedReal::infinity(), RateBranch::infinite};
  const double s = 1.0 + x * x;
  if (theta > 0.0 && y >= s / (2.0 * theta)) return {theta, RateBranch::plateau};
  const double v = 0.5 * theta * (1.0 - x * x + theta * y) + s * s / (8.0 * y);
  return {detail::clean_zero(v), RateBranch::smooth};
}

/// Rate function of the MLE.
inline RateValue mle_rate(double theta, double z) noexcept {
  const auto border = [&] {
    if (theta == 0.0) return detail::clean_zero(-z / 4.0);
    return detail::clean_zero(-(z - theta) * (z - theta) / (4.0 * z));
  };
  if (theta < 0.0) {
    if (z <= theta / 3.0) return {border(), RateBranch::border};
    return {2.0 * z - theta, RateBranch::interior};
  }
  if (theta == 0.0) {
    if (z <= 0.0) return {border(), RateBranch::border};
    return {2.0 * z, RateBranch::interior};
  }
  if (z <= -theta) return {border(), RateBranch::border};
  if (z < theta) return {theta, RateBranch::plateau};
  if (z == theta) return {0.0, RateBranch::truth};
  return {2.0 * z - theta, RateBranch::interior};
}

/// The exposed set {0 < y < (1 + x^2)/(2 theta)}, defined for theta > 0.
inline bool exposed_member(double theta, double x, double y) {
  if (!(theta > 0.0)) throw UnsupportedRegime("exposed_member: requires theta > 0");
  return y > 0.0 && y < (1.0 + x * x) / (2.0 * theta);
}

struct LegendreOptions {
  double tol = 1e-6;        ///< target accuracy of the supremum
  double u_min = 1e-8;      ///< smallest radial coordinate (b - b_max = -u^2/2)
  double u_max = 1e4;       ///< initial upper end of the coarse grid
  int coarse_points = 61;   ///< log-spaced coarse grid in u
  int max_iterations = 300; ///< per golden-section search
};

struct LegendreResult {
  RateValue rate;
  double a = 0.0;  ///< maximizing a (at the final iterate)
  double b = 0.0;  ///< maximizing b
  double u = 0.0;  ///< radial coordinate of the maximizer
};

namespace detail {

// Point of the domain of L parametrized by u > 0 so that r = sqrt(theta^2 - 2b)
// stays admissible: r = u for theta <= 0, r = sqrt(theta^2 + u^2) otherwise.
// d = r - theta is the denominator of the quadratic term of L.
struct RadialPoint {
  double b;
  double r;
  double d;
};

inline RadialPoint radial_point(double theta, double u) noexcept {
  if (theta <= 0.0) return {0.5 * (theta * theta - u * u), u, u - theta};
  const double r = std::hypot(theta, u);
  return {-0.5 * u * u, r, u * u / (r + theta)};
}

class LegendreObjective {
 public:
  LegendreObjective(double theta, double x, double y, const LegendreOptions& opts)
      : theta_(theta), x_(x), y_(y), opts_(opts),
        a_half_width_(10.0 * (1.0 + std::abs(x))) {}

  // a x + b y - L(a, b) at the radial point u.
  double value(double a, const RadialPoint& p) const noexcept {
    const double base = p.b * y_ + 0.5 * (theta_ + p.r);
    if (p.d == 0.0) return a == 0.0 ? base : -std::numeric_limits<double>::infinity();
    return a * x_ + base - a * a / (2.0 * p.d);
  }

  // sup over a of value(a, u), by golden-section on a widening bracket.
  ScalarMax profile(double u) {
    const RadialPoint p = radial_point(theta_, u);
    if (p.d == 0.0) return {0.0, value(0.0, p), 0};
    const double arg_tol = std::min(1e-12, opts_.tol * 1e-4);
    for (;;) {
      const double w = a_half_width_;
      auto best = golden_section_max([&](double a) { return value(a, p); }, -w, w, arg_tol,
                                     opts_.max_iterations);
      if (std::abs(best.x) < 0.999 * w) return best;
      if (w > 1e15)
        throw ConvergenceError("numeric_legendre: a-bracket diverged", best.x, best.value);
      a_half_width_ *= 8.0;
    }
  }

 private:
  double theta_, x_, y_;
  LegendreOptions opts_;
  double a_half_width_;
};

}  // namespace detail

/// Fenchel-Legendre transform sup_{(a,b) in D_L} {a x + b y - L(a,b)}.
///
/// b is reparametrized by u > 0 so every evaluation lies inside D_L. The
/// profile u -> sup_a G(a, u) is unimodal (concave in b, b monotone in u):
/// a log-spaced coarse grid locates the maximum, then a golden-section in
/// log u refines it with an inner golden-section over a. When the supremum
/// sits on the boundary u -> 0 (explosive plateau), the boundary limit is
/// reported instead of the last iterate.
inline LegendreResult numeric_legendre(double theta, double x, double y,
                                       const LegendreOptions& opts = {}) {
  if (!(y > 0.0)) return {{ExtendedReal::infinity(), RateBranch::infinite}, 0, 0, 0};
  detail::LegendreObjective obj(theta, x, y, opts);

  double log_lo = std::log(opts.u_min);
  double log_hi = std::log(opts.u_max);
  const int n = std::max(opts.coarse_points, 5);
  std::vector<double> grid(static_cast<std::size_t>(n));
  std::vector<double> vals(grid.size());
  std::size_t best = 0;
  for (;;) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = log_lo + (log_hi - log_lo) * static_cast<double>(i) / (n - 1);
      vals[i] = obj.profile(std::exp(grid[i])).value;
      if (vals[i] > vals[best]) best = i;
    }
    if (best + 1 < grid.size()) break;
    if (log_hi > std::log(1e12))
      throw ConvergenceError("numeric_legendre: supremum escapes to large |b|",
                             std::exp(grid[best]), vals[best]);
    log_hi += std::log(100.0);
    best = 0;
  }

  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1];
  const double arg_tol = std::min(1e-10, opts.tol * 1e-4);
  const auto refined = golden_section_max([&](double s) { return obj.profile(std::exp(s)).value; },
                                          lo, hi, arg_tol, opts.max_iterations);
  const double u_star = std::exp(refined.x);
  const auto inner = obj.profile(u_star);

  LegendreResult out;
  const auto p = detail::radial_point(theta, u_star);
  out.a = inner.x;
  out.b = p.b;
  out.u = u_star;
  out.rate = {detail::clean_zero(std::max(0.0, refined.value)), RateBranch::numeric};

  // Still climbing at the lower edge (up to rounding): report the limit u -> 0.
  if (best <= 1 || u_star < 1e-5) {
    const auto edge = obj.profile(0.0);
    if (edge.value >= refined.value - 1e-12 * (1.0 + std::abs(refined.value))) {
      const auto p0 = detail::radial_point(theta, 0.0);
      out.a = detail::clean_zero(edge.x);
      out.b = detail::clean_zero(p0.b);
      out.u = 0.0;
      out.rate = {detail::clean_zero(std::max(0.0, edge.value)), RateBranch::boundary_limit};
    }
  }
  return out;
}

struct ContractionResult {
  RateValue rate;
  std::optional<double> y_star;  ///< minimizing y; empty for the y -> infinity limit
};

/// h(y) = theta y (theta - 2z)/2 + (1 + yz)^2/(2y): the joint rate on the
/// fibre {x^2 = 1 + 2yz}.
inline double contraction_objective(double theta, double z, double y) noexcept {
  const double w = 1.0 + y * z;
  return 0.5 * theta * y * (theta - 2.0 * z) + w * w / (2.0 * y);
}

/// inf { h(y) : y > 0, 1 + 2yz >= 0 }. h is convex with critical point
/// y = 1/|z - theta|; the border y = -1/(2z) is a candidate when z < 0.
/// When both are feasible the smaller value wins.
inline ContractionResult contraction_infimum(double theta, double z) noexcept {
  std::optional<ContractionResult> best;
  const auto consider = [&](double y, RateBranch branch) {
    const double v = detail::clean_zero(contraction_objective(theta, z, y));
    if (!best || v < best->rate.value.value()) best = ContractionResult{{v, branch}, y};
  };
  if (z < 0.0) consider(-1.0 / (2.0 * z), RateBranch::border);
  if (z != theta) {
    const double y_c = 1.0 / std::abs(z - theta);
    if (1.0 + 2.0 * y_c * z >= 0.0) consider(y_c, RateBranch::interior);
  } else if (z >= 0.0) {
    // h(y) = theta + 1/(2y) decreases without bound on y.
    return {{detail::clean_zero(theta), RateBranch::asymptote}, std::nullopt};
  }
  return *best;
}

}  // namespace ouldp

#endif  // OULDP_LDP_RATES_HPP
