#ifndef OULDP_CONCENTRATION_HPP
#define OULDP_CONCENTRATION_HPP

/** @file
 * Non-asymptotic concentration of the MLE:
 *
 *   P(|theta_hat_T - theta| >= x) <= 2 exp(-x^2 h_T(y_x) / 2),
 *   y_x = argmax_{y > 0} h_T(y),
 *
 * with regime-specific h_T, the closed-form bounds obtained by plugging an
 * explicit y, and the Laplace-transform upper bounds for S_T behind them.
 * All bounds are carried as (log_bound, bound) and capped at 1.
 */

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "ouldp/cgf.hpp"
#include "ouldp/error.hpp"
#include "ouldp/golden.hpp"
#include "ouldp/ou_core.hpp"

namespace ouldp {

struct CiQuery {
  double theta = 0.0;
  double horizon = 1.0;
  double deviation = 1.0;

  void validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw DomainError("CiQuery: horizon must be positive");
    if (!(deviation > 0.0) || !std::isfinite(deviation))
      throw DomainError("CiQuery: deviation x must be positive");
    if (!std::isfinite(theta)) throw DomainError("CiQuery: theta must be finite");
  }
};

enum class CiMethod { numeric_argmax, stable_closed_form, unstable_closed_form, explosive_closed_form };

inline std::string_view to_string(CiMethod m) noexcept {
  switch (m) {
    case CiMethod::numeric_argmax: return "numeric-argmax";
    case CiMethod::stable_closed_form: return "stable-closed-form";
    case CiMethod::unstable_closed_form: return "unstable-closed-form";
    case CiMethod::explosive_closed_form: return "explosive-closed-form";
  }
  return "unknown";
}

struct CiBoundReport {
  double bound = 1.0;      ///< min(1, 2 exp(-x^2 h / 2))
  double log_bound = 0.0;  ///< log of the uncapped bound
  double y_star = 1.0;
  double h_value = 0.0;
  CiMethod method = CiMethod::numeric_argmax;
  bool capped = false;
  bool monotone = false;  ///< h_T still increasing at the search limit
  /// Stable closed form only: "small-deviation" (x <= -theta) or
  /// "large-deviation", with the simplified bound of that sub-case.
  std::string sub_case;
  double sub_case_bound = 1.0;
};

/// h_T(y) for the regime of q.theta.
inline double h_T(const CiQuery& q, double y) noexcept {
  const double th = q.theta;
  const double T = q.horizon;
  const double x2 = q.deviation * q.deviation;
  if (th < 0.0)
    return (-th * T * y + std::log(y + 2.0) - std::log(2.0 * (y + 1.0))) /
           (x2 + th * th * y * (y + 2.0));
  if (th == 0.0) return (T * y - std::numbers::ln2) / (x2 + y * y);
  return (th * T * (y + 2.0) + std::log(y) - std::log(2.0 * (y + 1.0))) /
         (x2 + th * th * y * (y + 2.0));
}

/// dh_T/dy in closed form.
inline double h_T_derivative(const CiQuery& q, double y) noexcept {
  const double th = q.theta;
  const double T = q.horizon;
  const double x2 = q.deviation * q.deviation;
  double num = 0.0, dnum = 0.0, den = 0.0, dden = 0.0;
  if (th < 0.0) {
    num = -th * T * y + std::log(y + 2.0) - std::log(2.0 * (y + 1.0));
    dnum = -th * T + 1.0 / (y + 2.0) - 1.0 / (y + 1.0);
  } else if (th == 0.0) {
    num = T * y - std::numbers::ln2;
    dnum = T;
  } else {
    num = th * T * (y + 2.0) + std::log(y) - std::log(2.0 * (y + 1.0));
    dnum = th * T + 1.0 / y - 1.0 / (y + 1.0);
  }
  if (th == 0.0) {
    den = x2 + y * y;
    dden = 2.0 * y;
  } else {
    den = x2 + th * th * y * (y + 2.0);
    dden = 2.0 * th * th * (y + 1.0);
  }
  return (dnum * den - num * dden) / (den * den);
}

struct OptimalY {
  double y = 1.0;
  double h = 0.0;
  bool monotone = false;
};

/// argmax_{y>0} h_T: bracket from y = 1 by factors of 4, then golden-section
/// to 1e-8 in y, then bisection on dh_T/dy to polish the stationary point.
/// If h_T still increases at y = 1e12 that endpoint is returned
/// with `monotone` set.
inline OptimalY optimal_y(const CiQuery& q) {
  q.validate();
  constexpr double kUpper = 1e12;
  constexpr double kLower = 1e-12;
  const auto h = [&](double y) { return h_T(q, y); };
  const auto br = expand_bracket(h, 1.0, 4.0, kLower, kUpper);
  if (br.hit_upper) return {br.hi, h(br.hi), true};
  if (br.hit_lower) return {br.lo, h(br.lo), true};
  // Golden-section in y with an absolute tolerance of 1e-8.
  const double rel_tol = 1e-8 / (1.0 + br.hi);
  const auto best = golden_section_max(h, br.lo, br.hi, rel_tol, 500);
  if (!std::isfinite(best.value))
    throw ConvergenceError("optimal_y: h_T is not finite at the maximizer", best.x, best.value);
  double lo = br.lo, hi = br.hi;
  double y = best.x;
  if (h_T_derivative(q, lo) > 0.0 && h_T_derivative(q, hi) < 0.0) {
    for (int i = 0; i < 400; ++i) {
      const double mid = std::sqrt(lo * hi);
      if (!(mid > lo && mid < hi)) break;
      if (h_T_derivative(q, mid) > 0.0) lo = mid;
      else hi = mid;
    }
    const double polished = 0.5 * (lo + hi);
    if (h_T(q, polished) >= best.value) y = polished;
  }
  return {y, h(y), false};
}

namespace detail {

inline CiBoundReport make_report(double x, double h, double y, CiMethod method) {
  CiBoundReport r;
  r.log_bound = std::numbers::ln2 - 0.5 * x * x * h;
  r.capped = r.log_bound > 0.0;
  r.bound = r.capped ? 1.0 : std::exp(r.log_bound);
  r.y_star = y;
  r.h_value = h;
  r.method = method;
  return r;
}

}  // namespace detail

/// min(1, 2 exp(-x^2 h_T(y*)/2)) with y* from optimal_y.
inline CiBoundReport ci_bound(const CiQuery& q) {
  const auto opt = optimal_y(q);
  auto r = detail::make_report(q.deviation, opt.h, opt.y, CiMethod::numeric_argmax);
  r.monotone = opt.monotone;
  return r;
}

/// Closed-form bound of the regime. Stable: maximizer of the lower envelope
/// l_T(y) = (-theta T y - log 2)/(x^2 + theta^2 y (y + 2)); unstable: exact
/// maximizer of h_T; explosive: h_T at y = log 2 / (theta T).
inline CiBoundReport corollary_bound(const CiQuery& q) {
  q.validate();
  const double th = q.theta;
  const double T = q.horizon;
  const double x = q.deviation;
  const double ln2 = std::numbers::ln2;
  const double tx = T * x;

  if (th < 0.0) {
    const double y = -(ln2 + std::sqrt(tx * tx - 2.0 * th * T * ln2 + ln2 * ln2)) / (th * T);
    const double ell = (-th * T * y - ln2) / (x * x + th * th * y * (y + 2.0));
    auto r = detail::make_report(x, ell, y, CiMethod::stable_closed_form);
    if (x <= -th) {
      r.sub_case = "small-deviation";
      r.sub_case_bound = std::min(1.0, 2.0 * std::exp(-tx * tx / (8.0 * (-th * T + ln2))));
    } else {
      r.sub_case = "large-deviation";
      r.sub_case_bound =
          std::min(1.0, 2.0 * std::exp(-tx * tx / (4.0 * (T * (x - th) + 2.0 * ln2))));
    }
    return r;
  }
  if (th == 0.0) {
    const double y = (ln2 + std::sqrt(tx * tx + ln2 * ln2)) / T;
    return detail::make_report(x, h_T(q, y), y, CiMethod::unstable_closed_form);
  }
  const double y = ln2 / (th * T);
  return detail::make_report(x, h_T(q, y), y, CiMethod::explosive_closed_form);
}

struct LaplaceBound {
  double log_bound = 0.0;
  double bound = 1.0;
  double phi = 0.0;
};

/// Upper bound on E[exp(b S_T)] for b < 0:
///   theta <= 0: exp(-T (phi + theta)/2 - log((phi - theta)/(2 phi))/2), phi > 0,
///   theta > 0:  exp( T (phi - theta)/2 - log((phi + theta)/(2 phi))/2), phi < 0,
/// with phi = +-sqrt(theta^2 - 2b) as in the CGF tilt.
inline LaplaceBound laplace_upper_bound(double theta, double horizon, double b) {
  if (!(b < 0.0)) throw DomainError("laplace_upper_bound: b must be negative");
  if (!(horizon > 0.0)) throw DomainError("laplace_upper_bound: horizon must be positive");
  const double p = phi(theta, b);
  LaplaceBound out;
  out.phi = p;
  if (theta <= 0.0)
    out.log_bound = -0.5 * horizon * (p + theta) - 0.5 * std::log((p - theta) / (2.0 * p));
  else
    out.log_bound = 0.5 * horizon * (p - theta) - 0.5 * std::log((p + theta) / (2.0 * p));
  out.bound = std::exp(out.log_bound);
  return out;
}

}  // namespace ouldp

#endif  // OULDP_CONCENTRATION_HPP
