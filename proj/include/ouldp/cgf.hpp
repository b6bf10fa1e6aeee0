#ifndef OULDP_CGF_HPP
#define OULDP_CGF_HPP

/** @file
 * Normalized cumulant generating functions of the OU statistics.
 *
 *   L_T(a,b)      = (1/T) log E[exp(a sqrt(T) X_T + b S_T)]
 *   Lambda_T(a,b) = (1/T) log E[exp(a X_T^2 + b S_T)]
 *
 * Both are evaluated through a drift change to phi = +-sqrt(theta^2 - 2b),
 * under which X_T ~ N(0, sigma_T^2) with sigma_T^2 = (e^{2 phi T} - 1)/(2 phi)
 * and gamma_T = 1 + (phi - theta) sigma_T^2. The sign of phi is negative in
 * the explosive regime theta > 0.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "ouldp/error.hpp"
#include "ouldp/extended_real.hpp"
#include "ouldp/ou_core.hpp"

namespace ouldp {

/// Guard band around domain boundaries, relative to max(1, theta^2).
inline constexpr double kDomainGuard = 1e-12;

enum class DomainStatus { inside, boundary, outside };

enum class CgfStatus {
  finite,
  diverges,                ///< gamma_T (or its W analogue) is not positive
  boundary,                ///< theta^2 - 2b within the guard band of 0
  outside_parametrization  ///< theta^2 - 2b < 0: phi is not real
};

inline std::string_view to_string(CgfStatus s) noexcept {
  switch (s) {
    case CgfStatus::finite: return "finite";
    case CgfStatus::diverges: return "diverges";
    case CgfStatus::boundary: return "boundary";
    case CgfStatus::outside_parametrization: return "outside_parametrization";
  }
  return "unknown";
}

inline std::string_view to_string(DomainStatus s) noexcept {
  switch (s) {
    case DomainStatus::inside: return "inside";
    case DomainStatus::boundary: return "boundary";
    case DomainStatus::outside: return "outside";
  }
  return "unknown";
}

/// (a, b) evaluation point; horizon empty means the T -> infinity limit.
struct CgfQuery {
  double a = 0.0;
  double b = 0.0;
  double theta = 0.0;
  std::optional<double> horizon;
};

struct CgfValue {
  ExtendedReal value = ExtendedReal::infinity();
  double phi = std::numeric_limits<double>::quiet_NaN();
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double log_sigma2 = std::numeric_limits<double>::quiet_NaN();
  double log_gamma = std::numeric_limits<double>::quiet_NaN();
  CgfStatus status = CgfStatus::outside_parametrization;
  /// Set when the formula is used outside the regime it was derived for.
  bool extrapolated = false;
};

namespace detail {

inline double guard_scale(double theta) noexcept {
  return kDomainGuard * std::max(1.0, theta * theta);
}

inline DomainStatus classify_gap(double gap, double theta) noexcept {
  const double eps = guard_scale(theta);
  if (gap > eps) return DomainStatus::inside;
  if (gap >= -eps) return DomainStatus::boundary;
  return DomainStatus::outside;
}

}  // namespace detail

/// Tilted drift: +sqrt(theta^2 - 2b) for theta <= 0, -sqrt(theta^2 - 2b) for
/// theta > 0.
inline double phi(double theta, double b) {
  const double disc = theta * theta - 2.0 * b;
  if (!(disc > 0.0))
    throw DomainError("phi: theta^2 - 2b must be positive (got " + std::to_string(disc) + ")");
  const double root = std::sqrt(disc);
  return theta > 0.0 ? -root : root;
}

/// Effective domain of the limiting L: b < theta^2/2 for theta <= 0 and
/// b < 0 for theta > 0. Points within the guard band report `boundary`.
inline DomainStatus domain_status_L(double theta, double /*a*/, double b) noexcept {
  const double b_max = theta <= 0.0 ? 0.5 * theta * theta : 0.0;
  return detail::classify_gap(b_max - b, theta);
}

inline bool domain_L(double theta, double a, double b) noexcept {
  return domain_status_L(theta, a, b) == DomainStatus::inside;
}

/// Limiting CGF L(a,b) = -(theta + r)/2 + a^2 / (2 (r - theta)),
/// r = sqrt(theta^2 - 2b); +infinity off the open domain.
inline ExtendedReal limiting_cgf(double theta, double a, double b) noexcept {
  if (!domain_L(theta, a, b)) return ExtendedReal::infinity();
  const double r = std::sqrt(theta * theta - 2.0 * b);
  // r - theta without cancellation when theta > 0 and r is close to theta.
  const double gap = theta > 0.0 ? (-2.0 * b) / (r + theta) : r - theta;
  return -0.5 * (theta + r) + a * a / (2.0 * gap);
}

/// Effective domain of the limiting Lambda, stated for theta >= 0:
/// theta^2 - 2b > 0 and 2a + theta < sqrt(theta^2 - 2b).
inline DomainStatus domain_status_Lambda(double theta, double a, double b) {
  if (theta < 0.0)
    throw UnsupportedRegime("domain_Lambda: only stated for theta >= 0");
  const double disc = theta * theta - 2.0 * b;
  const auto first = detail::classify_gap(disc, theta);
  if (first != DomainStatus::inside) return first;
  return detail::classify_gap(std::sqrt(disc) - (2.0 * a + theta), theta);
}

inline bool domain_Lambda(double theta, double a, double b) {
  return domain_status_Lambda(theta, a, b) == DomainStatus::inside;
}

namespace detail {

// Shared part of the finite-T computations: fills phi, sigma_T^2 and reports
// the status of theta^2 - 2b. Returns false if phi is unavailable.
inline bool tilt(const CgfQuery& q, CgfValue& out) {
  const double disc = q.theta * q.theta - 2.0 * q.b;
  switch (classify_gap(disc, q.theta)) {
    case DomainStatus::boundary:
      out.status = CgfStatus::boundary;
      return false;
    case DomainStatus::outside:
      out.status = CgfStatus::outside_parametrization;
      return false;
    case DomainStatus::inside:
      break;
  }
  out.phi = phi(q.theta, q.b);
  out.log_sigma2 = log_transition_variance(out.phi, *q.horizon);
  out.sigma2 = std::exp(out.log_sigma2);
  return true;
}

// log(1 + k sigma^2) in log-space; empty when the argument is not positive.
inline std::optional<double> log_one_plus(double k, double log_sigma2) {
  if (log_sigma2 < 700.0) {
    const double ks = k * std::exp(log_sigma2);
    if (!(ks > -1.0)) return std::nullopt;
    return std::log1p(ks);
  }
  const double inner = std::exp(-log_sigma2) + k;
  if (!(inner > 0.0)) return std::nullopt;
  return log_sigma2 + std::log(inner);
}

inline void check_horizon(const CgfQuery& q) {
  if (q.horizon && !(*q.horizon > 0.0))
    throw DomainError("cgf: horizon must be positive");
}

}  // namespace detail

/// Exact L_T(a,b) = (phi - theta)/2 + a^2 sigma_T^2/(2 gamma_T) - log(gamma_T)/(2T).
/// Without a horizon, returns the limiting value.
inline CgfValue finite_cgf(const CgfQuery& q) {
  detail::check_horizon(q);
  CgfValue out;
  if (!q.horizon) {
    out.value = limiting_cgf(q.theta, q.a, q.b);
    const auto st = domain_status_L(q.theta, q.a, q.b);
    out.status = st == DomainStatus::inside     ? CgfStatus::finite
                 : st == DomainStatus::boundary ? CgfStatus::boundary
                                                : CgfStatus::diverges;
    if (st == DomainStatus::inside) out.phi = phi(q.theta, q.b);
    return out;
  }
  if (!detail::tilt(q, out)) return out;

  const double T = *q.horizon;
  const double k = out.phi - q.theta;
  const auto log_gamma = detail::log_one_plus(k, out.log_sigma2);
  if (!log_gamma) {
    out.status = CgfStatus::diverges;
    out.gamma = 1.0 + k * out.sigma2;
    return out;
  }
  out.log_gamma = *log_gamma;
  out.gamma = std::exp(out.log_gamma);
  // a^2 sigma^2 / (2 gamma) = a^2 / (2 (1/sigma^2 + k)), safe when sigma^2 overflows.
  const double quad = q.a * q.a / (2.0 * (std::exp(-out.log_sigma2) + k));
  out.value = 0.5 * k + quad - out.log_gamma / (2.0 * T);
  out.status = CgfStatus::finite;
  return out;
}

/// Exact Lambda_T(a,b) = (phi - theta)/2 - log(gamma_T - 2a sigma_T^2)/(2T),
/// finite iff gamma_T - 2a sigma_T^2 > 0. `gamma` holds gamma_T - 2a sigma_T^2.
/// For theta < 0 the same formula is used and the result is flagged
/// `extrapolated`.
inline CgfValue finite_cgf_W(const CgfQuery& q) {
  detail::check_horizon(q);
  if (!q.horizon) throw DomainError("finite_cgf_W: a finite horizon is required");
  CgfValue out;
  out.extrapolated = q.theta < 0.0;
  if (!detail::tilt(q, out)) return out;

  const double T = *q.horizon;
  const double k = out.phi - q.theta;
  const auto log_g = detail::log_one_plus(k - 2.0 * q.a, out.log_sigma2);
  if (!log_g) {
    out.status = CgfStatus::diverges;
    out.gamma = 1.0 + (k - 2.0 * q.a) * out.sigma2;
    return out;
  }
  out.log_gamma = *log_g;
  out.gamma = std::exp(out.log_gamma);
  out.value = 0.5 * k - out.log_gamma / (2.0 * T);
  out.status = CgfStatus::finite;
  return out;
}

}  // namespace ouldp

#endif  // OULDP_CGF_HPP
