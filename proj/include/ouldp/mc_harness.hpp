#ifndef OULDP_MC_HARNESS_HPP
#define OULDP_MC_HARNESS_HPP

/** @file
 * Monte Carlo estimation of MLE tail probabilities, plain or reweighted from
 * a simulation drift theta_sim by the exact Girsanov likelihood ratio,
 * empirical large deviation slopes, and the stochastic checks behind the
 * concentration bounds (supermartingale mean, weight unbiasedness).
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ouldp/error.hpp"
#include "ouldp/ldp_rates.hpp"
#include "ouldp/ou_core.hpp"
#include "ouldp/parallel.hpp"
#include "ouldp/rng.hpp"

namespace ouldp {

/// Running sums of a per-path quantity.
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;
  std::uint64_t hits = 0;

  void add(double v, bool hit) noexcept {
    sum += v;
    sum_sq += v * v;
    ++n;
    if (hit) ++hits;
  }
  void merge(const Moments& o) noexcept {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
    hits += o.hits;
  }
  double mean() const noexcept { return n ? sum / static_cast<double>(n) : 0.0; }
  /// Standard error of the mean from the unbiased sample variance.
  double standard_error() const noexcept {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double var = std::max(0.0, (sum_sq - sum * sum / nn) / (nn - 1.0));
    return std::sqrt(var / nn);
  }
};

struct GirsanovWeight {
  double log_weight = 0.0;
  double weight = 1.0;  ///< NaN when `overflow` is set
  bool overflow = false;
};

/// dP_target/dP_sim on the path summary:
/// exp((theta_t - theta_s)(X_T^2 - T)/2 - (theta_t^2 - theta_s^2) S_T / 2).
inline GirsanovWeight girsanov_weight(const PathSummary& s, double horizon, double theta_target,
                                      double theta_sim) noexcept {
  GirsanovWeight w;
  w.log_weight = 0.5 * (theta_target - theta_sim) * (s.x_T * s.x_T - horizon) -
                 0.5 * (theta_target * theta_target - theta_sim * theta_sim) * s.s_T;
  if (w.log_weight > 709.0) {
    w.overflow = true;
    w.weight = std::numeric_limits<double>::quiet_NaN();
  } else {
    w.weight = std::exp(w.log_weight);
  }
  return w;
}

enum class EventKind { mle_ge, mle_le, abs_dev_ge };

inline std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::mle_ge: return "mle_ge";
    case EventKind::mle_le: return "mle_le";
    case EventKind::abs_dev_ge: return "abs_dev_ge";
  }
  return "unknown";
}

/// {theta_hat >= c}, {theta_hat <= c} or {|theta_hat - theta| >= x}.
struct EventSpec {
  EventKind kind = EventKind::mle_ge;
  double threshold = 0.0;

  void validate() const {
    if (std::isnan(threshold)) throw DomainError("EventSpec: threshold is NaN");
    if (kind == EventKind::abs_dev_ge && !(threshold > 0.0))
      throw DomainError("EventSpec: abs_dev_ge needs a positive deviation");
  }

  bool holds(double estimate, double theta) const noexcept {
    switch (kind) {
      case EventKind::mle_ge: return estimate >= threshold;
      case EventKind::mle_le: return estimate <= threshold;
      case EventKind::abs_dev_ge: return std::abs(estimate - theta) >= threshold;
    }
    return false;
  }
};

enum class EstimatorKind { plain, tilted };

inline std::string_view to_string(EstimatorKind k) noexcept {
  return k == EstimatorKind::plain ? "plain" : "tilted";
}

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::plain;
  /// Simulation drift for the tilted estimator; defaults to the event
  /// threshold (theta + x for abs_dev_ge).
  std::optional<double> theta_sim;

  static EstimatorSpec plain() { return {}; }
  static EstimatorSpec tilted(std::optional<double> sim = std::nullopt) {
    return {EstimatorKind::tilted, sim};
  }
};

struct TailEstimate {
  double p_hat = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
  std::uint64_t hits = 0;
  EstimatorKind estimator = EstimatorKind::plain;
  double theta_sim = std::numeric_limits<double>::quiet_NaN();
};

/// splitmix64 finalizer; derives independent run seeds from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double default_theta_sim(const EventSpec& e, double theta) noexcept {
  return e.kind == EventKind::abs_dev_ge ? theta + e.threshold : e.threshold;
}

/// Estimates P(event) for the model. Plain: indicator mean with binomial SE.
/// Tilted: paths simulated under theta_sim, indicator times likelihood ratio,
/// empirical SE. Paths whose weight overflows abort the run.
inline TailEstimate estimate_tail(const OuModel& model, const GridSpec& grid,
                                  const EventSpec& event, std::uint64_t n, std::uint64_t seed,
                                  const EstimatorSpec& estimator = EstimatorSpec::plain(),
                                  unsigned workers = default_workers()) {
  if (n < 100) throw DomainError("estimate_tail: need at least 100 paths");
  event.validate();
  const double theta = model.theta();
  const double T = model.horizon();
  TailEstimate out;
  out.n = n;
  out.estimator = estimator.kind;

  if (estimator.kind == EstimatorKind::plain) {
    const auto m = parallel_reduce<Moments>(n, workers, [&](std::uint64_t i, Moments& acc) {
      const auto s = simulate_path(model, grid, {seed, i});
      const bool hit = event.holds(mle(s, T), theta);
      acc.add(hit ? 1.0 : 0.0, hit);
    });
    out.hits = m.hits;
    out.p_hat = m.mean();
    out.se = std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(n));
    return out;
  }

  const double sim = estimator.theta_sim.value_or(default_theta_sim(event, theta));
  if (!std::isfinite(sim)) throw DomainError("estimate_tail: theta_sim must be finite");
  out.theta_sim = sim;
  const OuModel sim_model(sim, T);
  const auto m = parallel_reduce<Moments>(n, workers, [&](std::uint64_t i, Moments& acc) {
    const auto s = simulate_path(sim_model, grid, {seed, i});
    const bool hit = event.holds(mle(s, T), theta);
    if (!hit) {
      acc.add(0.0, false);
      return;
    }
    const auto w = girsanov_weight(s, T, theta, sim);
    if (w.overflow)
      throw OverflowError("estimate_tail: likelihood ratio overflow on path " + std::to_string(i),
                          static_cast<long>(i));
    acc.add(w.weight, true);
  });
  out.hits = m.hits;
  out.p_hat = m.mean();
  out.se = m.standard_error();
  return out;
}

/// Mean and SE of the Girsanov weight theta_sim -> theta_target; the mean is
/// 1 for an exact likelihood ratio.
inline TailEstimate mean_girsanov_weight(double theta_target, double theta_sim, double horizon,
                                         std::uint64_t n, std::uint64_t seed,
                                         std::optional<GridSpec> grid = std::nullopt,
                                         unsigned workers = default_workers()) {
  const OuModel sim_model(theta_sim, horizon);
  const GridSpec g = grid.value_or(GridSpec::for_model(sim_model));
  const auto m = parallel_reduce<Moments>(n, workers, [&](std::uint64_t i, Moments& acc) {
    const auto s = simulate_path(sim_model, g, {seed, i});
    const auto w = girsanov_weight(s, horizon, theta_target, theta_sim);
    if (w.overflow)
      throw OverflowError("mean_girsanov_weight: weight overflow on path " + std::to_string(i),
                          static_cast<long>(i));
    acc.add(w.weight, true);
  });
  TailEstimate out;
  out.p_hat = m.mean();
  out.se = m.standard_error();
  out.n = n;
  out.hits = m.hits;
  out.estimator = EstimatorKind::tilted;
  out.theta_sim = theta_sim;
  return out;
}

/// Sample mean of W_T(a) = exp(a M_T - a^2 S_T / 2) with the martingale
/// M_T = (X_T^2 - T)/2 - theta S_T. Reported in p_hat / se.
inline TailEstimate supermartingale_check(double theta, double horizon, double a, std::uint64_t n,
                                          std::uint64_t seed,
                                          std::optional<GridSpec> grid = std::nullopt,
                                          unsigned workers = default_workers()) {
  if (n < 1000) throw DomainError("supermartingale_check: need at least 1000 paths");
  const OuModel model(theta, horizon);
  const GridSpec g = grid.value_or(GridSpec::for_model(model));
  const auto m = parallel_reduce<Moments>(n, workers, [&](std::uint64_t i, Moments& acc) {
    const auto s = simulate_path(model, g, {seed, i});
    const double martingale = 0.5 * (s.x_T * s.x_T - horizon) - theta * s.s_T;
    acc.add(std::exp(a * martingale - 0.5 * a * a * s.s_T), true);
  });
  TailEstimate out;
  out.p_hat = m.mean();
  out.se = m.standard_error();
  out.n = n;
  out.hits = m.hits;
  return out;
}

struct SlopeReport {
  std::vector<double> horizons;
  std::vector<double> log_p_over_T;
  std::vector<TailEstimate> estimates;
  std::optional<double> slope;  ///< least-squares slope of log p_hat against T
  double target = std::numeric_limits<double>::quiet_NaN();  ///< -I_theta(c)
  std::string warning;
};

/// Minimum p_hat * n per horizon before a slope is reported.
inline constexpr double kMinExpectedHits = 50.0;

/// Least-squares slope of ys against xs.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw DomainError("fit_slope: need at least two matching points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_slope: horizons must not all coincide");
  return sxy / sxx;
}

/// Estimates P(theta_hat_T in event) along a ladder of horizons and fits the
/// exponential decay rate. The target is -I_theta(c) from the closed form.
/// Each horizon uses its own derived seed and the default grid for (theta, T).
inline SlopeReport ldp_slope(double theta, const std::vector<double>& horizons,
                             const EventSpec& event, std::uint64_t n_per_T, std::uint64_t seed,
                             const EstimatorSpec& estimator = EstimatorSpec::plain(),
                             unsigned workers = default_workers()) {
  if (horizons.size() < 2) throw DomainError("ldp_slope: need at least two horizons");
  if (event.kind == EventKind::abs_dev_ge)
    throw DomainError("ldp_slope: events must be one-sided (mle_ge / mle_le)");
  if (theta > 0.0)
    for (double T : horizons)
      if (T > 12.0 / theta)
        throw DomainError("ldp_slope: explosive horizons are limited to T <= 12/theta");

  SlopeReport rep;
  rep.horizons = horizons;
  const auto rate = mle_rate(theta, event.threshold);
  if (rate.value.is_finite()) rep.target = -rate.value.value();

  bool enough = true;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    const OuModel model(theta, horizons[k]);
    const auto est = estimate_tail(model, GridSpec::for_model(model), event, n_per_T,
                                   derive_seed(seed, k), estimator, workers);
    rep.estimates.push_back(est);
    const double expected_hits = est.p_hat * static_cast<double>(n_per_T);
    if (!(expected_hits >= kMinExpectedHits) || est.hits == 0) {
      enough = false;
      rep.log_p_over_T.push_back(est.p_hat > 0.0 ? std::log(est.p_hat) / horizons[k]
                                                 : -std::numeric_limits<double>::infinity());
      if (!rep.warning.empty()) rep.warning += "; ";
      rep.warning += "insufficient hits at T=" + std::to_string(horizons[k]) +
                     " (p_hat*n=" + std::to_string(expected_hits) + ")";
      continue;
    }
    rep.log_p_over_T.push_back(std::log(est.p_hat) / horizons[k]);
  }
  if (enough) {
    std::vector<double> log_p;
    for (const auto& e : rep.estimates) log_p.push_back(std::log(e.p_hat));
    rep.slope = fit_slope(horizons, log_p);
  }
  return rep;
}

}  // namespace ouldp

#endif  // OULDP_MC_HARNESS_HPP
