#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "ouldp/cgf.hpp"
#include "ouldp/mc_harness.hpp"

using namespace ouldp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent route: with w = sqrt(theta^2 - 2b) (complex when negative),
// s = sinh(wT)/w, D = cosh(wT) - theta s, both even in w.
//   L_T      = -theta/2 + a^2 s/(2D) - log(D)/(2T)
//   Lambda_T = -theta/2 - log(D - 2 a s)/(2T)
struct HyperbolicOracle {
  double s = 0.0;
  double d = 0.0;

  HyperbolicOracle(double theta, double b, double T) {
    const std::complex<double> w = std::sqrt(std::complex<double>(theta * theta - 2.0 * b));
    const std::complex<double> sc = std::abs(w) < 1e-12 ? std::complex<double>(T) : std::sinh(w * T) / w;
    s = sc.real();
    d = std::cosh(w * T).real() - theta * s;
  }
};

double oracle_L(double theta, double a, double b, double T) {
  const HyperbolicOracle o(theta, b, T);
  return -0.5 * theta + a * a * o.s / (2.0 * o.d) - std::log(o.d) / (2.0 * T);
}

double oracle_Lambda(double theta, double a, double b, double T) {
  const HyperbolicOracle o(theta, b, T);
  return -0.5 * theta - std::log(o.d - 2.0 * a * o.s) / (2.0 * T);
}

double value_of(const CgfValue& v) {
  REQUIRE(v.status == CgfStatus::finite);
  return v.value.value();
}

}  // namespace

TEST_CASE("tilted drift phi", "[cgf]") {
  CHECK(phi(-1.0, 0.0) == 1.0);
  CHECK_THAT(phi(1.0, -0.5), WithinAbs(-std::sqrt(2.0), 1e-15));
  CHECK_THROWS_AS(phi(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(phi(0.0, 0.0), DomainError);
}

TEST_CASE("finite-horizon CGF at hand-checked points", "[cgf]") {
  CHECK(value_of(finite_cgf({0.0, 0.0, -1.0, 3.0})) == 0.0);
  CHECK_THAT(value_of(finite_cgf({0.0, -0.5, 0.0, 1.0})),
             WithinAbs(-0.216890415241514, 1e-13));
  const auto v = finite_cgf({0.0, -0.5, 1.0, 1.0});
  CHECK_THAT(v.phi, WithinAbs(-1.4142135623731, 1e-12));
  CHECK_THAT(v.sigma2, WithinAbs(0.332656353492747, 1e-12));
  CHECK_THAT(v.gamma, WithinAbs(0.196896519788231, 1e-12));
  CHECK_THAT(value_of(v), WithinAbs(-0.394568296929075, 1e-13));
}

TEST_CASE("finite-horizon CGF matches the hyperbolic oracle", "[cgf]") {
  // mpmath values at T = 1
  struct Row {
    double theta, a, b, expected;
  };
  const Row rows[] = {
      {-1.0, 0.3, -0.2, -0.0367046966217471}, {-1.0, -0.5, -0.5, -0.0847507990155259},
      {-1.0, 0.8, -1.0, -0.138982890343926},  {0.0, 0.3, -0.2, -0.0541417132437468},
      {0.0, -0.5, -0.5, -0.121691145747043},  {0.0, 0.8, -1.0, -0.188226943709094},
      {1.0, 0.3, -0.2, -0.0824957088712763},  {1.0, -0.5, -0.5, -0.183380997979777},
      {1.0, 0.8, -1.0, -0.264933761437492},
  };
  for (const auto& r : rows) {
    INFO("theta " << r.theta << " a " << r.a << " b " << r.b);
    CHECK_THAT(value_of(finite_cgf({r.a, r.b, r.theta, 1.0})), WithinAbs(r.expected, 1e-13));
    CHECK_THAT(oracle_L(r.theta, r.a, r.b, 1.0), WithinAbs(r.expected, 1e-13));
  }
  for (double theta : {-2.0, -0.5, 0.0, 0.3, 1.5})
    for (double T : {0.2, 1.0, 4.0, 12.0})
      for (double a : {-1.0, 0.0, 0.7})
        for (double b : {-3.0, -0.4, -0.01}) {
          INFO("theta " << theta << " T " << T << " a " << a << " b " << b);
          CHECK_THAT(value_of(finite_cgf({a, b, theta, T})),
                     WithinAbs(oracle_L(theta, a, b, T), 1e-11));
        }
}

TEST_CASE("positive b inside the parametrization", "[cgf]") {
  // theta = -1 allows b < 1/2
  for (double b : {0.1, 0.3, 0.45})
    CHECK_THAT(value_of(finite_cgf({0.2, b, -1.0, 2.0})), WithinAbs(oracle_L(-1.0, 0.2, b, 2.0), 1e-11));
  const auto out = finite_cgf({0.0, 0.1, 0.0, 1.0});
  CHECK(out.status == CgfStatus::outside_parametrization);
  CHECK(out.value.is_infinite());
  CHECK(finite_cgf({0.0, 0.5, -1.0, 1.0}).status == CgfStatus::boundary);
}

TEST_CASE("large horizons stay finite in log space", "[cgf]") {
  const auto v = finite_cgf({0.5, -2.0, -1.0, 2000.0});
  REQUIRE(v.status == CgfStatus::finite);
  CHECK(std::isinf(v.sigma2));
  CHECK(std::isfinite(v.log_sigma2));
  const double L = limiting_cgf(-1.0, 0.5, -2.0).value();
  CHECK_THAT(v.value.value(), WithinAbs(L, 1e-3));
  const auto e = finite_cgf({0.5, -2.0, 1.0, 2000.0});
  REQUIRE(e.status == CgfStatus::finite);
  CHECK_THAT(e.value.value(), WithinAbs(limiting_cgf(1.0, 0.5, -2.0).value(), 1e-3));
}

TEST_CASE("Cameron-Martin identity", "[cgf]") {
  for (double b : {-5.0, -2.0, -1.0, -0.5, -0.1})
    for (double T : {0.5, 1.0, 5.0}) {
      const double exact = -std::log(std::cosh(std::sqrt(-2.0 * b) * T)) / (2.0 * T);
      CHECK(std::abs(value_of(finite_cgf({0.0, b, 0.0, T})) - exact) < 1e-10);
    }
}

TEST_CASE("limiting CGF", "[cgf]") {
  CHECK(limiting_cgf(-1.0, 0.0, 0.0).value() == 0.0);
  CHECK_THAT(limiting_cgf(-1.0, 1.0, 0.0).value(), WithinAbs(0.25, 1e-15));
  CHECK(limiting_cgf(1.0, 0.0, 0.0).is_infinite());
  CHECK(limiting_cgf(0.0, 1.0, 0.1).is_infinite());
  const auto lim = finite_cgf({1.0, -1.0, -1.0, std::nullopt});
  CHECK(lim.status == CgfStatus::finite);
  CHECK(lim.value == limiting_cgf(-1.0, 1.0, -1.0));
  CHECK(finite_cgf({0.0, 0.0, 1.0, std::nullopt}).status == CgfStatus::boundary);
  CHECK(finite_cgf({0.0, 1.0, 1.0, std::nullopt}).status == CgfStatus::diverges);
}

TEST_CASE("domain predicates", "[cgf]") {
  CHECK(domain_L(-1.0, 7.0, 0.49));
  CHECK_FALSE(domain_L(0.0, 0.0, 0.0));
  CHECK(domain_status_L(0.0, 0.0, 0.0) == DomainStatus::boundary);
  CHECK(domain_L(2.0, 0.0, -0.1));
  CHECK(domain_status_L(2.0, 0.0, 0.5) == DomainStatus::outside);

  CHECK(domain_Lambda(0.0, 0.4, -0.4));
  const double c = 2.0, theta = 1.0;
  const double lambda = (c * c - theta * theta) / (4.0 * c);
  const double mu = (c - theta) * (c - theta) / (8.0 * c);
  CHECK(domain_Lambda(theta, lambda + mu, -2.0 * lambda * c));
  CHECK_FALSE(domain_Lambda(0.0, 0.0, 0.5));
  CHECK_THROWS_AS(domain_Lambda(-1.0, 0.0, -1.0), UnsupportedRegime);
}

TEST_CASE("W-variant CGF", "[cgf]") {
  CHECK(value_of(finite_cgf_W({0.0, 0.0, -1.0, 1.0})) == 0.0);
  CHECK_THAT(value_of(finite_cgf_W({0.2, -0.3, 0.0, 1.0})), WithinAbs(0.0672882839918822, 1e-13));
  for (double b : {-2.0, -0.5, -0.1})
    for (double T : {0.5, 1.0, 3.0})
      CHECK_THAT(value_of(finite_cgf_W({0.0, b, 0.5, T})),
                 WithinAbs(value_of(finite_cgf({0.0, b, 0.5, T})), 1e-13));
  for (double theta : {0.0, 0.5, 2.0})
    for (double a : {-0.5, 0.1, 0.3})
      for (double b : {-1.0, -0.2})
        for (double T : {0.5, 2.0}) {
          const auto v = finite_cgf_W({a, b, theta, T});
          if (v.status != CgfStatus::finite) continue;
          CHECK_THAT(v.value.value(), WithinAbs(oracle_Lambda(theta, a, b, T), 1e-11));
        }
  CHECK(finite_cgf_W({0.1, -0.3, -1.0, 1.0}).extrapolated);
  CHECK_FALSE(finite_cgf_W({0.1, -0.3, 1.0, 1.0}).extrapolated);
  CHECK(finite_cgf_W({5.0, -0.1, 0.0, 4.0}).status == CgfStatus::diverges);
  CHECK_THROWS_AS(finite_cgf_W({0.0, -1.0, 0.0, std::nullopt}), DomainError);
}

TEST_CASE("finite-horizon CGF converges at rate 1/T", "[cgf]") {
  for (double theta : {-1.0, 0.0, 1.0})
    for (double a : {0.0, 0.6})
      for (double b : {-2.0, -0.5}) {
        const double L = limiting_cgf(theta, a, b).value();
        const double p = phi(theta, b);
        // T (L_T - L) -> -log(gamma_inf)/2, gamma_inf = (phi - theta)/(2 phi) or (phi + theta)/(2 phi)
        const double g_inf = theta <= 0.0 ? (p - theta) / (2.0 * p) : (p + theta) / (2.0 * p);
        const double c = -0.5 * std::log(g_inf);
        double prev = INFINITY;
        if (theta <= 0.0) {
          for (double T : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            const double gap = std::abs(value_of(finite_cgf({a, b, theta, T})) - L);
            CHECK(gap < prev);
            prev = gap;
          }
        }
        const double T = 50.0 / std::abs(p - theta);
        INFO("theta " << theta << " a " << a << " b " << b);
        CHECK(std::abs(value_of(finite_cgf({a, b, theta, T})) - L - c / T) < 1e-6);
      }
}

TEST_CASE("CGFs are midpoint convex", "[cgf]") {
  for (double theta : {-1.0, 0.0, 1.0})
    for (std::optional<double> T : {std::optional<double>(1.0), std::optional<double>(5.0),
                                    std::optional<double>()}) {
      const auto f = [&](double a, double b) { return value_of(finite_cgf({a, b, theta, T})); };
      for (double a0 = -1.5; a0 <= 1.5; a0 += 0.5)
        for (double b0 = -3.0; b0 <= -0.25; b0 += 0.25)
          for (double da : {-0.4, 0.3})
            for (double db : {-0.2, 0.2}) {
              const double a1 = a0 + da, b1 = b0 + db;
              if (b1 >= -0.05) continue;
              const double mid = f(0.5 * (a0 + a1), 0.5 * (b0 + b1));
              CHECK(mid <= 0.5 * (f(a0, b0) + f(a1, b1)) + 1e-12);
            }
    }
}

namespace {

// (1/T) log of the sample mean of exp(stat) and the delta-method SE.
struct LogMean {
  double value, se;
};

template <class Stat>
LogMean mc_log_mean(double theta, double T, std::uint64_t n, std::uint64_t seed, Stat stat) {
  const OuModel m(theta, T);
  const auto g = GridSpec::for_model(m);
  const auto mom = parallel_reduce<Moments>(n, default_workers(), [&](std::uint64_t i, Moments& acc) {
    acc.add(std::exp(stat(simulate_path(m, g, {seed, i}))), true);
  });
  return {std::log(mom.mean()) / T, mom.standard_error() / mom.mean() / T};
}

}  // namespace

TEST_CASE("finite-horizon CGF agrees with Monte Carlo", "[cgf][mc]") {
  const double T = 1.0;
  for (double theta : {-1.0, 0.0, 1.0})
    for (auto [a, b] : {std::pair{0.3, -0.2}, std::pair{-0.5, -0.5}}) {
      const auto mc = mc_log_mean(theta, T, 200000, 31, [&](const PathSummary& s) {
        return a * std::sqrt(T) * s.x_T + b * s.s_T;
      });
      const double exact = value_of(finite_cgf({a, b, theta, T}));
      INFO("theta " << theta << " a " << a << " b " << b << " mc " << mc.value << " se " << mc.se);
      CHECK(std::abs(mc.value - exact) < 4.0 * mc.se);
    }
}

TEST_CASE("W-variant closed form agrees with Monte Carlo", "[cgf][mc]") {
  const double T = 1.0;
  for (double theta : {0.0, 1.0})
    for (auto [a, b] : {std::pair{0.1, -0.5}, std::pair{-0.3, -0.2}}) {
      const auto mc = mc_log_mean(theta, T, 200000, 37, [&](const PathSummary& s) {
        return a * s.x_T * s.x_T + b * s.s_T;
      });
      const double exact = value_of(finite_cgf_W({a, b, theta, T}));
      INFO("theta " << theta << " a " << a << " b " << b << " mc " << mc.value << " se " << mc.se);
      CHECK(std::abs(mc.value - exact) < 4.0 * mc.se);
    }
}
