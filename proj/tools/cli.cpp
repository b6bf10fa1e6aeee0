#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ouldp/ouldp.hpp"

namespace ouldp::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { real, integer, text, real_list };

struct OptionDef {
  std::string name;
  Kind kind = Kind::real;
  std::string help;
  std::optional<std::string> fallback;
  bool required = false;
};

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Option values of one invocation, parsed on access.
class Params {
 public:
  std::map<std::string, std::string> raw;

  bool has(const std::string& name) const { return raw.count(name) != 0; }

  const std::string& text(const std::string& name) const {
    const auto it = raw.find(name);
    if (it == raw.end()) throw UsageError("missing required option --" + name);
    return it->second;
  }

  double real(const std::string& name) const {
    const auto v = parse_real(text(name));
    if (!v) throw UsageError("option --" + name + ": malformed number '" + text(name) + "'");
    return *v;
  }

  std::optional<double> real_opt(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    return real(name);
  }

  std::uint64_t unsigned_integer(const std::string& name) const {
    const std::string& s = text(name);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw UsageError("option --" + name + ": malformed integer '" + s + "'");
    return v;
  }

  std::vector<double> real_list(const std::string& name) const {
    std::vector<double> out;
    std::stringstream ss(text(name));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto v = parse_real(item);
      if (!v) throw UsageError("option --" + name + ": malformed list element '" + item + "'");
      out.push_back(*v);
    }
    if (out.empty()) throw UsageError("option --" + name + ": empty list");
    return out;
  }
};

using Handler = std::function<Json(const Params&)>;

struct CommandDef {
  std::string name;
  std::string help;
  std::vector<OptionDef> options;
  Handler run;
  bool sweepable = true;
};

Json to_json(const ExtendedReal& v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

// ---------------------------------------------------------------- handlers

unsigned workers_of(const Params& p) {
  if (!p.has("workers")) return default_workers();
  const auto w = p.unsigned_integer("workers");
  if (w < 1) throw UsageError("option --workers must be >= 1");
  return static_cast<unsigned>(w);
}

GridSpec grid_of(const Params& p, const OuModel& m) {
  if (!p.has("n-steps")) return GridSpec::for_model(m);
  const auto n = p.unsigned_integer("n-steps");
  if (n < 1) throw UsageError("option --n-steps must be >= 1");
  return GridSpec(static_cast<long>(n));
}

EventSpec event_of(const Params& p) {
  const std::string& kind = p.text("event");
  EventSpec e;
  if (kind == "mle_ge") e.kind = EventKind::mle_ge;
  else if (kind == "mle_le") e.kind = EventKind::mle_le;
  else if (kind == "abs_dev_ge") e.kind = EventKind::abs_dev_ge;
  else throw UsageError("option --event must be mle_ge, mle_le or abs_dev_ge");
  e.threshold = p.real("threshold");
  return e;
}

EstimatorSpec estimator_of(const Params& p) {
  const std::string& kind = p.text("estimator");
  if (kind == "plain") return EstimatorSpec::plain();
  if (kind == "tilted") return EstimatorSpec::tilted(p.real_opt("theta-sim"));
  throw UsageError("option --estimator must be plain or tilted");
}

Json run_simulate(const Params& p) {
  const OuModel model(p.real("theta"), p.real("T"));
  const GridSpec grid = grid_of(p, model);
  const StreamId id{p.unsigned_integer("seed"), p.unsigned_integer("path")};
  const auto s = simulate_path(model, grid, id);
  const auto v = couple_stats(s, model.horizon());
  Json out;
  out["x_T"] = s.x_T;
  out["s_T"] = s.s_T;
  out["n_steps"] = s.n_steps;
  out["path"] = id.path;
  out["couple_x"] = v.x;
  out["couple_y"] = v.y;
  out["mle"] = s.s_T > 0.0 ? Json(mle(s, model.horizon())) : Json(nullptr);
  return out;
}

Json run_mle(const Params& p) {
  PathSummary s;
  s.x_T = p.real("xT");
  s.s_T = p.real("sT");
  const double T = p.real("T");
  if (!(T > 0.0)) throw DomainError("mle: T must be positive");
  const auto v = couple_stats(s, T);
  Json out;
  out["estimate"] = mle(s, T);
  out["couple_x"] = v.x;
  out["couple_y"] = v.y;
  return out;
}

Json run_cgf(const Params& p) {
  CgfQuery q;
  q.theta = p.real("theta");
  q.a = p.real("a");
  q.b = p.real("b");
  q.horizon = p.real_opt("T");
  const std::string& variant = p.text("variant");
  CgfValue v;
  Json out;
  if (variant == "V") {
    v = finite_cgf(q);
    out["domain"] = to_string(domain_status_L(q.theta, q.a, q.b));
  } else if (variant == "W") {
    if (!q.horizon) throw UsageError("cgf --variant W needs --T");
    v = finite_cgf_W(q);
    if (q.theta >= 0.0) out["domain"] = to_string(domain_status_Lambda(q.theta, q.a, q.b));
  } else {
    throw UsageError("option --variant must be V or W");
  }
  out["value"] = to_json(v.value);
  out["status"] = to_string(v.status);
  out["phi"] = v.phi;
  out["sigma2"] = v.sigma2;
  out["gamma"] = v.gamma;
  out["log_sigma2"] = v.log_sigma2;
  out["log_gamma"] = v.log_gamma;
  out["extrapolated"] = v.extrapolated;
  return out;
}

Json run_rate(const Params& p) {
  const double theta = p.real("theta");
  Json out;
  if (p.has("z")) {
    if (p.has("x") || p.has("y")) throw UsageError("rate: give either --z or --x/--y");
    const auto r = mle_rate(theta, p.real("z"));
    out["rate"] = to_json(r.value);
    out["branch"] = to_string(r.branch);
    return out;
  }
  if (!p.has("x") || !p.has("y")) throw UsageError("rate: needs --z, or both --x and --y");
  const auto r = joint_rate(theta, p.real("x"), p.real("y"));
  out["rate"] = to_json(r.value);
  out["branch"] = to_string(r.branch);
  return out;
}

Json run_legendre(const Params& p) {
  const double theta = p.real("theta");
  const double x = p.real("x");
  const double y = p.real("y");
  LegendreOptions opts;
  opts.tol = p.real("tol");
  if (!(opts.tol > 0.0)) throw UsageError("option --tol must be positive");
  const auto r = numeric_legendre(theta, x, y, opts);
  const auto closed = joint_rate(theta, x, y);
  Json out;
  out["rate"] = to_json(r.rate.value);
  out["branch"] = to_string(r.rate.branch);
  out["a"] = r.a;
  out["b"] = r.b;
  out["closed_form"] = to_json(closed.value);
  out["closed_form_branch"] = to_string(closed.branch);
  if (r.rate.value.is_finite() && closed.value.is_finite())
    out["abs_error"] = std::abs(r.rate.value.value() - closed.value.value());
  return out;
}

Json run_contract(const Params& p) {
  const double theta = p.real("theta");
  const double z = p.real("z");
  const auto c = contraction_infimum(theta, z);
  const auto closed = mle_rate(theta, z);
  Json out;
  out["rate"] = to_json(c.rate.value);
  out["branch"] = to_string(c.rate.branch);
  out["y_star"] = c.y_star ? Json(*c.y_star) : Json("inf");
  out["mle_rate"] = to_json(closed.value);
  return out;
}

Json report_json(const CiBoundReport& r) {
  Json out;
  out["bound"] = r.bound;
  out["log_bound"] = r.log_bound;
  out["y_star"] = r.y_star;
  out["h_value"] = r.h_value;
  out["method"] = to_string(r.method);
  out["capped"] = r.capped;
  out["monotone"] = r.monotone;
  if (!r.sub_case.empty()) {
    out["sub_case"] = r.sub_case;
    out["sub_case_bound"] = r.sub_case_bound;
  }
  return out;
}

Json run_ci_bound(const Params& p) {
  const CiQuery q{p.real("theta"), p.real("T"), p.real("x")};
  const std::string& method = p.text("method");
  if (method == "numeric") return report_json(ci_bound(q));
  if (method == "corollary") return report_json(corollary_bound(q));
  throw UsageError("option --method must be numeric or corollary");
}

Json run_laplace(const Params& p) {
  const double theta = p.real("theta");
  const double T = p.real("T");
  const double b = p.real("b");
  const auto lb = laplace_upper_bound(theta, T, b);
  const auto exact = finite_cgf({0.0, b, theta, T});
  Json out;
  out["bound"] = lb.bound;
  out["log_bound"] = lb.log_bound;
  out["phi"] = lb.phi;
  out["exact"] = exact.value.is_finite() ? Json(std::exp(T * exact.value.value())) : Json("inf");
  return out;
}

Json tail_json(const TailEstimate& t) {
  Json out;
  out["p_hat"] = t.p_hat;
  out["se"] = t.se;
  out["n"] = t.n;
  out["hits"] = t.hits;
  out["estimator"] = to_string(t.estimator);
  out["theta_sim"] = t.estimator == EstimatorKind::tilted ? Json(t.theta_sim) : Json(nullptr);
  return out;
}

Json run_mc_tail(const Params& p) {
  const OuModel model(p.real("theta"), p.real("T"));
  const auto est = estimate_tail(model, grid_of(p, model), event_of(p), p.unsigned_integer("n"),
                                 p.unsigned_integer("seed"), estimator_of(p), workers_of(p));
  return tail_json(est);
}

Json run_ldp_slope(const Params& p) {
  const double theta = p.real("theta");
  const auto rep = ldp_slope(theta, p.real_list("T-ladder"), event_of(p), p.unsigned_integer("n"),
                             p.unsigned_integer("seed"), estimator_of(p), workers_of(p));
  Json out;
  out["slope"] = rep.slope ? Json(*rep.slope) : Json(nullptr);
  out["target"] = rep.target;
  out["horizons"] = rep.horizons;
  out["log_p_over_T"] = Json::array();
  for (double v : rep.log_p_over_T) out["log_p_over_T"].push_back(std::isfinite(v) ? Json(v) : Json("-inf"));
  Json per_t = Json::array();
  for (const auto& e : rep.estimates) per_t.push_back(tail_json(e));
  out["estimates"] = per_t;
  out["warning"] = rep.warning;
  return out;
}

Json run_mc_weight(const Params& p) {
  const double T = p.real("T");
  const double target = p.real("theta");
  const double sim = p.real("theta-sim");
  const auto est = mean_girsanov_weight(target, sim, T, p.unsigned_integer("n"),
                                        p.unsigned_integer("seed"), std::nullopt, workers_of(p));
  Json out;
  out["mean"] = est.p_hat;
  out["se"] = est.se;
  out["n"] = est.n;
  return out;
}

Json run_supermartingale(const Params& p) {
  const auto est = supermartingale_check(p.real("theta"), p.real("T"), p.real("a"),
                                         p.unsigned_integer("n"), p.unsigned_integer("seed"),
                                         std::nullopt, workers_of(p));
  Json out;
  out["mean"] = est.p_hat;
  out["se"] = est.se;
  out["n"] = est.n;
  return out;
}

// Deterministic property suites (no Monte Carlo).
struct CheckSink {
  Json list = Json::array();
  bool all = true;
  void record(const std::string& name, bool ok, const std::string& detail) {
    list.push_back({{"name", name}, {"passed", ok}, {"detail", detail}});
    all = all && ok;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_rates(CheckSink& sink) {
  double worst = 0.0;
  for (double th : {-2.0, -1.0, -0.5}) {
    const double z = th / 3.0;
    const double left = -(z - th) * (z - th) / (4.0 * z);
    const double right = 2.0 * z - th;
    worst = std::max({worst, std::abs(left - right), std::abs(mle_rate(th, z).value.value() + th / 3.0)});
  }
  sink.record("stable_branch_continuity", worst < 1e-12, "max gap " + fmt(worst));
  bool zero = true;
  for (double th : {-2.0, -1.0, 0.0, 1.0, 2.0}) zero = zero && mle_rate(th, th).value.value() == 0.0;
  sink.record("rate_zero_at_truth", zero, "theta in {-2,-1,0,1,2}");
  double gap = 0.0;
  for (double th : {0.5, 1.0, 2.0}) gap = std::max(gap, std::abs(mle_rate(th, -th).value.value() - th));
  sink.record("explosive_branch_agreement", gap < 1e-12, "max gap " + fmt(gap));
  bool plateau = true;
  for (double x = -3.0; x <= 3.0; x += 0.5)
    for (double y = 0.1; y <= 6.0; y += 0.3)
      if (!exposed_member(1.0, x, y) && y > 0.0)
        plateau = plateau && joint_rate(1.0, x, y).value.value() == 1.0;
  sink.record("explosive_plateau_constant", plateau, "theta = 1 off the exposed set");
}

void check_contraction(CheckSink& sink) {
  double worst = 0.0;
  for (double th : {-1.0, 0.0, 1.0}) {
    for (int i = 0; i < 100; ++i) {
      double z = -5.0 + 10.0 * i / 99.0;
      if (th > 0.0 && z > -th && z <= th) continue;
      const double c = contraction_infimum(th, z).rate.value.value();
      const double m = mle_rate(th, z).value.value();
      worst = std::max(worst, std::abs(c - m));
    }
  }
  sink.record("contraction_identity", worst < 1e-8, "max |contraction - closed form| " + fmt(worst));
}

void check_cgf(CheckSink& sink) {
  double worst = 0.0;
  for (double b : {-5.0, -2.0, -1.0, -0.5, -0.1})
    for (double T : {0.5, 1.0, 5.0}) {
      const double v = finite_cgf({0.0, b, 0.0, T}).value.value();
      worst = std::max(worst, std::abs(v + std::log(std::cosh(std::sqrt(-2.0 * b) * T)) / (2.0 * T)));
    }
  sink.record("cameron_martin", worst < 1e-10, "max error " + fmt(worst));
  bool dom = true;
  for (double th : {-1.0, 0.0, 1.0})
    for (double T : {1.0, 5.0, 10.0})
      for (double b : {-5.0, -2.0, -1.0, -0.5, -0.1}) {
        const double exact = std::exp(T * finite_cgf({0.0, b, th, T}).value.value());
        dom = dom && exact <= laplace_upper_bound(th, T, b).bound * (1.0 + 1e-12);
      }
  sink.record("laplace_dominance", dom, "theta in {-1,0,1}, T in {1,5,10}");
}

void check_concentration(CheckSink& sink) {
  bool chain = true;
  bool stationary = true;
  for (double th : {-2.0, -1.0, -0.1, 0.0, 0.1, 1.0, 2.0})
    for (double T : {1.0, 5.0, 10.0, 20.0})
      for (double x : {0.25, 0.5, 1.0, 2.0}) {
        const CiQuery q{th, T, x};
        const auto num = ci_bound(q);
        const auto cor = corollary_bound(q);
        chain = chain && num.bound <= cor.bound * (1.0 + 1e-9) && cor.bound <= 1.0;
        const double e = 1e-5;
        const double d =
            (h_T(q, num.y_star * std::exp(e)) - h_T(q, num.y_star * std::exp(-e))) / (2.0 * e);
        stationary = stationary && (num.monotone || std::abs(d) < 1e-6);
      }
  sink.record("ci_dominance_chain", chain, "numeric <= closed form <= 1");
  sink.record("ci_stationarity", stationary, "|dh_T/dlog y at y*| < 1e-6");
}

void check_legendre(CheckSink& sink) {
  double worst = 0.0;
  for (double th : {-1.0, 0.0, 1.0})
    for (int i = 0; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        const double x = -3.0 + i;
        const double y = 0.5 * j;
        const double n = numeric_legendre(th, x, y).rate.value.value();
        const double c = joint_rate(th, x, y).value.value();
        worst = std::max(worst, std::abs(n - c));
      }
  sink.record("legendre_duality", worst < 1e-4, "7x6 grid, max error " + fmt(worst));
}

Json run_check(const Params& p) {
  const std::string& suite = p.text("suite");
  CheckSink sink;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "rates") { check_rates(sink); known = true; }
  if (all || suite == "contraction") { check_contraction(sink); known = true; }
  if (all || suite == "cgf") { check_cgf(sink); known = true; }
  if (all || suite == "concentration") { check_concentration(sink); known = true; }
  if (all || suite == "legendre") { check_legendre(sink); known = true; }
  if (!known)
    throw UsageError("option --suite must be all, rates, contraction, cgf, concentration or legendre");
  Json out;
  out["passed"] = sink.all;
  out["checks"] = sink.list;
  return out;
}

// ---------------------------------------------------------------- registry

OptionDef req(std::string name, std::string help, Kind k = Kind::real) {
  return {std::move(name), k, std::move(help), std::nullopt, true};
}
OptionDef opt(std::string name, std::string help, Kind k = Kind::real,
              std::optional<std::string> fallback = std::nullopt) {
  return {std::move(name), k, std::move(help), std::move(fallback), false};
}

const std::vector<CommandDef>& commands() {
  static const std::vector<CommandDef> defs = [] {
    const auto seed = opt("seed", "run seed (default 0)", Kind::integer, "0");
    const auto workers = opt("workers", "worker threads (default $OULDP_WORKERS or all cores)", Kind::integer);
    const auto n_steps = opt("n-steps", "grid steps (default max(1000, ceil(100|theta|T)))", Kind::integer);
    std::vector<CommandDef> d;
    d.push_back({"simulate", "simulate one path and report (X_T, S_T)",
                 {req("theta", "drift"), req("T", "horizon"), n_steps, seed,
                  opt("path", "path index within the seed", Kind::integer, "0")},
                 run_simulate});
    d.push_back({"mle", "MLE and V_T from (X_T, S_T)",
                 {req("xT", "terminal state"), req("sT", "energy"), req("T", "horizon")}, run_mle});
    d.push_back({"cgf", "finite-horizon (or limiting) normalized CGF",
                 {req("theta", "drift"), req("a", "coefficient of sqrt(T) X_T (V) or X_T^2 (W)"),
                  req("b", "coefficient of S_T"), opt("T", "horizon; omit for the limit"),
                  opt("variant", "V: (X_T/sqrt T, S_T/T); W: (X_T^2/T, S_T/T)", Kind::text, "V")},
                 run_cgf});
    d.push_back({"rate", "closed-form rate: MLE rate (--z) or joint rate (--x --y)",
                 {req("theta", "drift"), opt("z", "MLE value"), opt("x", "X_T/sqrt(T)"),
                  opt("y", "S_T/T")},
                 run_rate});
    d.push_back({"legendre", "numeric Fenchel-Legendre transform of the limiting CGF",
                 {req("theta", "drift"), req("x", "X_T/sqrt(T)"), req("y", "S_T/T"),
                  opt("tol", "target accuracy", Kind::real, "1e-6")},
                 run_legendre});
    d.push_back({"contract", "contraction infimum of the joint rate onto the MLE",
                 {req("theta", "drift"), req("z", "MLE value")}, run_contract});
    d.push_back({"ci-bound", "concentration bound on P(|theta_hat - theta| >= x)",
                 {req("theta", "drift"), req("T", "horizon"), req("x", "deviation"),
                  opt("method", "numeric or corollary", Kind::text, "numeric")},
                 run_ci_bound});
    d.push_back({"laplace-bound", "upper bound on E[exp(b S_T)], b < 0",
                 {req("theta", "drift"), req("T", "horizon"), req("b", "negative tilt")},
                 run_laplace});
    d.push_back({"mc-tail", "Monte Carlo tail probability of the MLE",
                 {req("theta", "drift"), req("T", "horizon"),
                  req("event", "mle_ge, mle_le or abs_dev_ge", Kind::text),
                  req("threshold", "event threshold c (or deviation x)"),
                  opt("n", "paths", Kind::integer, "100000"), seed,
                  opt("estimator", "plain or tilted", Kind::text, "plain"),
                  opt("theta-sim", "simulation drift of the tilted estimator"), n_steps, workers},
                 run_mc_tail});
    d.push_back({"ldp-slope", "empirical decay rate of an MLE tail over a ladder of horizons",
                 {req("theta", "drift"), req("event", "mle_ge or mle_le", Kind::text),
                  req("threshold", "event threshold c"),
                  req("T-ladder", "comma-separated horizons", Kind::real_list),
                  opt("n", "paths per horizon", Kind::integer, "200000"), seed,
                  opt("estimator", "plain or tilted", Kind::text, "plain"),
                  opt("theta-sim", "simulation drift of the tilted estimator"), workers},
                 run_ldp_slope, false});
    d.push_back({"mc-weight", "mean Girsanov weight theta-sim -> theta",
                 {req("theta", "target drift"), req("theta-sim", "simulation drift"),
                  req("T", "horizon"), opt("n", "paths", Kind::integer, "100000"), seed, workers},
                 run_mc_weight});
    d.push_back({"supermartingale", "mean of W_T(a) = exp(a M_T - a^2 S_T / 2)",
                 {req("theta", "drift"), req("T", "horizon"), req("a", "exponent"),
                  opt("n", "paths", Kind::integer, "100000"), seed, workers},
                 run_supermartingale});
    d.push_back({"check", "deterministic property suites",
                 {opt("suite", "all, rates, contraction, cgf, concentration or legendre", Kind::text,
                      "all")},
                 run_check, false});
    return d;
  }();
  return defs;
}

const CommandDef* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

std::string usage_text() {
  std::string s = "usage: ouldp <command> [--option value ...]\n       ouldp sweep <command> "
                  "--axis start..stop x count [--option value ...] [--csv PATH]\ncommands:\n";
  for (const auto& c : commands()) s += "  " + c.name + "  " + c.help + "\n";
  s += "  sweep  Cartesian-product grid over any command except ldp-slope and check\n";
  return s;
}

Json params_json(const CommandDef& def, const Params& p) {
  Json out = Json::object();
  for (const auto& o : def.options) {
    if (!p.has(o.name)) continue;
    const std::string& v = p.raw.at(o.name);
    switch (o.kind) {
      case Kind::real: out[o.name] = p.real(o.name); break;
      case Kind::integer: out[o.name] = p.unsigned_integer(o.name); break;
      case Kind::text: out[o.name] = v; break;
      case Kind::real_list: out[o.name] = p.real_list(o.name); break;
    }
  }
  return out;
}

Json envelope(const CommandDef& def, const Params& p) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = def.name;
  doc["version"] = kVersion;
  if (p.has("seed")) doc["seed"] = p.unsigned_integer("seed");
  doc["params"] = params_json(def, p);
  return doc;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const UnsupportedRegime*>(&e)) return "unsupported_regime";
  if (dynamic_cast<const UndefinedEstimator*>(&e)) return "undefined_estimator";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  if (dynamic_cast<const OverflowError*>(&e)) return "overflow_error";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence_error";
  return "domain_error";
}

int run_single(const CommandDef& def, const Params& p, std::ostream& out, std::ostream& err) {
  try {
    Json doc = envelope(def, p);
    const Json outputs = def.run(p);
    for (const auto& [k, v] : outputs.items()) doc[k] = v;
    out << doc.dump() << "\n";
    const auto passed = doc.find("passed");
    if (def.name == "check" && passed != doc.end() && !passed->get<bool>()) return kDomainFailure;
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << usage_text();
    return kUsageError;
  } catch (const std::domain_error& e) {
    out << Json{{"schema_version", kSchemaVersion}, {"command", def.name},
                {"error", {{"kind", error_kind(e)}, {"message", e.what()}}}}.dump()
        << "\n";
    return kDomainFailure;
  } catch (const std::overflow_error& e) {
    out << Json{{"schema_version", kSchemaVersion}, {"command", def.name},
                {"error", {{"kind", "overflow_error"}, {"message", e.what()}}}}.dump()
        << "\n";
    return kDomainFailure;
  } catch (const ConvergenceError& e) {
    out << Json{{"schema_version", kSchemaVersion}, {"command", def.name},
                {"error", {{"kind", "convergence_error"}, {"message", e.what()},
                           {"last_iterate", e.last_iterate()}}}}.dump()
        << "\n";
    return kDomainFailure;
  }
}

// ---------------------------------------------------------------- sweep

struct Axis {
  std::string name;
  std::vector<std::string> values;
};

std::string format_axis_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<std::pair<double, double>> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) return std::nullopt;
  const auto lo = parse_real(s.substr(0, dots));
  const auto hi = parse_real(s.substr(dots + 2));
  if (!lo || !hi) return std::nullopt;
  return std::make_pair(*lo, *hi);
}

std::vector<Axis> parse_axes(const CommandDef& def, const std::vector<std::string>& args,
                             std::size_t start, std::optional<std::string>& csv_path) {
  std::vector<Axis> axes;
  for (std::size_t i = start; i < args.size();) {
    const std::string& tok = args[i];
    if (tok.rfind("--", 0) != 0) throw UsageError("sweep: unexpected token '" + tok + "'");
    const std::string name = tok.substr(2);
    if (i + 1 >= args.size()) throw UsageError("sweep: option --" + name + " needs a value");
    std::string value = args[i + 1];
    i += 2;
    if (name == "csv") {
      csv_path = value;
      continue;
    }
    bool known = false;
    for (const auto& o : def.options) known = known || o.name == name;
    if (!known) throw UsageError("sweep: unknown option --" + name + " for " + def.name);
    for (const auto& a : axes)
      if (a.name == name) throw UsageError("sweep: option --" + name + " given twice");

    std::optional<std::string> count_text;
    if (value.find("..") != std::string::npos) {
      if (const auto x = value.rfind('x'); x != std::string::npos && x > value.find("..")) {
        count_text = value.substr(x + 1);
        value = value.substr(0, x);
      } else if (i < args.size() && args[i] == "x" && i + 1 < args.size()) {
        count_text = args[i + 1];
        i += 2;
      } else if (i < args.size() && args[i].size() > 1 && args[i][0] == 'x') {
        count_text = args[i].substr(1);
        i += 1;
      }
      const auto range = parse_range(value);
      if (!range) throw UsageError("sweep: malformed range '" + value + "' for --" + name);
      if (!count_text) throw UsageError("sweep: range for --" + name + " needs 'x COUNT'");
      std::uint64_t count = 0;
      const auto [ptr, ec] =
          std::from_chars(count_text->data(), count_text->data() + count_text->size(), count);
      if (ec != std::errc{} || ptr != count_text->data() + count_text->size() || count < 1)
        throw UsageError("sweep: malformed count '" + *count_text + "' for --" + name);
      Axis axis{name, {}};
      for (std::uint64_t k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        const double v = k + 1 == count && count > 1 ? range->second
                                                     : range->first + (range->second - range->first) * t;
        axis.values.push_back(format_axis_value(v));
      }
      axes.push_back(std::move(axis));
    } else {
      axes.push_back({name, {value}});
    }
  }
  return axes;
}

std::string csv_cell(const Json& v) {
  if (v.is_number()) return format_csv_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_null()) return "nan";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int run_sweep(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.size() < 2) throw UsageError("sweep: missing target command");
    const CommandDef* def = find_command(args[1]);
    if (!def) throw UsageError("sweep: unknown command '" + args[1] + "'");
    if (!def->sweepable) throw UsageError("sweep: command '" + def->name + "' cannot be swept");
    std::optional<std::string> csv_path;
    const auto axes = parse_axes(*def, args, 2, csv_path);

    Params base;
    for (const auto& o : def->options)
      if (o.fallback) base.raw[o.name] = *o.fallback;
    for (const auto& o : def->options) {
      if (!o.required) continue;
      bool given = false;
      for (const auto& a : axes) given = given || a.name == o.name;
      if (!given) throw UsageError("sweep: missing required option --" + o.name);
    }

    struct Cell {
      Params params;
      std::optional<Json> outputs;
    };
    std::vector<Cell> cells;
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.values.size();
    for (std::size_t k = 0; k < total; ++k) {
      Cell cell{base, std::nullopt};
      std::size_t rest = k;
      for (std::size_t a = axes.size(); a-- > 0;) {
        cell.params.raw[axes[a].name] = axes[a].values[rest % axes[a].values.size()];
        rest /= axes[a].values.size();
      }
      try {
        cell.outputs = def->run(cell.params);
      } catch (const UsageError&) {
        throw;
      } catch (const std::domain_error&) {
      } catch (const std::overflow_error&) {
      } catch (const ConvergenceError&) {
      }
      cells.push_back(std::move(cell));
    }

    std::vector<std::string> columns;
    for (const auto& c : cells) {
      if (!c.outputs) continue;
      for (const auto& [k, v] : c.outputs->items())
        if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    }

    std::ostringstream csv;
    bool first = true;
    for (const auto& a : axes) {
      csv << (first ? "" : ",") << a.name;
      first = false;
    }
    for (const auto& c : columns) {
      csv << (first ? "" : ",") << c;
      first = false;
    }
    csv << "\n";
    std::size_t errors = 0;
    for (const auto& c : cells) {
      first = true;
      for (const auto& a : axes) {
        const auto v = parse_real(c.params.raw.at(a.name));
        csv << (first ? "" : ",") << (v ? format_csv_number(*v) : c.params.raw.at(a.name));
        first = false;
      }
      if (!c.outputs) ++errors;
      for (const auto& col : columns) {
        std::string cell = "nan";
        if (c.outputs) {
          const auto it = c.outputs->find(col);
          if (it != c.outputs->end()) cell = csv_cell(*it);
        }
        csv << (first ? "" : ",") << cell;
        first = false;
      }
      csv << "\n";
    }

    if (!csv_path) {
      out << csv.str();
      return kOk;
    }
    std::ofstream file(*csv_path);
    if (!file) throw DomainError("sweep: cannot open '" + *csv_path + "' for writing");
    file << csv.str();
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "sweep";
    doc["version"] = kVersion;
    doc["target"] = def->name;
    doc["rows"] = cells.size();
    doc["columns"] = columns;
    doc["errors"] = errors;
    doc["csv"] = *csv_path;
    out << doc.dump() << "\n";
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << usage_text();
    return kUsageError;
  } catch (const std::domain_error& e) {
    out << Json{{"schema_version", kSchemaVersion}, {"command", "sweep"},
                {"error", {{"kind", "domain_error"}, {"message", e.what()}}}}.dump()
        << "\n";
    return kDomainFailure;
  }
}

}  // namespace

std::string format_csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v + 0.0);
  return buf;
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage_text();
    return kUsageError;
  }
  if (args[0] == "sweep") return run_sweep(args, out, err);

  CLI::App app{"Large deviations and concentration for the OU drift MLE", "ouldp"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::map<std::string, std::string>> storage;
  std::vector<std::pair<const CommandDef*, CLI::App*>> subs;
  for (const auto& def : commands()) {
    CLI::App* sub = app.add_subcommand(def.name, def.help);
    for (const auto& o : def.options) {
      auto* option = sub->add_option("--" + o.name, storage[def.name][o.name], o.help);
      if (o.required) option->required();
    }
    subs.emplace_back(&def, sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << usage_text();
    return kUsageError;
  }

  for (const auto& [def, sub] : subs) {
    if (!sub->parsed()) continue;
    Params p;
    for (const auto& o : def->options) {
      if (sub->count("--" + o.name) > 0) p.raw[o.name] = storage[def->name][o.name];
      else if (o.fallback) p.raw[o.name] = *o.fallback;
    }
    return run_single(*def, p, out, err);
  }
  err << usage_text();
  return kUsageError;
}

}  // namespace ouldp::cli
