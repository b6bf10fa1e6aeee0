#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ouldp/ouldp.hpp"

using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;

  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ouldp::cli::execute(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("rate at the truth", "[cli]") {
  const auto r = run({"rate", "--theta", "-1", "--z", "-1"});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK(d["rate"] == 0.0);
  CHECK(d["branch"] == "border");
  CHECK(d["schema_version"] == 1);
  CHECK(d["command"] == "rate");
  CHECK(d["version"] == ouldp::kVersion);
  CHECK(d["params"]["theta"] == -1.0);
}

TEST_CASE("joint rate and infinity", "[cli]") {
  const auto d = run({"rate", "--theta", "-1", "--x", "0", "--y", "-1"}).doc();
  CHECK(d["rate"] == "inf");
  CHECK(d["branch"] == "infinite");
  CHECK(run({"rate", "--theta", "-1", "--x", "0"}).code == 2);
  CHECK(run({"rate", "--theta", "-1", "--x", "0", "--y", "1", "--z", "1"}).code == 2);
}

TEST_CASE("corollary bound to three digits", "[cli]") {
  const auto r = run({"ci-bound", "--theta", "0", "--T", "10", "--x", "1", "--method", "corollary"});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK_THAT(d["bound"].get<double>(), WithinAbs(0.194, 5e-4));
  CHECK(d["method"] == "unstable-closed-form");
}

TEST_CASE("usage errors exit 2", "[cli]") {
  const auto bad = run({"rate", "--theta", "-1", "--z", "abc"});
  CHECK(bad.code == 2);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("usage") != std::string::npos);
  CHECK(run({"rate", "--theta", "-1", "--zz", "1"}).code == 2);
  CHECK(run({"nosuch"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"ci-bound", "--theta", "0", "--T", "1", "--x", "1", "--method", "other"}).code == 2);
  CHECK(run({"mc-tail", "--theta", "0", "--T", "1", "--event", "mle_ge", "--threshold", "0", "--n", "1.5"}).code == 2);
}

TEST_CASE("domain errors exit 1 with structured JSON", "[cli]") {
  const auto r = run({"mle", "--xT", "1", "--sT", "0", "--T", "1"});
  REQUIRE(r.code == 1);
  const auto d = r.doc();
  CHECK(d["schema_version"] == 1);
  CHECK(d["error"]["kind"] == "undefined_estimator");
  CHECK(run({"laplace-bound", "--theta", "0", "--T", "1", "--b", "0.5"}).code == 1);
  CHECK(run({"cgf", "--theta", "-1", "--a", "0", "--b", "-1", "--T", "1", "--variant", "W"}).code == 0);
  const auto simulate = run({"simulate", "--theta", "5", "--T", "100"});
  CHECK(simulate.code == 1);
  CHECK(simulate.doc()["error"]["kind"] == "overflow_error");
}

TEST_CASE("cgf command", "[cli]") {
  const auto d = run({"cgf", "--theta", "0", "--a", "0", "--b", "-0.5", "--T", "1"}).doc();
  CHECK_THAT(d["value"].get<double>(), WithinAbs(-0.216890415241514, 1e-13));
  CHECK(d["status"] == "finite");
  const auto lim = run({"cgf", "--theta", "1", "--a", "0", "--b", "0"}).doc();
  CHECK(lim["value"] == "inf");
  CHECK(run({"cgf", "--theta", "0", "--a", "0", "--b", "-1", "--variant", "W"}).code == 2);
}

TEST_CASE("json numbers round-trip", "[cli]") {
  const auto d = run({"laplace-bound", "--theta", "0", "--T", "1", "--b", "-0.5"}).doc();
  const auto lb = ouldp::laplace_upper_bound(0.0, 1.0, -0.5);
  CHECK(d["bound"].get<double>() == lb.bound);
}

TEST_CASE("seeded commands are reproducible across worker counts", "[cli]") {
  const std::vector<std::string> base{"mc-tail", "--theta", "-1", "--T", "4", "--event", "mle_le",
                                      "--threshold", "-2", "--n", "3000", "--seed", "17"};
  auto one = base;
  one.insert(one.end(), {"--workers", "1"});
  auto three = base;
  three.insert(three.end(), {"--workers", "3"});
  const auto a = run(one).doc();
  const auto b = run(three).doc();
  CHECK(a["p_hat"] == b["p_hat"]);
  CHECK(a["se"] == b["se"]);
  CHECK(a["seed"] == 17);
  CHECK(run(one).out == run(one).out);
  const auto defaulted = run({"simulate", "--theta", "0", "--T", "1"}).doc();
  CHECK(defaulted["seed"] == 0);
}

TEST_CASE("check suite passes", "[cli]") {
  const auto r = run({"check"});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK(d["passed"] == true);
  for (const auto& c : d["checks"]) {
    INFO(c["name"].get<std::string>() << ": " << c["detail"].get<std::string>());
    CHECK(c["passed"] == true);
  }
  CHECK(run({"check", "--suite", "bogus"}).code == 2);
}

TEST_CASE("sweep over z", "[cli]") {
  const auto r = run({"sweep", "rate", "--theta", "-1", "--z", "-3..1", "x", "9"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == "theta,z,rate,branch");
  CHECK(rows[1] == "-1,-3,0.333333333333,border");
  CHECK(rows[5] == "-1,-1,0,border");
  const auto compact = run({"sweep", "rate", "--theta", "-1", "--z", "-3..1x9"});
  CHECK(compact.out == r.out);
}

TEST_CASE("sweep order, sentinels and csv output", "[cli]") {
  const auto r = run({"sweep", "laplace-bound", "--theta", "-1..1", "x", "3", "--T", "1", "--b", "-1..0", "x", "2"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "theta,T,b,bound,log_bound,phi,exact");
  CHECK(rows[1].rfind("-1,1,-1,", 0) == 0);
  CHECK(rows[2] == "-1,1,0,nan,nan,nan,nan");
  CHECK(rows[3].rfind("0,1,-1,", 0) == 0);

  const std::string path = "ouldp_sweep_test.csv";
  const auto f = run({"sweep", "rate", "--theta", "-1", "--z", "-3..1", "x", "9", "--csv", path});
  REQUIRE(f.code == 0);
  const auto d = f.doc();
  CHECK(d["rows"] == 9);
  CHECK(d["target"] == "rate");
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == run({"sweep", "rate", "--theta", "-1", "--z", "-3..1", "x", "9"}).out);
  std::remove(path.c_str());
}

TEST_CASE("one-point sweep reproduces the single-shot output", "[cli]") {
  const auto single = run({"ci-bound", "--theta", "0.5", "--T", "3", "--x", "0.7"}).doc();
  const auto rows = lines(run({"sweep", "ci-bound", "--theta", "0.5", "--T", "3", "--x", "0.7"}).out);
  REQUIRE(rows.size() == 2);
  std::ostringstream expected;
  expected << "0.5,3,0.7," << ouldp::cli::format_csv_number(single["bound"].get<double>()) << ","
           << ouldp::cli::format_csv_number(single["log_bound"].get<double>());
  CHECK(rows[1].rfind(expected.str(), 0) == 0);
}

TEST_CASE("sweep over the concentration grid matches the library", "[cli]") {
  const auto r = run({"sweep", "ci-bound", "--theta", "-2..2", "x", "5", "--T", "5..20", "x", "4",
                      "--x", "0.25..1", "x", "4"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 81);
  std::size_t i = 1;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c, ++i) {
        const double theta = -2.0 + a, T = 5.0 + 5.0 * b, x = 0.25 + 0.25 * c;
        const auto rep = ouldp::ci_bound({theta, T, x});
        std::istringstream row(rows[i]);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() >= 4);
        CHECK(std::stod(cells[0]) == theta);
        CHECK(cells[3] == ouldp::cli::format_csv_number(rep.bound));
      }
}

TEST_CASE("sweep usage errors", "[cli]") {
  CHECK(run({"sweep"}).code == 2);
  CHECK(run({"sweep", "check"}).code == 2);
  CHECK(run({"sweep", "rate", "--theta", "1", "--bogus", "2"}).code == 2);
  CHECK(run({"sweep", "rate", "--theta", "-1..1", "--z", "0"}).code == 2);
  CHECK(run({"sweep", "rate", "--theta", "-1..1", "x", "0", "--z", "0"}).code == 2);
  CHECK(run({"sweep", "ci-bound", "--theta", "0", "--T", "1"}).code == 2);
}

TEST_CASE("csv number format", "[cli]") {
  using ouldp::cli::format_csv_number;
  CHECK(format_csv_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_csv_number(-0.0) == "0");
  CHECK(format_csv_number(INFINITY) == "inf");
  CHECK(format_csv_number(-INFINITY) == "-inf");
  CHECK(format_csv_number(NAN) == "nan");
  CHECK(format_csv_number(1e-20) == "1e-20");
}
