#include <doctest.h>

#include <cmath>

#include "steinlab/error.hpp"
#include "steinlab/scenario.hpp"

using namespace steinlab;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("every preset parses and dumps") {
  for (const std::string& n : preset_names()) {
    const Scenario s = resolve_scenario("preset:" + n);
    CHECK(s.name == n);
    CHECK_FALSE(s.inequalities.empty());
    CHECK(parse_scenario(preset_yaml(n)).name == n);
  }
  CHECK(code_of([] { resolve_scenario("preset:nope"); }) == ErrorCode::ConfigError);
}

TEST_CASE("report survives a JSON round trip") {
  Scenario s = resolve_scenario("preset:gaussian-shift");
  const Report r = run_scenario(s);
  const Report back = report_from_json(nlohmann::json::parse(emit_json(r)));
  CHECK(back == r);
  CHECK(emit_json(back) == emit_json(r));
  // S is infinite for a shift, exercising the string encoding.
  CHECK(std::isinf(r.S.value));
}

TEST_CASE("non-finite numbers are strings") {
  CHECK(number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(number(std::nan("")) == "nan");
  CHECK(std::isnan(number_from("nan")));
  CHECK(number_from(2.5) == 2.5);
  CHECK(code_of([] { number_from("x"); }) == ErrorCode::ConfigError);
}

TEST_CASE("CSV framing") {
  CHECK(csv_header() == "scenario,name,case,lhs,rhs,margin,numeric_error,holds\r\n");
  Report r;
  r.name = "a,\"b\"";
  r.verdicts.push_back(verdict("hsi", 1.0, 2.0, 0.0, "flat"));
  const std::string row = csv_rows(r);
  CHECK(row.rfind("\"a,\"\"b\"\"\",hsi,flat,1,2,1,0,true\r\n", 0) == 0);
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK(code_of([] { parse_scenario("name: x\nbogus: 1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_scenario("name: x\nspace: {kind: torus}\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_scenario("name: x\ninequalities:\n  - {kind: nope}\n"); }) == ErrorCode::ConfigError);
}

TEST_CASE("with_parameter edits the measure") {
  const Scenario s = resolve_scenario("preset:gaussian-hsi");
  CHECK(with_parameter(s, "sigma2", 3.0).density.sigma2 == 3.0);
  CHECK(with_parameter(s, "t", 0.7).t_grid == std::vector<double>{0.7});
  CHECK(code_of([&] { with_parameter(s, "nope", 1.0); }) == ErrorCode::ConfigError);
}

TEST_CASE("sweeps") {
  Scenario s = resolve_scenario("preset:gaussian-hsi");
  CHECK(code_of([&] { sweep(s, "sigma2", {}); }) == ErrorCode::ConfigError);
  const SweepResult r = sweep(s, "sigma2", {1.1, 2.0, 4.0});
  CHECK(r.exit_code == 0);
  CHECK_FALSE(r.rows.empty());
  for (const SweepRow& row : r.rows) CHECK(row.verdict.margin >= 0.0);

  const Scenario f = resolve_scenario("preset:fisher-decay");
  Scenario only = f;
  only.inequalities = {InequalitySpec{"fisher_decay"}};
  const SweepResult d = sweep(only, "t", {0.25, 0.5, 1.0, 2.0});
  double prev = std::numeric_limits<double>::infinity();
  for (const SweepRow& row : d.rows) {
    CHECK(row.verdict.lhs < prev);
    prev = row.verdict.lhs;
  }
}

TEST_CASE("run is deterministic and exit codes map") {
  const Scenario s = resolve_scenario("preset:identity");
  CHECK(emit_json(run_scenario(s)) == emit_json(run_scenario(s)));
  CHECK(exit_code_for(Error(ErrorCode::ConfigError, "x")) == 3);
  CHECK(exit_code_for(Error(ErrorCode::HypothesisViolated, "x")) == 3);
  CHECK(exit_code_for(Error(ErrorCode::SinkhornDiverged, "x")) == 2);
}

TEST_CASE("a too strong log-Sobolev constant is reported, not thrown") {
  Scenario s = resolve_scenario("preset:gaussian-hsi");
  s.inequalities = {InequalitySpec{"lsi", "", 100.0}};
  const Report r = run_scenario(s);
  CHECK(r.exit_code == 1);
  REQUIRE(r.verdicts.size() == 1);
  CHECK_FALSE(r.verdicts[0].holds);
}
