#include <doctest.h>

#include <cmath>

#include "steinlab/error.hpp"
#include "steinlab/mc_sim.hpp"

using namespace steinlab;

namespace {

Eigen::VectorXd pole(int n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
  x[n] = 1.0;
  return x;
}

McConfig config(std::int64_t paths, int threads = 1) {
  McConfig c;
  c.seed = 17;
  c.paths = paths;
  c.step = 2e-3;
  c.threads = threads;
  return c;
}

}  // namespace

TEST_CASE("paths at t = 0 are the identity") {
  const auto b = simulate_paths(ModelSpace::sphere(2), pole(2), 0.0, 1e-3, 2, 1);
  REQUIRE(b.size() == 2);
  CHECK((b[0].positions.front() - pole(2)).norm() == 0.0);
  CHECK((b[0].Q.front() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
  CHECK((b[0].positions.back() - pole(2)).norm() == 0.0);
}

TEST_CASE("sphere path defects") {
  const auto b = simulate_paths(ModelSpace::sphere(2), pole(2), 1.0, 1e-3, 4, 2);
  for (const PathBundle& p : b) {
    CHECK(p.manifold_defect < 1e-12);
    CHECK(p.frame_defect < 1e-9);
    CHECK(p.q_shortcut_defect < 1e-8);
    for (std::size_t i = 0; i < p.positions.size(); i += 50) {
      const Eigen::MatrixXd& E = p.frame[i];
      CHECK((E.transpose() * p.positions[i]).norm() < 1e-9);
    }
  }
}

TEST_CASE("OU and sphere means") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1.0);
  const auto ou = simulate_paths(ModelSpace::gaussian(1, 1.0), x0, 1.0, 1e-2, 2000, 3);
  double m = 0.0;
  for (const PathBundle& p : ou) m += p.positions.back()[0];
  m /= ou.size();
  const double se = std::sqrt((1 - std::exp(-1.0)) / ou.size());
  CHECK(std::abs(m - std::exp(-0.5)) < 4 * se);

  const auto sp = simulate_paths(ModelSpace::sphere(2), pole(2), 0.5, 1e-2, 2000, 4);
  double c = 0.0;
  for (const PathBundle& p : sp) c += p.positions.back().dot(pole(2));
  c /= sp.size();
  CHECK(std::abs(c - std::exp(-0.5)) < 4 * std::sqrt(0.5 / sp.size()));
}

TEST_CASE("estimates do not depend on the thread count") {
  const ModelSpace s = ModelSpace::sphere(2);
  const auto a = hessian_matrix_estimate(s, FieldPreset::ZonalL1, pole(2), 0.5, config(4000, 1));
  const auto b = hessian_matrix_estimate(s, FieldPreset::ZonalL1, pole(2), 0.5, config(4000, 3));
  CHECK(a.value == b.value);
  CHECK(a.ci == b.ci);
  CHECK(a.grad2 == b.grad2);
}

TEST_CASE("OU Hessians of x^2 and x") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3), e = Eigen::VectorXd::Constant(1, 1.0);
  const HessianEstimate sq = hessian_estimate(g, FieldPreset::SquareX, x, e, e, 1.0, config(20000));
  CHECK(std::abs(sq.value - 2 * std::exp(-1.0)) <= 3 * sq.ci_halfwidth + 1e-3);
  const auto oracle = hessian_oracle(g, FieldPreset::SquareX, x, 1.0);
  REQUIRE(oracle.has_value());
  CHECK((*oracle)(0, 0) == doctest::Approx(2 * std::exp(-1.0)));
  const HessianEstimate lin = hessian_estimate(g, FieldPreset::LinearX, x, e, e, 1.0, config(2000));
  CHECK(std::abs(lin.value) < 1e-10);
}

TEST_CASE("Hilbert-Schmidt type II on S^2 at t = 1") {
  const ModelSpace s = ModelSpace::sphere(2);
  const auto est = hessian_matrix_estimate(s, FieldPreset::ZonalL1, pole(2), 1.0, config(20000));
  const auto v = verify_hessian_bounds(est, s, {HessianVariant::TypeIIHS});
  REQUIRE(v.size() == 1);
  CHECK(v[0].lhs == doctest::Approx(std::sqrt(2.0) * std::exp(-1.0)).epsilon(0.03));
  CHECK(v[0].lhs == doctest::Approx(0.520).epsilon(0.03));
  CHECK(v[0].rhs == doctest::Approx(1.33).epsilon(0.03));
  CHECK(v[0].holds);
}

TEST_CASE("misuse is reported") {
  const ModelSpace s = ModelSpace::sphere(2);
  McConfig c = config(100);
  c.step = 0.5;
  CHECK_THROWS_AS(hessian_matrix_estimate(s, FieldPreset::ZonalL1, pole(2), 1.0, c), Error);
  try {
    hessian_matrix_estimate(s, FieldPreset::ZonalL1, pole(2), 1.0, c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepTooLarge);
  }
  try {
    hessian_matrix_estimate(s, FieldPreset::SineX, pole(2), 1.0, config(100));
    FAIL("expected PresetUnsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PresetUnsupported);
  }
}
