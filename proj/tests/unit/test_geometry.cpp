#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "steinlab/error.hpp"
#include "steinlab/geometry.hpp"

using namespace steinlab;

namespace {

Eigen::VectorXd random_point(gen::Draw& d, int n, double r) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = d.uniform(-r, r);
  return x;
}

}  // namespace

TEST_CASE("potential derivatives agree with central differences") {
  gen::Draw d(1);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = d.integer(1, 4);
    const PotentialSpec V = n == 1 && trial % 2 ? PotentialSpec::quartic(d.uniform(0.0, 2.0))
                                                : PotentialSpec::quadratic(d.uniform(0.1, 5.0));
    const Eigen::VectorXd x = random_point(d, n, 2.0);
    const Eigen::VectorXd g = V.grad(x);
    const Eigen::MatrixXd H = V.hess(x);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = h;
      const double fd = (V.value(x + e) - V.value(x - e)) / (2 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
      const Eigen::VectorXd fdg = (V.grad(x + e) - V.grad(x - e)) / (2 * h);
      for (int j = 0; j < n; ++j) CHECK(H(j, i) == doctest::Approx(fdg[j]).epsilon(1e-6).scale(1.0));
    }
    if (n == 1) {
      CHECK(V.d3(x[0]) == doctest::Approx((V.d2(x[0] + h) - V.d2(x[0] - h)) / (2 * h)).epsilon(1e-6).scale(1.0));
      CHECK(V.third_norm(x) == doctest::Approx(std::abs(V.d3(x[0]))));
    }
  }
}

TEST_CASE("sphere constants for n = 2..12") {
  for (int n = 2; n <= 12; ++n) {
    const CurvatureConstants c = curvature_constants(ModelSpace::sphere(n));
    CHECK(c.K == doctest::Approx(n - 1));
    CHECK(c.alpha2 == doctest::Approx(std::sqrt(2.0 * n * (n - 1))));
    CHECK(c.alpha_tilde == doctest::Approx(c.K - 2 * c.alpha2));
    CHECK(c.beta == 0.0);
    CHECK(c.ric_exact);
    CHECK_FALSE(c.hess_exact);
    CHECK(c.n == n);
  }
  const CurvatureConstants s2 = curvature_constants(ModelSpace::sphere(2));
  CHECK(s2.K == doctest::Approx(1.0));
  CHECK(s2.alpha2 == doctest::Approx(2.0));
  CHECK(s2.alpha_tilde == doctest::Approx(-3.0));
}

TEST_CASE("flat constants") {
  const CurvatureConstants e = curvature_constants(ModelSpace::gaussian(1, 1.0));
  CHECK(e.K == 1.0);
  CHECK(e.alpha1 == 0.0);
  CHECK(e.beta == 0.0);
  CHECK(e.hess_exact);
  const CurvatureConstants e3 = curvature_constants(ModelSpace::gaussian(3, 2.5));
  CHECK(e3.K == 2.5);
  CHECK(e3.n == 3);
}

TEST_CASE("quartic pointwise curvature") {
  gen::Draw d(2);
  for (int k = 0; k < 50; ++k) {
    const double a = d.uniform(0.01, 3.0), x = d.uniform(-4.0, 4.0);
    const ModelSpace s = ModelSpace::line(PotentialSpec::quartic(a));
    const PointwiseCurvature pc = pointwise_curvature(s, Eigen::VectorXd::Constant(1, x));
    CHECK(pc.K_V == doctest::Approx(1.0 + 6.0 * a * x * x));
    CHECK(pc.beta_x == doctest::Approx(12.0 * a * std::abs(x)).scale(1.0));
  }
}

TEST_CASE("quartic curvature margin") {
  const double a = 0.7;
  const ModelSpace q = ModelSpace::line(PotentialSpec::quartic(a));
  CHECK(theorem3_condition(q, 2.0, std::sqrt(1.0 / (24.0 * a))) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(theorem3_condition(ModelSpace::gaussian(1, 1.0), 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(theorem3_condition(q, 2.0, 10.0) < 0.0);
  try {
    require_theorem3(q, 2.0, 10.0);
    FAIL("expected NonPositiveMargin");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveMargin);
  }
}

TEST_CASE("gamma constants") {
  const GammaConstants g = gamma_constants(ModelSpace::sphere(10));
  CHECK(g.rho == 9.0);
  CHECK(g.kappa == doctest::Approx(std::min(27.0 - 2.0 * std::sqrt(180.0), 9.0)));
  CHECK(g.kappa > 0.0);
  CHECK(std::abs(gamma_constants(ModelSpace::sphere(9)).kappa) < 1e-12);
  CHECK_THROWS_AS(gamma_constants(ModelSpace::gaussian(1, 1.0)), Error);
}

TEST_CASE("malformed spaces are rejected") {
  ModelSpace bad = ModelSpace::sphere(2);
  bad.dimension = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(ModelSpace::euclidean(2, PotentialSpec::quartic(1.0)).validate(), Error);
}
