#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "gen.hpp"
#include "steinlab/error.hpp"
#include "steinlab/functionals.hpp"

using namespace steinlab;

namespace {

const ModelSpace kGauss = ModelSpace::gaussian(1, 1.0);

}  // namespace

TEST_CASE("gaussian scale closed forms") {
  for (double s2 : {0.5, 2.0, 3.0}) {
    const MeasurePair p = make_pair(kGauss, DensitySpec::gaussian_scale(s2));
    CHECK(entropy(p) == doctest::Approx(0.5 * (s2 - 1 - std::log(s2))).epsilon(1e-7));
    CHECK(fisher(p) == doctest::Approx((s2 - 1) * (s2 - 1) / s2).epsilon(1e-7));
    CHECK(wasserstein2_quantile(p).value == doctest::Approx(std::abs(std::sqrt(s2) - 1)).epsilon(1e-6));
  }
  const MeasurePair two = make_pair(kGauss, DensitySpec::gaussian_scale(2.0));
  CHECK(entropy(two) == doctest::Approx(0.1534264097));
  CHECK(fisher(two) == doctest::Approx(0.5));
  CHECK(wasserstein2(two).value == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-6));
}

TEST_CASE("gaussian shift closed forms") {
  const MeasurePair p = make_pair(kGauss, DensitySpec::gaussian_shift(1.0));
  CHECK(entropy(p) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(fisher(p) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(wasserstein2(p).value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("stein kernel of a scaled gaussian is sigma^2") {
  for (double s2 : {0.5, 2.0, 4.0}) {
    const MeasurePair p = make_pair(kGauss, DensitySpec::gaussian_scale(s2));
    const SteinKernelField k = stein_kernel(p);
    for (std::size_t i = 0; i < k.tau.size(); i += 37)
      if (std::abs(k.nodes[i]) < 4.0 * std::sqrt(s2)) CHECK(k.tau[i] == doctest::Approx(s2).epsilon(1e-6));
    CHECK(stein_discrepancy(p, k, 2.0) == doctest::Approx(std::abs(s2 - 1)).epsilon(1e-6));
    CHECK(k.residual <= 1e-6);
  }
}

TEST_CASE("explicit kernel of a shifted gaussian") {
  const double m = 0.8;
  const MeasurePair p = make_pair(kGauss, DensitySpec::gaussian_shift(m));
  const SteinKernelField k = stein_kernel(p);
  const boost::math::normal_distribution<> N;
  for (std::size_t i = 0; i < k.tau.size(); i += 41) {
    const double y = k.nodes[i] - m;
    if (std::abs(y) > 5.0) continue;
    const double ref = 1.0 + m * boost::math::cdf(boost::math::complement(N, y)) / boost::math::pdf(N, y);
    CHECK(k.tau[i] == doctest::Approx(ref).epsilon(1e-6));
  }
  CHECK_FALSE(k.finite_discrepancy);
  CHECK(std::isinf(stein_discrepancy(p, k, 2.0)));
}

TEST_CASE("S_p is non-decreasing in p") {
  const std::vector<MeasurePair> pairs{make_pair(kGauss, DensitySpec::gaussian_scale(2.5)),
                                       make_pair(ModelSpace::line(PotentialSpec::quartic(1.0)), DensitySpec::quartic_tilt(0.5)),
                                       make_pair(ModelSpace::sphere(2), DensitySpec::von_mises(1.0))};
  for (const MeasurePair& p : pairs) {
    const SteinKernelField k = stein_kernel(p);
    double prev = 0.0;
    for (double q : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
      const double s = stein_discrepancy(p, k, q);
      CHECK(s >= prev * (1 - 1e-12));
      prev = s;
    }
    CHECK(variance_control_defect(k) <= 1e-12);
  }
}

TEST_CASE("moment ratio for nu = mu") {
  const MeasurePair p = make_pair(kGauss, DensitySpec::identity());
  const SteinKernelField k = stein_kernel(p);
  CHECK(moment_ratio(p, k, TestFunction::Coordinate, 2) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(moment_ratio(p, k, TestFunction::Coordinate, 4) == doctest::Approx(std::pow(3.0, 0.25) / 2).epsilon(1e-8));
  CHECK_THROWS_AS(moment_ratio(p, k, TestFunction::Coordinate, 3), Error);
}

TEST_CASE("exact discrete W2 on the line") {
  gen::Draw d(31);
  for (int k = 0; k < 10; ++k) {
    const int n = d.integer(5, 40);
    std::vector<double> x(n), y(n), w(n, 1.0 / n);
    for (int i = 0; i < n; ++i) {
      x[i] = d.uniform(-3, 3);
      y[i] = d.uniform(-1, 4);
    }
    const double got = discrete_w2_1d(x, w, y, w);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double ref = 0.0;
    for (int i = 0; i < n; ++i) ref += (x[i] - y[i]) * (x[i] - y[i]) / n;
    CHECK(got == doctest::Approx(std::sqrt(ref)).epsilon(1e-12));
  }
}

TEST_CASE("Sinkhorn matches the quantile route on a discretized line") {
  const int n = 150;
  std::vector<double> x(n), a(n), b(n);
  double za = 0.0, zb = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = -5.0 + 10.0 * i / (n - 1);
    a[i] = std::exp(-x[i] * x[i] / 2);
    b[i] = std::exp(-(x[i] - 0.7) * (x[i] - 0.7) / 3.0);
    za += a[i];
    zb += b[i];
  }
  Eigen::VectorXd A(n), B(n);
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i) {
    a[i] /= za;
    b[i] /= zb;
    A[i] = a[i];
    B[i] = b[i];
    for (int j = 0; j < n; ++j) C(i, j) = (x[i] - x[j]) * (x[i] - x[j]);
  }
  SinkhornOptions opt;
  opt.eps_min = 0.01;
  opt.iters_per_level = 2000;
  const W2Result r = sinkhorn_w2(C, C, C, A, B, opt);
  const double exact = discrete_w2_1d(x, a, x, b);
  CHECK(std::abs(r.value - exact) <= std::max(2 * opt.eps_min, 1e-3));
  CHECK(r.marginal_violation <= 1e-6);
}

TEST_CASE("sphere Sinkhorn against the polar-angle quantile oracle") {
  const double kappa = 1.0;
  const MeasurePair p = make_pair(ModelSpace::sphere(2), DensitySpec::von_mises(kappa));
  SinkhornOptions opt;
  opt.points = 400;
  opt.eps_min = 0.01;
  opt.iters_per_level = 2000;
  const W2Result r = wasserstein2(p, opt);
  // theta quantiles: mu has cos theta uniform, nu has cos theta with density ~ e^{kappa c}.
  auto q_mu = [](double u) { return std::acos(1.0 - 2.0 * u); };
  auto q_nu = [&](double u) {
    const double ek = std::exp(kappa), emk = std::exp(-kappa);
    return std::acos(std::log(ek - u * (ek - emk)) / kappa);
  };
  const double w2sq = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) { return std::pow(q_mu(u) - q_nu(u), 2); }, 0.0, 1.0, 15, 1e-12);
  const double oracle = std::sqrt(w2sq);
  CHECK(r.value <= oracle + 0.02);
  CHECK(r.value >= oracle - 0.05);
}

TEST_CASE("sphere point sets lie on the sphere") {
  for (int n : {2, 3, 5}) {
    const Eigen::MatrixXd P = sphere_points(n, 200, 3);
    CHECK(P.cols() == n + 1);
    CHECK(P.rows() == 200);
    for (int i = 0; i < P.rows(); ++i) CHECK(std::abs(P.row(i).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("compute_functionals is deterministic") {
  const MeasurePair p = make_pair(ModelSpace::sphere(2), DensitySpec::von_mises(1.0));
  FunctionalOptions o;
  o.with_w2 = false;
  const FunctionalReport a = compute_functionals(p, o), b = compute_functionals(p, o);
  CHECK(a.H.value == b.H.value);
  CHECK(a.S() == b.S());
  CHECK(a.moment_ratio == b.moment_ratio);
}
