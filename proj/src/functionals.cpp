#include "steinlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steinlab/error.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

double entropy(const MeasurePair& pair) {
  const auto w = pair.nu_weights();
  const auto lh = pair.log_h();
  const double floor = std::log(1e-300);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (lh[i] > floor) s += w[i] * lh[i];
  return s;
}

double fisher(const MeasurePair& pair) {
  const auto w = pair.nu_weights();
  const auto d = pair.dlog_h();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * d[i] * d[i];
  return s;
}

namespace {

// CDF and survival of one grid density, inverted by safeguarded Newton.
class GridCdf {
 public:
  GridCdf(const MeasurePair& pair, bool nu) : pair_(pair), nu_(nu), base_(num::gauss_legendre(16)) {
    auto p = [this](double x) { return density(x); };
    F_ = num::cumulative_integral(pair.grid(), p, false);
    S_ = num::cumulative_integral(pair.grid(), p, true);
  }
  double density(double x) const { return std::exp(nu_ ? pair_.log_p_nu(x) : pair_.log_p_mu(x)); }
  const std::vector<double>& F() const { return F_; }
  const std::vector<double>& S() const { return S_; }

  // Solves F(y) = u (left) or S(y) = u (right).
  double invert(double u, bool right) const {
    const auto& g = pair_.grid();
    const auto& x = g.x;
    const std::size_t N = x.size();
    double xl, xr, x0, v0;
    if (!right) {
      const auto it = std::upper_bound(F_.begin(), F_.end(), u);
      const std::size_t j = static_cast<std::size_t>(it - F_.begin());
      xl = j == 0 ? g.a : x[j - 1];
      xr = j == N ? g.b : x[j];
      x0 = xl;
      v0 = j == 0 ? 0.0 : F_[j - 1];
    } else {
      // S is decreasing; find the first node with S < u.
      const auto it = std::lower_bound(S_.begin(), S_.end(), u, [](double s, double v) { return s >= v; });
      const std::size_t j = static_cast<std::size_t>(it - S_.begin());
      xl = j == 0 ? g.a : x[j - 1];
      xr = j == N ? g.b : x[j];
      x0 = xr;
      v0 = j == N ? 0.0 : S_[j];
    }
    double y = 0.5 * (xl + xr);
    for (int it = 0; it < 60; ++it) {
      // G(y) increasing in y in both cases.
      const double G = right ? u - (v0 + partial(y, x0)) : v0 + partial(x0, y) - u;
      if (G == 0.0) break;
      if (G > 0) xr = y; else xl = y;
      const double p = density(y);
      double yn = p > 0 ? y - G / p : 0.5 * (xl + xr);
      if (!(yn >= xl && yn <= xr)) yn = 0.5 * (xl + xr);
      const bool done = std::abs(yn - y) < 1e-15 * (1.0 + std::abs(y));
      y = yn;
      if (done || std::abs(G) < 1e-17) break;
    }
    return y;
  }

 private:
  double partial(double a, double b) const {
    const double hw = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int k = 0; k < 16; ++k) s += base_.w[k] * density(mid + hw * base_.x[k]);
    return hw * s;
  }
  const MeasurePair& pair_;
  bool nu_;
  num::Rule base_;
  std::vector<double> F_, S_;
};

}  // namespace

Estimate wasserstein2_quantile(const MeasurePair& pair) {
  if (pair.zonal()) fail(ErrorCode::UnsupportedSpace, "quantile W2 is one-dimensional");
  if (pair.density().family == Family::Identity) return {};
  const GridCdf mu(pair, false), nu(pair, true);
  const auto x = pair.nodes();
  const auto w = pair.mu_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = mu.F()[i], S = mu.S()[i];
    const double y = F <= S ? nu.invert(F, false) : nu.invert(S, true);
    s += w[i] * (x[i] - y) * (x[i] - y);
  }
  return {std::sqrt(s), 0.0};
}

W2Result wasserstein2(const MeasurePair& pair, const SinkhornOptions& opt) {
  if (!pair.zonal()) {
    const Estimate e = wasserstein2_quantile(pair);
    W2Result r;
    r.value = e.value;
    r.error = e.error;
    r.method = "quantile";
    return r;
  }
  const int n = pair.space().dimension;
  const Eigen::MatrixXd X = sphere_points(n, opt.points, opt.seed);
  const int N = static_cast<int>(X.rows());
  Eigen::VectorXd a = Eigen::VectorXd::Constant(N, 1.0 / N), b(N);
  std::vector<double> lh(N);
  for (int i = 0; i < N; ++i) lh[i] = pair.log_h_at(std::acos(std::clamp(X(i, n), -1.0, 1.0)));
  const double lz = num::log_sum_exp(lh);
  for (int i = 0; i < N; ++i) b(i) = std::exp(lh[i] - lz);
  Eigen::MatrixXd C = X * X.transpose();
  C = C.unaryExpr([](double c) {
    const double d = std::acos(std::clamp(c, -1.0, 1.0));
    return d * d;
  });
  if (pair.density().family == Family::Identity || (a - b).lpNorm<Eigen::Infinity>() == 0.0) {
    W2Result r;
    r.method = "sinkhorn";
    return r;
  }
  return sinkhorn_w2(C, C, C, a, b, opt);
}

double FunctionalReport::S() const {
  const auto it = S_p.find(2.0);
  return it == S_p.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

FunctionalReport compute_functionals(const MeasurePair& pair, const FunctionalOptions& opt) {
  FunctionalReport r;
  const MeasurePair coarse = make_pair(pair.space(), pair.density(), std::max(64, pair.resolution() / 2));
  r.H.value = entropy(pair);
  r.H.error = std::abs(r.H.value - entropy(coarse));
  r.I.value = fisher(pair);
  r.I.error = std::abs(r.I.value - fisher(coarse));
  if (opt.with_w2) {
    const W2Result w = wasserstein2(pair, opt.sinkhorn);
    r.W2.value = w.value;
    r.W2.error = w.error;
    r.w2_method = w.method;
    if (!pair.zonal()) r.W2.error = std::abs(w.value - wasserstein2_quantile(coarse).value);
  }
  auto kernel = std::make_shared<SteinKernelField>(stein_kernel(pair, opt.kernel));
  for (double p : opt.ps) r.S_p[p] = stein_discrepancy(pair, *kernel, p);
  if (!r.S_p.count(2.0)) r.S_p[2.0] = stein_discrepancy(pair, *kernel, 2.0);
  for (int p : opt.moment_ps) r.moment_ratio[p] = moment_ratio(pair, *kernel, opt.moment_f, p);
  r.variance_defect = variance_control_defect(*kernel);
  KernelOptions loose = opt.kernel;
  loose.check = false;
  const double S_coarse = stein_discrepancy(coarse, stein_kernel(coarse, loose), 2.0);
  r.S_error = std::isfinite(r.S_p[2.0]) ? std::abs(r.S_p[2.0] - S_coarse) : 0.0;
  r.kernel = kernel;
  return r;
}

}  // namespace steinlab
