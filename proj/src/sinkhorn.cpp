#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "steinlab/error.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

namespace {

// out_i = -eps log sum_j exp(log b_j + (g_j - C_ij) / eps)
Eigen::VectorXd softmin(const Eigen::MatrixXd& C, const Eigen::VectorXd& logb, const Eigen::VectorXd& g,
                        double eps) {
  const Eigen::RowVectorXd shift = (g.array() / eps + logb.array()).matrix().transpose();
  Eigen::ArrayXXd T = (-C / eps).rowwise() + shift;
  const Eigen::ArrayXd m = T.rowwise().maxCoeff();
  T.colwise() -= m;
  const Eigen::ArrayXd s = T.exp().rowwise().sum();
  return (-eps * (m + s.log())).matrix();
}

struct Potentials {
  Eigen::VectorXd f, g;
};

// Alternating updates at fixed eps; returns the summed row-marginal violation.
double solve_level(const Eigen::MatrixXd& C, const Eigen::MatrixXd& Ct, const Eigen::VectorXd& loga,
                   const Eigen::VectorXd& logb, const Eigen::VectorXd& a, double eps, int max_iter, double tol,
                   Potentials& P, int& iterations) {
  double err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd fn = softmin(C, logb, P.g, eps);
    if (it > 0) err = (a.array() * (((P.f - fn).array() / eps).exp() - 1.0).abs()).sum();
    P.f = fn;
    P.g = softmin(Ct, loga, P.f, eps);
    ++iterations;
    if (err < tol) break;
  }
  return err;
}

// Symmetric problem OT_eps(a, a): averaged fixed point on a single potential.
double solve_symmetric(const Eigen::MatrixXd& C, const Eigen::VectorXd& loga, const Eigen::VectorXd& a, double eps,
                       int max_iter, double tol, Eigen::VectorXd& f, int& iterations) {
  double err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd fn = softmin(C, loga, f, eps);
    err = (a.array() * (((f - fn).array() / eps).exp() - 1.0).abs()).sum();
    f = 0.5 * (f + fn);
    ++iterations;
    if (err < tol) break;
  }
  return err;
}

}  // namespace

W2Result sinkhorn_w2(const Eigen::MatrixXd& C_ab, const Eigen::MatrixXd& C_aa, const Eigen::MatrixXd& C_bb,
                     const Eigen::VectorXd& a, const Eigen::VectorXd& b, const SinkhornOptions& opt) {
  if (C_ab.rows() != a.size() || C_ab.cols() != b.size())
    fail(ErrorCode::ConfigError, "sinkhorn: cost matrix shape mismatch");
  if (!(opt.eps_min > 0.0) || !(opt.eps_start >= opt.eps_min) || !(opt.eps_factor > 0.0 && opt.eps_factor < 1.0))
    fail(ErrorCode::ConfigError, "sinkhorn: bad epsilon schedule");
  auto safe_log = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i) > 0.0 ? std::log(v(i)) : -1e300;
    return out;
  };
  const Eigen::VectorXd loga = safe_log(a), logb = safe_log(b);
  const Eigen::MatrixXd Ct = C_ab.transpose();
  Potentials P{Eigen::VectorXd::Zero(a.size()), Eigen::VectorXd::Zero(b.size())};
  Eigen::VectorXd fa = Eigen::VectorXd::Zero(a.size()), fb = Eigen::VectorXd::Zero(b.size());

  W2Result r;
  r.method = "sinkhorn";
  double eps = opt.eps_start;
  double prev_cost = std::numeric_limits<double>::quiet_NaN(), cost = prev_cost, err = 0.0;
  for (;;) {
    err = solve_level(C_ab, Ct, loga, logb, a, eps, opt.iters_per_level, opt.marginal_tol, P, r.iterations);
    double value = a.dot(P.f) + b.dot(P.g);
    if (opt.debias) {
      solve_symmetric(C_aa, loga, a, eps, opt.iters_per_level, opt.marginal_tol, fa, r.iterations);
      solve_symmetric(C_bb, logb, b, eps, opt.iters_per_level, opt.marginal_tol, fb, r.iterations);
      value -= a.dot(fa) + b.dot(fb);
    }
    prev_cost = cost;
    cost = value;
    if (eps <= opt.eps_min) break;
    eps = std::max(opt.eps_min, eps * opt.eps_factor);
  }
  r.marginal_violation = err;
  if (!(err <= opt.marginal_tol))
    fail(ErrorCode::SinkhornDiverged, "marginal violation " + std::to_string(err) + " after max iterations");
  r.value = std::sqrt(std::max(cost, 0.0));
  const double prev = std::isfinite(prev_cost) ? std::sqrt(std::max(prev_cost, 0.0)) : r.value;
  r.error = std::abs(r.value - prev);
  return r;
}

double discrete_w2_1d(std::vector<double> x, std::vector<double> a, std::vector<double> y, std::vector<double> b) {
  auto sort_by = [](std::vector<double>& pts, std::vector<double>& w) {
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return pts[i] < pts[j]; });
    std::vector<double> p2(pts.size()), w2(pts.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      p2[k] = pts[idx[k]];
      w2[k] = w[idx[k]];
    }
    pts.swap(p2);
    w.swap(w2);
  };
  sort_by(x, a);
  sort_by(y, b);
  const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
  for (double& v : a) v /= sa;
  for (double& v : b) v /= sb;
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0], rb = b.empty() ? 0.0 : b[0], total = 0.0;
  while (i < x.size() && j < y.size()) {
    const double m = std::min(ra, rb);
    total += m * (x[i] - y[j]) * (x[i] - y[j]);
    ra -= m;
    rb -= m;
    if (ra <= 0.0 && ++i < x.size()) ra = a[i];
    if (rb <= 0.0 && ++j < y.size()) rb = b[j];
  }
  return std::sqrt(total);
}

Eigen::MatrixXd sphere_points(int n, int count, std::uint64_t seed) {
  Eigen::MatrixXd X(count, n + 1);
  if (n == 2) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      X(i, 0) = r * std::cos(golden * i);
      X(i, 1) = r * std::sin(golden * i);
      X(i, 2) = z;
    }
    return X;
  }
  for (int i = 0; i < count; ++i) {
    NormalStream ns(seed, static_cast<std::uint64_t>(i));
    for (int k = 0; k <= n; ++k) X(i, k) = ns.next();
    X.row(i) /= X.row(i).norm();
  }
  return X;
}

}  // namespace steinlab
