#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "steinlab/error.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

std::string to_string(KernelConstruction c) {
  switch (c) {
    case KernelConstruction::Explicit1D: return "explicit_1d";
    case KernelConstruction::ClosedFormGaussian: return "closed_form_gaussian";
    case KernelConstruction::LeastSquaresBasis: return "least_squares_basis";
  }
  return "unknown";
}

std::string to_string(TestFunction f) {
  switch (f) {
    case TestFunction::Coordinate: return "coordinate";
    case TestFunction::Geodesic: return "geodesic";
    case TestFunction::Sine: return "sine";
  }
  return "unknown";
}

TestFunction test_function_from_string(const std::string& s) {
  for (TestFunction f : {TestFunction::Coordinate, TestFunction::Geodesic, TestFunction::Sine})
    if (to_string(f) == s) return f;
  fail(ErrorCode::ConfigError, "unknown test function '" + s + "'");
}

namespace {

double p_nu(const MeasurePair& P, double x) { return std::exp(P.log_p_nu(x)); }

// Normalized Hermite functions He_k(y) e^{-y^2/4} / sqrt(k!) and their first two y-derivatives.
void hermite_functions(int K, double y, std::vector<double>& f, std::vector<double>& d1, std::vector<double>& d2) {
  std::vector<double> h(K + 2, 0.0);
  h[0] = 1.0;
  if (K >= 1) h[1] = y;
  for (int k = 1; k + 1 <= K; ++k) h[k + 1] = (y * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                                             std::sqrt(static_cast<double>(k + 1));
  const double g = std::exp(-0.25 * y * y);
  f.assign(K + 1, 0.0);
  d1.assign(K + 1, 0.0);
  d2.assign(K + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    const double hp = k >= 1 ? std::sqrt(static_cast<double>(k)) * h[k - 1] : 0.0;
    const double hpp = k >= 2 ? std::sqrt(static_cast<double>(k) * (k - 1)) * h[k - 2] : 0.0;
    f[k] = h[k] * g;
    d1[k] = (hp - 0.5 * y * h[k]) * g;
    d2[k] = (hpp - y * hp - 0.5 * h[k] + 0.25 * y * y * h[k]) * g;
  }
}

// Residual of int V' phi' dnu = int tau phi'' dnu on the Hermite basis, with
// sigma = tau p_nu supplied directly (no division). sigma_a, sigma_b are the
// flux at the grid ends; outside the grid sigma is taken constant.
double line_residual(const MeasurePair& P, const std::vector<double>& sigma, int count, double sigma_a,
                     double sigma_b) {
  const auto x = P.nodes();
  const auto& w = P.grid().w;
  const double m = P.nu_mean(), sd = P.nu_sd();
  std::vector<double> lhs(count, 0.0), rhs(count, 0.0), f, d1, d2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = (x[i] - m) / sd;
    hermite_functions(count - 1, y, f, d1, d2);
    const double pv = P.nu_weights()[i] * P.dV(x[i]);
    for (int k = 0; k < count; ++k) {
      lhs[k] += pv * d1[k] / sd;
      rhs[k] += w[i] * sigma[i] * d2[k] / (sd * sd);
    }
  }
  hermite_functions(count - 1, (P.grid().a - m) / sd, f, d1, d2);
  for (int k = 0; k < count; ++k) rhs[k] += sigma_a * d1[k] / sd;
  hermite_functions(count - 1, (P.grid().b - m) / sd, f, d1, d2);
  for (int k = 0; k < count; ++k) rhs[k] -= sigma_b * d1[k] / sd;
  double r = 0.0;
  for (int k = 0; k < count; ++k) r = std::max(r, std::abs(lhs[k] - rhs[k]));
  return r;
}

SteinKernelField line_kernel(const MeasurePair& P, const KernelOptions& opt) {
  SteinKernelField K;
  const auto x = P.nodes();
  const std::size_t N = x.size();
  K.nodes.assign(x.begin(), x.end());
  K.weights.assign(P.nu_weights().begin(), P.nu_weights().end());
  std::vector<double> sigma(N);
  const bool gaussian_scale = P.space().potential.kind == PotentialKind::Quadratic &&
                              (P.density().family == Family::GaussianScale || P.density().family == Family::Identity);
  KernelConstruction c = opt.construction.value_or(KernelConstruction::Explicit1D);
  if (c == KernelConstruction::LeastSquaresBasis)
    fail(ErrorCode::UnsupportedSpace, "least-squares kernels are built on the sphere");
  if (c == KernelConstruction::ClosedFormGaussian && !gaussian_scale)
    fail(ErrorCode::HypothesisViolated, "closed-form kernel needs a centered Gaussian scale family");
  K.construction = c;

  auto g = [&](double y) { return P.dV(y) * p_nu(P, y); };
  double scale = 0.0;
  for (std::size_t i = 0; i < N; ++i) scale += K.weights[i] * std::abs(P.dV(x[i]));
  const double left_tail = num::integrate_to_inf([&](double s) { return g(P.grid().a - s); }, 0.0, 1e-14).value;
  const double right_tail = num::integrate_to_inf(g, P.grid().b, 1e-14).value;
  const std::vector<double> from_left = num::cumulative_integral(P.grid(), g, false);
  const std::vector<double> from_right = num::cumulative_integral(P.grid(), g, true);
  double balance = left_tail + from_left.front() + from_right.front() + right_tail;
  if (std::abs(balance) <= opt.balance_tol * std::max(scale, 1e-300)) balance = 0.0;
  K.drift_balance = balance;
  K.finite_discrepancy = balance == 0.0;

  if (c == KernelConstruction::ClosedFormGaussian) {
    const double K0 = P.space().potential.K;
    const double s2 = P.density().family == Family::Identity ? 1.0 / K0 : P.density().sigma2;
    for (std::size_t i = 0; i < N; ++i) sigma[i] = K0 * s2 * p_nu(P, x[i]);
    K.tau.assign(N, K0 * s2);
  } else {
    // Left form below the nu-mean avoids cancellation in the lower tail.
    K.tau.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      sigma[i] = x[i] < P.nu_mean() ? balance - (left_tail + from_left[i]) : from_right[i] + right_tail;
      K.tau[i] = sigma[i] * std::exp(-P.log_p_nu(x[i]));
    }
  }
  K.hs_deviation.resize(N);
  K.op_norm.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    K.hs_deviation[i] = std::abs(K.tau[i] - 1.0);
    K.op_norm[i] = std::abs(K.tau[i]);
  }
  K.test_functions = opt.test_functions;
  const bool closed = c == KernelConstruction::ClosedFormGaussian;
  const double sa = closed ? 0.0 : balance - left_tail;
  const double sb = closed ? 0.0 : right_tail;
  K.residual = line_residual(P, sigma, opt.test_functions, sa, sb);
  if (opt.check && K.residual > 1e-6)
    fail(ErrorCode::IdentityResidualHigh, "Stein identity residual " + std::to_string(K.residual));
  return K;
}

// Rotation-invariant kernels on S^n around the pole:
//   tau = A e_theta (x) e_theta + B (g - e_theta (x) e_theta).
// For zonal f, <tau, Hess f> = A f'' + (n-1) B cot(theta) f', and with V = 0 the
// identity reduces to (A p)' = (n-1) cot(theta) B p for the nu-density p in theta,
// plus int cot(theta) B p = 0 so A stays bounded at both poles. Zonal test
// functions suffice because nu and tau are invariant under the pole stabilizer.
SteinKernelField sphere_kernel(const MeasurePair& P, const KernelOptions& opt) {
  if (opt.construction && *opt.construction != KernelConstruction::LeastSquaresBasis)
    fail(ErrorCode::UnsupportedSpace, "sphere kernels use the least-squares construction");
  const int n = P.space().dimension;
  const double lambda = 0.5 * (n - 1.0);
  const auto th = P.nodes();
  const std::size_t N = th.size();
  const int D = opt.basis_degree;
  if (P.density().family == Family::Identity) {
    SteinKernelField K;
    K.construction = KernelConstruction::LeastSquaresBasis;
    K.nodes.assign(th.begin(), th.end());
    K.weights.assign(P.nu_weights().begin(), P.nu_weights().end());
    K.tau.assign(N, 1.0);
    K.tau_tangential.assign(N, 1.0);
    K.hs_deviation.assign(N, 0.0);
    K.op_norm.assign(N, 1.0);
    K.basis_degree = D;
    K.test_functions = opt.test_degree;
    return K;
  }
  const int m = D + 2;  // Gegenbauer 0..D plus 1/h

  // Basis values at nodes, normalized in L^2(nu).
  auto basis_at = [&](double t, std::vector<double>& out) {
    out.resize(m);
    num::gegenbauer(D, lambda, std::cos(t), std::span<double>(out.data(), D + 1));
    out[D + 1] = std::exp(-P.log_h_at(t));
  };
  std::vector<double> scale(m, 0.0), tmp;
  for (std::size_t i = 0; i < N; ++i) {
    basis_at(th[i], tmp);
    for (int k = 0; k < m; ++k) scale[k] += P.nu_weights()[i] * tmp[k] * tmp[k];
  }
  for (double& s : scale) s = 1.0 / std::sqrt(s);

  Eigen::MatrixXd Phi(N, m), A(N, m);
  Eigen::VectorXd J(m);
  for (int k = 0; k < m; ++k) {
    auto integrand = [&](double t) {
      basis_at(t, tmp);
      return std::cos(t) / std::sin(t) * tmp[k] * scale[k] * p_nu(P, t);
    };
    const std::vector<double> L = num::cumulative_integral(P.grid(), integrand, false);
    const std::vector<double> R = num::cumulative_integral(P.grid(), integrand, true);
    J(k) = L.front() + R.front();
    for (std::size_t i = 0; i < N; ++i) {
      basis_at(th[i], tmp);
      Phi(i, k) = tmp[k] * scale[k];
      const double pin = p_nu(P, th[i]);
      A(i, k) = th[i] <= 0.5 * std::numbers::pi ? (n - 1.0) * L[i] / pin : -(n - 1.0) * R[i] / pin;
    }
  }
  Eigen::VectorXd nu(N);
  for (std::size_t i = 0; i < N; ++i) nu(i) = P.nu_weights()[i];
  const Eigen::MatrixXd Mt = A.transpose() * nu.asDiagonal() * A + (n - 1.0) * Phi.transpose() * nu.asDiagonal() * Phi;
  const Eigen::VectorXd rhs = A.transpose() * nu + (n - 1.0) * Phi.transpose() * nu;
  Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(m + 1, m + 1);
  KKT.topLeftCorner(m, m) = Mt;
  KKT.block(0, m, m, 1) = J;
  KKT.block(m, 0, 1, m) = J.transpose();
  Eigen::VectorXd r(m + 1);
  r << rhs, 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(KKT);
  lu.setThreshold(1e-13);
  if (lu.rank() < m + 1) {
    KKT.topLeftCorner(m, m) += 1e-12 * Mt.trace() * Eigen::MatrixXd::Identity(m, m);
    lu.compute(KKT);
    if (lu.rank() < m + 1) fail(ErrorCode::KernelUnavailable, "least-squares system is rank deficient");
  }
  const Eigen::VectorXd sol = lu.solve(r);
  const Eigen::VectorXd b = sol.head(m);
  const Eigen::VectorXd Av = A * b, Bv = Phi * b;

  SteinKernelField K;
  K.construction = KernelConstruction::LeastSquaresBasis;
  K.nodes.assign(th.begin(), th.end());
  K.weights.assign(P.nu_weights().begin(), P.nu_weights().end());
  K.tau.resize(N);
  K.tau_tangential.resize(N);
  K.hs_deviation.resize(N);
  K.op_norm.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    K.tau[i] = Av(i);
    K.tau_tangential[i] = Bv(i);
    K.hs_deviation[i] = std::sqrt((Av(i) - 1.0) * (Av(i) - 1.0) + (n - 1.0) * (Bv(i) - 1.0) * (Bv(i) - 1.0));
    K.op_norm[i] = std::max(std::abs(Av(i)), std::abs(Bv(i)));
  }
  K.basis_degree = D;
  K.test_functions = opt.test_degree;

  // Residual on zonal harmonics of degree 1..test_degree (left side vanishes for V = 0).
  const int T = opt.test_degree;
  std::vector<double> c(T + 1), d1(T + 1), d2(T + 1), norm(T + 1, 0.0), res(T + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    num::gegenbauer(T, lambda, std::cos(th[i]), c);
    for (int l = 0; l <= T; ++l) norm[l] += P.mu_weights()[i] * c[l] * c[l];
  }
  for (std::size_t i = 0; i < N; ++i) {
    const double z = std::cos(th[i]), s = std::sin(th[i]);
    num::gegenbauer_derivs(T, lambda, z, d1, d2);
    for (int l = 1; l <= T; ++l) {
      const double fp = -s * d1[l];
      const double fpp = s * s * d2[l] - z * d1[l];
      res[l] += nu(i) * (Av(i) * fpp + (n - 1.0) * Bv(i) * (z / s) * fp);
    }
  }
  double worst = 0.0;
  for (int l = 1; l <= T; ++l) worst = std::max(worst, std::abs(res[l]) / std::sqrt(norm[l]));
  K.residual = worst;
  if (opt.check && K.residual > 1e-3)
    fail(ErrorCode::IdentityResidualHigh, "sphere Stein identity residual " + std::to_string(K.residual));
  return K;
}

}  // namespace

SteinKernelField stein_kernel(const MeasurePair& pair, const KernelOptions& opt) {
  return pair.zonal() ? sphere_kernel(pair, opt) : line_kernel(pair, opt);
}

double explicit_kernel_flux(const MeasurePair& P, double x) {
  if (P.zonal()) fail(ErrorCode::UnsupportedSpace, "explicit flux is one-dimensional");
  auto g = [&](double y) { return P.dV(y) * p_nu(P, y); };
  return num::integrate(g, x, P.grid().b, 1e-14).value + num::integrate_to_inf(g, P.grid().b, 1e-14).value;
}

double stein_discrepancy(const MeasurePair& /*pair*/, const SteinKernelField& K, double p) {
  if (!(p >= 1.0)) fail(ErrorCode::ConfigError, "stein_discrepancy needs p >= 1");
  if (!K.finite_discrepancy) return std::numeric_limits<double>::infinity();
  double s = 0.0, mx = 0.0;
  for (double d : K.hs_deviation) mx = std::max(mx, d);
  if (mx == 0.0) return 0.0;
  for (std::size_t i = 0; i < K.weights.size(); ++i) s += K.weights[i] * std::pow(K.hs_deviation[i] / mx, p);
  return mx * std::pow(s, 1.0 / p);
}

double variance_control_defect(const SteinKernelField& K) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K.op_norm.size(); ++i)
    if (K.weights[i] > 0.0) worst = std::max(worst, K.op_norm[i] - 1.0 - K.hs_deviation[i]);
  return worst;
}

double moment_ratio(const MeasurePair& P, const SteinKernelField& K, TestFunction fn, int p) {
  if (p < 2 || p % 2 != 0) fail(ErrorCode::ConfigError, "moment_ratio needs an even p >= 2");
  const auto x = P.nodes();
  const auto w = P.nu_weights();
  auto f = [&](double t) -> std::pair<double, double> {
    switch (fn) {
      case TestFunction::Coordinate: return P.zonal() ? std::pair{std::cos(t), -std::sin(t)} : std::pair{t, 1.0};
      case TestFunction::Geodesic: return P.zonal() ? std::pair{t, 1.0} : std::pair{std::abs(t), t < 0 ? -1.0 : 1.0};
      case TestFunction::Sine: return {std::sin(t), std::cos(t)};
    }
    return {0.0, 0.0};
  };
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [v, d] = f(x[i]);
    if (std::abs(d) > 1.0 + 1e-12) fail(ErrorCode::HypothesisViolated, "test function is not 1-Lipschitz");
    mean += w[i] * v;
  }
  const double S = stein_discrepancy(P, K, p);
  if (!std::isfinite(S)) return 0.0;
  double num = 0.0, op = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += w[i] * std::pow(std::abs(f(x[i]).first - mean), p);
    op += w[i] * std::pow(K.op_norm[i], 0.5 * p);
  }
  return std::pow(num, 1.0 / p) / (S + std::sqrt(static_cast<double>(p)) * std::pow(op, 1.0 / p));
}

}  // namespace steinlab
