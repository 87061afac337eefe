#include "steinlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "steinlab/error.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

std::string to_string(Family f) {
  switch (f) {
    case Family::Identity: return "identity";
    case Family::GaussianScale: return "gaussian_scale";
    case Family::GaussianShift: return "gaussian_shift";
    case Family::QuarticTilt: return "quartic_tilt";
    case Family::SphereVonMises: return "von_mises";
    case Family::SphereLinear: return "sphere_linear";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::Identity, Family::GaussianScale, Family::GaussianShift, Family::QuarticTilt,
                   Family::SphereVonMises, Family::SphereLinear}) {
    if (to_string(f) == s) return f;
  }
  fail(ErrorCode::ConfigError, "unknown density family '" + s + "'");
}

namespace {

bool sphere_family(Family f) { return f == Family::SphereVonMises || f == Family::SphereLinear; }

}  // namespace

ClosedForms closed_forms(const ModelSpace& space, const DensitySpec& d) {
  ClosedForms c;
  if (d.family == Family::Identity) {
    c.H = c.I = c.W2 = c.S = 0.0;
    return c;
  }
  const bool gaussian_mu = space.flat() && space.dimension == 1 && space.potential.kind == PotentialKind::Quadratic;
  if (gaussian_mu) {
    const double K = space.potential.K;
    if (d.family == Family::GaussianScale) {
      const double r = K * d.sigma2;
      c.H = 0.5 * (r - 1.0 - std::log(r));
      c.I = (r - 1.0) * (r - 1.0) / d.sigma2;
      c.W2 = std::abs(std::sqrt(d.sigma2) - 1.0 / std::sqrt(K));
      c.S = std::abs(r - 1.0);
    } else if (d.family == Family::GaussianShift) {
      const double m = d.shift;
      c.H = 0.5 * K * m * m;
      c.I = K * K * m * m;
      c.W2 = std::abs(m);
      c.S = m == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  if (space.kind == SpaceKind::Sphere && space.dimension == 2 && d.family == Family::SphereVonMises) {
    const double k = d.kappa;
    if (k == 0.0) {
      c.H = c.I = c.W2 = 0.0;
    } else {
      const double coth = 1.0 / std::tanh(k);
      const double ez = coth - 1.0 / k;
      // log(sinh k / k) without overflow
      const double log_z = std::abs(k) + std::log1p(-std::exp(-2.0 * std::abs(k))) - std::log(2.0 * std::abs(k));
      c.H = k * ez - log_z;
      c.I = 2.0 * k * coth - 2.0;
    }
  }
  return c;
}

double MeasurePair::raw_log_mu(double x) const {
  if (zonal()) return (space_.dimension - 1) * std::log(std::sin(x));
  return -space_.potential.v(x);
}

double MeasurePair::raw_dlog_mu(double x) const {
  if (zonal()) return (space_.dimension - 1) * std::cos(x) / std::sin(x);
  return -space_.potential.d1(x);
}

double MeasurePair::raw_log_ratio(double x) const {
  const PotentialSpec& V = space_.potential;
  switch (density_.family) {
    case Family::Identity: return 0.0;
    case Family::GaussianScale: return -0.5 * x * x / density_.sigma2 + V.v(x);
    case Family::GaussianShift: return -V.v(x - density_.shift) + V.v(x);
    case Family::QuarticTilt: {
      const double x2 = x * x;
      return -0.5 * (x2 + density_.a * x2 * x2) + density_.shift * x + V.v(x);
    }
    case Family::SphereVonMises: return density_.kappa * std::cos(x);
    case Family::SphereLinear: return std::log1p(density_.c * std::cos(x));
  }
  return 0.0;
}

double MeasurePair::raw_dlog_ratio(double x) const {
  const PotentialSpec& V = space_.potential;
  switch (density_.family) {
    case Family::Identity: return 0.0;
    case Family::GaussianScale: return -x / density_.sigma2 + V.d1(x);
    case Family::GaussianShift: return -V.d1(x - density_.shift) + V.d1(x);
    case Family::QuarticTilt: return -(x + 2.0 * density_.a * x * x * x) + density_.shift + V.d1(x);
    case Family::SphereVonMises: return -density_.kappa * std::sin(x);
    case Family::SphereLinear: return -density_.c * std::sin(x) / (1.0 + density_.c * std::cos(x));
  }
  return 0.0;
}

double MeasurePair::log_p_mu(double x) const { return raw_log_mu(x) - log_z_mu_; }
double MeasurePair::dlog_p_mu(double x) const { return raw_dlog_mu(x); }
double MeasurePair::log_p_nu(double x) const { return raw_log_mu(x) + raw_log_ratio(x) - log_z_nu_; }
double MeasurePair::dlog_p_nu(double x) const { return raw_dlog_mu(x) + raw_dlog_ratio(x); }
double MeasurePair::log_h_at(double x) const { return raw_log_ratio(x) - (log_z_nu_ - log_z_mu_); }
double MeasurePair::dlog_h_at(double x) const { return raw_dlog_ratio(x); }
double MeasurePair::h_at(double x) const { return std::exp(log_h_at(x)); }
double MeasurePair::dV(double x) const { return zonal() ? 0.0 : space_.potential.d1(x); }

double MeasurePair::coordinate(const Eigen::VectorXd& p) const {
  if (!zonal()) return p(0);
  return std::acos(std::clamp(p(p.size() - 1), -1.0, 1.0));
}

MeasurePair make_pair(const ModelSpace& space, const DensitySpec& density, int resolution) {
  space.validate();
  if (resolution < 64) fail(ErrorCode::ConfigError, "resolution must be >= 64");
  const bool sphere = space.kind == SpaceKind::Sphere;
  if (sphere != sphere_family(density.family) && density.family != Family::Identity)
    fail(ErrorCode::UnsupportedSpace, "density family " + to_string(density.family) + " does not live on " +
                                          to_string(space.kind));
  if (!sphere && space.dimension != 1)
    fail(ErrorCode::UnsupportedSpace, "measure pairs on R^n are one-dimensional; use mc_sim for n > 1");
  if (density.family == Family::GaussianScale && !(density.sigma2 > 0.0))
    fail(ErrorCode::NonIntegrable, "sigma2 must be positive");
  if (density.family == Family::QuarticTilt && !(density.a >= 0.0))
    fail(ErrorCode::NonIntegrable, "quartic tilt requires a >= 0");
  if (density.family == Family::SphereLinear && !(std::abs(density.c) < 1.0))
    fail(ErrorCode::NegativeDensity, "1 + c cos(theta) must stay positive (|c| < 1)");

  MeasurePair P;
  P.space_ = space;
  P.density_ = density;
  P.resolution_ = resolution;
  const int order = 16;
  const int panels = std::max(4, (resolution + order - 1) / order);

  double lo = 0.0, hi = std::numbers::pi;
  if (!sphere) {
    auto lmu = [&](double x) { return P.raw_log_mu(x); };
    auto lnu = [&](double x) { return P.raw_log_mu(x) + P.raw_log_ratio(x); };
    const int scan = 1601;
    const double drop = 60.0;
    double X = 4.0;
    for (;;) {
      double mmu = -std::numeric_limits<double>::infinity(), mnu = mmu;
      for (int i = 0; i < scan; ++i) {
        const double x = -X + 2.0 * X * i / (scan - 1);
        mmu = std::max(mmu, lmu(x));
        mnu = std::max(mnu, lnu(x));
      }
      const bool edges_low = lmu(-X) < mmu - drop && lmu(X) < mmu - drop && lnu(-X) < mnu - drop &&
                             lnu(X) < mnu - drop;
      if (std::isfinite(mmu) && std::isfinite(mnu) && edges_low) {
        const double keep = 55.0;
        int first = 0, last = scan - 1;
        auto inside = [&](int i) {
          const double x = -X + 2.0 * X * i / (scan - 1);
          return lmu(x) >= mmu - keep || lnu(x) >= mnu - keep;
        };
        while (first < scan - 1 && !inside(first)) ++first;
        while (last > 0 && !inside(last)) --last;
        lo = -X + 2.0 * X * std::max(0, first - 1) / (scan - 1);
        hi = -X + 2.0 * X * std::min(scan - 1, last + 1) / (scan - 1);
        break;
      }
      X *= 1.5;
      if (X > 1e4) fail(ErrorCode::NonIntegrable, "density mass not contained in [-1e4, 1e4]");
    }
  }
  P.grid_ = num::composite_gauss_legendre(lo, hi, panels, order);
  const std::size_t N = P.grid_.size();

  std::vector<double> lw_mu(N), lw_nu(N), ratio(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double x = P.grid_.x[i];
    const double lm = P.raw_log_mu(x);
    ratio[i] = P.raw_log_ratio(x);
    if (!std::isfinite(ratio[i])) fail(ErrorCode::NegativeDensity, "h is not positive at x = " + std::to_string(x));
    lw_mu[i] = std::log(P.grid_.w[i]) + lm;
    lw_nu[i] = lw_mu[i] + ratio[i];
  }
  P.log_z_mu_ = num::log_sum_exp(lw_mu);
  P.log_z_nu_ = num::log_sum_exp(lw_nu);
  if (!std::isfinite(P.log_z_mu_) || !std::isfinite(P.log_z_nu_))
    fail(ErrorCode::NonIntegrable, "normalization diverged");

  P.mu_w_.resize(N);
  P.nu_w_.resize(N);
  P.log_h_.resize(N);
  P.dlog_h_.resize(N);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    P.mu_w_[i] = std::exp(lw_mu[i] - P.log_z_mu_);
    P.nu_w_[i] = std::exp(lw_nu[i] - P.log_z_nu_);
    P.log_h_[i] = ratio[i] - (P.log_z_nu_ - P.log_z_mu_);
    P.dlog_h_[i] = P.raw_dlog_ratio(P.grid_.x[i]);
    m1 += P.nu_w_[i] * P.grid_.x[i];
  }
  for (std::size_t i = 0; i < N; ++i) m2 += P.nu_w_[i] * (P.grid_.x[i] - m1) * (P.grid_.x[i] - m1);
  P.nu_mean_ = m1;
  P.nu_sd_ = std::sqrt(m2);

  if (!sphere) {
    // Log-concave-type tail estimate e^{l(edge)} / |l'(edge)| for each side and measure.
    double tail = 0.0;
    for (double e : {lo, hi}) {
      const double dm = std::abs(P.raw_dlog_mu(e));
      const double dn = std::abs(P.raw_dlog_mu(e) + P.raw_dlog_ratio(e));
      tail = std::max(tail, std::exp(P.log_p_mu(e)) / std::max(dm, 1e-300));
      tail = std::max(tail, std::exp(P.log_p_nu(e)) / std::max(dn, 1e-300));
    }
    P.tail_mass_ = tail;
    if (tail > 1e-10) fail(ErrorCode::NonIntegrable, "tail mass bound " + std::to_string(tail) + " exceeds 1e-10");
  }
  return P;
}

namespace {

// Safeguarded Newton inversion of the grid CDF.
double invert_cdf(const MeasurePair& P, const std::vector<double>& cdf, bool nu, double u) {
  const auto& g = P.grid();
  auto dens = [&](double x) { return std::exp(nu ? P.log_p_nu(x) : P.log_p_mu(x)); };
  static const num::Rule base = num::gauss_legendre(16);
  auto integral = [&](double a, double b) {
    const double hw = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int k = 0; k < 16; ++k) s += base.w[k] * dens(mid + hw * base.x[k]);
    return hw * s;
  };
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
  double xl = j == 0 ? g.a : g.x[j - 1];
  double fl = j == 0 ? 0.0 : cdf[j - 1];
  double xr = j == cdf.size() ? g.b : g.x[j];
  const double x0 = xl, f0 = fl;
  double x = 0.5 * (xl + xr);
  for (int iter = 0; iter < 60; ++iter) {
    const double F = f0 + integral(x0, x) - u;
    if (std::abs(F) < 1e-14) break;
    if (F > 0) xr = x; else xl = x;
    const double p = dens(x);
    double xn = p > 0 ? x - F / p : 0.5 * (xl + xr);
    if (!(xn >= xl && xn <= xr)) xn = 0.5 * (xl + xr);
    if (std::abs(xn - x) < 1e-14 * (1.0 + std::abs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

}  // namespace

std::vector<Eigen::VectorXd> sample(const MeasurePair& P, Which which, std::size_t count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::ConfigError, "sample count must be >= 1");
  const bool nu = which == Which::Nu;
  std::vector<Eigen::VectorXd> out(count);
  if (!P.zonal()) {
    const auto& g = P.grid();
    auto dens = [&](double x) { return std::exp(nu ? P.log_p_nu(x) : P.log_p_mu(x)); };
    std::vector<double> cdf = num::cumulative_integral(g, dens);
    for (std::size_t i = 0; i < count; ++i) {
      CounterRng rng(seed, i);
      out[i] = Eigen::VectorXd::Constant(1, invert_cdf(P, cdf, nu, rng.uniform(0)));
    }
    return out;
  }
  const int d = P.space().dimension + 1;
  double log_hmax = std::max(P.log_h_at(0.0), P.log_h_at(std::numbers::pi));
  for (double x : P.nodes()) log_hmax = std::max(log_hmax, P.log_h_at(x));
  std::uint64_t attempts = 0;
  for (std::size_t i = 0; i < count; ++i) {
    NormalStream ns(seed, i);
    for (;;) {
      Eigen::VectorXd p(d);
      for (int k = 0; k < d; ++k) p(k) = ns.next();
      p /= p.norm();
      ++attempts;
      if (!nu || std::log(ns.uniform()) <= P.log_h_at(P.coordinate(p)) - log_hmax) {
        out[i] = p;
        break;
      }
      if (attempts > 1000000 && static_cast<double>(i + 1) / static_cast<double>(attempts) < 1e-4)
        fail(ErrorCode::RejectionStall, "acceptance rate below 1e-4");
    }
  }
  return out;
}

}  // namespace steinlab
