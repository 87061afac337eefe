#include "steinlab/geometry.hpp"

#include <cmath>
#include <limits>

#include "steinlab/error.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Line: return "line";
    case SpaceKind::Sphere: return "sphere";
  }
  return "unknown";
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Quadratic: return "quadratic";
    case PotentialKind::Quartic: return "quartic";
  }
  return "unknown";
}

double PotentialSpec::v(double x) const {
  switch (kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Quadratic: return 0.5 * K * x * x;
    case PotentialKind::Quartic: return 0.5 * (x * x + a * x * x * x * x);
  }
  return 0.0;
}

double PotentialSpec::d1(double x) const {
  switch (kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Quadratic: return K * x;
    case PotentialKind::Quartic: return x + 2.0 * a * x * x * x;
  }
  return 0.0;
}

double PotentialSpec::d2(double x) const {
  switch (kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Quadratic: return K;
    case PotentialKind::Quartic: return 1.0 + 6.0 * a * x * x;
  }
  return 0.0;
}

double PotentialSpec::d3(double x) const {
  return kind == PotentialKind::Quartic ? 12.0 * a * x : 0.0;
}

double PotentialSpec::value(const Eigen::VectorXd& x) const {
  if (kind == PotentialKind::Quartic) return v(x(0));
  return kind == PotentialKind::Quadratic ? 0.5 * K * x.squaredNorm() : 0.0;
}

Eigen::VectorXd PotentialSpec::grad(const Eigen::VectorXd& x) const {
  if (kind == PotentialKind::Quartic) return Eigen::VectorXd::Constant(1, d1(x(0)));
  return kind == PotentialKind::Quadratic ? Eigen::VectorXd(K * x) : Eigen::VectorXd::Zero(x.size());
}

Eigen::MatrixXd PotentialSpec::hess(const Eigen::VectorXd& x) const {
  const auto n = x.size();
  if (kind == PotentialKind::Quartic) return Eigen::MatrixXd::Constant(1, 1, d2(x(0)));
  return kind == PotentialKind::Quadratic ? Eigen::MatrixXd(K * Eigen::MatrixXd::Identity(n, n))
                                          : Eigen::MatrixXd::Zero(n, n);
}

double PotentialSpec::third_norm(const Eigen::VectorXd& x) const {
  return kind == PotentialKind::Quartic ? std::abs(d3(x(0))) : 0.0;
}

std::optional<double> PotentialSpec::hess_lower_bound() const {
  switch (kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Quadratic: return K;
    case PotentialKind::Quartic: return a >= 0.0 ? std::optional<double>(1.0) : std::nullopt;
  }
  return std::nullopt;
}

bool PotentialSpec::hess_exact() const { return kind != PotentialKind::Quartic || a == 0.0; }

double PotentialSpec::third_sup() const {
  return kind == PotentialKind::Quartic && a != 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

ModelSpace ModelSpace::euclidean(int n, PotentialSpec V) {
  ModelSpace s{SpaceKind::Euclidean, n, V};
  s.validate();
  return s;
}

ModelSpace ModelSpace::line(PotentialSpec V) {
  ModelSpace s{SpaceKind::Line, 1, V};
  s.validate();
  return s;
}

ModelSpace ModelSpace::sphere(int n) {
  ModelSpace s{SpaceKind::Sphere, n, PotentialSpec::zero()};
  s.validate();
  return s;
}

void ModelSpace::validate() const {
  if (dimension < 1) fail(ErrorCode::UnsupportedSpace, "dimension must be >= 1");
  switch (kind) {
    case SpaceKind::Sphere:
      if (dimension < 2) fail(ErrorCode::UnsupportedSpace, "sphere requires n >= 2");
      if (potential.kind != PotentialKind::Zero) fail(ErrorCode::UnsupportedSpace, "sphere requires V = 0");
      break;
    case SpaceKind::Line:
      if (dimension != 1) fail(ErrorCode::UnsupportedSpace, "line has dimension 1");
      break;
    case SpaceKind::Euclidean:
      if (potential.kind == PotentialKind::Quartic && dimension != 1)
        fail(ErrorCode::UnsupportedSpace, "quartic potential is one-dimensional");
      break;
  }
  if (potential.kind == PotentialKind::Quadratic && !(potential.K > 0.0))
    fail(ErrorCode::UnsupportedSpace, "quadratic potential requires K > 0");
  if (potential.kind == PotentialKind::Quartic && !(potential.a >= 0.0))
    fail(ErrorCode::UnsupportedSpace, "quartic potential requires a >= 0");
}

CurvatureConstants CurvatureConstants::make(double K, double alpha1, double alpha2, double beta, int n,
                                            bool ric_exact, bool hess_exact) {
  CurvatureConstants c;
  c.K = K;
  c.alpha1 = alpha1;
  c.alpha2 = alpha2;
  c.beta = beta;
  c.n = n;
  c.ric_exact = ric_exact;
  c.hess_exact = hess_exact;
  c.alpha = K - 2.0 * alpha1;
  c.alpha_tilde = K - 2.0 * alpha2;
  return c;
}

CurvatureConstants curvature_constants(const ModelSpace& space) {
  space.validate();
  const int n = space.dimension;
  if (space.kind == SpaceKind::Sphere) {
    // Unit sphere: R_ijkl = d_ik d_jl - d_il d_jk, so Ric = (n-1) g, |R| = n-1 and
    // |R~|^2 = sum_{ijkl} (d_kl d_ij - d_il d_kj)^2 = 2n(n-1).
    const double nd = n;
    return CurvatureConstants::make(nd - 1.0, nd - 1.0, std::sqrt(2.0 * nd * (nd - 1.0)), 0.0, n, true, false);
  }
  const PotentialSpec& V = space.potential;
  const double K = V.hess_lower_bound().value_or(0.0);
  if (V.kind == PotentialKind::Quartic && !V.hess_lower_bound())
    fail(ErrorCode::UnsupportedSpace, "quartic potential with a < 0 has no curvature lower bound");
  return CurvatureConstants::make(K, 0.0, 0.0, V.third_sup(), n, V.hess_exact(), V.hess_exact());
}

PointwiseCurvature pointwise_curvature(const ModelSpace& space, const Eigen::VectorXd& x) {
  if (space.kind == SpaceKind::Sphere) return {space.dimension - 1.0, 0.0};
  const Eigen::MatrixXd H = space.potential.hess(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return {es.eigenvalues()(0), space.potential.third_norm(x)};
}

double theorem3_condition(const ModelSpace& space, double p, double delta, const ProbeGrid& grid) {
  if (!(p > 1.0) || !(delta > 0.0)) fail(ErrorCode::HypothesisViolated, "theorem3_condition needs p > 1, delta > 0");
  const double c = 2.0 * (p - 1.0) / p;
  const double q = p / (p - 1.0);
  auto g = [&](double x) {
    const PointwiseCurvature pc = pointwise_curvature(space, Eigen::VectorXd::Constant(1, x));
    return pc.K_V - c * std::pow(delta * pc.beta_x, q);
  };
  if (space.kind == SpaceKind::Sphere || space.potential.kind != PotentialKind::Quartic) {
    const CurvatureConstants cc = curvature_constants(space);
    return cc.K - c * std::pow(delta * cc.beta, q);
  }
  const double step = (grid.hi - grid.lo) / (grid.points - 1);
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.points; ++i) {
    const double v = g(grid.lo + i * step);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double lo = grid.lo + std::max(0, best - 1) * step;
  const double hi = grid.lo + std::min(grid.points - 1, best + 1) * step;
  const num::Minimum m = num::golden_section(g, lo, hi, 1e-12);
  return std::min(fbest, m.f);
}

double require_theorem3(const ModelSpace& space, double p, double delta, const ProbeGrid& grid) {
  const double k = theorem3_condition(space, p, delta, grid);
  if (!(k > 0.0)) fail(ErrorCode::NonPositiveMargin, "K* = " + std::to_string(k) + " is not positive");
  return k;
}

GammaConstants gamma_constants(const ModelSpace& space) {
  if (space.kind != SpaceKind::Sphere) fail(ErrorCode::UnsupportedSpace, "gamma constants tabulated for spheres only");
  const double n = space.dimension;
  const CurvatureConstants c = curvature_constants(space);
  GammaConstants g;
  g.rho = n - 1.0;
  g.sigma = 1.0;
  g.kappa = std::min(3.0 * (n - 1.0) - 2.0 * c.alpha2, n - 1.0);
  return g;
}

}  // namespace steinlab
