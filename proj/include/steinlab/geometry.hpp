#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace steinlab {

enum class SpaceKind { Euclidean, Line, Sphere };
enum class PotentialKind { Zero, Quadratic, Quartic };

std::string to_string(SpaceKind kind);
std::string to_string(PotentialKind kind);

// V = 0, V = K|x|^2/2, or (1-D only) V = (x^2 + a x^4)/2.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Zero;
  double K = 0.0;
  double a = 0.0;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec quadratic(double K) { return {PotentialKind::Quadratic, K, 0.0}; }
  static PotentialSpec quartic(double a) { return {PotentialKind::Quartic, 1.0, a}; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const;
  // Operator norm of the third derivative tensor at x.
  double third_norm(const Eigen::VectorXd& x) const;

  // Scalar versions for one-dimensional use.
  double v(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

  std::optional<double> hess_lower_bound() const;
  bool hess_exact() const;
  double third_sup() const;
};

struct ModelSpace {
  SpaceKind kind = SpaceKind::Line;
  int dimension = 1;
  PotentialSpec potential;

  static ModelSpace euclidean(int n, PotentialSpec V);
  static ModelSpace gaussian(int n, double K) { return euclidean(n, PotentialSpec::quadratic(K)); }
  static ModelSpace line(PotentialSpec V);
  static ModelSpace sphere(int n);

  bool flat() const { return kind != SpaceKind::Sphere; }
  // Throws UnsupportedSpace when the descriptor is malformed.
  void validate() const;
};

struct CurvatureConstants {
  double K = 0.0;
  bool ric_exact = false;
  bool hess_exact = false;  // flat space with Hess_V = K identically
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double alpha_tilde = 0.0;
  int n = 1;

  // Fills alpha and alpha_tilde from K, alpha1, alpha2.
  static CurvatureConstants make(double K, double alpha1, double alpha2, double beta, int n, bool ric_exact,
                                 bool hess_exact = false);
};

CurvatureConstants curvature_constants(const ModelSpace& space);

struct PointwiseCurvature {
  double K_V = 0.0;
  double beta_x = 0.0;
};
// x in ambient coordinates (sphere: unit vector in R^{n+1}).
PointwiseCurvature pointwise_curvature(const ModelSpace& space, const Eigen::VectorXd& x);

struct ProbeGrid {
  double lo = -10.0;
  double hi = 10.0;
  int points = 4001;
};

// inf_x K_V(x) - (2(p-1)/p) (delta beta(x))^{p/(p-1)}; the caller checks > 0.
double theorem3_condition(const ModelSpace& space, double p, double delta, const ProbeGrid& grid = {});
// Same value, throwing NonPositiveMargin when it is not positive.
double require_theorem3(const ModelSpace& space, double p, double delta, const ProbeGrid& grid = {});

// Gamma-calculus constants: Gamma_2 >= rho Gamma, Gamma_3 >= kappa Gamma_2, sigma as in the bound.
struct GammaConstants {
  double rho = 0.0;
  double kappa = 0.0;
  double sigma = 1.0;
};
GammaConstants gamma_constants(const ModelSpace& space);

}  // namespace steinlab
