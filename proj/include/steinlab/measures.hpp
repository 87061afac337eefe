#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steinlab/geometry.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

enum class Family { Identity, GaussianScale, GaussianShift, QuarticTilt, SphereVonMises, SphereLinear };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Test-measure descriptor. Line families are absolute densities in x except
// GaussianShift (mu translated by `shift`); sphere families are zonal ratios
// h(theta) with theta the angle to the pole e_{n+1}.
struct DensitySpec {
  Family family = Family::Identity;
  double sigma2 = 1.0;  // GaussianScale: nu = N(0, sigma2)
  double shift = 0.0;   // GaussianShift m, QuarticTilt linear tilt
  double a = 0.0;       // QuarticTilt: nu ~ exp(-(x^2 + a x^4)/2 + shift x)
  double kappa = 0.0;   // SphereVonMises: h ~ exp(kappa cos theta)
  double c = 0.0;       // SphereLinear: h ~ 1 + c cos theta

  static DensitySpec identity() { return {}; }
  static DensitySpec gaussian_scale(double s2) { DensitySpec d; d.family = Family::GaussianScale; d.sigma2 = s2; return d; }
  static DensitySpec gaussian_shift(double m) { DensitySpec d; d.family = Family::GaussianShift; d.shift = m; return d; }
  static DensitySpec quartic_tilt(double a, double shift = 0.0) {
    DensitySpec d; d.family = Family::QuarticTilt; d.a = a; d.shift = shift; return d;
  }
  static DensitySpec von_mises(double kappa) { DensitySpec d; d.family = Family::SphereVonMises; d.kappa = kappa; return d; }
  static DensitySpec sphere_linear(double c) { DensitySpec d; d.family = Family::SphereLinear; d.c = c; return d; }
};

struct ClosedForms {
  std::optional<double> H, I, W2, S;
};
ClosedForms closed_forms(const ModelSpace& space, const DensitySpec& d);

// mu = e^{-V} vol and nu = h mu, reduced to one coordinate: x on the line,
// the polar angle theta on the sphere (zonal families). All densities below
// are with respect to Lebesgue measure in that coordinate.
class MeasurePair {
 public:
  const ModelSpace& space() const { return space_; }
  const DensitySpec& density() const { return density_; }
  bool zonal() const { return space_.kind == SpaceKind::Sphere; }
  int resolution() const { return resolution_; }

  const num::CompositeRule& grid() const { return grid_; }
  std::span<const double> nodes() const { return grid_.x; }
  std::span<const double> mu_weights() const { return mu_w_; }
  std::span<const double> nu_weights() const { return nu_w_; }
  std::span<const double> log_h() const { return log_h_; }
  std::span<const double> dlog_h() const { return dlog_h_; }

  double log_normalizer_mu() const { return log_z_mu_; }
  double log_normalizer_nu() const { return log_z_nu_; }
  double tail_mass() const { return tail_mass_; }
  double nu_mean() const { return nu_mean_; }
  double nu_sd() const { return nu_sd_; }

  // Pointwise analytic access in the coordinate.
  double log_p_mu(double x) const;
  double dlog_p_mu(double x) const;
  double log_p_nu(double x) const;
  double dlog_p_nu(double x) const;
  double log_h_at(double x) const;
  double dlog_h_at(double x) const;
  double h_at(double x) const;
  // d/dx of the potential seen by the Stein identity (V' on the line, 0 on the sphere).
  double dV(double x) const;

  // Coordinate of an ambient point and back (sphere: theta <-> point on the pole meridian).
  double coordinate(const Eigen::VectorXd& p) const;

 private:
  friend MeasurePair make_pair(const ModelSpace&, const DensitySpec&, int);
  double raw_log_mu(double x) const;
  double raw_dlog_mu(double x) const;
  double raw_log_ratio(double x) const;
  double raw_dlog_ratio(double x) const;

  ModelSpace space_;
  DensitySpec density_;
  int resolution_ = 0;
  num::CompositeRule grid_;
  std::vector<double> mu_w_, nu_w_, log_h_, dlog_h_;
  double log_z_mu_ = 0.0, log_z_nu_ = 0.0, tail_mass_ = 0.0, nu_mean_ = 0.0, nu_sd_ = 1.0;
};

MeasurePair make_pair(const ModelSpace& space, const DensitySpec& density, int resolution = 1024);

enum class Which { Mu, Nu };

// i.i.d. draws; line points have size 1, sphere points are unit vectors in R^{n+1}.
std::vector<Eigen::VectorXd> sample(const MeasurePair& pair, Which which, std::size_t count, std::uint64_t seed);

}  // namespace steinlab
