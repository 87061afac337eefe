#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/bounds.hpp"
#include "steinlab/geometry.hpp"
#include "steinlab/verdict.hpp"

namespace steinlab {

struct McConfig {
  std::uint64_t seed = 1;
  std::int64_t paths = 100000;
  double step = 1e-3;
  int threads = 0;  // 0: hardware concurrency
  int batches = 32;
};

// Stored trajectory of one path; meant for small counts.
struct PathBundle {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> positions;  // ambient coordinates
  std::vector<Eigen::MatrixXd> frame;      // columns: parallel orthonormal tangent frame
  std::vector<Eigen::MatrixXd> Q;          // damped transport in frame coordinates
  std::uint64_t seed = 0;
  std::int64_t index = 0;
  double step = 0.0;
  double manifold_defect = 0.0;  // max | |x| - 1 | (sphere)
  double frame_defect = 0.0;     // max |E^T E - I| before re-orthonormalization
  double q_shortcut_defect = 0.0;  // max |Q - e^{-Kt/2} I| (constant curvature)
};

std::vector<PathBundle> simulate_paths(const ModelSpace& space, const Eigen::VectorXd& x0, double t, double step,
                                       std::int64_t count, std::uint64_t seed);

// Test functions with analytic ambient derivatives.
enum class FieldPreset { ZonalL1, ZonalL2, CoordinateX1, LinearX, SquareX, SineX };
std::string to_string(FieldPreset f);
FieldPreset field_preset_from_string(const std::string& s);

// Default base point: north pole on the sphere, origin in flat space.
Eigen::VectorXd default_point(const ModelSpace& space, FieldPreset f);
// Orthonormal tangent basis at x (columns), the frame the estimator reports in.
Eigen::MatrixXd tangent_basis(const ModelSpace& space, const Eigen::VectorXd& x);

enum class Estimator { Representation, FiniteDifferenceSpectral };
std::string to_string(Estimator e);

struct HessianEstimate {
  Eigen::VectorXd point;
  Eigen::VectorXd v, w;  // ambient unit tangents
  double t = 0.0;
  double value = 0.0;
  double ci_halfwidth = 0.0;
  Estimator estimator = Estimator::Representation;
};

// Full Hessian matrix of P_t f in the tangent basis, plus gradient moments from the same paths.
struct HessianMatrixEstimate {
  Eigen::VectorXd point;
  Eigen::MatrixXd basis;
  double t = 0.0;
  Eigen::MatrixXd value;
  Eigen::MatrixXd ci;
  double grad2 = 0.0, grad2_ci = 0.0;  // P_t |grad f|^2
  double grad1 = 0.0, grad1_ci = 0.0;  // P_t |grad f|
  double manifold_defect = 0.0;
  double q_shortcut_defect = 0.0;
  std::int64_t paths = 0;
};

HessianMatrixEstimate hessian_matrix_estimate(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x,
                                              double t, const McConfig& cfg);
// Hess P_t f (v, w) for ambient unit tangents v, w at x.
HessianEstimate hessian_estimate(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& w, double t, const McConfig& cfg);

// Exact Hess P_t f in the tangent basis where a spectral or Mehler formula exists.
std::optional<Eigen::MatrixXd> hessian_oracle(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x, double t);

double matrix_norm(const Eigen::MatrixXd& H, bool hs);

InequalityVerdict verify_hessian_bound(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x, double t,
                                       HessianVariant which, const McConfig& cfg);
// All four variants sharing one simulation; unsupported ones are skipped.
std::vector<InequalityVerdict> verify_hessian_bounds(const HessianMatrixEstimate& est, const ModelSpace& space,
                                                     const std::vector<HessianVariant>& which);

}  // namespace steinlab
