#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/measures.hpp"

namespace steinlab {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// int h log h dmu on the grid; h < 1e-300 contributes 0.
double entropy(const MeasurePair& pair);
// int |grad h|^2 / h dmu from the analytic log-gradient.
double fisher(const MeasurePair& pair);

// ----------------------------------------------------------------- W2
struct SinkhornOptions {
  double eps_start = 1.0;
  double eps_min = 1e-3;
  double eps_factor = 0.5;
  int iters_per_level = 500;
  double marginal_tol = 1e-6;
  bool debias = true;
  int points = 600;         // sphere point set size
  std::uint64_t seed = 7;   // point set for n >= 3
};

struct W2Result {
  double value = 0.0;
  double error = 0.0;
  std::string method;
  double marginal_violation = 0.0;
  int iterations = 0;
};

// Entropic OT between (a on rows) and (b on columns) with cost matrices C_ab,
// C_aa, C_bb (the last two only for debiasing). Returns sqrt of the debiased cost.
W2Result sinkhorn_w2(const Eigen::MatrixXd& C_ab, const Eigen::MatrixXd& C_aa, const Eigen::MatrixXd& C_bb,
                     const Eigen::VectorXd& a, const Eigen::VectorXd& b, const SinkhornOptions& opt = {});

// Exact W2 between two discrete measures on the line.
double discrete_w2_1d(std::vector<double> x, std::vector<double> a, std::vector<double> y, std::vector<double> b);

// Quantile formula on the pair's grid (line).
Estimate wasserstein2_quantile(const MeasurePair& pair);
// Quantile formula on the line, Sinkhorn with squared geodesic cost on the sphere.
W2Result wasserstein2(const MeasurePair& pair, const SinkhornOptions& opt = {});

// Quasi-uniform points on S^n (Fibonacci lattice for n = 2), rows are unit vectors.
Eigen::MatrixXd sphere_points(int n, int count, std::uint64_t seed = 7);

// ----------------------------------------------------------- Stein kernels
enum class KernelConstruction { Explicit1D, ClosedFormGaussian, LeastSquaresBasis };
std::string to_string(KernelConstruction c);

struct SteinKernelField {
  KernelConstruction construction = KernelConstruction::Explicit1D;
  std::vector<double> nodes;          // pair grid coordinates
  std::vector<double> weights;        // nu-mass per node
  std::vector<double> tau;            // line: tau(x); sphere: radial component A(theta)
  std::vector<double> tau_tangential; // sphere: tangential component B(theta)
  std::vector<double> hs_deviation;   // |tau - id|_HS per node
  std::vector<double> op_norm;        // |tau|_op per node
  double residual = 0.0;
  int test_functions = 0;
  double drift_balance = 0.0;         // int V' dnu; nonzero means no square-integrable kernel
  bool finite_discrepancy = true;
  int basis_degree = 0;
};

struct KernelOptions {
  std::optional<KernelConstruction> construction;
  int test_functions = 12;   // Hermite functions on the line
  int basis_degree = 12;     // Gegenbauer span for the sphere
  int test_degree = 24;      // zonal harmonics used for the sphere residual
  double balance_tol = 1e-9;
  bool check = true;         // raise IdentityResidualHigh
};

SteinKernelField stein_kernel(const MeasurePair& pair, const KernelOptions& opt = {});
// sigma(x) = int_x^inf V' p_nu dy by adaptive quadrature (tau p_nu on the line).
double explicit_kernel_flux(const MeasurePair& pair, double x);
// (int |tau - id|_HS^p dnu)^{1/p}; +inf when the kernel has no finite moments.
double stein_discrepancy(const MeasurePair& pair, const SteinKernelField& kernel, double p);
// max over nodes of |tau|_op - 1 - |tau - id|_HS (should be <= 0).
double variance_control_defect(const SteinKernelField& kernel);

enum class TestFunction { Coordinate, Geodesic, Sine };
std::string to_string(TestFunction f);
TestFunction test_function_from_string(const std::string& s);

double moment_ratio(const MeasurePair& pair, const SteinKernelField& kernel, TestFunction f, int p);

// ---------------------------------------------------------------- report
struct FunctionalOptions {
  bool with_w2 = true;
  SinkhornOptions sinkhorn;
  KernelOptions kernel;
  std::vector<double> ps{1.0, 2.0, 4.0};
  std::vector<int> moment_ps{2, 4, 6, 8};
  TestFunction moment_f = TestFunction::Coordinate;
};

struct FunctionalReport {
  Estimate H, I, W2;
  std::string w2_method;
  std::map<double, double> S_p;
  double S_error = 0.0;  // |S_2 - S_2 at half resolution|
  std::map<int, double> moment_ratio;
  std::shared_ptr<const SteinKernelField> kernel;
  double variance_defect = 0.0;
  double S() const;  // S_2
};

FunctionalReport compute_functionals(const MeasurePair& pair, const FunctionalOptions& opt = {});

}  // namespace steinlab
