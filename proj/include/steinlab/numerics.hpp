#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace steinlab::num {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes/weights on [-1, 1] for weight 1.
Rule gauss_legendre(int n);
// Nodes/weights for the standard normal density as weight; weights sum to 1.
Rule gauss_hermite_normal(int n);

// Composite Gauss-Legendre on [a, b] with equal panels.
struct CompositeRule {
  double a = 0.0;
  double b = 0.0;
  int panels = 0;
  int order = 0;
  std::vector<double> x;
  std::vector<double> w;

  double panel_width() const { return (b - a) / panels; }
  std::size_t size() const { return x.size(); }
};
CompositeRule composite_gauss_legendre(double a, double b, int panels, int order);

// Cumulative integrals F(x_i) = int_a^{x_i} g using exact per-panel sub-rules.
// `from_right` gives int_{x_i}^b g instead.
std::vector<double> cumulative_integral(const CompositeRule& rule,
                                        const std::function<double(double)>& g,
                                        bool from_right = false);

using Fn = std::function<double(double)>;

struct Quadrature {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (31-point) on a finite interval.
Quadrature integrate(const Fn& f, double a, double b, double tol = 1e-12, int max_depth = 20);
// [a, infinity) via exp-sinh.
Quadrature integrate_to_inf(const Fn& f, double a, double tol = 1e-12);
// Finite interval with endpoint singularities allowed.
Quadrature integrate_singular(const Fn& f, double a, double b, double tol = 1e-12);

struct Minimum {
  double x = 0.0;
  double f = 0.0;
};
Minimum golden_section(const Fn& f, double lo, double hi, double xtol = 1e-10, int max_iter = 200);

double log_sum_exp(std::span<const double> v);

// C_0..C_L of the Gegenbauer family with parameter lambda > 0 at z.
void gegenbauer(int L, double lambda, double z, std::span<double> out);
// First and second z-derivatives of C_l^lambda for l = 0..L.
void gegenbauer_derivs(int L, double lambda, double z, std::span<double> d1, std::span<double> d2);

// Pairwise summation: fixed association order independent of threading.
double pairwise_sum(std::span<const double> v);

// alpha / expm1(alpha t), continuous at alpha = 0 (value 1/t).
double alpha_over_expm1(double alpha, double t);

}  // namespace steinlab::num
