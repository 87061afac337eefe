#include "steinlab/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steinlab::num {

namespace {

// Golub-Welsch, then Newton polish on the orthonormal recurrence and
// Christoffel weights 1 / sum_k p_k(x)^2.
template <class Beta>
Rule jacobi_rule(int n, Beta beta, double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = J(k - 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0 / std::sqrt(mu0), p1 = 0.0, d0 = 0.0, d1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double b_next = beta(k + 1);
        double b_cur = k > 0 ? beta(k) : 0.0;
        double p2 = (x * p0 - b_cur * p1) / b_next;
        double d2 = (p0 + x * d0 - b_cur * d1) / b_next;
        p1 = p0;
        p0 = p2;
        d1 = d0;
        d0 = d2;
      }
      if (d0 == 0.0) break;
      double dx = p0 / d0;
      x -= dx;
      if (std::abs(dx) < 1e-16 * (1.0 + std::abs(x))) break;
    }
    double s = 0.0, p0 = 1.0 / std::sqrt(mu0), p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      s += p0 * p0;
      double b_next = beta(k + 1);
      double b_cur = k > 0 ? beta(k) : 0.0;
      double p2 = (x * p0 - b_cur * p1) / b_next;
      p1 = p0;
      p0 = p2;
    }
    r.x[i] = x;
    r.w[i] = 1.0 / s;
  }
  return r;
}

}  // namespace

Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  Rule r = jacobi_rule(
      n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
  for (int i = 0; i < n / 2; ++i) {
    double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
    double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule gauss_hermite_normal(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n < 1");
  Rule r = jacobi_rule(n, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
  for (int i = 0; i < n / 2; ++i) {
    double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
    double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  double s = 0.0;
  for (double w : r.w) s += w;
  for (double& w : r.w) w /= s;
  return r;
}

CompositeRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (!(b > a) || panels < 1) throw std::invalid_argument("composite_gauss_legendre: bad interval");
  const Rule base = gauss_legendre(order);
  CompositeRule c;
  c.a = a;
  c.b = b;
  c.panels = panels;
  c.order = order;
  c.x.reserve(static_cast<std::size_t>(panels) * order);
  c.w.reserve(c.x.capacity());
  const double hw = 0.5 * (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (2 * p + 1) * hw;
    for (int k = 0; k < order; ++k) {
      c.x.push_back(mid + hw * base.x[k]);
      c.w.push_back(hw * base.w[k]);
    }
  }
  return c;
}

std::vector<double> cumulative_integral(const CompositeRule& rule, const std::function<double(double)>& g,
                                        bool from_right) {
  const Rule base = gauss_legendre(rule.order);
  const double h = rule.panel_width();
  std::vector<double> panel_total(rule.panels, 0.0);
  for (int p = 0; p < rule.panels; ++p) {
    double s = 0.0;
    for (int k = 0; k < rule.order; ++k) {
      std::size_t i = static_cast<std::size_t>(p) * rule.order + k;
      s += rule.w[i] * g(rule.x[i]);
    }
    panel_total[p] = s;
  }
  auto partial = [&](double lo, double hi) {
    double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo), s = 0.0;
    for (int k = 0; k < rule.order; ++k) s += base.w[k] * g(mid + hw * base.x[k]);
    return hw * s;
  };
  std::vector<double> out(rule.size());
  if (!from_right) {
    double acc = 0.0;
    for (int p = 0; p < rule.panels; ++p) {
      const double lo = rule.a + p * h;
      for (int k = 0; k < rule.order; ++k) {
        std::size_t i = static_cast<std::size_t>(p) * rule.order + k;
        out[i] = acc + partial(lo, rule.x[i]);
      }
      acc += panel_total[p];
    }
  } else {
    double acc = 0.0;
    for (int p = rule.panels - 1; p >= 0; --p) {
      const double hi = rule.a + (p + 1) * h;
      for (int k = 0; k < rule.order; ++k) {
        std::size_t i = static_cast<std::size_t>(p) * rule.order + k;
        out[i] = acc + partial(rule.x[i], hi);
      }
      acc += panel_total[p];
    }
  }
  return out;
}

Quadrature integrate(const Fn& f, double a, double b, double tol, int max_depth) {
  Quadrature q;
  if (a == b) return q;
  double l1 = 0.0;
  q.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &q.error, &l1);
  q.error *= std::max(1.0, l1);
  return q;
}

Quadrature integrate_to_inf(const Fn& f, double a, double tol) {
  Quadrature q;
  boost::math::quadrature::exp_sinh<double> integrator;
  double l1 = 0.0;
  auto g = [&](double x) {
    double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  if (a == 0.0) {
    q.value = integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity(), tol, &q.error, &l1);
  } else {
    auto shifted = [&](double s) { return g(a + s); };
    q.value = integrator.integrate(shifted, 0.0, std::numeric_limits<double>::infinity(), tol, &q.error, &l1);
  }
  q.error *= std::max(1.0, l1);
  return q;
}

Quadrature integrate_singular(const Fn& f, double a, double b, double tol) {
  Quadrature q;
  if (a == b) return q;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double l1 = 0.0;
  q.value = integrator.integrate(f, a, b, tol, &q.error, &l1);
  q.error *= std::max(1.0, l1);
  return q;
}

Minimum golden_section(const Fn& f, double lo, double hi, double xtol, int max_iter) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > xtol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void gegenbauer(int L, double lambda, double z, std::span<double> out) {
  out[0] = 1.0;
  if (L == 0) return;
  out[1] = 2.0 * lambda * z;
  for (int l = 1; l < L; ++l) {
    out[l + 1] = (2.0 * (l + lambda) * z * out[l] - (l + 2.0 * lambda - 1.0) * out[l - 1]) / (l + 1.0);
  }
}

void gegenbauer_derivs(int L, double lambda, double z, std::span<double> d1, std::span<double> d2) {
  std::vector<double> c1(L + 1), c2(L + 1);
  gegenbauer(L, lambda + 1.0, z, c1);
  gegenbauer(L, lambda + 2.0, z, c2);
  for (int l = 0; l <= L; ++l) {
    d1[l] = l >= 1 ? 2.0 * lambda * c1[l - 1] : 0.0;
    d2[l] = l >= 2 ? 4.0 * lambda * (lambda + 1.0) * c2[l - 2] : 0.0;
  }
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

double alpha_over_expm1(double alpha, double t) {
  const double x = alpha * t;
  if (std::abs(x) < 1e-8) return (1.0 - 0.5 * x) / t;
  return alpha / std::expm1(x);
}

}  // namespace steinlab::num
