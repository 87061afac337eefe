#include "steinlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "steinlab/error.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

std::string to_string(Backend b) {
  switch (b) {
    case Backend::MehlerOU: return "mehler_ou";
    case Backend::Line1DPDE: return "line_pde";
    case Backend::SphereZonal: return "sphere_zonal";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s) {
  for (Backend b : {Backend::MehlerOU, Backend::Line1DPDE, Backend::SphereZonal})
    if (to_string(b) == s) return b;
  fail(ErrorCode::ConfigError, "unknown semigroup backend '" + s + "'");
}

Backend default_backend(const ModelSpace& space) {
  if (space.kind == SpaceKind::Sphere) return Backend::SphereZonal;
  return space.potential.kind == PotentialKind::Quadratic ? Backend::MehlerOU : Backend::Line1DPDE;
}

namespace detail {

class BackendImpl {
 public:
  virtual ~BackendImpl() = default;
  virtual FlowSnapshot snapshot(double t) const = 0;
  virtual double fisher(double t) const { return snapshot(t).I_t; }
  virtual std::vector<double> apply(const std::function<double(double)>& f, double t,
                                    std::span<const double> at) const = 0;
  virtual std::vector<FlowSnapshot> trajectory(std::span<const double> times) const {
    std::vector<FlowSnapshot> out;
    for (double t : times) out.push_back(snapshot(t));
    return out;
  }
  // Backends that integrate the Fisher information while marching override this.
  virtual std::optional<DeBruijn> native_de_bruijn(double /*T*/) const { return std::nullopt; }
};

}  // namespace detail

namespace {

using detail::BackendImpl;

double fisher_sum(std::span<const double> w, std::span<const double> h, std::span<const double> dh) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (h[i] > 0.0) s += w[i] * dh[i] * dh[i] / h[i];
  return s;
}

// ---------------------------------------------------------------- Mehler / OU
class MehlerImpl final : public BackendImpl {
 public:
  MehlerImpl(const MeasurePair& pair, const EngineOptions& opt)
      : pair_(pair), K_(pair.space().potential.K), gh_(num::gauss_hermite_normal(opt.hermite_order)),
        gh_coarse_(num::gauss_hermite_normal(std::max(8, 3 * opt.hermite_order / 4))) {
    const DensitySpec& d = pair.density();
    switch (d.family) {
      case Family::Identity: gaussian_ = true; m_ = 0.0; v_ = 1.0 / K_; break;
      case Family::GaussianScale: gaussian_ = true; m_ = 0.0; v_ = d.sigma2; break;
      case Family::GaussianShift: gaussian_ = true; m_ = d.shift; v_ = 1.0 / K_; break;
      default: gaussian_ = false;
    }
  }

  FlowSnapshot snapshot(double t) const override {
    FlowSnapshot s;
    s.t = t;
    s.nodes.assign(pair_.nodes().begin(), pair_.nodes().end());
    s.weights.assign(pair_.mu_weights().begin(), pair_.mu_weights().end());
    const std::size_t N = s.nodes.size();
    s.h_t.resize(N);
    if (gaussian_) {
      const auto [mt, vt] = moments(t);
      for (std::size_t i = 0; i < N; ++i) s.h_t[i] = std::exp(log_ht(s.nodes[i], mt, vt));
      s.I_t = fisher_closed(mt, vt);
      s.I_error = 0.0;
    } else {
      std::vector<double> dh(N);
      quadrature_values(gh_, t, s.nodes, s.h_t, dh);
      s.I_t = fisher_sum(s.weights, s.h_t, dh);
      std::vector<double> hc(N), dhc(N);
      quadrature_values(gh_coarse_, t, s.nodes, hc, dhc);
      s.I_error = std::abs(s.I_t - fisher_sum(s.weights, hc, dhc));
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < N; ++i) mass += s.weights[i] * s.h_t[i];
    s.mass = mass;
    return s;
  }

  double fisher(double t) const override {
    if (gaussian_) {
      const auto [mt, vt] = moments(t);
      return fisher_closed(mt, vt);
    }
    const std::size_t N = pair_.nodes().size();
    std::vector<double> h(N), dh(N);
    quadrature_values(gh_, t, pair_.nodes(), h, dh);
    return fisher_sum(pair_.mu_weights(), h, dh);
  }

  std::vector<double> apply(const std::function<double(double)>& f, double t,
                            std::span<const double> at) const override {
    const double a = std::exp(-0.5 * K_ * t);
    const double s = std::sqrt(-std::expm1(-K_ * t) / K_);
    std::vector<double> out(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) {
      if (t == 0.0) {
        out[i] = f(at[i]);
        continue;
      }
      double acc = 0.0;
      for (std::size_t k = 0; k < gh_.x.size(); ++k) acc += gh_.w[k] * f(a * at[i] + s * gh_.x[k]);
      out[i] = acc;
    }
    return out;
  }

 private:
  std::pair<double, double> moments(double t) const {
    const double e = std::exp(-K_ * t);
    return {m_ * std::exp(-0.5 * K_ * t), v_ * e - std::expm1(-K_ * t) / K_};
  }
  double log_ht(double x, double mt, double vt) const {
    return -0.5 * (x - mt) * (x - mt) / vt - 0.5 * std::log(vt) + 0.5 * K_ * x * x + 0.5 * std::log(1.0 / K_);
  }
  double fisher_closed(double mt, double vt) const {
    const double c = K_ - 1.0 / vt;
    return c * c * vt + K_ * K_ * mt * mt;
  }
  void quadrature_values(const num::Rule& rule, double t, std::span<const double> xs, std::vector<double>& h,
                         std::vector<double>& dh) const {
    const double a = std::exp(-0.5 * K_ * t);
    const double s = std::sqrt(-std::expm1(-K_ * t) / K_);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (t == 0.0) {
        h[i] = pair_.h_at(xs[i]);
        dh[i] = h[i] * pair_.dlog_h_at(xs[i]);
        continue;
      }
      double v = 0.0, d = 0.0;
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const double y = a * xs[i] + s * rule.x[k];
        const double hy = pair_.h_at(y);
        v += rule.w[k] * hy;
        d += rule.w[k] * hy * pair_.dlog_h_at(y);
      }
      h[i] = v;
      dh[i] = a * d;
    }
  }

  MeasurePair pair_;
  double K_;
  num::Rule gh_, gh_coarse_;
  bool gaussian_ = false;
  double m_ = 0.0, v_ = 1.0;
};

// ------------------------------------------------------- 1-D Crank-Nicolson
// Flux form: p u_t = (1/2) (p u_x)_x with face weights sqrt(p_j p_{j+1}); the
// scheme is self-adjoint in sum_j p_j u_j v_j dx and conserves mass exactly.
class PdeGrid {
 public:
  PdeGrid(const MeasurePair& pair, double dx_target, double dt_max) {
    const double a = pair.grid().a, b = pair.grid().b;
    N_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil((b - a) / dx_target)));
    dx_ = (b - a) / N_;
    dt_ = std::min(dt_max, dx_ * dx_);
    x_.resize(N_);
    std::vector<double> ell(N_);
    for (std::size_t j = 0; j < N_; ++j) {
      x_[j] = a + (j + 0.5) * dx_;
      ell[j] = pair.log_p_mu(x_[j]);
    }
    const double lz = num::log_sum_exp(ell) + std::log(dx_);
    w_.resize(N_);
    for (std::size_t j = 0; j < N_; ++j) w_[j] = std::exp(ell[j] - lz) * dx_;
    cp_.assign(N_, 0.0);
    cm_.assign(N_, 0.0);
    gface_.assign(N_ > 0 ? N_ - 1 : 0, 0.0);
    for (std::size_t j = 0; j + 1 < N_; ++j) {
      cp_[j] = std::exp(0.5 * (ell[j + 1] - ell[j])) / (2.0 * dx_ * dx_);
      cm_[j + 1] = std::exp(0.5 * (ell[j] - ell[j + 1])) / (2.0 * dx_ * dx_);
      gface_[j] = std::exp(0.5 * (ell[j] + ell[j + 1]) - lz);
    }
    factor(dt_);
  }

  std::size_t size() const { return N_; }
  double dt() const { return dt_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& weights() const { return w_; }

  std::vector<double> initial(const MeasurePair& pair) const {
    std::vector<double> u(N_);
    double m = 0.0;
    for (std::size_t j = 0; j < N_; ++j) {
      u[j] = pair.h_at(x_[j]);
      m += w_[j] * u[j];
    }
    for (double& v : u) v /= m;
    return u;
  }

  double fisher(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < N_; ++j) {
      const double du = u[j + 1] - u[j];
      if (du == 0.0) continue;
      s += gface_[j] * du * (std::log(u[j + 1]) - std::log(u[j])) / dx_;
    }
    return s;
  }

  // Marching with fixed dt, shortened final step; on positivity loss the step is halved.
  template <class OnStep>
  void march(std::vector<double>& u, double t0, double t1, OnStep&& on_step) const {
    double t = t0;
    double dt = dt_;
    std::vector<double> save;
    while (t < t1 - 1e-15 * std::max(1.0, t1)) {
      const double h = std::min(dt, t1 - t);
      save = u;
      if (!step(u, h)) {
        u = save;
        dt *= 0.5;
        if (dt < 1e-14) fail(ErrorCode::StepRejected, "Crank-Nicolson step lost positivity below dt = 1e-14");
        continue;
      }
      t += h;
      on_step(t, h, u);
    }
  }

  std::vector<double> interpolate(const std::vector<double>& u, std::span<const double> at) const {
    std::vector<double> out(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) {
      const double s = (at[i] - x_.front()) / dx_;
      if (s <= 0.0) { out[i] = u.front(); continue; }
      if (s >= N_ - 1.0) { out[i] = u.back(); continue; }
      const std::size_t j = static_cast<std::size_t>(s);
      const double f = s - j;
      out[i] = (1.0 - f) * u[j] + f * u[j + 1];
    }
    return out;
  }

 private:
  void factor(double dt) {
    fdt_ = dt;
    cprime_.resize(N_);
    denom_.resize(N_);
    for (std::size_t j = 0; j < N_; ++j) {
      const double lower = -0.5 * dt * cm_[j];
      const double diag = 1.0 + 0.5 * dt * (cp_[j] + cm_[j]);
      const double upper = -0.5 * dt * cp_[j];
      const double d = j == 0 ? diag : diag - lower * cprime_[j - 1];
      denom_[j] = d;
      cprime_[j] = upper / d;
    }
  }

  bool step(std::vector<double>& u, double dt) const {
    std::vector<double> rhs(N_);
    for (std::size_t j = 0; j < N_; ++j) {
      double au = 0.0;
      if (j + 1 < N_) au += cp_[j] * (u[j + 1] - u[j]);
      if (j > 0) au -= cm_[j] * (u[j] - u[j - 1]);
      rhs[j] = u[j] + 0.5 * dt * au;
    }
    if (dt == fdt_) {
      solve_factored(rhs, u);
    } else {
      PdeGrid tmp = *this;
      tmp.factor(dt);
      tmp.solve_factored(rhs, u);
    }
    for (double v : u)
      if (!(v > 0.0)) return false;
    return true;
  }

  void solve_factored(const std::vector<double>& rhs, std::vector<double>& u) const {
    std::vector<double> d(N_);
    for (std::size_t j = 0; j < N_; ++j) {
      const double lower = -0.5 * fdt_ * cm_[j];
      d[j] = (rhs[j] - (j == 0 ? 0.0 : lower * d[j - 1])) / denom_[j];
    }
    u[N_ - 1] = d[N_ - 1];
    for (std::size_t j = N_ - 1; j-- > 0;) u[j] = d[j] - cprime_[j] * u[j + 1];
  }

  std::size_t N_ = 0;
  double dx_ = 0.0, dt_ = 0.0, fdt_ = 0.0;
  std::vector<double> x_, w_, cp_, cm_, gface_, cprime_, denom_;
};

class PdeImpl final : public BackendImpl {
 public:
  PdeImpl(const MeasurePair& pair, const EngineOptions& opt)
      : pair_(pair),
        fine_(pair, opt.dx > 0 ? opt.dx : std::max(0.01, (pair.grid().b - pair.grid().a) / 2000.0), opt.dt_max),
        coarse_(pair, 2.0 * (pair.grid().b - pair.grid().a) / fine_.size(), 4.0 * fine_.dt()) {}

  FlowSnapshot snapshot(double t) const override { return trajectory(std::span<const double>(&t, 1)).front(); }

  std::vector<FlowSnapshot> trajectory(std::span<const double> times) const override {
    std::vector<FlowSnapshot> out;
    std::vector<double> uf = fine_.initial(pair_), uc = coarse_.initial(pair_);
    double t = 0.0;
    auto noop = [](double, double, const std::vector<double>&) {};
    for (double target : times) {
      if (target < t) fail(ErrorCode::ConfigError, "trajectory times must be nondecreasing");
      fine_.march(uf, t, target, noop);
      coarse_.march(uc, t, target, noop);
      t = target;
      FlowSnapshot s;
      s.t = target;
      s.nodes = fine_.x();
      s.weights = fine_.weights();
      s.h_t = uf;
      // Second order in dx and dt; the coarse grid doubles dx and quadruples dt.
      const double If = fine_.fisher(uf), Ic = coarse_.fisher(uc);
      s.I_t = If + (If - Ic) / 3.0;
      s.I_error = std::abs(If - Ic) / 3.0;
      double m = 0.0;
      for (std::size_t j = 0; j < uf.size(); ++j) m += s.weights[j] * uf[j];
      s.mass = m;
      out.push_back(std::move(s));
    }
    return out;
  }

  std::vector<double> apply(const std::function<double(double)>& f, double t,
                            std::span<const double> at) const override {
    std::vector<double> u(fine_.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = f(fine_.x()[j]);
    bool positive = std::all_of(u.begin(), u.end(), [](double v) { return v > 0.0; });
    if (!positive) {
      // Linear scheme: shift into the positive cone, evolve, shift back (P_t 1 = 1).
      const double lo = *std::min_element(u.begin(), u.end());
      const double c = 1.0 - lo;
      for (double& v : u) v += c;
      fine_.march(u, 0.0, t, [](double, double, const std::vector<double>&) {});
      for (double& v : u) v -= c;
    } else {
      fine_.march(u, 0.0, t, [](double, double, const std::vector<double>&) {});
    }
    return fine_.interpolate(u, at);
  }

  std::optional<DeBruijn> native_de_bruijn(double T) const override {
    auto run = [&](const PdeGrid& g) {
      std::vector<double> u = g.initial(pair_);
      double prev = g.fisher(u), acc = 0.0;
      g.march(u, 0.0, T, [&](double, double h, const std::vector<double>& v) {
        const double cur = g.fisher(v);
        acc += 0.5 * h * (prev + cur);
        prev = cur;
      });
      return 0.5 * acc;
    };
    const double f = run(fine_), c = run(coarse_);
    return DeBruijn{f + (f - c) / 3.0, std::abs(f - c) / 3.0, T};
  }

 private:
  MeasurePair pair_;
  PdeGrid fine_, coarse_;
};

// ------------------------------------------------------------ sphere zonal
class SphereImpl final : public BackendImpl {
 public:
  SphereImpl(const MeasurePair& pair, const EngineOptions& opt, double tol) : pair_(pair) {
    n_ = pair.space().dimension;
    lambda_ = 0.5 * (n_ - 1.0);
    const auto nodes = pair.nodes();
    std::vector<double> h(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) h[i] = std::exp(pair.log_h()[i]);
    int L = opt.degree;
    for (;;) {
      build_tables(L);
      coef_ = project(h);
      double top = 0.0;
      for (int l = std::max(0, L - 7); l <= L; ++l) top = std::max(top, std::abs(coef_[l]));
      tail_ = top / std::max(std::abs(coef_[0]), 1e-300);
      if (tail_ <= opt.spectral_tail || L >= opt.max_degree) break;
      L = std::min(opt.max_degree, 2 * L);
    }
    if (tail_ > std::max(opt.spectral_tail, tol))
      fail(ErrorCode::TruncationError, "spectral tail " + std::to_string(tail_) + " above tolerance");
  }

  FlowSnapshot snapshot(double t) const override {
    FlowSnapshot s;
    s.t = t;
    s.nodes.assign(pair_.nodes().begin(), pair_.nodes().end());
    s.weights.assign(pair_.mu_weights().begin(), pair_.mu_weights().end());
    std::vector<double> dh;
    values(coef_, t, s.h_t, dh, L_);
    s.I_t = fisher_sum(s.weights, s.h_t, dh);
    std::vector<double> hc, dhc;
    values(coef_, t, hc, dhc, std::max(1, L_ - 8));
    s.I_error = std::abs(s.I_t - fisher_sum(s.weights, hc, dhc)) + tail_;
    double m = 0.0;
    for (std::size_t i = 0; i < s.h_t.size(); ++i) m += s.weights[i] * s.h_t[i];
    s.mass = m;
    return s;
  }

  double fisher(double t) const override {
    std::vector<double> h, dh;
    values(coef_, t, h, dh, L_);
    return fisher_sum(pair_.mu_weights(), h, dh);
  }

  std::vector<double> apply(const std::function<double(double)>& f, double t,
                            std::span<const double> at) const override {
    const auto nodes = pair_.nodes();
    std::vector<double> fv(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) fv[i] = f(nodes[i]);
    const std::vector<double> c = project(fv);
    std::vector<double> out(at.size());
    std::vector<double> C(L_ + 1);
    for (std::size_t i = 0; i < at.size(); ++i) {
      num::gegenbauer(L_, lambda_, std::cos(at[i]), C);
      double v = 0.0;
      for (int l = 0; l <= L_; ++l) v += c[l] * decay(l, t) * C[l] / norm_[l];
      out[i] = v;
    }
    return out;
  }

  int degree() const { return L_; }

 private:
  double decay(int l, double t) const { return std::exp(-0.5 * t * l * (l + n_ - 1.0)); }

  void build_tables(int L) {
    L_ = L;
    const auto nodes = pair_.nodes();
    const std::size_t N = nodes.size();
    C_.assign(static_cast<std::size_t>(L + 1) * N, 0.0);
    D_.assign(C_.size(), 0.0);
    std::vector<double> c(L + 1), d1(L + 1), d2(L + 1);
    for (std::size_t i = 0; i < N; ++i) {
      const double z = std::cos(nodes[i]);
      num::gegenbauer(L, lambda_, z, c);
      num::gegenbauer_derivs(L, lambda_, z, d1, d2);
      for (int l = 0; l <= L; ++l) {
        C_[l * N + i] = c[l];
        D_[l * N + i] = d1[l];
      }
    }
    norm_.assign(L + 1, 0.0);
    for (int l = 0; l <= L; ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += pair_.mu_weights()[i] * C_[l * N + i] * C_[l * N + i];
      norm_[l] = std::sqrt(s);
      for (std::size_t i = 0; i < N; ++i) {
        C_[l * N + i] /= norm_[l];
        D_[l * N + i] /= norm_[l];
      }
    }
  }

  std::vector<double> project(const std::vector<double>& f) const {
    const std::size_t N = f.size();
    std::vector<double> c(L_ + 1, 0.0);
    for (int l = 0; l <= L_; ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += pair_.mu_weights()[i] * f[i] * C_[l * N + i];
      c[l] = s;
    }
    return c;
  }

  void values(const std::vector<double>& c, double t, std::vector<double>& h, std::vector<double>& dh,
              int L) const {
    const auto nodes = pair_.nodes();
    const std::size_t N = nodes.size();
    h.assign(N, 0.0);
    dh.assign(N, 0.0);
    for (int l = 0; l <= L; ++l) {
      const double a = c[l] * decay(l, t);
      if (a == 0.0) continue;
      for (std::size_t i = 0; i < N; ++i) {
        h[i] += a * C_[l * N + i];
        dh[i] += a * D_[l * N + i];
      }
    }
    for (std::size_t i = 0; i < N; ++i) dh[i] *= -std::sin(nodes[i]);
  }

  MeasurePair pair_;
  int n_ = 2;
  double lambda_ = 0.5;
  int L_ = 0;
  double tail_ = 0.0;
  std::vector<double> C_, D_, norm_, coef_;
};

bool same_space(const ModelSpace& a, const ModelSpace& b) {
  return a.kind == b.kind && a.dimension == b.dimension && a.potential.kind == b.potential.kind &&
         a.potential.K == b.potential.K && a.potential.a == b.potential.a;
}

}  // namespace

SemigroupEngine::SemigroupEngine(Backend backend, ModelSpace space, std::vector<double> t_grid, double tol,
                                 EngineOptions options)
    : backend_(backend), space_(std::move(space)), t_grid_(std::move(t_grid)), tol_(tol), options_(options) {
  space_.validate();
  if (!std::is_sorted(t_grid_.begin(), t_grid_.end()) ||
      std::any_of(t_grid_.begin(), t_grid_.end(), [](double t) { return !(t >= 0.0); }))
    fail(ErrorCode::ConfigError, "t_grid must be increasing and nonnegative");
  if (!(tol_ > 0.0)) fail(ErrorCode::ConfigError, "engine tolerance must be positive");
  switch (backend_) {
    case Backend::MehlerOU:
      if (!space_.flat() || space_.dimension != 1 || space_.potential.kind != PotentialKind::Quadratic)
        fail(ErrorCode::UnsupportedSpace, "Mehler backend needs V = K x^2 / 2 on a line");
      break;
    case Backend::Line1DPDE:
      if (!space_.flat() || space_.dimension != 1)
        fail(ErrorCode::UnsupportedSpace, "PDE backend is one-dimensional");
      break;
    case Backend::SphereZonal:
      if (space_.kind != SpaceKind::Sphere) fail(ErrorCode::UnsupportedSpace, "zonal backend needs a sphere");
      break;
  }
}

std::shared_ptr<const detail::BackendImpl> SemigroupEngine::impl(const MeasurePair& pair) const {
  if (!same_space(pair.space(), space_)) fail(ErrorCode::ConfigError, "pair lives on a different space");
  switch (backend_) {
    case Backend::MehlerOU: return std::make_shared<MehlerImpl>(pair, options_);
    case Backend::Line1DPDE: return std::make_shared<PdeImpl>(pair, options_);
    case Backend::SphereZonal: return std::make_shared<SphereImpl>(pair, options_, tol_);
  }
  fail(ErrorCode::ConfigError, "unknown backend");
}

FlowSnapshot SemigroupEngine::evolve(const MeasurePair& pair, double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::ConfigError, "evolve needs t >= 0");
  return impl(pair)->snapshot(t);
}

std::vector<double> SemigroupEngine::apply(const std::function<double(double)>& f, double t,
                                           std::span<const double> at, const MeasurePair& pair) const {
  if (!(t >= 0.0)) fail(ErrorCode::ConfigError, "apply needs t >= 0");
  if (t == 0.0) {
    std::vector<double> out;
    for (double x : at) out.push_back(f(x));
    return out;
  }
  return impl(pair)->apply(f, t, at);
}

std::function<double(double)> SemigroupEngine::fisher_curve(const MeasurePair& pair) const {
  auto p = impl(pair);
  return [p](double t) { return p->fisher(t); };
}

DeBruijn de_bruijn_entropy(const SemigroupEngine& engine, const MeasurePair& pair) {
  const double K = curvature_constants(engine.space()).K;
  if (!(K > 0.0)) fail(ErrorCode::HypothesisViolated, "de Bruijn tail control needs K > 0");
  auto impl = engine.impl(pair);
  const double I0 = impl->fisher(0.0);
  if (I0 == 0.0) return {};
  const double tol = engine.tol();
  double T = std::max(1.0 / K, std::log(I0 / (K * tol)) / K);
  if (T > engine.options().t_max)
    fail(ErrorCode::TailTooFat, "required horizon " + std::to_string(T) + " exceeds t_max");
  const double tail = std::exp(-K * T) * I0 / (2.0 * K);
  if (auto native = impl->native_de_bruijn(T)) {
    native->error += tail;
    return *native;
  }
  const int levels = 12;
  double lo = 0.0, value = 0.0, err = 0.0;
  for (int k = levels; k >= 0; --k) {
    const double hi = T * std::ldexp(1.0, -k);
    const num::Quadrature q = num::integrate([&](double t) { return impl->fisher(t); }, lo, hi, 1e-11, 8);
    value += q.value;
    err += q.error;
    lo = hi;
  }
  return {0.5 * value, 0.5 * err + tail, T};
}

std::vector<InequalityVerdict> fisher_decay_check(const SemigroupEngine& engine, const MeasurePair& pair,
                                                  double K) {
  if (!(K > 0.0)) fail(ErrorCode::HypothesisViolated, "Fisher decay needs K > 0");
  std::vector<double> times{0.0};
  times.insert(times.end(), engine.t_grid().begin(), engine.t_grid().end());
  const auto snaps = engine.impl(pair)->trajectory(times);
  const double I0 = snaps.front().I_t;
  std::vector<InequalityVerdict> out;
  for (std::size_t k = 1; k < snaps.size(); ++k) {
    const double t = snaps[k].t;
    const double rhs = std::exp(-K * t) * I0;
    const double err = snaps[k].I_error + std::exp(-K * t) * snaps.front().I_error + 1e-12 * std::max(1.0, I0);
    char label[64];
    std::snprintf(label, sizeof label, "t=%.6g", t);
    out.push_back(verdict("fisher_decay", snaps[k].I_t, rhs, err, label, {{"t", t}, {"K", K}, {"I0", I0}}));
  }
  return out;
}

}  // namespace steinlab
