#include "steinlab/mc_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "steinlab/error.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

namespace {

constexpr double kZ95 = 1.959963984540054;
// Below this absolute width a confidence interval is roundoff, not variance.
constexpr double kBlowupFloor = 1e-10;

bool on_sphere(const ModelSpace& s) { return s.kind == SpaceKind::Sphere; }
int ambient_dim(const ModelSpace& s) { return on_sphere(s) ? s.dimension + 1 : s.dimension; }

// Ric_V as a scalar multiple of the identity; every supported space has this form.
double ricci_scalar(const ModelSpace& s, const double* x) {
  if (on_sphere(s)) return s.dimension - 1.0;
  const PotentialSpec& V = s.potential;
  switch (V.kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Quadratic: return V.K;
    case PotentialKind::Quartic: return V.d2(x[0]);
  }
  return 0.0;
}

// One Brownian path with generator L/2; state is updated in place.
class Walker {
 public:
  Walker(const ModelSpace& space, const Eigen::VectorXd& x0, const Eigen::MatrixXd& E0)
      : space_(space),
        n_(space.dimension),
        d_(ambient_dim(space)),
        sphere_(on_sphere(space)),
        x_(x0.data(), x0.data() + x0.size()),
        e_(E0.data(), E0.data() + E0.size()),
        y_(d_),
        xi_(n_),
        J_(static_cast<std::size_t>(n_) * n_ * n_, 0.0) {}

  void step(double dt, NormalStream& rng) {
    const double sq = std::sqrt(dt);
    for (int i = 0; i < n_; ++i) xi_[i] = sq * rng.next();
    // Left-point Ito sums for W use the state before the move.
    if (sphere_) {
      for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i) {
          double* Jij = &J_[static_cast<std::size_t>(n_) * (i + n_ * j)];
          if (i == j)
            for (int a = 0; a < n_; ++a) Jij[a] += c_ * xi_[a];
          Jij[i] -= c_ * xi_[j];
        }
    } else if (space_.potential.kind == PotentialKind::Quartic) {
      J_[0] -= 0.5 * c_ * space_.potential.d3(x_[0]) * dt;
    }
    c_ *= std::exp(-0.5 * ricci_scalar(space_, x_.data()) * dt);
    if (sphere_) {
      for (int a = 0; a < d_; ++a) {
        double s = x_[a];
        for (int i = 0; i < n_; ++i) s += e_[a + d_ * i] * xi_[i];
        y_[a] = s;
      }
      double nrm = 0.0;
      for (int a = 0; a < d_; ++a) nrm += y_[a] * y_[a];
      nrm = std::sqrt(nrm);
      for (int a = 0; a < d_; ++a) y_[a] /= nrm;
      double xy = 0.0;
      for (int a = 0; a < d_; ++a) xy += x_[a] * y_[a];
      // Parallel transport along the great circle from x to y.
      for (int i = 0; i < n_; ++i) {
        double* ei = &e_[d_ * i];
        double ey = 0.0;
        for (int a = 0; a < d_; ++a) ey += ei[a] * y_[a];
        const double k = ey / (1.0 + xy);
        for (int a = 0; a < d_; ++a) ei[a] -= k * (x_[a] + y_[a]);
      }
      x_.swap(y_);
      reorthonormalize();
      double r = 0.0;
      for (int a = 0; a < d_; ++a) r += x_[a] * x_[a];
      manifold_defect_ = std::max(manifold_defect_, std::abs(std::sqrt(r) - 1.0));
    } else {
      const PotentialSpec& V = space_.potential;
      for (int a = 0; a < d_; ++a) {
        double g = 0.0;
        if (V.kind == PotentialKind::Quadratic) g = V.K * x_[a];
        else if (V.kind == PotentialKind::Quartic) g = V.d1(x_[a]);
        x_[a] += -0.5 * g * dt + xi_[a];
      }
    }
    t_ += dt;
  }

  double time() const { return t_; }
  double damping() const { return c_; }
  Eigen::Map<const Eigen::VectorXd> x() const { return {x_.data(), d_}; }
  Eigen::Map<const Eigen::MatrixXd> frame() const { return {e_.data(), d_, n_}; }
  // W(e_i, e_j) in frame coordinates is c * J[:, i, j].
  const double* J(int i, int j) const { return &J_[static_cast<std::size_t>(n_) * (i + n_ * j)]; }
  double manifold_defect() const { return manifold_defect_; }
  double frame_defect() const { return frame_defect_; }

 private:
  void reorthonormalize() {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i) {
      double* ei = &e_[d_ * i];
      double ex = 0.0;
      for (int a = 0; a < d_; ++a) ex += ei[a] * x_[a];
      worst = std::max(worst, std::abs(ex));
      for (int a = 0; a < d_; ++a) ei[a] -= ex * x_[a];
      for (int k = 0; k < i; ++k) {
        const double* ek = &e_[d_ * k];
        double p = 0.0;
        for (int a = 0; a < d_; ++a) p += ei[a] * ek[a];
        worst = std::max(worst, std::abs(p));
        for (int a = 0; a < d_; ++a) ei[a] -= p * ek[a];
      }
      double nn = 0.0;
      for (int a = 0; a < d_; ++a) nn += ei[a] * ei[a];
      worst = std::max(worst, std::abs(nn - 1.0));
      nn = 1.0 / std::sqrt(nn);
      for (int a = 0; a < d_; ++a) ei[a] *= nn;
    }
    frame_defect_ = std::max(frame_defect_, worst);
  }

  const ModelSpace& space_;
  int n_, d_;
  bool sphere_;
  std::vector<double> x_, e_, y_, xi_, J_;
  double c_ = 1.0;
  double t_ = 0.0;
  double manifold_defect_ = 0.0;
  double frame_defect_ = 0.0;
};

void check_step(double step) {
  if (!(step > 0.0) || step > 1e-2) fail(ErrorCode::StepTooLarge, "path step must lie in (0, 1e-2]");
}

int step_count(double t, double step) {
  if (!(t >= 0.0)) fail(ErrorCode::ConfigError, "path horizon needs t >= 0");
  return static_cast<int>(std::ceil(t / step - 1e-9));
}

struct Field {
  FieldPreset kind;
  int last;  // index of the polar coordinate on the sphere
  int n;

  double value(const Eigen::VectorXd& x) const {
    switch (kind) {
      case FieldPreset::ZonalL1: return x[last];
      case FieldPreset::ZonalL2: return x[last] * x[last] - 1.0 / (n + 1.0);
      case FieldPreset::CoordinateX1:
      case FieldPreset::LinearX: return x[0];
      case FieldPreset::SquareX: return x[0] * x[0];
      case FieldPreset::SineX: return std::sin(x[0]);
    }
    return 0.0;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    switch (kind) {
      case FieldPreset::ZonalL1: g[last] = 1.0; break;
      case FieldPreset::ZonalL2: g[last] = 2.0 * x[last]; break;
      case FieldPreset::CoordinateX1:
      case FieldPreset::LinearX: g[0] = 1.0; break;
      case FieldPreset::SquareX: g[0] = 2.0 * x[0]; break;
      case FieldPreset::SineX: g[0] = std::cos(x[0]); break;
    }
    return g;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(x.size(), x.size());
    if (kind == FieldPreset::ZonalL2) H(last, last) = 2.0;
    if (kind == FieldPreset::SquareX) H(0, 0) = 2.0;
    if (kind == FieldPreset::SineX) H(0, 0) = -std::sin(x[0]);
    return H;
  }
};

Field make_field(const ModelSpace& space, FieldPreset f) {
  const bool sphere_preset =
      f == FieldPreset::ZonalL1 || f == FieldPreset::ZonalL2 || f == FieldPreset::CoordinateX1;
  if (sphere_preset != on_sphere(space))
    fail(ErrorCode::PresetUnsupported, "field '" + to_string(f) + "' is not defined on " + to_string(space.kind));
  return {f, ambient_dim(space) - 1, space.dimension};
}

// Intrinsic gradient and Hessian of f in the frame E at x.
void intrinsic(const ModelSpace& space, const Field& F, const Eigen::VectorXd& x, const Eigen::MatrixXd& E,
               Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  const Eigen::VectorXd G = F.grad(x);
  g = E.transpose() * G;
  H = E.transpose() * F.hess(x) * E;
  if (on_sphere(space)) H.diagonal().array() -= x.dot(G);
}

struct BatchStats {
  std::vector<Eigen::MatrixXd> hess;  // per-batch means
  std::vector<double> grad2, grad1;
  double sq_norm = 0.0;  // mean squared Frobenius norm of the integrand
  double manifold_defect = 0.0;
  double q_shortcut_defect = 0.0;
};

BatchStats run_batches(const ModelSpace& space, const Field& F, const Eigen::VectorXd& x0, double t,
                       const McConfig& cfg) {
  check_step(cfg.step);
  if (cfg.batches < 2) fail(ErrorCode::ConfigError, "need at least 2 batches");
  if (cfg.paths < cfg.batches) fail(ErrorCode::ConfigError, "need at least one path per batch");
  const int steps = step_count(t, cfg.step);
  const double dt = steps > 0 ? t / steps : 0.0;
  const int n = space.dimension;
  const Eigen::MatrixXd E0 = tangent_basis(space, x0);
  const double K_const = on_sphere(space) ? n - 1.0
                         : space.potential.kind == PotentialKind::Quadratic ? space.potential.K
                                                                           : std::nan("");
  const int B = cfg.batches;
  BatchStats out;
  out.hess.assign(B, Eigen::MatrixXd::Zero(n, n));
  out.grad2.assign(B, 0.0);
  out.grad1.assign(B, 0.0);
  std::vector<double> sq(B, 0.0), mdef(B, 0.0), qdef(B, 0.0);

  std::atomic<int> next{0};
  auto worker = [&]() {
    Eigen::VectorXd g;
    Eigen::MatrixXd H, M(n, n);
    for (int b = next++; b < B; b = next++) {
      const std::int64_t lo = cfg.paths * b / B, hi = cfg.paths * (b + 1) / B;
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
      double a2 = 0.0, a1 = 0.0, asq = 0.0;
      for (std::int64_t p = lo; p < hi; ++p) {
        Walker w(space, x0, E0);
        NormalStream rng(cfg.seed, static_cast<std::uint64_t>(p));
        for (int k = 0; k < steps; ++k) w.step(dt, rng);
        const Eigen::VectorXd xt = w.x();
        const Eigen::MatrixXd Et = w.frame();
        intrinsic(space, F, xt, Et, g, H);
        const double c = w.damping();
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const double* Jij = w.J(i, j);
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += g[a] * Jij[a];
            M(i, j) = c * c * H(i, j) + c * s;
          }
        acc += M;
        asq += M.squaredNorm();
        const double gg = g.squaredNorm();
        a2 += gg;
        a1 += std::sqrt(gg);
        mdef[b] = std::max(mdef[b], w.manifold_defect());
        if (std::isfinite(K_const)) qdef[b] = std::max(qdef[b], std::abs(c - std::exp(-0.5 * K_const * w.time())));
      }
      const double m = static_cast<double>(hi - lo);
      out.hess[b] = acc / m;
      out.grad2[b] = a2 / m;
      out.grad1[b] = a1 / m;
      sq[b] = asq / m;
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, B);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  double s = 0.0;
  for (int b = 0; b < B; ++b) {
    s += sq[b];
    out.manifold_defect = std::max(out.manifold_defect, mdef[b]);
    out.q_shortcut_defect = std::max(out.q_shortcut_defect, qdef[b]);
  }
  out.sq_norm = s / B;
  if (out.manifold_defect > 1e-8) fail(ErrorCode::StepTooLarge, "path left the sphere beyond 1e-8");
  return out;
}

// Mean and 95% batch-means half-width, reduced in batch order.
std::pair<double, double> mean_ci(const std::vector<double>& v) {
  const double B = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= B;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  const double ci = kZ95 * std::sqrt(s / (B - 1.0) / B);
  return {m, std::max(ci, 1e-15 * std::max(1.0, std::abs(m)))};
}

}  // namespace

std::vector<PathBundle> simulate_paths(const ModelSpace& space, const Eigen::VectorXd& x0, double t, double step,
                                       std::int64_t count, std::uint64_t seed) {
  space.validate();
  check_step(step);
  if (count < 1) fail(ErrorCode::ConfigError, "need at least one path");
  if (x0.size() != ambient_dim(space)) fail(ErrorCode::ConfigError, "start point has the wrong dimension");
  const int steps = step_count(t, step);
  const double dt = steps > 0 ? t / steps : 0.0;
  const Eigen::MatrixXd E0 = tangent_basis(space, x0);
  const int n = space.dimension;
  const double K_const = on_sphere(space) ? n - 1.0
                         : space.potential.kind == PotentialKind::Quadratic ? space.potential.K
                                                                           : std::nan("");
  std::vector<PathBundle> out(count);
  for (std::int64_t p = 0; p < count; ++p) {
    PathBundle& pb = out[p];
    pb.seed = seed;
    pb.index = p;
    pb.step = dt;
    Walker w(space, x0, E0);
    NormalStream rng(seed, static_cast<std::uint64_t>(p));
    auto record = [&]() {
      pb.times.push_back(w.time());
      pb.positions.emplace_back(w.x());
      pb.frame.emplace_back(w.frame());
      pb.Q.push_back(w.damping() * Eigen::MatrixXd::Identity(n, n));
      if (std::isfinite(K_const))
        pb.q_shortcut_defect =
            std::max(pb.q_shortcut_defect, std::abs(w.damping() - std::exp(-0.5 * K_const * w.time())));
    };
    record();
    for (int k = 0; k < steps; ++k) {
      w.step(dt, rng);
      record();
    }
    pb.manifold_defect = w.manifold_defect();
    pb.frame_defect = w.frame_defect();
    if (pb.manifold_defect > 1e-8) fail(ErrorCode::StepTooLarge, "path left the sphere beyond 1e-8");
  }
  return out;
}

std::string to_string(FieldPreset f) {
  switch (f) {
    case FieldPreset::ZonalL1: return "zonal_l1";
    case FieldPreset::ZonalL2: return "zonal_l2";
    case FieldPreset::CoordinateX1: return "coordinate_x1";
    case FieldPreset::LinearX: return "x";
    case FieldPreset::SquareX: return "x2";
    case FieldPreset::SineX: return "sin";
  }
  return "?";
}

FieldPreset field_preset_from_string(const std::string& s) {
  for (auto f : {FieldPreset::ZonalL1, FieldPreset::ZonalL2, FieldPreset::CoordinateX1, FieldPreset::LinearX,
                 FieldPreset::SquareX, FieldPreset::SineX})
    if (to_string(f) == s) return f;
  fail(ErrorCode::PresetUnsupported, "unknown field preset '" + s + "'");
}

std::string to_string(Estimator e) {
  return e == Estimator::Representation ? "representation" : "finite_difference_spectral";
}

Eigen::VectorXd default_point(const ModelSpace& space, FieldPreset f) {
  const int d = ambient_dim(space);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (on_sphere(space)) {
    if (f == FieldPreset::CoordinateX1) {
      x[0] = std::sin(0.7);
      x[d - 1] = std::cos(0.7);
    } else {
      x[d - 1] = 1.0;
    }
  } else {
    x[0] = 0.5;
  }
  return x;
}

Eigen::MatrixXd tangent_basis(const ModelSpace& space, const Eigen::VectorXd& x) {
  const int d = ambient_dim(space), n = space.dimension;
  if (!on_sphere(space)) return Eigen::MatrixXd::Identity(n, n);
  if (std::abs(x.norm() - 1.0) > 1e-12) fail(ErrorCode::ConfigError, "sphere point must be a unit vector");
  // Drop the standard axis most aligned with x, Gram-Schmidt the rest.
  int drop = 0;
  x.cwiseAbs().maxCoeff(&drop);
  Eigen::MatrixXd E(d, n);
  int col = 0;
  for (int a = 0; a < d; ++a) {
    if (a == drop) continue;
    Eigen::VectorXd e = Eigen::VectorXd::Unit(d, a);
    e -= e.dot(x) * x;
    for (int k = 0; k < col; ++k) e -= e.dot(E.col(k)) * E.col(k);
    E.col(col++) = e.normalized();
  }
  return E;
}

HessianMatrixEstimate hessian_matrix_estimate(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x,
                                              double t, const McConfig& cfg) {
  space.validate();
  const Field F = make_field(space, f);
  if (x.size() != ambient_dim(space)) fail(ErrorCode::ConfigError, "point has the wrong dimension");
  const BatchStats bs = run_batches(space, F, x, t, cfg);
  const int n = space.dimension, B = cfg.batches;
  HessianMatrixEstimate est;
  est.point = x;
  est.basis = tangent_basis(space, x);
  est.t = t;
  est.value.resize(n, n);
  est.ci.resize(n, n);
  std::vector<double> col(B);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int b = 0; b < B; ++b) col[b] = bs.hess[b](i, j);
      std::tie(est.value(i, j), est.ci(i, j)) = mean_ci(col);
    }
  std::tie(est.grad2, est.grad2_ci) = mean_ci(bs.grad2);
  std::tie(est.grad1, est.grad1_ci) = mean_ci(bs.grad1);
  est.manifold_defect = bs.manifold_defect;
  est.q_shortcut_defect = bs.q_shortcut_defect;
  est.paths = cfg.paths;
  const double rms = std::sqrt(bs.sq_norm);
  if (est.ci.norm() > 10.0 * std::max({est.value.norm(), 0.1 * rms, kBlowupFloor}))
    fail(ErrorCode::VarianceBlowup, "Hessian estimator confidence interval exceeds 10x its scale");
  return est;
}

HessianEstimate hessian_estimate(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& w, double t, const McConfig& cfg) {
  space.validate();
  const Field F = make_field(space, f);
  if (x.size() != ambient_dim(space) || v.size() != x.size() || w.size() != x.size())
    fail(ErrorCode::ConfigError, "point or direction has the wrong dimension");
  const Eigen::MatrixXd E = tangent_basis(space, x);
  const Eigen::VectorXd vc = E.transpose() * v, wc = E.transpose() * w;
  if (std::abs(vc.norm() - 1.0) > 1e-9 || std::abs(wc.norm() - 1.0) > 1e-9)
    fail(ErrorCode::ConfigError, "directions must be unit tangent vectors");
  const BatchStats bs = run_batches(space, F, x, t, cfg);
  std::vector<double> vals(cfg.batches);
  for (int b = 0; b < cfg.batches; ++b) vals[b] = vc.dot(bs.hess[b] * wc);
  HessianEstimate h;
  h.point = x;
  h.v = v;
  h.w = w;
  h.t = t;
  std::tie(h.value, h.ci_halfwidth) = mean_ci(vals);
  const double rms = std::sqrt(bs.sq_norm);
  if (!std::isfinite(h.value) || h.ci_halfwidth > 10.0 * std::max({std::abs(h.value), 0.1 * rms, kBlowupFloor}))
    fail(ErrorCode::VarianceBlowup, "Hessian estimator confidence interval exceeds 10x its scale");
  return h;
}

std::optional<Eigen::MatrixXd> hessian_oracle(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x,
                                              double t) {
  const Field F = make_field(space, f);
  const Eigen::MatrixXd E = tangent_basis(space, x);
  const int n = space.dimension;
  if (on_sphere(space)) {
    const int l = f == FieldPreset::ZonalL2 ? 2 : 1;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    intrinsic(space, F, x, E, g, H);
    return std::exp(-0.5 * t * l * (l + n - 1.0)) * H;
  }
  const PotentialSpec& V = space.potential;
  if (V.kind == PotentialKind::Quartic) return std::nullopt;
  const double K = V.kind == PotentialKind::Quadratic ? V.K : 0.0;
  // X_t = x e^{-Kt/2} + s Z with s^2 = (1 - e^{-Kt}) / K.
  const double s2 = K > 0.0 ? -std::expm1(-K * t) / K : t;
  const double damp = std::exp(-K * t);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  if (f == FieldPreset::SquareX) H(0, 0) = 2.0 * damp;
  if (f == FieldPreset::SineX) H(0, 0) = -damp * std::sin(x[0] * std::exp(-0.5 * K * t)) * std::exp(-0.5 * s2);
  return H;
}

double matrix_norm(const Eigen::MatrixXd& H, bool hs) {
  const Eigen::MatrixXd S = 0.5 * (H + H.transpose());
  if (hs) return S.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<InequalityVerdict> verify_hessian_bounds(const HessianMatrixEstimate& est, const ModelSpace& space,
                                                     const std::vector<HessianVariant>& which) {
  const BoundParams P = BoundParams::from(curvature_constants(space));
  std::vector<InequalityVerdict> out;
  for (HessianVariant v : which) {
    const bool hs = is_hs(v);
    const double lhs = matrix_norm(est.value, hs);
    const double lhs_err = est.ci.norm();
    const double rhs = hessian_rhs(P, v, est.t, est.grad2, est.grad1);
    const double rhs_lo =
        hessian_rhs(P, v, est.t, std::max(est.grad2 - est.grad2_ci, 0.0), std::max(est.grad1 - est.grad1_ci, 0.0));
    const double rhs_err = std::isfinite(rhs) ? rhs - rhs_lo : 0.0;
    char label[96];
    std::snprintf(label, sizeof label, "%s t=%.6g", to_string(v).c_str(), est.t);
    out.push_back(verdict("hessian", lhs, rhs, lhs_err + rhs_err, label,
                          {{"t", est.t},
                           {"Pt_grad2", est.grad2},
                           {"Pt_grad", est.grad1},
                           {"lhs_ci", lhs_err},
                           {"paths", static_cast<double>(est.paths)}}));
  }
  return out;
}

InequalityVerdict verify_hessian_bound(const ModelSpace& space, FieldPreset f, const Eigen::VectorXd& x, double t,
                                       HessianVariant which, const McConfig& cfg) {
  const BoundParams P = BoundParams::from(curvature_constants(space));
  // Check hypotheses before paying for the simulation.
  (void)hessian_rhs(P, which, t, 1.0, 1.0);
  const HessianMatrixEstimate est = hessian_matrix_estimate(space, f, x, t, cfg);
  return verify_hessian_bounds(est, space, {which}).front();
}

}  // namespace steinlab
