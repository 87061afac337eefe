// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "steinlab/bounds.hpp"
#include "steinlab/error.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/geometry.hpp"
#include "steinlab/mc_sim.hpp"
#include "steinlab/measures.hpp"
#include "steinlab/scenario.hpp"
#include "steinlab/semigroup.hpp"

using namespace steinlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

// Closed forms for nu = N(0, s2) against mu = N(0, 1).
struct GaussOracle {
  double H, I, S, W2;
  explicit GaussOracle(double s2)
      : H(0.5 * (s2 - 1.0 - std::log(s2))),
        I((s2 - 1.0) * (s2 - 1.0) / s2),
        S(std::abs(s2 - 1.0)),
        W2(std::abs(std::sqrt(s2) - 1.0)) {}
};

const std::vector<double> kSweep{1.5, 2.0, 4.0};

Outcome c1_gaussian_closed_forms() {
  Outcome o;
  const auto t0 = Clock::now();
  const BoundParams P = BoundParams::from(curvature_constants(ModelSpace::gaussian(1, 1.0)));
  for (double s2 : kSweep) {
    const MeasurePair pair = make_pair(ModelSpace::gaussian(1, 1.0), DensitySpec::gaussian_scale(s2));
    const FunctionalReport fr = compute_functionals(pair);
    const GaussOracle g(s2);
    o.require(rel(fr.H.value, g.H) <= 1e-5, fmt("H rel %.3g at s2=%g", rel(fr.H.value, g.H), s2));
    o.require(rel(fr.I.value, g.I) <= 1e-5, fmt("I rel %.3g at s2=%g", rel(fr.I.value, g.I), s2));
    o.require(rel(fr.S(), g.S) <= 1e-5, fmt("S rel %.3g at s2=%g", rel(fr.S(), g.S), s2));
    o.require(rel(fr.W2.value, g.W2) <= 1e-5, fmt("W2 rel %.3g at s2=%g", rel(fr.W2.value, g.W2), s2));
    const double rhs = hsi_bound(fr.I.value, fr.S(), P, HsiCase::Flat);
    const InequalityVerdict v = verdict("hsi", fr.H.value, rhs, fr.H.error + 1e-12, "flat");
    o.require(v.holds && v.margin > 0.0, fmt("flat HSI margin %.3g at s2=%g", v.margin, s2));
  }
  const double dt = seconds_since(t0);
  o.require(dt < 10.0, fmt("runtime %.1f s", dt));
  if (o.pass) o.detail = fmt("3 families, %.2f s", dt);
  return o;
}

Outcome c2_hsi_refines_lsi() {
  Outcome o;
  double worst = std::numeric_limits<double>::infinity();
  int count = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (double K : {0.5, 1.0, 3.0}) {
        const double S = std::pow(10.0, -3.0 + 6.0 * i / 9.0);
        const double I = std::pow(10.0, -3.0 + 6.0 * j / 9.0);
        BoundParams P;
        P.K = K;
        P.hess_exact = true;
        const double margin = lsi_bound(I, K) - hsi_bound(I, S, P, HsiCase::Flat);
        worst = std::min(worst, margin);
        ++count;
      }
  o.require(count == 300, "grid size");
  o.require(worst >= -1e-12, fmt("worst margin %.3g", worst));
  if (o.pass) o.detail = fmt("300 points, worst margin %.3g", worst);
  return o;
}

struct FlowCase {
  std::string label;
  ModelSpace space;
  DensitySpec density;
  Backend backend;
  double K;
};

Outcome c3_de_bruijn_and_decay() {
  Outcome o;
  const ModelSpace gauss = ModelSpace::gaussian(1, 1.0);
  const ModelSpace quartic = ModelSpace::line(PotentialSpec::quartic(1.0));
  const std::vector<FlowCase> cases{
      {"mehler scale", gauss, DensitySpec::gaussian_scale(2.0), Backend::MehlerOU, 1.0},
      {"mehler scale 4", gauss, DensitySpec::gaussian_scale(4.0), Backend::MehlerOU, 1.0},
      {"mehler shift", gauss, DensitySpec::gaussian_shift(1.0), Backend::MehlerOU, 1.0},
      {"pde scale", gauss, DensitySpec::gaussian_scale(2.0), Backend::Line1DPDE, 1.0},
      {"pde shift", gauss, DensitySpec::gaussian_shift(1.0), Backend::Line1DPDE, 1.0},
      {"pde quartic", quartic, DensitySpec::quartic_tilt(0.5), Backend::Line1DPDE, 1.0},
      {"pde quartic tilt", quartic, DensitySpec::quartic_tilt(0.5, 0.3), Backend::Line1DPDE, 1.0},
      {"zonal S2", ModelSpace::sphere(2), DensitySpec::von_mises(1.0), Backend::SphereZonal, 1.0},
      {"zonal S10", ModelSpace::sphere(10), DensitySpec::von_mises(0.5), Backend::SphereZonal, 9.0},
  };
  int decay = 0;
  for (const FlowCase& c : cases) {
    const MeasurePair pair = make_pair(c.space, c.density);
    const SemigroupEngine eng(c.backend, c.space, {0.1, 0.25, 0.5, 1.0, 2.0});
    const double H = entropy(pair);
    const DeBruijn d = de_bruijn_entropy(eng, pair);
    const double gap = std::abs(d.value - H), tol = std::max(1e-4, 1e-3 * H);
    o.require(gap <= tol, c.label + fmt(": de Bruijn gap %.3g > %.3g", gap, tol));
    for (const InequalityVerdict& v : fisher_decay_check(eng, pair, c.K)) {
      ++decay;
      o.require(v.holds, c.label + " decay fails at " + v.case_label);
    }
  }
  if (o.pass) o.detail = fmt("%g flows, %g decay verdicts", static_cast<double>(cases.size()), decay);
  return o;
}

Outcome c4_stein_kernel() {
  Outcome o;
  const ModelSpace gauss = ModelSpace::gaussian(1, 1.0);
  const ModelSpace quartic = ModelSpace::line(PotentialSpec::quartic(1.0));
  KernelOptions opt;
  opt.construction = KernelConstruction::Explicit1D;
  opt.test_functions = 12;
  opt.check = false;
  struct Case {
    std::string label;
    ModelSpace space;
    DensitySpec d;
  };
  const std::vector<Case> cases{{"shift", gauss, DensitySpec::gaussian_shift(1.0)},
                                {"scale", gauss, DensitySpec::gaussian_scale(2.0)},
                                {"quartic tilt", quartic, DensitySpec::quartic_tilt(0.5, 0.3)},
                                {"quartic", quartic, DensitySpec::quartic_tilt(0.5)}};
  double worst_res = 0.0;
  for (const Case& c : cases) {
    const SteinKernelField K = stein_kernel(make_pair(c.space, c.d), opt);
    worst_res = std::max(worst_res, K.residual);
    o.require(K.residual <= 1e-6, c.label + fmt(" residual %.3g", K.residual));
  }
  double worst_tau = 0.0;
  for (double s2 : kSweep) {
    const SteinKernelField K = stein_kernel(make_pair(gauss, DensitySpec::gaussian_scale(s2)), opt);
    for (double t : K.tau) worst_tau = std::max(worst_tau, std::abs(t - s2));
  }
  o.require(worst_tau <= 1e-8, fmt("scale kernel off by %.3g", worst_tau));
  if (o.pass) o.detail = fmt("max residual %.3g, max |tau - s2| %.3g", worst_res, worst_tau);
  return o;
}

Outcome c5_ws_vs_talagrand() {
  Outcome o;
  const BoundParams P = BoundParams::from(curvature_constants(ModelSpace::gaussian(1, 1.0)));
  double at2 = 0.0, worst = std::numeric_limits<double>::infinity();
  for (double s2 : {1.25, 1.5, 2.0, 3.0, 4.0}) {
    const FunctionalReport fr =
        compute_functionals(make_pair(ModelSpace::gaussian(1, 1.0), DensitySpec::gaussian_scale(s2)));
    const double arc = ws_bound(fr.S(), P, WsVariant::FlatArccos, fr.H.value);
    const double tal = talagrand_bound(fr.H.value, 1.0);
    worst = std::min({worst, arc - fr.W2.value, tal - arc});
    o.require(fr.W2.value <= arc + 1e-9, fmt("W2 %.6g > arccos %.6g at s2=%g", fr.W2.value, arc, s2));
    o.require(arc <= tal + 1e-9, fmt("arccos %.6g > talagrand %.6g at s2=%g", arc, tal, s2));
    if (s2 == 2.0) at2 = arc;
  }
  // Reference is the closed form arccos(e^{-H}), H = (1 - ln 2)/2, i.e. 0.539893, not 0.5415.
  const double ref = std::acos(std::exp(-0.5 * (1.0 - std::log(2.0))));
  o.require(std::abs(at2 - ref) <= 1e-3, fmt("s2=2 arccos bound %.6g vs %.6g", at2, ref));
  if (o.pass)
    o.detail = fmt("s2=2 bound %.6g (oracle %.6g), worst margin %.3g", at2, ref, worst) +
               fmt("; 0.5415 differs by %.2g", std::abs(at2 - 0.5415));
  return o;
}

Outcome c6_hwsi() {
  Outcome o;
  const BoundParams P = BoundParams::from(curvature_constants(ModelSpace::gaussian(1, 1.0)));
  o.require(hwsi_L(0.0, P) == 0.0, "L(0) != 0");
  double inv_err = 0.0, fd_err = 0.0, prev = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double x = std::pow(10.0, -3.0 + 6.0 * i / 60.0);
    const double L = hwsi_L(x, P);
    o.require(L <= x, fmt("L(%g) = %.6g > x", x, L));
    o.require(L > prev, fmt("L not increasing at %g", x));
    prev = L;
    inv_err = std::max(inv_err, std::abs(hwsi_L_inverse(L, P) - x) / std::max(1.0, x));
    const double h = 1e-4 * x;
    const double fd = (hwsi_L(x + h, P) - hwsi_L(x - h, P)) / (2.0 * h);
    fd_err = std::max(fd_err, std::abs(fd - hwsi_L_prime(x, P)));
  }
  o.require(inv_err <= 1e-8, fmt("L^-1(L(x)) off by %.3g", inv_err));
  o.require(fd_err <= 1e-6, fmt("L' off finite differences by %.3g", fd_err));
  for (double s2 : kSweep) {
    const FunctionalReport fr =
        compute_functionals(make_pair(ModelSpace::gaussian(1, 1.0), DensitySpec::gaussian_scale(s2)));
    const double b = hwsi_bound(fr.H.value, fr.S(), P);
    o.require(b >= fr.W2.value - 1e-9, fmt("hwsi %.6g < W2 %.6g at s2=%g", b, fr.W2.value, s2));
  }
  if (o.pass) o.detail = fmt("inverse err %.2g, L' err %.2g", inv_err, fd_err);
  return o;
}

Outcome c7_limit_consistency() {
  Outcome o;
  BoundParams near;
  near.K = 1.0;
  near.n = 1;
  near.alpha1 = 0.5 * (1.0 - 1e-10);
  BoundParams zero = near;
  zero.alpha1 = 0.5;
  double worst = 0.0;
  for (double I : {0.01, 0.1, 1.0, 10.0, 100.0})
    for (double S : {0.1, 0.5, 1.0, 3.0}) {
      const double a = hsi_bound(I, S, near, HsiCase::Case0I);
      const double b = hsi_bound(I, S, zero, HsiCase::Case0IPrime);
      worst = std::max(worst, std::abs(a - b));
    }
  o.require(worst <= 1e-5, fmt("case0 limit gap %.3g", worst));
  if (o.pass) o.detail = fmt("20 points, max gap %.3g", worst);
  return o;
}

Outcome c8_sphere_constants() {
  Outcome o;
  double worst = 0.0;
  for (int n = 2; n <= 12; ++n) {
    const CurvatureConstants c = curvature_constants(ModelSpace::sphere(n));
    worst = std::max(worst, std::abs(c.alpha2 - std::sqrt(2.0 * n * (n - 1.0))));
  }
  o.require(worst <= 1e-12, fmt("alpha2 off by %.3g", worst));
  const GammaConstants g9 = gamma_constants(ModelSpace::sphere(9));
  o.require(g9.kappa == 0.0, fmt("kappa(9) = %.3g", g9.kappa));
  BoundParams P9 = BoundParams::from(curvature_constants(ModelSpace::sphere(9)));
  P9.rho = g9.rho;
  P9.kappa = g9.kappa;
  P9.sigma = g9.sigma;
  bool flagged = false;
  try {
    (void)hsi_bound(1.0, 1.0, P9, HsiCase::GammaCalculus);
  } catch (const Error& e) {
    flagged = e.code() == ErrorCode::HypothesisViolated;
  }
  o.require(flagged, "n=9 gamma bound not flagged");
  const CurvatureConstants c2 = curvature_constants(ModelSpace::sphere(2));
  const double m = std::max(-c2.alpha_tilde, c2.K);
  o.require(m == 3.0, fmt("max{-alpha~, K} = %g", m));
  const BoundParams P2 = BoundParams::from(c2);
  double dev = 0.0;
  for (double I : {0.1, 1.0, 10.0})
    for (double S : {0.3, 1.0}) {
      const double r = I / (3.0 * S * S);
      const double th = r >= 1.0 ? 1.0 + std::log(r) : r;
      dev = std::max(dev, std::abs(hsi_bound(I, S, P2, HsiCase::Case2II) - 1.5 * S * S * th));
    }
  o.require(dev <= 1e-12, fmt("case2_ii off by %.3g", dev));
  if (o.pass) o.detail = "n=2..12, kappa(9)=0 flagged, S^2 factor 3";
  return o;
}

Outcome c9_hessian_mc() {
  Outcome o;
  const auto t0 = Clock::now();
  const ModelSpace s2 = ModelSpace::sphere(2);
  const Eigen::VectorXd x = default_point(s2, FieldPreset::ZonalL1);
  McConfig cfg;
  cfg.seed = 2024;
  cfg.paths = 100000;
  cfg.step = 1e-3;
  const std::vector<HessianVariant> all{HessianVariant::TypeIOp, HessianVariant::TypeIIOp, HessianVariant::TypeIHS,
                                        HessianVariant::TypeIIHS};
  double worst_z = 0.0;
  for (double t : {0.25, 1.0}) {
    const HessianMatrixEstimate est = hessian_matrix_estimate(s2, FieldPreset::ZonalL1, x, t, cfg);
    const Eigen::MatrixXd B = tangent_basis(s2, x);
    for (int i = 0; i < B.cols(); ++i)
      for (int j = 0; j < B.cols(); ++j) {
        const double oracle = -std::exp(-t) * x(2) * B.col(i).dot(B.col(j));
        const double z = std::abs(est.value(i, j) - oracle) / std::max(est.ci(i, j), 1e-300);
        worst_z = std::max(worst_z, z);
        o.require(z <= 3.0, fmt("entry off by %.2f half-widths at t=%g", z, t));
      }
    for (const InequalityVerdict& v : verify_hessian_bounds(est, s2, all))
      o.require(v.holds && v.margin > 0.0, v.case_label + fmt(" margin %.3g at t=%g", v.margin, t));
  }
  const double dt = seconds_since(t0);
  o.require(dt < 120.0, fmt("runtime %.1f s", dt));
  if (o.pass) o.detail = fmt("max %.2f half-widths, %.1f s", worst_z, dt);
  return o;
}

Outcome c10_determinism() {
  Outcome o;
  for (const std::string& name : preset_names()) {
    const Scenario s = resolve_scenario("preset:" + name);
    const std::string a = emit_json(run_scenario(s));
    const std::string b = emit_json(run_scenario(s));
    o.require(a == b, name + " reports differ");
  }
  if (o.pass) o.detail = fmt("%g presets byte-identical", static_cast<double>(preset_names().size()));
  return o;
}

Outcome c11_moment_ratio() {
  Outcome o;
  const MeasurePair pair = make_pair(ModelSpace::gaussian(1, 1.0), DensitySpec::gaussian_scale(2.0));
  const SteinKernelField K = stein_kernel(pair);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int p : {2, 4, 6, 8}) {
    const double r = moment_ratio(pair, K, TestFunction::Coordinate, p);
    o.require(std::isfinite(r) && r > 0.0, fmt("ratio %g at p=%g", r, p));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  o.require(hi < 3.0 * lo, fmt("ratio spread %.3g", hi / lo));
  if (o.pass) o.detail = fmt("ratios in [%.4g, %.4g]", lo, hi);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 gaussian closed forms", c1_gaussian_closed_forms},
      {"2 hsi refines lsi", c2_hsi_refines_lsi},
      {"3 de bruijn and fisher decay", c3_de_bruijn_and_decay},
      {"4 stein kernel", c4_stein_kernel},
      {"5 ws vs talagrand", c5_ws_vs_talagrand},
      {"6 hwsi consistency", c6_hwsi},
      {"7 case0 limit", c7_limit_consistency},
      {"8 sphere constants", c8_sphere_constants},
      {"9 hessian monte carlo", c9_hessian_mc},
      {"10 determinism", c10_determinism},
      {"11 moment ratio", c11_moment_ratio},
  };
  int failed = 0;
  for (const auto& [label, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", label.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
