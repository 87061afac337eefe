#include "steinlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "steinlab/error.hpp"
#include "steinlab/numerics.hpp"

namespace steinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaZero = 1e-8;

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::HypothesisViolated, what);
}

void require_K(const BoundParams& P) { require(P.K > 0.0, "bound needs K > 0"); }

// sqrt((e^{Kt} - 1) / K), continuous at K = 0.
double root_int_exp(double K, double t) {
  if (std::abs(K * t) < 1e-12) return std::sqrt(t);
  return std::sqrt(std::expm1(K * t) / K);
}

// (K - 2a) / (e^{(2K-2a)t} - e^{Kt}) = e^{-Kt} alpha / expm1(alpha t).
double decay_factor(double K, double alpha, double t) {
  return std::exp(-K * t) * num::alpha_over_expm1(alpha, t);
}

// d g^2, with 0 once d underflows (g^2 grows at most like e^{Kt}).
double scaled(double d, double g) { return d == 0.0 ? 0.0 : d * g * g; }

}  // namespace

InequalityVerdict verdict(const std::string& name, double lhs, double rhs, double numeric_error,
                          const std::string& case_label, std::map<std::string, double> inputs) {
  if (std::isnan(lhs) || std::isnan(rhs) || std::isnan(numeric_error) || lhs == kInf)
    fail(ErrorCode::NonFiniteBound, "verdict '" + name + "' has a non-finite side");
  InequalityVerdict v;
  v.name = name;
  v.case_label = case_label;
  v.lhs = lhs;
  v.rhs = rhs;
  v.margin = rhs - lhs;
  v.numeric_error = std::abs(numeric_error);
  v.holds = v.margin >= -v.numeric_error;
  v.inputs = std::move(inputs);
  return v;
}

BoundParams BoundParams::from(const CurvatureConstants& c) {
  BoundParams P;
  P.K = c.K;
  P.alpha1 = c.alpha1;
  P.alpha2 = c.alpha2;
  P.beta = c.beta;
  P.n = c.n;
  P.ric_exact = c.ric_exact;
  P.hess_exact = c.hess_exact;
  return P;
}

double BoundParams::c_delta() const {
  require(p > 1.0 && delta > 0.0 && K > 0.0, "unbounded-beta bound needs p > 1, delta > 0, K > 0");
  return 1.0 / (delta * std::pow(2.0, (p - 1.0) / p) * std::pow(p * K, 1.0 / p));
}

std::string to_string(PsiVariant v) {
  switch (v) {
    case PsiVariant::Type1Min: return "type1_min";
    case PsiVariant::TildeMin: return "tilde_min";
    case PsiVariant::CorollaryTypeII: return "corollary_typeII";
    case PsiVariant::UnboundedBeta: return "unbounded_beta";
  }
  return "?";
}

PsiVariant psi_variant_from_string(const std::string& s) {
  for (auto v : {PsiVariant::Type1Min, PsiVariant::TildeMin, PsiVariant::CorollaryTypeII, PsiVariant::UnboundedBeta})
    if (to_string(v) == s) return v;
  fail(ErrorCode::ConfigError, "unknown psi variant '" + s + "'");
}

double psi1(double t, const BoundParams& P) {
  require_K(P);
  const double c = P.alpha1 / std::sqrt(P.K) + P.beta / P.K;
  const double g = 1.0 + c * root_int_exp(P.K, t);
  return scaled(P.n * decay_factor(P.K, P.K, t), g);
}

double psi2(double t, const BoundParams& P) {
  require_K(P);
  const double g = 1.0 + (P.beta / P.K) * root_int_exp(P.K, t);
  return scaled(P.n * decay_factor(P.K, P.alpha(), t), g);
}

double psi1_tilde(double t, const BoundParams& P) {
  require_K(P);
  require(P.ric_exact, "tilde Psi needs Ric_V = K");
  const double c = P.alpha2 / std::sqrt(P.K) + P.n * P.beta / P.K;
  const double g = 1.0 + c * root_int_exp(P.K, t);
  return scaled(decay_factor(P.K, P.K, t), g);
}

double psi2_tilde(double t, const BoundParams& P) {
  require_K(P);
  require(P.ric_exact, "tilde Psi needs Ric_V = K");
  const double g = 1.0 + (P.n * P.beta / P.K) * root_int_exp(P.K, t);
  return scaled(decay_factor(P.K, P.alpha_tilde(), t), g);
}

double psi_unbounded_beta(double t, const BoundParams& P) {
  require_K(P);
  const double c = P.alpha1 / std::sqrt(P.K) + P.c_delta();
  const double g = 1.0 + c * root_int_exp(P.K, t);
  return scaled(P.n * decay_factor(P.K, P.K, t), g);
}

double psi(double t, const BoundParams& P, PsiVariant variant) {
  if (!(t > 0.0)) fail(ErrorCode::ConfigError, "psi needs t > 0");
  switch (variant) {
    case PsiVariant::Type1Min: return std::min(psi1(t, P), psi2(t, P));
    case PsiVariant::TildeMin: return std::min(psi1_tilde(t, P), psi2_tilde(t, P));
    case PsiVariant::CorollaryTypeII: {
      require_K(P);
      const double J = std::expm1(P.K * t) / P.K;
      const double g = 1.0 + (P.alpha1 / std::sqrt(P.K) + P.beta / P.K) * std::sqrt(J);
      return P.n * g * g * std::exp(-P.K * t) / J;
    }
    case PsiVariant::UnboundedBeta: return psi_unbounded_beta(t, P);
  }
  return kInf;
}

double psi_best(double t, const BoundParams& P) {
  double v = psi(t, P, PsiVariant::Type1Min);
  if (P.ric_exact) v = std::min(v, psi(t, P, PsiVariant::TildeMin));
  return v;
}

double theta(double r) {
  if (std::isnan(r)) return r;
  return r >= 1.0 ? 1.0 + std::log(r) : r;
}

double expint_e1(double z) {
  if (!(z > 0.0)) fail(ErrorCode::ConfigError, "E1 needs z > 0");
  if (z >= 1.0) {
    const auto q = num::integrate_to_inf([](double s) { return std::exp(-s) / s; }, z, 1e-15);
    return q.value;
  }
  static const double e1_one =
      num::integrate_to_inf([](double s) { return std::exp(-s) / s; }, 1.0, 1e-15).value;
  // E1(z) = -ln z + int_z^1 (e^{-s} - 1)/s ds + E1(1); the integrand is bounded.
  const auto q = num::integrate(
      [](double s) { return s < 1e-8 ? -1.0 + 0.5 * s : std::expm1(-s) / s; }, z, 1.0, 1e-15);
  return -std::log(z) + q.value + e1_one;
}

double li(double x) {
  if (!(x >= 0.0 && x < 1.0)) fail(ErrorCode::ConfigError, "li needs 0 <= x < 1");
  if (x == 0.0) return 0.0;
  return -expint_e1(-std::log(x));
}

std::string to_string(HsiCase c) {
  switch (c) {
    case HsiCase::Case0I: return "case0_i";
    case HsiCase::Case0IPrime: return "case0_i_prime";
    case HsiCase::Case0II: return "case0_ii";
    case HsiCase::Case0IIPrime: return "case0_ii_prime";
    case HsiCase::Flat: return "flat";
    case HsiCase::Case2I: return "case2_i";
    case HsiCase::Case2II: return "case2_ii";
    case HsiCase::C0General: return "c0_general";
    case HsiCase::C0Exact: return "c0_exact";
    case HsiCase::UnboundedBeta: return "unbounded_beta";
    case HsiCase::GammaCalculus: return "gamma_calculus";
    case HsiCase::GenericInf: return "generic_inf";
  }
  return "?";
}

HsiCase hsi_case_from_string(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(HsiCase::GenericInf); ++k) {
    const auto c = static_cast<HsiCase>(k);
    if (to_string(c) == s) return c;
  }
  fail(ErrorCode::ConfigError, "unknown hsi case '" + s + "'");
}

double lsi_bound(double I, double K) {
  if (!(K > 0.0)) fail(ErrorCode::HypothesisViolated, "log-Sobolev bound needs K > 0");
  return I / (2.0 * K);
}

namespace {

// (I/2K)(1-e^{-Ku}) + (m S^2/2) int_u^inf e^{-Kt} a/expm1(a t) dt at the optimal u.
// li_branch evaluates the alpha = 0 limit through E1; otherwise the alpha integral is used even for tiny alpha.
double case0_value(double I, double S2m, double K, double a, bool li_branch) {
  const double u = li_branch ? S2m / I : std::log1p(a * S2m / I) / a;
  const double head = I / (2.0 * K) * -std::expm1(-K * u);
  double tail;
  if (li_branch) {
    tail = expint_e1(K * u);
  } else {
    const auto q = num::integrate_to_inf([&](double t) { return std::exp(-K * t) * num::alpha_over_expm1(a, t); },
                                         u, 1e-14);
    tail = q.value;
  }
  return head + 0.5 * S2m * tail;
}

double c0_value(double I, double S, double K, double m, double eps, double c0) {
  const double S2 = S * S;
  const double r = eps * I / (m * (1.0 + eps) * K * S2) - c0;
  return m * (1.0 + eps) * S2 / (2.0 * eps) * (c0 + theta(r));
}

template <class F>
double minimize_eps(F&& at) {
  double best = kInf;
  for (int k = 0; k < 64; ++k) {
    const double eps = std::pow(10.0, -3.0 + 6.0 * k / 63.0);
    best = std::min(best, at(eps));
  }
  return best;
}

double generic_inf(double I, double S, const BoundParams& P) {
  require_K(P);
  const double K = P.K, S2 = S * S;
  std::function<double(double)> tail;
  const bool flat_form = P.alpha1 == 0.0 && P.beta == 0.0;
  if (flat_form) {
    // Psi = c K / (e^{Kt}(e^{Kt}-1)): tail is c (-ln(1-x) - x), x = e^{-Ku}.
    const double c = (P.ric_exact && P.alpha2 == 0.0) ? 1.0 : double(P.n);
    tail = [=](double u) {
      const double x = std::exp(-K * u);
      return c * (-std::log1p(-x) - x);
    };
  } else {
    tail = [&P](double u) {
      const auto q = num::integrate_to_inf([&](double t) { return psi_best(t, P); }, u, 1e-12);
      return q.value;
    };
  }
  auto objective = [&](double log_u) {
    const double u = std::exp(log_u);
    return 0.5 * (I * -std::expm1(-K * u) / K + S2 * tail(u));
  };
  const double lo = std::log(1e-12 / K), hi = std::log(60.0 / K);
  const num::Minimum m = num::golden_section(objective, lo, hi, 1e-12, 400);
  return std::min({m.f, objective(lo), I / (2.0 * K)});
}

}  // namespace

double quartic_eps(const BoundParams& P) {
  require(P.p > 1.0 && P.delta > 0.0 && P.K > 0.0, "quartic eps needs p > 1, delta > 0, K > 0");
  return P.delta * P.delta * std::pow(2.0, 2.0 * (P.p - 1.0) / P.p) * std::pow(P.p * P.K, 2.0 / P.p) * P.K;
}

double hsi_c0(double I, double S, const BoundParams& P, HsiCase c, double eps) {
  require_K(P);
  require(eps > 0.0, "c0 bound needs eps > 0");
  const double K = P.K;
  switch (c) {
    case HsiCase::C0General: {
      const double s = P.alpha1 * std::sqrt(K) + P.beta;
      return c0_value(I, S, K, P.n, eps, eps * s * s / (K * K * K) - 1.0);
    }
    case HsiCase::C0Exact: {
      require(P.ric_exact, "c0_exact needs Ric_V = K");
      const double s = P.alpha2 * std::sqrt(K) + P.n * P.beta;
      return c0_value(I, S, K, 1.0, eps, eps * s * s / (K * K * K) - 1.0);
    }
    case HsiCase::UnboundedBeta: {
      const double s = P.alpha1 / std::sqrt(K) + P.c_delta();
      return c0_value(I, S, K, double(P.n) * P.n, eps, eps / K * s * s - 1.0);
    }
    default: fail(ErrorCode::ConfigError, "hsi_c0 takes only the c0 cases");
  }
}

double hsi_bound(double I, double S, const BoundParams& P, HsiCase c) {
  if (!(I >= 0.0) || !(S >= 0.0)) fail(ErrorCode::ConfigError, "hsi_bound needs I >= 0 and S >= 0");
  require_K(P);
  const double K = P.K;
  const double a = P.alpha(), at = P.alpha_tilde();
  const bool zero_beta = P.beta == 0.0;

  // Hypotheses first, so that degenerate inputs still report misuse.
  switch (c) {
    case HsiCase::Case0I: require(zero_beta && a > 0.0, "case0_i needs beta = 0 and alpha > 0"); break;
    case HsiCase::Case0IPrime:
      require(zero_beta && std::abs(a) < kAlphaZero * std::max(1.0, K), "case0_i_prime needs beta = 0 and alpha = 0");
      break;
    case HsiCase::Case0II:
      require(zero_beta && P.ric_exact && at > 0.0, "case0_ii needs beta = 0, Ric_V = K and alpha_tilde > 0");
      break;
    case HsiCase::Case0IIPrime:
      require(zero_beta && P.ric_exact && std::abs(at) < kAlphaZero * std::max(1.0, K),
              "case0_ii_prime needs beta = 0, Ric_V = K and alpha_tilde = 0");
      break;
    case HsiCase::Flat: require(P.hess_exact, "flat case needs Hess_V = K"); break;
    case HsiCase::Case2I: require(zero_beta && a < 0.0, "case2_i needs beta = 0 and alpha < 0"); break;
    case HsiCase::Case2II:
      require(zero_beta && P.ric_exact && at < 0.0, "case2_ii needs beta = 0, Ric_V = K and alpha_tilde < 0");
      break;
    case HsiCase::C0Exact: require(P.ric_exact, "c0_exact needs Ric_V = K"); break;
    case HsiCase::UnboundedBeta: (void)P.c_delta(); break;
    case HsiCase::GammaCalculus:
      require(P.rho > 0.0 && P.kappa > 0.0 && P.sigma > 0.0, "gamma_calculus needs rho, kappa, sigma > 0");
      break;
    default: break;
  }

  if (I == 0.0) return 0.0;
  if (S == 0.0) return 0.0;
  if (std::isinf(S)) {
    if (c == HsiCase::GammaCalculus) return std::max(P.rho, P.kappa) * I / (2.0 * P.rho * P.kappa);
    return I / (2.0 * K);
  }
  const double S2 = S * S;
  switch (c) {
    case HsiCase::Case0I: return case0_value(I, P.n * S2, K, a, false);
    case HsiCase::Case0IPrime: return case0_value(I, P.n * S2, K, 0.0, true);
    case HsiCase::Case0II: return case0_value(I, S2, K, at, false);
    case HsiCase::Case0IIPrime: return case0_value(I, S2, K, 0.0, true);
    case HsiCase::Flat: return 0.5 * S2 * std::log1p(I / (K * S2));
    case HsiCase::Case2I: {
      const double m = P.n * S2 * std::max(-a, K);
      return m / (2.0 * K) * theta(I / m);
    }
    case HsiCase::Case2II: {
      const double m = S2 * std::max(-at, K);
      return m / (2.0 * K) * theta(I / m);
    }
    case HsiCase::C0General:
    case HsiCase::C0Exact:
    case HsiCase::UnboundedBeta:
      if (P.eps > 0.0) return hsi_c0(I, S, P, c, P.eps);
      return minimize_eps([&](double eps) { return hsi_c0(I, S, P, c, eps); });
    case HsiCase::GammaCalculus:
      return S2 / (2.0 * P.sigma) * theta(P.sigma * std::max(P.rho, P.kappa) * I / (P.rho * P.kappa * S2));
    case HsiCase::GenericInf: return generic_inf(I, S, P);
  }
  return kInf;
}

std::string to_string(WsVariant v) {
  switch (v) {
    case WsVariant::IntegralTypeI: return "integral_typeI";
    case WsVariant::IntegralTypeII: return "integral_typeII";
    case WsVariant::FlatArccos: return "flat_arccos";
  }
  return "?";
}

WsVariant ws_variant_from_string(const std::string& s) {
  for (auto v : {WsVariant::IntegralTypeI, WsVariant::IntegralTypeII, WsVariant::FlatArccos})
    if (to_string(v) == s) return v;
  fail(ErrorCode::ConfigError, "unknown ws variant '" + s + "'");
}

double ws_constant(const BoundParams& P, WsVariant v) {
  require_K(P);
  const PsiVariant pv = v == WsVariant::IntegralTypeII ? PsiVariant::TildeMin : PsiVariant::Type1Min;
  if (v == WsVariant::FlatArccos) fail(ErrorCode::ConfigError, "flat_arccos has no integral constant");
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::sqrt(psi(t, P, pv)); };
  // Substitute t = s^2 to remove the t^{-1/2} endpoint singularity.
  auto g = [&](double s) { return 2.0 * s * f(s * s); };
  const double split = 1.0 / std::sqrt(P.K);
  const auto head = num::integrate(g, 0.0, split, 1e-13);
  const auto tail = num::integrate_to_inf(g, split, 1e-13);
  const double value = head.value + tail.value;
  if (!std::isfinite(value)) fail(ErrorCode::DivergentIntegral, "int sqrt(Psi) did not converge");
  return value;
}

double ws_bound(double S, const BoundParams& P, WsVariant v, double H) {
  if (!(S >= 0.0)) fail(ErrorCode::ConfigError, "ws_bound needs S >= 0");
  if (v == WsVariant::FlatArccos) {
    require(P.hess_exact && P.K > 0.0, "flat_arccos needs Hess_V = K > 0");
    if (!(H >= 0.0)) fail(ErrorCode::ConfigError, "flat_arccos needs H >= 0");
    if (H == 0.0) return 0.0;
    if (std::isinf(S)) return talagrand_bound(H, P.K);
    if (S == 0.0) fail(ErrorCode::NonFiniteBound, "flat_arccos with S = 0 and H > 0");
    return S / std::sqrt(P.K) * std::acos(std::exp(-H / (S * S)));
  }
  const double c = ws_constant(P, v);
  if (S == 0.0) return 0.0;
  return c * S;
}

double talagrand_bound(double H, double K) {
  if (!(K > 0.0)) fail(ErrorCode::HypothesisViolated, "Talagrand bound needs K > 0");
  return std::sqrt(2.0 * std::max(H, 0.0) / K);
}

namespace {

void require_hwsi(const BoundParams& P) {
  require(P.K > 0.0 && P.alpha() > 0.0 && P.beta == 0.0, "HWSI needs K > 0, alpha > 0 and beta = 0");
}

}  // namespace

double hwsi_L(double x, const BoundParams& P) {
  require_hwsi(P);
  if (!(x >= 0.0)) fail(ErrorCode::ConfigError, "L needs x >= 0");
  if (x == 0.0) return 0.0;
  const double K = P.K, a = P.alpha(), an = a * P.n, k = K / a;
  // r^{k-1}(r-x)/(r+an)^{k+1}, written through logs to keep large k finite.
  auto g = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp((k - 1.0) * std::log(r) - (k + 1.0) * std::log(r + an)) * (r - x);
  };
  const auto q = num::integrate_singular(g, 0.0, x, 1e-15);
  return x + K * P.n * q.value;
}

double hwsi_L_prime(double x, const BoundParams& P) {
  require_hwsi(P);
  if (x <= 0.0) return 1.0;
  const double a = P.alpha();
  return -std::expm1(P.K / a * std::log(x / (x + a * P.n)));
}

double hwsi_L_inverse(double y, const BoundParams& P) {
  require_hwsi(P);
  if (!(y >= 0.0)) fail(ErrorCode::ConfigError, "L inverse needs y >= 0");
  if (y == 0.0) return 0.0;
  // L(x) <= x, so the root lies in [y, hi].
  double lo = y, hi = 2.0 * y;
  while (hwsi_L(hi, P) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::InversionFailed, "L inverse bracket exceeded 1e12");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = hwsi_L(x, P) - y;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double d = hwsi_L_prime(x, P);
    double next = x - f / d;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-12 * std::max(1.0, x) || hi - lo <= 1e-12 * std::max(1.0, x)) return next;
    x = next;
  }
  fail(ErrorCode::InversionFailed, "L inverse did not converge");
}

double hwsi_bound(double H, double S, const BoundParams& P) {
  require_hwsi(P);
  if (!(H >= 0.0) || !(S >= 0.0)) fail(ErrorCode::ConfigError, "hwsi_bound needs H >= 0 and S >= 0");
  if (H == 0.0) return 0.0;
  if (std::isinf(S)) return talagrand_bound(H, P.K);
  if (S == 0.0) fail(ErrorCode::NonFiniteBound, "HWSI with S = 0 and H > 0");
  const double S2 = S * S;
  const double ystar = hwsi_L_inverse(2.0 * P.K * H / S2, P);
  // y = s^2: int_0^{y*} y^{-1/2} L'(y) dy = 2 int_0^{sqrt y*} L'(s^2) ds.
  const auto q = num::integrate([&](double s) { return hwsi_L_prime(s * s, P); }, 0.0, std::sqrt(ystar), 1e-14);
  return S / P.K * q.value;
}

std::string to_string(HessianVariant v) {
  switch (v) {
    case HessianVariant::TypeIOp: return "typeI_op";
    case HessianVariant::TypeIHS: return "typeI_HS";
    case HessianVariant::TypeIIOp: return "typeII_op";
    case HessianVariant::TypeIIHS: return "typeII_HS";
  }
  return "?";
}

HessianVariant hessian_variant_from_string(const std::string& s) {
  for (auto v : {HessianVariant::TypeIOp, HessianVariant::TypeIHS, HessianVariant::TypeIIOp, HessianVariant::TypeIIHS})
    if (to_string(v) == s) return v;
  fail(ErrorCode::ConfigError, "unknown hessian variant '" + s + "'");
}

bool is_hs(HessianVariant v) { return v == HessianVariant::TypeIHS || v == HessianVariant::TypeIIHS; }

double hessian_rhs(const BoundParams& P, HessianVariant v, double t, double Pt_grad2, double Pt_grad) {
  if (!(t > 0.0)) fail(ErrorCode::ConfigError, "hessian bound needs t > 0");
  const bool hs = is_hs(v);
  if (hs) require(P.ric_exact, "Hilbert-Schmidt Hessian bound needs Ric_V = K");
  const double R = hs ? P.alpha2 : P.alpha1;
  const double b = hs ? P.n * P.beta : P.beta;
  const double K = P.K;
  const double g2 = std::sqrt(std::max(Pt_grad2, 0.0));
  if (v == HessianVariant::TypeIOp || v == HessianVariant::TypeIHS) {
    require(K > 0.0 || b == 0.0, "type I bound with beta > 0 needs K > 0");
    const double pref = std::sqrt(decay_factor(K, K - 2.0 * R, t));
    const double drift = b == 0.0 ? 0.0 : root_int_exp(K, t) * (b / K) * Pt_grad;
    return pref * (g2 + drift);
  }
  require(K > 0.0, "type II bound needs K > 0");
  const double e = std::exp(-0.5 * K * t);
  return (e / root_int_exp(K, t) + R * e / std::sqrt(K)) * g2 + b * e / K * Pt_grad;
}

}  // namespace steinlab
