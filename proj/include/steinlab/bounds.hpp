#pragma once

#include <limits>
#include <string>

#include "steinlab/geometry.hpp"
#include "steinlab/verdict.hpp"

namespace steinlab {

struct BoundParams {
  double K = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  int n = 1;
  bool ric_exact = false;
  bool hess_exact = false;
  // eps <= 0 selects the minimum over a 64-point log grid on [1e-3, 1e3].
  double eps = 0.0;
  double p = 2.0;
  double delta = 0.0;
  double rho = 0.0;
  double kappa = 0.0;
  double sigma = 1.0;

  static BoundParams from(const CurvatureConstants& c);
  double alpha() const { return K - 2.0 * alpha1; }
  double alpha_tilde() const { return K - 2.0 * alpha2; }
  // 1 / (delta 2^{(p-1)/p} (pK)^{1/p}); needs delta > 0 and p > 1.
  double c_delta() const;
};

enum class PsiVariant { Type1Min, TildeMin, CorollaryTypeII, UnboundedBeta };
std::string to_string(PsiVariant v);
PsiVariant psi_variant_from_string(const std::string& s);

double psi1(double t, const BoundParams& P);
double psi2(double t, const BoundParams& P);
// Tilde forms need ric_exact.
double psi1_tilde(double t, const BoundParams& P);
double psi2_tilde(double t, const BoundParams& P);
double psi_unbounded_beta(double t, const BoundParams& P);
double psi(double t, const BoundParams& P, PsiVariant variant);
// Pointwise minimum over every admissible variant.
double psi_best(double t, const BoundParams& P);

double theta(double r);
// li(x) = int_0^x dt / ln t for 0 <= x < 1.
double li(double x);
// E1(z) = int_z^inf e^{-s}/s ds = -li(e^{-z}), z > 0.
double expint_e1(double z);

enum class HsiCase {
  Case0I,
  Case0IPrime,
  Case0II,
  Case0IIPrime,
  Flat,
  Case2I,
  Case2II,
  C0General,
  C0Exact,
  UnboundedBeta,
  GammaCalculus,
  GenericInf,
};
std::string to_string(HsiCase c);
HsiCase hsi_case_from_string(const std::string& s);

// Entropy bound from I and S. S = +inf gives the LSI limit of the case.
double hsi_bound(double I, double S, const BoundParams& P, HsiCase c);
// c0 family at a fixed eps > 0.
double hsi_c0(double I, double S, const BoundParams& P, HsiCase c, double eps);
// Quartic eps choice delta^2 2^{2(p-1)/p} (pK)^{2/p} K.
double quartic_eps(const BoundParams& P);
double lsi_bound(double I, double K);

enum class WsVariant { IntegralTypeI, IntegralTypeII, FlatArccos };
std::string to_string(WsVariant v);
WsVariant ws_variant_from_string(const std::string& s);

// int_0^inf sqrt(Psi) for the Psi behind the variant.
double ws_constant(const BoundParams& P, WsVariant v);
double ws_bound(double S, const BoundParams& P, WsVariant v,
                double H = std::numeric_limits<double>::quiet_NaN());
double talagrand_bound(double H, double K);

double hwsi_L(double x, const BoundParams& P);
double hwsi_L_prime(double x, const BoundParams& P);
double hwsi_L_inverse(double y, const BoundParams& P);
double hwsi_bound(double H, double S, const BoundParams& P);

enum class HessianVariant { TypeIOp, TypeIHS, TypeIIOp, TypeIIHS };
std::string to_string(HessianVariant v);
HessianVariant hessian_variant_from_string(const std::string& s);
bool is_hs(HessianVariant v);

// Right-hand side from Pt_grad2 = P_t|grad f|^2 and Pt_grad = P_t|grad f| at the point.
double hessian_rhs(const BoundParams& P, HessianVariant v, double t, double Pt_grad2, double Pt_grad);

}  // namespace steinlab
