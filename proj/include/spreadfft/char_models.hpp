#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spreadfft/complex_math.hpp"

namespace spreadfft {

// Joint lognormal returns with constant covariance.
struct GbmParams {
  double r = 0.1;
  double T = 1.0;
  double sigma1 = 0.2;
  double sigma2 = 0.1;
  double rho = 0.5;
  double delta1 = 0.05;
  double delta2 = 0.05;
  void validate() const;
};

// Two assets driven by a common square-root stochastic variance factor.
struct SvParams {
  double r = 0.1;
  double T = 1.0;
  double delta1 = 0.05;
  double delta2 = 0.05;
  double sigma1 = 1.0;
  double sigma2 = 0.5;
  double rho = 0.5;
  double rho1 = -0.5;
  double rho2 = 0.25;
  double v0 = 0.04;
  double kappa = 1.0;
  double mu = 0.04;
  double sigma_v = 0.05;
  // The exponent's affine coefficient contains the factor (1 - e^{-theta T})
  // in two places; a widely circulated form of the formula drops the T in
  // the denominator occurrence. true evaluates the time-consistent version,
  // false the verbatim one. The two agree exactly at T = 1.
  bool sv_denominator_T = true;
  void validate() const;
};

// Two assets sharing a common variance-gamma component (weight alpha) plus
// idiosyncratic variance-gamma components (weight 1 - alpha).
struct VgParams {
  double r = 0.1;
  double T = 1.0;
  double a_plus = 20.4499;
  double a_minus = 24.4499;
  double alpha = 0.4;
  double lambda = 10.0;
  // true: add the common log-drift that makes e^{-rT} S_jT a martingale.
  // false: price the raw exponentiated process with zero drift.
  bool drift_correction = true;
  void validate() const;
  // Per-unit-time drift applied to both log prices.
  double mu_eff() const;
};

using Model = std::variant<GbmParams, SvParams, VgParams>;

std::string model_tag(const Model& m);
double model_r(const Model& m);
double model_T(const Model& m);

// Joint characteristic functions of (log S1T/S10, log S2T/S20) evaluated on
// complex arguments (the imaginary parts carry the contour displacement).
cplx phi_gbm(const GbmParams& p, cplx u1, cplx u2);
cplx phi_sv(const SvParams& p, cplx u1, cplx u2);
cplx phi_vg(const VgParams& p, cplx u1, cplx u2);
cplx phi(const Model& m, cplx u1, cplx u2);

// b(w) = 1 + i(1/a_minus - 1/a_plus) w + w^2 / (a_minus a_plus), the
// per-unit-rate reciprocal factor of the variance-gamma component.
cplx vg_b(const VgParams& p, cplx w);

// The strip of analyticity for phi_vg: Im(u1), Im(u2) and their sum must lie
// in (-a_plus, a_minus). Throws ContourError otherwise.
void vg_check_strip(const VgParams& p, double im1, double im2);

// Joint lognormal basket of n assets, full correlation matrix.
struct GbmBasketParams {
  double r = 0.1;
  double T = 1.0;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<std::vector<double>> corr;
  int n() const { return static_cast<int>(sigma.size()); }
  void validate() const;
  static GbmBasketParams uniform(double r, double T, std::vector<double> sigma,
                                 std::vector<double> delta, double rho);
};

cplx phi_gbm_basket(const GbmBasketParams& p, std::span<const cplx> u);

enum class Greek { delta1, delta2, theta, vega1, vega2, rho_corr };

Greek greek_from_string(const std::string& name);
std::string greek_name(Greek g);

// Frequency-domain multiplier m(u) such that the greek panel is the inverse
// transform of m(u) Phi(u) Phat(u). Differentiation of the discounted price:
// theta's multiplier includes the -r term from the discount factor. Only the
// lognormal model admits these closed forms.
cplx greek_multiplier_gbm(const GbmParams& p, Greek g, cplx u1, cplx u2);

}  // namespace spreadfft
