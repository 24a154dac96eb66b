#include "spreadfft/char_models.hpp"

#include <cmath>

namespace spreadfft {

namespace {
const cplx kI(0.0, 1.0);

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}
}  // namespace

void GbmParams::validate() const {
  require(T > 0.0, "gbm: T must be positive");
  require(sigma1 > 0.0 && sigma2 > 0.0, "gbm: volatilities must be positive");
  require(rho > -1.0 && rho < 1.0, "gbm: |rho| must be < 1");
}

void SvParams::validate() const {
  require(T > 0.0, "sv: T must be positive");
  require(sigma1 > 0.0 && sigma2 > 0.0, "sv: volatilities must be positive");
  require(v0 >= 0.0 && kappa > 0.0 && mu >= 0.0 && sigma_v > 0.0,
          "sv: variance process parameters out of range");
  require(rho > -1.0 && rho < 1.0 && std::abs(rho1) < 1.0 && std::abs(rho2) < 1.0,
          "sv: correlations must lie in (-1, 1)");
}

void VgParams::validate() const {
  require(T > 0.0, "vg: T must be positive");
  require(a_plus > 1.0, "vg: a_plus must exceed 1 (finite asset means)");
  require(a_minus > 0.0, "vg: a_minus must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "vg: alpha must lie in [0, 1]");
  require(lambda > 0.0, "vg: lambda must be positive");
}

double VgParams::mu_eff() const {
  if (!drift_correction) return 0.0;
  // b(-i) is real: 1 + (1/a_minus - 1/a_plus) - 1/(a_minus a_plus).
  const double bmi =
      1.0 + (1.0 / a_minus - 1.0 / a_plus) - 1.0 / (a_minus * a_plus);
  require(bmi > 0.0, "vg: martingale correction undefined for these rates");
  return r + lambda * std::log(bmi);
}

std::string model_tag(const Model& m) {
  switch (m.index()) {
    case 0: return "gbm";
    case 1: return "sv";
    default: return "vg";
  }
}

double model_r(const Model& m) {
  return std::visit([](const auto& p) { return p.r; }, m);
}

double model_T(const Model& m) {
  return std::visit([](const auto& p) { return p.T; }, m);
}

GbmBasketParams GbmBasketParams::uniform(double r, double T,
                                         std::vector<double> sigma,
                                         std::vector<double> delta,
                                         double rho) {
  GbmBasketParams p;
  p.r = r;
  p.T = T;
  p.sigma = std::move(sigma);
  p.delta = std::move(delta);
  const int n = p.n();
  p.corr.assign(n, std::vector<double>(n, rho));
  for (int j = 0; j < n; ++j) p.corr[j][j] = 1.0;
  return p;
}

void GbmBasketParams::validate() const {
  const size_t n = sigma.size();
  require(n >= 2, "basket: need at least two assets");
  require(delta.size() == n && corr.size() == n, "basket: size mismatch");
  require(T > 0.0, "basket: T must be positive");
  for (size_t j = 0; j < n; ++j) {
    require(sigma[j] > 0.0, "basket: volatilities must be positive");
    require(corr[j].size() == n, "basket: correlation matrix must be square");
    require(corr[j][j] == 1.0, "basket: unit diagonal required");
    for (size_t k = 0; k < j; ++k) {
      require(corr[j][k] == corr[k][j], "basket: correlation must be symmetric");
      require(std::abs(corr[j][k]) <= 1.0, "basket: correlation out of range");
    }
  }
}

cplx phi_gbm_basket(const GbmBasketParams& p, std::span<const cplx> u) {
  cplx drift = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    const double mj = p.r - p.delta[j] - 0.5 * p.sigma[j] * p.sigma[j];
    drift += u[j] * mj;
  }
  cplx quad = 0.0;
  for (size_t j = 0; j < u.size(); ++j)
    for (size_t k = 0; k < u.size(); ++k)
      quad += u[j] * u[k] * (p.sigma[j] * p.sigma[k] * p.corr[j][k]);
  return std::exp(kI * drift * p.T - 0.5 * quad * p.T);
}

cplx phi_gbm(const GbmParams& p, cplx u1, cplx u2) {
  // Delegates to the basket form so the two-asset case and the n = 2 basket
  // are the same arithmetic.
  GbmBasketParams b;
  b.r = p.r;
  b.T = p.T;
  b.sigma = {p.sigma1, p.sigma2};
  b.delta = {p.delta1, p.delta2};
  b.corr = {{1.0, p.rho}, {p.rho, 1.0}};
  const cplx u[2] = {u1, u2};
  return phi_gbm_basket(b, u);
}

cplx phi_sv(const SvParams& p, cplx u1, cplx u2) {
  const cplx s1u1 = p.sigma1 * u1;
  const cplx s2u2 = p.sigma2 * u2;
  const cplx zeta =
      -0.5 * (s1u1 * s1u1 + s2u2 * s2u2 + 2.0 * p.rho * s1u1 * s2u2) -
      0.5 * kI * (p.sigma1 * p.sigma1 * u1 + p.sigma2 * p.sigma2 * u2);
  const cplx gam =
      p.kappa - kI * (p.rho1 * p.sigma1 * u1 + p.rho2 * p.sigma2 * u2) * p.sigma_v;
  const cplx theta = std::sqrt(gam * gam - 2.0 * p.sigma_v * p.sigma_v * zeta);
  const cplx em_t = std::exp(-theta * p.T);
  const cplx den_t = 2.0 * theta - (theta - gam) * (1.0 - em_t);
  const cplx den_a =
      p.sv_denominator_T ? den_t
                         : 2.0 * theta - (theta - gam) * (1.0 - std::exp(-theta));
  const cplx a = 2.0 * zeta * (1.0 - em_t) / den_a;
  const cplx drift =
      kI * (u1 * (p.r - p.delta1) + u2 * (p.r - p.delta2)) * p.T;
  const cplx logden = std::log(den_t / (2.0 * theta));
  const double c = p.kappa * p.mu / (p.sigma_v * p.sigma_v);
  return std::exp(a * p.v0 + drift - c * (2.0 * logden + (theta - gam) * p.T));
}

cplx vg_b(const VgParams& p, cplx w) {
  return 1.0 + kI * (1.0 / p.a_minus - 1.0 / p.a_plus) * w +
         w * w / (p.a_minus * p.a_plus);
}

void vg_check_strip(const VgParams& p, double im1, double im2) {
  const double lo = -p.a_plus, hi = p.a_minus;
  auto inside = [&](double e) { return e > lo && e < hi; };
  if (!inside(im1) || !inside(im2) || !inside(im1 + im2))
    throw ContourError(
        "vg: contour displacement outside the analyticity strip (-a_plus, a_minus)");
}

cplx phi_vg(const VgParams& p, cplx u1, cplx u2) {
  vg_check_strip(p, u1.imag(), u2.imag());
  const double lt = p.lambda * p.T;
  const cplx core = std::exp(-p.alpha * lt * std::log(vg_b(p, u1 + u2)) -
                             (1.0 - p.alpha) * lt *
                                 (std::log(vg_b(p, u1)) + std::log(vg_b(p, u2))));
  return core * std::exp(kI * (u1 + u2) * (p.mu_eff() * p.T));
}

cplx phi(const Model& m, cplx u1, cplx u2) {
  return std::visit(
      [&](const auto& p) -> cplx {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GbmParams>) return phi_gbm(p, u1, u2);
        else if constexpr (std::is_same_v<P, SvParams>) return phi_sv(p, u1, u2);
        else return phi_vg(p, u1, u2);
      },
      m);
}

Greek greek_from_string(const std::string& name) {
  if (name == "delta1") return Greek::delta1;
  if (name == "delta2") return Greek::delta2;
  if (name == "theta") return Greek::theta;
  if (name == "vega1") return Greek::vega1;
  if (name == "vega2") return Greek::vega2;
  if (name == "rho_corr") return Greek::rho_corr;
  throw UnsupportedGreek("unknown greek: " + name);
}

std::string greek_name(Greek g) {
  switch (g) {
    case Greek::delta1: return "delta1";
    case Greek::delta2: return "delta2";
    case Greek::theta: return "theta";
    case Greek::vega1: return "vega1";
    case Greek::vega2: return "vega2";
    default: return "rho_corr";
  }
}

cplx greek_multiplier_gbm(const GbmParams& p, Greek g, cplx u1, cplx u2) {
  switch (g) {
    case Greek::delta1:
      return kI * u1;
    case Greek::delta2:
      return kI * u2;
    case Greek::theta: {
      // d/dT of the discounted transform integrand: discount, drift and
      // covariance terms. The sign convention is d(price)/dT.
      const double m1 = p.r - p.delta1 - 0.5 * p.sigma1 * p.sigma1;
      const double m2 = p.r - p.delta2 - 0.5 * p.sigma2 * p.sigma2;
      const cplx quad = p.sigma1 * p.sigma1 * u1 * u1 +
                        p.sigma2 * p.sigma2 * u2 * u2 +
                        2.0 * p.rho * p.sigma1 * p.sigma2 * u1 * u2;
      return -p.r + kI * (u1 * m1 + u2 * m2) - 0.5 * quad;
    }
    case Greek::vega1:
      return -p.T * (kI * p.sigma1 * u1 + p.sigma1 * u1 * u1 +
                     p.rho * p.sigma2 * u1 * u2);
    case Greek::vega2:
      return -p.T * (kI * p.sigma2 * u2 + p.sigma2 * u2 * u2 +
                     p.rho * p.sigma1 * u1 * u2);
    case Greek::rho_corr:
      return -p.T * p.sigma1 * p.sigma2 * u1 * u2;
  }
  throw UnsupportedGreek("unreachable greek enum value");
}

}  // namespace spreadfft
