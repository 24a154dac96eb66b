#include "spreadfft/fft_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "spreadfft/fft_backend.hpp"

namespace spreadfft {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

using MultFn = std::function<cplx(cplx, cplx)>;

void validate_lattice(const Lattice& lat) {
  if (lat.N < 2 || (lat.N & (lat.N - 1)) != 0)
    throw DomainError("lattice: N must be a power of two >= 2");
  if (!(lat.eta > 0.0)) throw DomainError("lattice: eta must be positive");
}

int parity(int k) { return (k & 1) ? -1 : 1; }

// Per-axis pieces of H. ea carries the diagonal gamma factor indexed by
// k1 + k2; col and row carry the remaining gamma factors with the anchoring
// phase e^{i u s} and the alternating sign folded in.
struct Axis2 {
  std::vector<cplx> ea;
  std::vector<cplx> col;
  std::vector<cplx> row;
};

Axis2 make_axis2(const Lattice& lat, const EpsilonShift2& eps,
                 std::array<double, 2> shift) {
  const int n = lat.N;
  Axis2 ax;
  ax.ea.resize(2 * n - 1);
  ax.col.resize(n);
  ax.row.resize(n);
  const double re_a = -(eps.eps1 + eps.eps2) - 1.0;
  for (int m = 0; m < 2 * n - 1; ++m) {
    const double wsum = -2.0 * lat.u_bar() + m * lat.eta;
    ax.ea[m] = std::exp(log_gamma(cplx(re_a, wsum)));
  }
  for (int k = 0; k < n; ++k) {
    const double w = lat.u(k);
    const double par = parity(k);
    // 1 / Gamma(i u1 + 1), u1 = w + i eps1
    const cplx lg_c = log_gamma(cplx(1.0 - eps.eps1, w));
    ax.col[k] =
        par * std::exp(-lg_c + cplx(-eps.eps1 * shift[0], w * shift[0]));
    // Gamma(-i u2), u2 = w + i eps2
    const cplx lg_r = log_gamma(cplx(eps.eps2, -w));
    ax.row[k] =
        par * std::exp(lg_r + cplx(-eps.eps2 * shift[1], w * shift[1]));
  }
  return ax;
}

// Lognormal fill. ln Phi is a quadratic polynomial in k2 along each row with
// an exactly real k2^2 coefficient, so consecutive values follow the two-term
// recurrence phi *= ratio, ratio *= q. The recurrence restarts from a direct
// evaluation every 64 steps to keep accumulated rounding below 1e-12.
void fill_gbm_recursive(std::vector<cplx>& h, const Axis2& ax,
                        const GbmParams& p, const Lattice& lat,
                        const EpsilonShift2& eps, const MultFn& extra) {
  const int n = lat.N;
  const double eta = lat.eta;
  const double t = p.T;
  const double m1 = p.r - p.delta1 - 0.5 * p.sigma1 * p.sigma1;
  const double m2 = p.r - p.delta2 - 0.5 * p.sigma2 * p.sigma2;
  const cplx c0(-lat.u_bar(), eps.eps2);  // u2 at k2 = 0
  const double cq = -0.5 * t * p.sigma2 * p.sigma2 * eta * eta;
  const double q = std::exp(2.0 * cq);
  for (int k1 = 0; k1 < n; ++k1) {
    const cplx u1(lat.u(k1), eps.eps1);
    const cplx quad0 = p.sigma1 * p.sigma1 * u1 * u1 +
                       p.sigma2 * p.sigma2 * c0 * c0 +
                       2.0 * p.rho * p.sigma1 * p.sigma2 * u1 * c0;
    const cplx a = kI * (u1 * m1 + c0 * m2) * t - 0.5 * t * quad0;
    const cplx b = eta * (cplx(0.0, m2 * t) - t * p.sigma2 * p.sigma2 * c0 -
                          t * p.rho * p.sigma1 * p.sigma2 * u1);
    cplx phi = std::exp(a);
    cplx ratio = std::exp(b + cq);
    const cplx cf = ax.col[k1];
    for (int k2 = 0; k2 < n; ++k2) {
      if (k2 != 0 && k2 % 64 == 0) {
        const double kk = k2;
        phi = std::exp(a + b * kk + cq * kk * kk);
        ratio = std::exp(b + cq * (2.0 * kk + 1.0));
      }
      cplx v = ax.ea[k1 + k2] * cf * ax.row[k2] * phi;
      if (extra) v *= extra(u1, cplx(lat.u(k2), eps.eps2));
      h[static_cast<size_t>(k1) * n + k2] = v;
      phi *= ratio;
      ratio *= q;
    }
  }
}

template <class PhiFn>
void fill_pointwise(std::vector<cplx>& h, const Axis2& ax, const Lattice& lat,
                    const EpsilonShift2& eps, PhiFn&& phi_fn,
                    const MultFn& extra) {
  const int n = lat.N;
  for (int k1 = 0; k1 < n; ++k1) {
    const cplx u1(lat.u(k1), eps.eps1);
    const cplx cf = ax.col[k1];
    for (int k2 = 0; k2 < n; ++k2) {
      const cplx u2(lat.u(k2), eps.eps2);
      cplx v = ax.ea[k1 + k2] * cf * ax.row[k2] * phi_fn(u1, u2);
      if (extra) v *= extra(u1, u2);
      h[static_cast<size_t>(k1) * n + k2] = v;
    }
  }
}

// Stochastic-variance fill. The affine exponent contains log of
// D = den / (2 theta); the principal branch can jump when D crosses the
// negative real axis along a row, so the argument is unwrapped by continuity
// in k2. An argument step above pi/2 between neighbors means the winding can
// no longer be resolved at this eta.
void fill_sv(std::vector<cplx>& h, const Axis2& ax, const Lattice& lat,
             const EpsilonShift2& eps, const SvParams& p) {
  const int n = lat.N;
  const double t = p.T;
  const double cm = p.kappa * p.mu / (p.sigma_v * p.sigma_v);
  for (int k1 = 0; k1 < n; ++k1) {
    const cplx u1(lat.u(k1), eps.eps1);
    const cplx s1u1 = p.sigma1 * u1;
    const cplx cf = ax.col[k1];
    double cont_arg = 0.0;
    cplx prev_d;
    for (int k2 = 0; k2 < n; ++k2) {
      const cplx u2(lat.u(k2), eps.eps2);
      const cplx s2u2 = p.sigma2 * u2;
      const cplx zeta =
          -0.5 * (s1u1 * s1u1 + s2u2 * s2u2 + 2.0 * p.rho * s1u1 * s2u2) -
          0.5 * kI * (p.sigma1 * p.sigma1 * u1 + p.sigma2 * p.sigma2 * u2);
      const cplx gam =
          p.kappa -
          kI * (p.rho1 * p.sigma1 * u1 + p.rho2 * p.sigma2 * u2) * p.sigma_v;
      const cplx theta =
          std::sqrt(gam * gam - 2.0 * p.sigma_v * p.sigma_v * zeta);
      const cplx em_t = std::exp(-theta * t);
      const cplx den_t = 2.0 * theta - (theta - gam) * (1.0 - em_t);
      const cplx den_a = p.sv_denominator_T
                             ? den_t
                             : 2.0 * theta -
                                   (theta - gam) * (1.0 - std::exp(-theta));
      const cplx aa = 2.0 * zeta * (1.0 - em_t) / den_a;
      const cplx d = den_t / (2.0 * theta);
      const double pa = std::arg(d);
      if (k2 == 0) {
        cont_arg = pa;
      } else {
        const double step = std::arg(d / prev_d);
        if (std::abs(step) > 0.5 * kPi)
          throw BranchError(
              "sv: log argument crossed the cut between lattice neighbors; "
              "refine eta");
        cont_arg += step;
      }
      prev_d = d;
      const double wind = std::round((cont_arg - pa) / (2.0 * kPi));
      const cplx logden = std::log(d) + cplx(0.0, 2.0 * kPi * wind);
      const cplx drift =
          kI * (u1 * (p.r - p.delta1) + u2 * (p.r - p.delta2)) * t;
      const cplx phi = std::exp(aa * p.v0 + drift -
                                cm * (2.0 * logden + (theta - gam) * t));
      h[static_cast<size_t>(k1) * n + k2] = ax.ea[k1 + k2] * cf * ax.row[k2] * phi;
    }
  }
}

void fill_vg(std::vector<cplx>& h, const Axis2& ax, const Lattice& lat,
             const EpsilonShift2& eps, const VgParams& p) {
  vg_check_strip(p, eps.eps1, eps.eps2);
  const int n = lat.N;
  const double lt = p.lambda * p.T;
  const double al = p.alpha;
  const double mu_t = p.mu_eff() * p.T;
  for (int k1 = 0; k1 < n; ++k1) {
    const cplx u1(lat.u(k1), eps.eps1);
    const cplx lb1 = std::log(vg_b(p, u1));
    const cplx cf = ax.col[k1];
    for (int k2 = 0; k2 < n; ++k2) {
      const cplx u2(lat.u(k2), eps.eps2);
      const cplx us = u1 + u2;
      const cplx lnphi = -al * lt * std::log(vg_b(p, us)) -
                         (1.0 - al) * lt * (lb1 + std::log(vg_b(p, u2))) +
                         kI * us * mu_t;
      h[static_cast<size_t>(k1) * n + k2] =
          ax.ea[k1 + k2] * cf * ax.row[k2] * std::exp(lnphi);
    }
  }
}

std::vector<cplx> build_H_mult(const Model& m, const Lattice& lat,
                               const EpsilonShift2& eps,
                               std::array<double, 2> shift, HFill mode,
                               const MultFn& extra) {
  validate_lattice(lat);
  if (!eps.admissible())
    throw ContourError("contour: need eps2 > 0 and eps1 + eps2 < -1");
  const Axis2 ax = make_axis2(lat, eps, shift);
  std::vector<cplx> h(static_cast<size_t>(lat.N) * lat.N);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GbmParams>) {
          if (mode == HFill::direct)
            fill_pointwise(
                h, ax, lat, eps,
                [&](cplx u1, cplx u2) { return phi_gbm(p, u1, u2); }, extra);
          else
            fill_gbm_recursive(h, ax, p, lat, eps, extra);
        } else if constexpr (std::is_same_v<P, SvParams>) {
          fill_sv(h, ax, lat, eps, p);
        } else {
          fill_vg(h, ax, lat, eps, p);
        }
      },
      m);
  return h;
}

// Shared inversion tail: scale, damp, validate and clip into a PricePanel.
// delta_axis >= 0 additionally divides by e^{x_j + s_j} along that axis
// (per-spot statement of the delta panels). price_like enables the
// nonnegativity clip; greek panels are legitimately signed.
PricePanel finish_panel(std::vector<cplx> b, const Lattice& lat,
                        const EpsilonShift2& eps, std::array<double, 2> shift,
                        const PricerOptions& opt, std::string tag, double r,
                        double t, bool price_like, int delta_axis) {
  const int n = lat.N;
  PricePanel panel;
  panel.lat = lat;
  panel.eps = eps;
  panel.shift = shift;
  panel.model = std::move(tag);
  panel.r = r;
  panel.T = t;
  panel.trust_c = std::min(opt.trust_c, 1.0);
  panel.values.resize(static_cast<size_t>(n) * n);

  const double disc = std::exp(-r * t);
  const double inv_es = 1.0 / lat.eta_star();
  const double scale = disc * inv_es * inv_es;
  const double xb = lat.x_bar();
  const double trust_x = panel.trust_c * xb;

  // The shift phase folded into H carries the complex contour coordinate, so
  // its e^{-eps shift} part is already undone; only the grid coordinate needs
  // un-damping here. Delta panels divide by the full spot e^{x + shift}.
  std::vector<double> d1(n), d2(n);
  for (int l = 0; l < n; ++l) {
    const double x = lat.x(l);
    d1[l] = std::exp(-eps.eps1 * x - (delta_axis == 0 ? x + shift[0] : 0.0));
    d2[l] = std::exp(-eps.eps2 * x - (delta_axis == 1 ? x + shift[1] : 0.0));
  }

  // The residue ratio is taken on the inversion output itself, before the
  // damping factors: a contour or branch misconfiguration breaks the
  // conjugate symmetry of H and shows up there at O(1), while e^{-eps x}
  // amplification of FFT round-off toward the panel edge does not.
  double max_resid = 0.0;
  double min_raw = 0.0;
  for (int l1 = 0; l1 < n; ++l1) {
    const bool tr1 = std::abs(lat.x(l1)) <= trust_x;
    const double f1 = parity(l1) * scale * d1[l1];
    for (int l2 = 0; l2 < n; ++l2) {
      const size_t idx = static_cast<size_t>(l1) * n + l2;
      const double f = f1 * parity(l2) * d2[l2];
      double re = f * b[idx].real();
      if (tr1 && std::abs(lat.x(l2)) <= trust_x) {
        max_resid = std::max(max_resid, std::abs(b[idx].imag()) /
                                            (1.0 + std::abs(b[idx].real())));
        if (price_like && re < 0.0) {
          min_raw = std::min(min_raw, re);
          if (re >= -opt.tol_neg) re = 0.0;
        }
      }
      panel.values[idx] = re;
    }
  }
  panel.max_imag_residue = max_resid;
  panel.min_raw_value = min_raw;
  if (max_resid > opt.residue_tol)
    throw ResidueError("panel: imaginary residue " + std::to_string(max_resid) +
                       " exceeds tolerance inside the trusted region");
  return panel;
}

}  // namespace

Lattice Lattice::from_eta(int n, double eta) {
  Lattice lat{n, eta};
  validate_lattice(lat);
  return lat;
}

Lattice Lattice::from_ubar(int n, double ubar) {
  if (n < 1) throw DomainError("lattice: N must be positive");
  Lattice lat{n, 2.0 * ubar / n};
  validate_lattice(lat);
  return lat;
}

double PricePanel::value_at(int l1, int l2) const {
  const int n = lat.N;
  if (l1 < 0 || l1 >= n || l2 < 0 || l2 >= n)
    throw DomainError("panel: node index out of range");
  return values[static_cast<size_t>(l1) * n + l2];
}

bool PricePanel::in_trust(int l1, int l2) const {
  const double tx = trust_c * lat.x_bar();
  return std::abs(lat.x(l1)) <= tx && std::abs(lat.x(l2)) <= tx;
}

double PricePanel::value_at_x(double x1, double x2) const {
  const double es = lat.eta_star();
  const double t1 = (x1 - shift[0] + lat.x_bar()) / es;
  const double t2 = (x2 - shift[1] + lat.x_bar()) / es;
  const double r1 = std::round(t1);
  const double r2 = std::round(t2);
  if (std::abs(t1 - r1) > 1e-9 || std::abs(t2 - r2) > 1e-9)
    throw DomainError("panel: requested point is not a lattice node");
  return value_at(static_cast<int>(r1), static_cast<int>(r2));
}

std::vector<cplx> build_H(const Model& m, const Lattice& lat,
                          const EpsilonShift2& eps, std::array<double, 2> shift,
                          HFill mode) {
  return build_H_mult(m, lat, eps, shift, mode, nullptr);
}

PricePanel price_panel(const Model& m, const Lattice& lat,
                       const EpsilonShift2& eps, std::array<double, 2> shift,
                       const PricerOptions& opt) {
  std::visit([](const auto& p) { p.validate(); }, m);
  std::vector<cplx> h = build_H(m, lat, eps, shift, opt.h_fill);
  const int dims[2] = {lat.N, lat.N};
  ifft_inplace(h, dims);
  return finish_panel(std::move(h), lat, eps, shift, opt, model_tag(m),
                      model_r(m), model_T(m), true, -1);
}

PricePanel payoff_reconstruction_panel(const Lattice& lat,
                                       const EpsilonShift2& eps,
                                       const PricerOptions& opt) {
  validate_lattice(lat);
  if (!eps.admissible())
    throw ContourError("contour: need eps2 > 0 and eps1 + eps2 < -1");
  const Axis2 ax = make_axis2(lat, eps, {0.0, 0.0});
  const int n = lat.N;
  std::vector<cplx> h(static_cast<size_t>(n) * n);
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2)
      h[static_cast<size_t>(k1) * n + k2] = ax.ea[k1 + k2] * ax.col[k1] * ax.row[k2];
  const int dims[2] = {n, n};
  ifft_inplace(h, dims);
  return finish_panel(std::move(h), lat, eps, {0.0, 0.0}, opt, "payoff", 0.0,
                      0.0, true, -1);
}

namespace {

std::array<double, 2> log_moneyness(double s10, double s20, double strike) {
  if (!(s10 > 0.0) || !(s20 > 0.0))
    throw DomainError("price: spots must be positive");
  if (!(strike > 0.0)) throw DomainError("price: strike must be positive");
  return {std::log(s10 / strike), std::log(s20 / strike)};
}

void check_trust_range(const std::array<double, 2>& x0, const Lattice& lat,
                       const PricerOptions& opt) {
  const double xb = lat.x_bar();
  const double tx = std::min(opt.trust_c, 1.0) * xb;
  for (double x : x0) {
    if (std::abs(x) > xb)
      throw RangeError("price: log-moneyness outside the lattice span");
    if (std::abs(x) > tx)
      throw RangeError("price: log-moneyness outside the trusted region");
  }
}

}  // namespace

PriceResult price_at(const Model& m, double s10, double s20, double strike,
                     const Lattice& lat, const EpsilonShift2& eps,
                     const PricerOptions& opt) {
  const std::array<double, 2> x0 = log_moneyness(s10, s20, strike);
  check_trust_range(x0, lat, opt);
  if (opt.bicubic) {
    const PricePanel panel = price_panel(m, lat, eps, {0.0, 0.0}, opt);
    return price_at_from_panel(panel, s10, s20, strike, opt);
  }
  const PricePanel panel = price_panel(m, lat, eps, x0, opt);
  const double v = panel.value_at(lat.N / 2, lat.N / 2);
  return {strike * v, "re-anchor", panel.max_imag_residue};
}

PriceResult price_at_from_panel(const PricePanel& panel, double s10,
                                double s20, double strike,
                                const PricerOptions& opt) {
  const std::array<double, 2> x0 = log_moneyness(s10, s20, strike);
  const Lattice& lat = panel.lat;
  const double xb = lat.x_bar();
  const double tx = std::min(panel.trust_c, std::min(opt.trust_c, 1.0)) * xb;
  const double es = lat.eta_star();
  double t[2];
  for (int j = 0; j < 2; ++j) {
    const double rel = x0[j] - panel.shift[j];
    if (std::abs(rel) > tx)
      throw RangeError("price: log-moneyness outside the trusted region");
    t[j] = (rel + xb) / es;
  }
  const double r1 = std::round(t[0]);
  const double r2 = std::round(t[1]);
  if (std::abs(t[0] - r1) <= 1e-12 && std::abs(t[1] - r2) <= 1e-12) {
    const double v =
        panel.value_at(static_cast<int>(r1), static_cast<int>(r2));
    return {strike * v, "node", panel.max_imag_residue};
  }
  // 4x4 tensor-product Lagrange around the containing cell.
  int i0[2];
  double w[2][4];
  for (int j = 0; j < 2; ++j) {
    i0[j] = static_cast<int>(std::floor(t[j])) - 1;
    if (i0[j] < 0 || i0[j] + 3 >= lat.N)
      throw RangeError("price: interpolation stencil leaves the lattice");
    for (int a = 0; a < 4; ++a) {
      double num = 1.0, den = 1.0;
      for (int bq = 0; bq < 4; ++bq) {
        if (bq == a) continue;
        num *= t[j] - (i0[j] + bq);
        den *= static_cast<double>(a - bq);
      }
      w[j][a] = num / den;
    }
  }
  double v = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int bq = 0; bq < 4; ++bq)
      v += w[0][a] * w[1][bq] * panel.value_at(i0[0] + a, i0[1] + bq);
  return {strike * v, "bicubic", panel.max_imag_residue};
}

PricePanel greek_panel(const Model& m, Greek g, const Lattice& lat,
                       const EpsilonShift2& eps, std::array<double, 2> shift,
                       const PricerOptions& opt) {
  const auto* gp = std::get_if<GbmParams>(&m);
  if (!gp)
    throw UnsupportedGreek(
        "greeks: analytic multipliers exist for the lognormal model only");
  gp->validate();
  const GbmParams p = *gp;
  const MultFn mult = [p, g](cplx u1, cplx u2) {
    return greek_multiplier_gbm(p, g, u1, u2);
  };
  std::vector<cplx> h = build_H_mult(m, lat, eps, shift, opt.h_fill, mult);
  const int dims[2] = {lat.N, lat.N};
  ifft_inplace(h, dims);
  const int delta_axis =
      g == Greek::delta1 ? 0 : (g == Greek::delta2 ? 1 : -1);
  return finish_panel(std::move(h), lat, eps, shift, opt,
                      "gbm:" + greek_name(g), p.r, p.T, false, delta_axis);
}

double greek_at(const Model& m, Greek g, double s10, double s20, double strike,
                const Lattice& lat, const EpsilonShift2& eps,
                const PricerOptions& opt) {
  if (!std::holds_alternative<GbmParams>(m))
    throw UnsupportedGreek(
        "greeks: analytic multipliers exist for the lognormal model only");
  const std::array<double, 2> x0 = log_moneyness(s10, s20, strike);
  check_trust_range(x0, lat, opt);
  const PricePanel panel = greek_panel(m, g, lat, eps, x0, opt);
  const double v = panel.value_at(lat.N / 2, lat.N / 2);
  // Delta panels are already per unit of spot; the strike factor cancels.
  if (g == Greek::delta1 || g == Greek::delta2) return v;
  return strike * v;
}

double greek_fd(const Model& m, Greek g, double s10, double s20, double strike,
                const Lattice& lat, const EpsilonShift2& eps,
                const PricerOptions& opt, double h) {
  const auto* gp = std::get_if<GbmParams>(&m);
  if (!gp)
    throw UnsupportedGreek(
        "greeks: finite differences pair with the lognormal model only");
  if (h == 0.0)
    throw DomainError("greeks: finite-difference displacement must be nonzero");
  const GbmParams p = *gp;
  const auto value = [&](const GbmParams& q, double a, double b) {
    return price_at(Model(q), a, b, strike, lat, eps, opt).price;
  };
  GbmParams up = p, dn = p;
  switch (g) {
    case Greek::delta1:
      return (value(p, s10 * (1.0 + h), s20) - value(p, s10 * (1.0 - h), s20)) /
             (2.0 * s10 * h);
    case Greek::delta2:
      return (value(p, s10, s20 * (1.0 + h)) - value(p, s10, s20 * (1.0 - h))) /
             (2.0 * s20 * h);
    case Greek::theta:
      up.T = p.T * (1.0 + h);
      dn.T = p.T * (1.0 - h);
      return (value(up, s10, s20) - value(dn, s10, s20)) / (2.0 * p.T * h);
    case Greek::vega1:
      up.sigma1 = p.sigma1 * (1.0 + h);
      dn.sigma1 = p.sigma1 * (1.0 - h);
      return (value(up, s10, s20) - value(dn, s10, s20)) / (2.0 * p.sigma1 * h);
    case Greek::vega2:
      up.sigma2 = p.sigma2 * (1.0 + h);
      dn.sigma2 = p.sigma2 * (1.0 - h);
      return (value(up, s10, s20) - value(dn, s10, s20)) / (2.0 * p.sigma2 * h);
    case Greek::rho_corr:
      if (std::abs(p.rho) > 1e-12) {
        up.rho = p.rho * (1.0 + h);
        dn.rho = p.rho * (1.0 - h);
        return (value(up, s10, s20) - value(dn, s10, s20)) / (2.0 * p.rho * h);
      }
      up.rho = p.rho + h;
      dn.rho = p.rho - h;
      return (value(up, s10, s20) - value(dn, s10, s20)) / (2.0 * h);
  }
  throw UnsupportedGreek("unreachable greek enum value");
}

std::vector<double> interpolate_strikes(const PricePanel& panel, double s10,
                                        double s20,
                                        std::span<const double> strikes,
                                        int degree) {
  if (degree < 1) throw DomainError("interpolation: degree must be >= 1");
  if (!(s10 > 0.0) || !(s20 > 0.0))
    throw DomainError("interpolation: spots must be positive");
  const Lattice& lat = panel.lat;
  const int n = lat.N;
  const double es = lat.eta_star();
  const double xb = lat.x_bar();
  // Node strikes along the payoff diagonal: log K = base1 - x(l1) with
  // l2 = l1 + off. The spots must differ by a whole number of lattice steps.
  const double base1 = std::log(s10) - panel.shift[0];
  const double base2 = std::log(s20) - panel.shift[1];
  const double off_f = (base2 - base1) / es;
  const double off_r = std::round(off_f);
  if (std::abs(off_f - off_r) > 1e-9)
    throw DomainError(
        "interpolation: spots are not aligned with the lattice diagonal");
  const int off = static_cast<int>(off_r);

  const double tx = panel.trust_c * xb;
  std::vector<double> node_lk, node_px;
  for (int l1 = n - 1; l1 >= 0; --l1) {  // ascending log K
    const int l2 = l1 + off;
    if (l2 < 0 || l2 >= n) continue;
    if (std::abs(lat.x(l1)) > tx || std::abs(lat.x(l2)) > tx) continue;
    const double lk = base1 - lat.x(l1);
    node_lk.push_back(lk);
    node_px.push_back(std::exp(lk) * panel.value_at(l1, l2));
  }
  const int w = degree + 1;
  if (static_cast<int>(node_lk.size()) < w)
    throw DomainError("interpolation: not enough trusted diagonal nodes");

  std::vector<double> out;
  out.reserve(strikes.size());
  for (double k : strikes) {
    if (!(k > 0.0)) throw DomainError("interpolation: strikes must be positive");
    const double lk = std::log(k);
    if (lk < node_lk.front() - 1e-9 * es || lk > node_lk.back() + 1e-9 * es)
      throw ExtrapolationError(
          "interpolation: strike outside the span of trusted nodes");
    const auto it = std::lower_bound(node_lk.begin(), node_lk.end(), lk);
    size_t pos = static_cast<size_t>(it - node_lk.begin());
    // Node hit: return the exact node price.
    const auto near = [&](size_t i) {
      return i < node_lk.size() && std::abs(node_lk[i] - lk) <= 1e-9 * es;
    };
    if (near(pos)) {
      out.push_back(node_px[pos]);
      continue;
    }
    if (pos > 0 && near(pos - 1)) {
      out.push_back(node_px[pos - 1]);
      continue;
    }
    // Sliding window of the w nearest nodes (contiguous, clamped at ends).
    long start = static_cast<long>(pos) - w / 2;
    start = std::clamp<long>(start, 0,
                             static_cast<long>(node_lk.size()) - w);
    double acc = 0.0;
    for (int a = 0; a < w; ++a) {
      double wt = 1.0;
      for (int b = 0; b < w; ++b) {
        if (b == a) continue;
        wt *= (lk - node_lk[start + b]) /
              (node_lk[start + a] - node_lk[start + b]);
      }
      acc += wt * node_px[start + a];
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> price_strikes(const Model& m, double s10, double s20,
                                  std::span<const double> strikes,
                                  const Lattice& lat, const EpsilonShift2& eps,
                                  const PricerOptions& opt) {
  if (strikes.empty()) throw DomainError("price: no strikes given");
  double kmax = 0.0;
  for (double k : strikes) {
    if (!(k > 0.0)) throw DomainError("price: strikes must be positive");
    kmax = std::max(kmax, k);
  }
  // Anchor the panel a few nodes above the largest strike so every request
  // has a full interpolation window on both sides.
  const double anchor = kmax * std::exp(4.0 * lat.eta_star());
  const std::array<double, 2> shift = {std::log(s10 / anchor),
                                       std::log(s20 / anchor)};
  const PricePanel panel = price_panel(m, lat, eps, shift, opt);
  return interpolate_strikes(panel, s10, s20, strikes, opt.interp_degree);
}

double BasketPanel::value_center() const {
  size_t idx = 0;
  for (int j = 0; j < rank; ++j) idx = idx * lat.N + lat.N / 2;
  return values[idx];
}

BasketPanel price_basket_panel(const GbmBasketParams& p, const Lattice& lat,
                               const EpsilonShiftM& eps,
                               std::span<const double> shift,
                               const PricerOptions& opt) {
  p.validate();
  validate_lattice(lat);
  const int m = static_cast<int>(eps.eps.size());
  const int rank = m + 1;
  if (p.n() != rank)
    throw DomainError("basket: model has " + std::to_string(p.n()) +
                      " assets but the contour describes " +
                      std::to_string(rank));
  if (static_cast<int>(shift.size()) != rank)
    throw DomainError("basket: shift vector size mismatch");
  if (!eps.admissible())
    throw ContourError(
        "basket contour: need every eps_m > 0 and eps_tilde <= -1 - sum eps");

  const int n = lat.N;
  size_t total = 1;
  for (int j = 0; j < rank; ++j) {
    total *= static_cast<size_t>(n);
    if (total > (size_t{1} << 28))
      throw MemoryBudgetError("basket: grid exceeds 2^28 elements");
  }

  // Contour displacements per axis, short leg first.
  std::vector<double> ee(rank);
  ee[0] = eps.eps_tilde;
  for (int j = 1; j < rank; ++j) ee[j] = eps.eps[j - 1];
  double sum_e = 0.0;
  for (double e : ee) sum_e += e;

  // Diagonal gamma factor indexed by k_0 + ... + k_{rank-1}.
  std::vector<cplx> ea(static_cast<size_t>(rank) * (n - 1) + 1);
  for (size_t i = 0; i < ea.size(); ++i) {
    const double wsum = -rank * lat.u_bar() + static_cast<double>(i) * lat.eta;
    ea[i] = std::exp(log_gamma(cplx(-sum_e - 1.0, wsum)));
  }
  // Per-axis gamma factors with phase and alternating sign.
  std::vector<std::vector<cplx>> fac(rank, std::vector<cplx>(n));
  std::vector<std::vector<cplx>> uax(rank, std::vector<cplx>(n));
  for (int k = 0; k < n; ++k) {
    const double w = lat.u(k);
    const double par = parity(k);
    uax[0][k] = cplx(w, ee[0]);
    fac[0][k] = par * std::exp(-log_gamma(cplx(1.0 - ee[0], w)) +
                               cplx(-ee[0] * shift[0], w * shift[0]));
    for (int j = 1; j < rank; ++j) {
      uax[j][k] = cplx(w, ee[j]);
      fac[j][k] = par * std::exp(log_gamma(cplx(ee[j], -w)) +
                                 cplx(-ee[j] * shift[j], w * shift[j]));
    }
  }

  // Characteristic-function pieces: quadratic form S_jk = sigma_j sigma_k
  // corr_jk T, per-axis linear terms, cross terms accumulated along the
  // index recursion so each grid cell costs one complex exp.
  std::vector<std::vector<double>> s(rank, std::vector<double>(rank));
  for (int j = 0; j < rank; ++j)
    for (int k = 0; k < rank; ++k)
      s[j][k] = p.sigma[j] * p.sigma[k] * p.corr[j][k] * p.T;
  std::vector<std::vector<cplx>> aq(rank, std::vector<cplx>(n));
  for (int j = 0; j < rank; ++j) {
    const double mj = (p.r - p.delta[j] - 0.5 * p.sigma[j] * p.sigma[j]) * p.T;
    for (int k = 0; k < n; ++k) {
      const cplx u = uax[j][k];
      aq[j][k] = kI * u * mj - 0.5 * u * u * s[j][j];
    }
  }

  std::vector<cplx> h(total);
  std::vector<cplx> chosen(rank);
  const std::function<void(int, size_t, int, cplx, cplx)> fill =
      [&](int depth, size_t base, int ksum, cplx pref_exp, cplx pref_fac) {
        cplx cross = 0.0;
        for (int l = 0; l < depth; ++l) cross += chosen[l] * s[depth][l];
        if (depth == rank - 1) {
          for (int k = 0; k < n; ++k) {
            const cplx u = uax[depth][k];
            h[base + k] = pref_fac * fac[depth][k] * ea[ksum + k] *
                          std::exp(pref_exp + aq[depth][k] - u * cross);
          }
          return;
        }
        for (int k = 0; k < n; ++k) {
          const cplx u = uax[depth][k];
          chosen[depth] = u;
          fill(depth + 1, (base + k) * n, ksum + k,
               pref_exp + aq[depth][k] - u * cross, pref_fac * fac[depth][k]);
        }
      };
  fill(0, 0, 0, cplx(0.0), cplx(1.0));

  std::vector<int> dims(rank, n);
  ifft_inplace(h, dims);

  BasketPanel panel;
  panel.lat = lat;
  panel.eps = eps;
  panel.shift.assign(shift.begin(), shift.end());
  panel.rank = rank;
  panel.values.resize(total);

  const double inv_es = 1.0 / lat.eta_star();
  double scale = std::exp(-p.r * p.T);
  for (int j = 0; j < rank; ++j) scale *= inv_es;
  const double trust_x = std::min(opt.trust_c, 1.0) * lat.x_bar();
  // As in the two-asset extraction: the folded shift phase already carries
  // e^{-eps shift}, so only the grid coordinate is un-damped.
  std::vector<std::vector<double>> damp(rank, std::vector<double>(n));
  for (int j = 0; j < rank; ++j)
    for (int l = 0; l < n; ++l) damp[j][l] = std::exp(-ee[j] * lat.x(l));

  double max_resid = 0.0;
  const std::function<void(int, size_t, double, bool)> extract =
      [&](int depth, size_t base, double f, bool trusted) {
        if (depth == rank) {
          double re = f * h[base].real();
          if (trusted) {
            max_resid = std::max(max_resid, std::abs(h[base].imag()) /
                                                (1.0 + std::abs(h[base].real())));
            if (re < 0.0 && re >= -opt.tol_neg) re = 0.0;
          }
          panel.values[base] = re;
          return;
        }
        for (int l = 0; l < n; ++l) {
          extract(depth + 1, base * n + l, f * parity(l) * damp[depth][l],
                  trusted && std::abs(lat.x(l)) <= trust_x);
        }
      };
  extract(0, 0, scale, true);
  panel.max_imag_residue = max_resid;
  if (max_resid > opt.residue_tol)
    throw ResidueError("basket panel: imaginary residue " +
                       std::to_string(max_resid) +
                       " exceeds tolerance inside the trusted region");
  return panel;
}

double price_basket_at(const GbmBasketParams& p, double s_tilde0,
                       std::span<const double> s0, double strike,
                       const Lattice& lat, const EpsilonShiftM& eps,
                       const PricerOptions& opt) {
  if (!(strike > 0.0)) throw DomainError("basket: strike must be positive");
  if (!(s_tilde0 > 0.0)) throw DomainError("basket: spots must be positive");
  for (double sp : s0)
    if (!(sp > 0.0)) throw DomainError("basket: spots must be positive");
  if (s0.size() != eps.eps.size())
    throw DomainError("basket: spot count does not match contour shifts");
  std::vector<double> shift(s0.size() + 1);
  shift[0] = std::log(s_tilde0 / strike);
  for (size_t j = 0; j < s0.size(); ++j) shift[j + 1] = std::log(s0[j] / strike);
  const BasketPanel panel = price_basket_panel(p, lat, eps, shift, opt);
  return strike * panel.value_center();
}

}  // namespace spreadfft
