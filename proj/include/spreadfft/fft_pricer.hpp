#pragma once

#include <array>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spreadfft/char_models.hpp"
#include "spreadfft/payoff_transform.hpp"

namespace spreadfft {

// Conjugate frequency / log-price lattices. N points per axis (power of two),
// frequency spacing eta, nodes u(k) = -u_bar + k eta with u_bar = N eta / 2;
// log-price spacing eta_star = 2 pi / (N eta), nodes x(l) = -x_bar + l
// eta_star with x_bar = pi / eta. u(N/2) = x(N/2) = 0.
struct Lattice {
  int N = 256;
  double eta = 0.3125;

  static Lattice from_eta(int n, double eta);
  static Lattice from_ubar(int n, double ubar);

  double u_bar() const { return 0.5 * N * eta; }
  double eta_star() const { return 2.0 * std::numbers::pi / (N * eta); }
  double x_bar() const { return std::numbers::pi / eta; }
  double u(int k) const { return -u_bar() + k * eta; }
  double x(int l) const { return -x_bar() + l * eta_star(); }
};

enum class HFill { automatic, direct, recursive };

struct PricerOptions {
  // Fraction of the log-price span treated as usable output. Outside it the
  // contour damping amplifies inversion noise beyond meaning; validity
  // checks and clipping apply inside only. Capped at 1.
  double trust_c = 0.5;
  // Trusted values in [-tol_neg, 0) are roundoff and clip to zero. More
  // negative trusted values are kept and recorded in min_raw_value.
  double tol_neg = 1e-10;
  // Gate on max |Im| / (1 + |Re|) of the raw inversion output over the
  // trusted region, before damping is undone. A bad contour or branch breaks
  // the conjugate symmetry of the integrand and trips this at O(1).
  double residue_tol = 1e-6;
  HFill h_fill = HFill::automatic;
  int interp_degree = 8;
  // price_at: interpolate on a fixed panel instead of re-anchoring.
  bool bicubic = false;
};

// Frequency-domain integrand on the lattice, row-major N x N:
// H(k) = (-1)^{k1+k2} Phi(u(k) + i eps) Phat(u(k) + i eps)
//        e^{i (u(k) + i eps) . shift}.
// The alternating sign and the shift phase make the plain inverse DFT land on
// the log-price lattice centered at `shift`.
std::vector<cplx> build_H(const Model& m, const Lattice& lat,
                          const EpsilonShift2& eps, std::array<double, 2> shift,
                          HFill mode = HFill::automatic);

struct PricePanel {
  Lattice lat;
  EpsilonShift2 eps;
  std::array<double, 2> shift{0.0, 0.0};
  std::string model;
  double r = 0.0;
  double T = 0.0;
  double trust_c = 0.5;
  // Strike-normalized values on the shifted log-price lattice, row-major.
  std::vector<double> values;
  double max_imag_residue = 0.0;
  double min_raw_value = 0.0;

  double value_at(int l1, int l2) const;
  // Lookup by full log coordinates (shift included). The point must sit on a
  // lattice node within 1e-9 node units; DomainError otherwise.
  double value_at_x(double x1, double x2) const;
  bool in_trust(int l1, int l2) const;
};

PricePanel price_panel(const Model& m, const Lattice& lat,
                       const EpsilonShift2& eps,
                       std::array<double, 2> shift = {0.0, 0.0},
                       const PricerOptions& opt = {});

struct PriceResult {
  double price = 0.0;
  std::string method;
  double imag_residue = 0.0;
};

// Single price. Default mode re-anchors the lattice at the requested
// log-moneyness and reads the center node; bicubic mode interpolates a fixed
// zero-shift panel. RangeError if the log-moneyness leaves the trusted span.
PriceResult price_at(const Model& m, double s10, double s20, double strike,
                     const Lattice& lat, const EpsilonShift2& eps = {},
                     const PricerOptions& opt = {});

// Interpolating read of an existing panel (node hit returns the node value).
PriceResult price_at_from_panel(const PricePanel& panel, double s10,
                                double s20, double strike,
                                const PricerOptions& opt = {});

// Greek panel: same inversion with a frequency-domain multiplier folded into
// H. Lognormal model only; UnsupportedGreek otherwise. Delta panels are
// stated per unit of spot (the e^{x_j} division is applied pointwise).
PricePanel greek_panel(const Model& m, Greek g, const Lattice& lat,
                       const EpsilonShift2& eps,
                       std::array<double, 2> shift = {0.0, 0.0},
                       const PricerOptions& opt = {});

double greek_at(const Model& m, Greek g, double s10, double s20, double strike,
                const Lattice& lat, const EpsilonShift2& eps = {},
                const PricerOptions& opt = {});

// Central finite difference of price_at in the parameter matching the greek,
// displacement h relative (absolute for rho_corr at rho = 0). h = 0 is a
// DomainError.
double greek_fd(const Model& m, Greek g, double s10, double s20, double strike,
                const Lattice& lat, const EpsilonShift2& eps = {},
                const PricerOptions& opt = {}, double h = 0.01);

// Strikes priced off one panel. Lattice nodes along the payoff diagonal are
// exact strikes; requested strikes between nodes come from a sliding local
// Lagrange polynomial of the given degree in log-strike. Strikes outside the
// node span raise ExtrapolationError; spots whose log difference is not a
// whole number of lattice steps raise DomainError.
std::vector<double> interpolate_strikes(const PricePanel& panel, double s10,
                                        double s20,
                                        std::span<const double> strikes,
                                        int degree = 8);

// Convenience: re-anchored panel (anchored a few nodes above the largest
// strike) plus interpolate_strikes.
std::vector<double> price_strikes(const Model& m, double s10, double s20,
                                  std::span<const double> strikes,
                                  const Lattice& lat,
                                  const EpsilonShift2& eps = {},
                                  const PricerOptions& opt = {});

// Inverse transform of the payoff transform alone (Phi = 1, no discount):
// reconstructs the strike-normalized payoff on the lattice. End-to-end
// consistency check of transform, contour and inversion.
PricePanel payoff_reconstruction_panel(const Lattice& lat,
                                       const EpsilonShift2& eps,
                                       const PricerOptions& opt = {});

// Basket of M long legs against one short leg, strike-normalized. Axes are
// ordered (short leg, leg 1, ..., leg M); params.sigma[0] is the short leg.
struct BasketPanel {
  Lattice lat;
  EpsilonShiftM eps;
  std::vector<double> shift;
  int rank = 0;
  std::vector<double> values;  // row-major N^rank
  double max_imag_residue = 0.0;
  double value_center() const;  // node x = 0 on every axis
};

// Throws MemoryBudgetError when N^{M+1} exceeds 2^28 elements.
BasketPanel price_basket_panel(const GbmBasketParams& p, const Lattice& lat,
                               const EpsilonShiftM& eps,
                               std::span<const double> shift,
                               const PricerOptions& opt = {});

double price_basket_at(const GbmBasketParams& p, double s_tilde0,
                       std::span<const double> s0, double strike,
                       const Lattice& lat, const EpsilonShiftM& eps,
                       const PricerOptions& opt = {});

}  // namespace spreadfft
