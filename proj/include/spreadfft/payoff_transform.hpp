#pragma once

#include <span>
#include <vector>

#include "spreadfft/complex_math.hpp"

namespace spreadfft {

// Contour displacement for the two-asset transform: frequencies are taken at
// u + i*eps. The damped payoff is integrable iff eps2 > 0 and
// eps1 + eps2 < -1.
struct EpsilonShift2 {
  double eps1 = -3.0;
  double eps2 = 1.0;
  bool admissible() const { return eps2 > 0.0 && eps1 + eps2 < -1.0; }
};

// Displacements for the (M+1)-asset basket: one shift per long leg (all
// positive) plus the short-leg shift eps_tilde <= -1 - sum(eps).
struct EpsilonShiftM {
  std::vector<double> eps;
  double eps_tilde = -4.0;
  bool admissible() const;
  // eps_m = 2 per long leg, eps_tilde = -2 - 2M (unit slack from the
  // admissibility boundary so the dominant alias along the diagonal decays).
  static EpsilonShiftM defaults(int m);
};

// Terminal payoffs in log coordinates, strike normalized to 1.
double payoff2(double x1, double x2);
double payoffM(double x_tilde, std::span<const double> x);

// Fourier transform of payoff2 over the admissible strip:
// Gamma(i(u1+u2) - 1) Gamma(-i u2) / Gamma(i u1 + 1).
cplx phat2(cplx u1, cplx u2);

// Basket generalization, axes ordered (u_tilde, u_1, ..., u_M):
// Gamma(i(u_tilde + sum u) - 1) prod_m Gamma(-i u_m) / Gamma(i u_tilde + 1).
// M = 1 with (u_tilde, u_1) = (u1, u2) reproduces phat2 bit-for-bit.
cplx phatM(std::span<const cplx> u, cplx u_tilde);

// Decay envelope for |phat2| along the one-parameter contour
// eps2 = eps, eps1 = -1 - 2*eps (eps > 0):
// Gamma(eps) Gamma(2+eps) / Gamma(2+2eps) * [(z+eps^2)(z+(1+eps)^2)]^{-1/2}
// with z = |u|^2 / 5. Decays like 5/|u|^2 up to a constant.
double phat_bound(double u1, double u2, double eps);

}  // namespace spreadfft
