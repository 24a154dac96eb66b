#include "spreadfft/payoff_transform.hpp"

#include <algorithm>
#include <cmath>

namespace spreadfft {

bool EpsilonShiftM::admissible() const {
  if (eps.empty()) return false;
  double sum = 0.0;
  for (double e : eps) {
    if (e <= 0.0) return false;
    sum += e;
  }
  return eps_tilde <= -1.0 - sum;
}

EpsilonShiftM EpsilonShiftM::defaults(int m) {
  EpsilonShiftM s;
  s.eps.assign(static_cast<size_t>(m), 2.0);
  s.eps_tilde = -2.0 - 2.0 * m;
  return s;
}

double payoff2(double x1, double x2) {
  return std::max(std::exp(x1) - std::exp(x2) - 1.0, 0.0);
}

double payoffM(double x_tilde, std::span<const double> x) {
  double v = std::exp(x_tilde) - 1.0;
  for (double xm : x) v -= std::exp(xm);
  return std::max(v, 0.0);
}

cplx phat2(cplx u1, cplx u2) {
  const cplx i(0.0, 1.0);
  return std::exp(log_gamma(i * (u1 + u2) - 1.0) + log_gamma(-i * u2) -
                  log_gamma(i * u1 + 1.0));
}

cplx phatM(std::span<const cplx> u, cplx u_tilde) {
  const cplx i(0.0, 1.0);
  // Accumulation order matches phat2 exactly so the M = 1 case is
  // bit-identical: numerator sum first, then the denominator subtraction.
  cplx s = u_tilde;
  for (cplx um : u) s += um;
  cplx acc = log_gamma(i * s - 1.0);
  for (cplx um : u) acc += log_gamma(-i * um);
  acc -= log_gamma(i * u_tilde + 1.0);
  return std::exp(acc);
}

double phat_bound(double u1, double u2, double eps) {
  if (eps <= 0.0) throw DomainError("phat_bound: eps must be positive");
  const double c =
      std::exp(std::lgamma(eps) + std::lgamma(2.0 + eps) - std::lgamma(2.0 + 2.0 * eps));
  const double z = (u1 * u1 + u2 * u2) / 5.0;
  const double q = (z + eps * eps) * (z + (1.0 + eps) * (1.0 + eps));
  return c / std::sqrt(q);
}

}  // namespace spreadfft
