#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spreadfft/char_models.hpp"

namespace spreadfft {

// Reference price for the lognormal spread: condition on the second asset's
// driver, apply the one-dimensional closed form, integrate the conditioning
// variable by adaptive quadrature. No transform machinery involved.
// QuadratureError if the quadrature cannot certify 1e-10 absolute accuracy.
double gbm_benchmark(const GbmParams& p, double s10, double s20, double strike);

struct McConfig {
  long long n_paths = 100000;
  int n_steps = 1;  // time steps; only the sv model discretizes in time
  uint64_t seed = 42;
  bool antithetic = false;
};

struct McResult {
  double price = 0.0;
  double std_error = 0.0;
};

// Monte Carlo spread option prices, one result per strike, every strike
// sharing the same simulated paths. Lognormal and variance-gamma terminals
// are sampled exactly; the stochastic-variance model uses full-truncation
// Euler with cfg.n_steps steps. Paths are generated in 256 deterministic
// chunks, each with its own generator seeded from (seed, chunk); partial
// sums combine by pairwise tree reduction, so results are bit-reproducible
// for a given config. Antithetic mode averages mirrored-normal pairs and
// consumes n_paths/2 pairs.
std::vector<McResult> mc_price_multi(const Model& m, double s10, double s20,
                                     std::span<const double> strikes,
                                     const McConfig& cfg);

McResult mc_price(const Model& m, double s10, double s20, double strike,
                  const McConfig& cfg);

struct McCharResult {
  cplx value{0.0, 0.0};
  double std_error = 0.0;  // euclidean norm of the component standard errors
};

// Empirical damped characteristic function E[e^{i u . X}] of the simulated
// log returns; complex u exercises the same contour the pricer uses.
McCharResult mc_char(const Model& m, cplx u1, cplx u2, const McConfig& cfg);

// Basket reference: exact lognormal terminal sampling of all legs, payoff
// (s_tilde - sum s_m - strike)^+.
McResult mc_price_basket(const GbmBasketParams& p, double s_tilde0,
                         std::span<const double> s0, double strike,
                         const McConfig& cfg);

struct ErrPoint {
  double s10 = 0.0;
  double s20 = 0.0;
  double m_value = 0.0;
  double b_value = 0.0;
};

struct ErrReport {
  // Mean |log M_i - log B_i|. NaN in non-strict mode when any value is
  // non-positive (the log metric is undefined there).
  double err = 0.0;
  // Mean |M_i - B_i|; always defined.
  double err_abs = 0.0;
  std::vector<ErrPoint> points;
};

// strict: DomainError (naming the offending spot pair) when any method or
// benchmark value is non-positive; otherwise err is reported as NaN.
ErrReport err_objective(std::span<const double> method,
                        std::span<const double> benchmark,
                        std::span<const std::array<double, 2>> spots,
                        bool strict = true);

// The 6x6 spot grid of the error study: log s1 = i pi/10,
// log s2 = -pi/5 + j pi/10, i, j = 1..6, strike 1. Every point lies on the
// log-price lattice when u_bar is a multiple of 10 and N >= 2 u_bar * 6/10.
std::vector<std::array<double, 2>> err_study_grid();

}  // namespace spreadfft
