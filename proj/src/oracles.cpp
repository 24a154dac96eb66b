#include "spreadfft/oracles.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace spreadfft {

namespace {

constexpr double kPi = std::numbers::pi;

double ncdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double gbm_benchmark(const GbmParams& p, double s10, double s20,
                     double strike) {
  p.validate();
  if (!(strike > 0.0)) throw DomainError("benchmark: strike must be positive");
  if (!(s10 > 0.0) || !(s20 > 0.0))
    throw DomainError("benchmark: spots must be positive");

  const double t = p.T;
  const double mu1 = (p.r - p.delta1 - 0.5 * p.sigma1 * p.sigma1) * t;
  const double mu2 = (p.r - p.delta2 - 0.5 * p.sigma2 * p.sigma2) * t;
  const double sig2t = p.sigma2 * std::sqrt(t);
  const double beta = p.rho * p.sigma1 * std::sqrt(t);
  const double varsig = p.sigma1 * std::sqrt(t * (1.0 - p.rho * p.rho));
  const double s10l = std::log(s10);
  const double s20l = std::log(s20);

  // Conditional on the second asset's driver z, the spread call is a
  // one-dimensional lognormal call on asset 1 struck at e^{x2(z)} + K.
  struct Ctx {
    double mu1, mu2, sig2t, beta, varsig, strike, s10l, s20l;
  } ctx{mu1, mu2, sig2t, beta, varsig, strike, s10l, s20l};

  gsl_function f;
  f.params = &ctx;
  f.function = [](double z, void* vp) -> double {
    const auto& c = *static_cast<const Ctx*>(vp);
    const double kappa = std::exp(c.s20l + c.mu2 + c.sig2t * z) + c.strike;
    const double m1 = c.s10l + c.mu1 + c.beta * z;
    const double d1 = (m1 - std::log(kappa) + c.varsig * c.varsig) / c.varsig;
    const double d2 = d1 - c.varsig;
    const double inner =
        std::exp(m1 + 0.5 * c.varsig * c.varsig) * ncdf(d1) - kappa * ncdf(d2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
    return pdf * inner;
  };

  gsl_set_error_handler_off();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
  if (!ws) throw Error("benchmark: workspace allocation failed");
  double result = 0.0, abserr = 0.0;
  const int status =
      gsl_integration_qag(&f, -12.0, 12.0, 1e-13, 1e-13, 2000,
                          GSL_INTEG_GAUSS61, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  // GSL flags roundoff saturation even when the estimate is converged; the
  // certified error bound is the acceptance test.
  if (!std::isfinite(result) || abserr > 1e-10)
    throw QuadratureError("benchmark: quadrature error " +
                          std::to_string(abserr) +
                          " exceeds 1e-10 (status " + std::to_string(status) +
                          ")");
  return std::exp(-p.r * t) * result;
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Normal and gamma variates on top of mt19937_64. Box-Muller with the
// second deviate cached; Marsaglia-Tsang squeeze for gamma, with the
// shape < 1 boost G(a) = G(a+1) U^{1/a}.
struct Rng {
  std::mt19937_64 eng;
  double cached = 0.0;
  bool has_cached = false;

  explicit Rng(uint64_t seed) : eng(seed) {}

  double uniform() {  // (0, 1]
    return (static_cast<double>(eng() >> 11) + 1.0) * 0x1p-53;
  }

  double normal() {
    if (has_cached) {
      has_cached = false;
      return cached;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rr = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    cached = rr * std::sin(a);
    has_cached = true;
    return rr * std::cos(a);
  }

  double gamma_draw(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma_draw(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }
};

struct Partial {
  double sum = 0.0;
  double sumsq = 0.0;
  long long n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
};

Partial merge(const Partial& a, const Partial& b) {
  return {a.sum + b.sum, a.sumsq + b.sumsq, a.n + b.n};
}

// Pairwise binary-tree reduction keeps the summation order independent of
// chunk sizes and bounds roundoff growth.
Partial reduce_tree(std::span<const Partial> parts) {
  if (parts.size() == 1) return parts[0];
  const size_t mid = parts.size() / 2;
  return merge(reduce_tree(parts.subspan(0, mid)),
               reduce_tree(parts.subspan(mid)));
}

McResult partial_to_result(const Partial& p) {
  McResult r;
  if (p.n == 0) return r;
  r.price = p.sum / static_cast<double>(p.n);
  if (p.n > 1) {
    const double var =
        (p.sumsq - p.sum * p.sum / static_cast<double>(p.n)) /
        static_cast<double>(p.n - 1);
    r.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(p.n));
  }
  return r;
}

constexpr int kChunks = 256;

// Each chunk owns an independent generator; sweep(rng, count, chunk_index)
// must add `count` samples to every output slot of that chunk.
template <class SweepFn>
std::vector<Partial> run_chunks(const McConfig& cfg, size_t n_out,
                                SweepFn&& sweep) {
  if (cfg.n_paths < 1) throw DomainError("mc: n_paths must be positive");
  if (cfg.n_steps < 1) throw DomainError("mc: n_steps must be positive");
  const long long total =
      cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;  // samples (pairs)
  if (total < 1)
    throw DomainError("mc: antithetic mode needs at least two paths");
  std::vector<std::vector<Partial>> parts(
      kChunks, std::vector<Partial>(n_out));
  const long long base = total / kChunks;
  const long long rem = total % kChunks;
  for (int c = 0; c < kChunks; ++c) {
    const long long count = base + (c < rem ? 1 : 0);
    if (count == 0) continue;
    Rng rng(splitmix64(cfg.seed + static_cast<uint64_t>(c) *
                                      0x9E3779B97F4A7C15ULL));
    sweep(rng, count, parts[c]);
  }
  std::vector<Partial> out(n_out);
  std::vector<Partial> column(kChunks);
  for (size_t j = 0; j < n_out; ++j) {
    for (int c = 0; c < kChunks; ++c) column[c] = parts[c][j];
    out[j] = reduce_tree(column);
  }
  return out;
}

// Terminal log-return generators. Each emits one sample (or one antithetic
// pair) per call through the accumulator.

struct GbmKernel {
  const GbmParams& p;
  double m1, m2, s1t, s2t, c2, s2;
  explicit GbmKernel(const GbmParams& q) : p(q) {
    const double t = p.T;
    m1 = (p.r - p.delta1 - 0.5 * p.sigma1 * p.sigma1) * t;
    m2 = (p.r - p.delta2 - 0.5 * p.sigma2 * p.sigma2) * t;
    s1t = p.sigma1 * std::sqrt(t);
    s2t = p.sigma2 * std::sqrt(t);
    c2 = p.rho;
    s2 = std::sqrt(1.0 - p.rho * p.rho);
  }
  template <class Acc>
  void sample(Rng& rng, bool anti, Acc& acc) const {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double w1 = z1;
    const double w2 = c2 * z1 + s2 * z2;
    const double x1 = m1 + s1t * w1;
    const double x2 = m2 + s2t * w2;
    if (anti)
      acc.add_pair(x1, x2, m1 - s1t * w1, m2 - s2t * w2);
    else
      acc.add1(x1, x2);
  }
};

struct SvKernel {
  const SvParams& p;
  int steps;
  double dt, sqdt, l22, l32, l33, d1t, d2t;
  SvKernel(const SvParams& q, int n_steps) : p(q), steps(n_steps) {
    dt = p.T / steps;
    sqdt = std::sqrt(dt);
    l22 = std::sqrt(1.0 - p.rho * p.rho);
    l32 = (p.rho2 - p.rho * p.rho1) / l22;
    const double rest = 1.0 - p.rho1 * p.rho1 - l32 * l32;
    if (rest <= 0.0)
      throw DomainError("sv: correlation matrix is not positive definite");
    l33 = std::sqrt(rest);
    d1t = (p.r - p.delta1) * dt;
    d2t = (p.r - p.delta2) * dt;
  }
  template <class Acc>
  void sample(Rng& rng, bool anti, Acc& acc) const {
    double xa1 = 0.0, xa2 = 0.0, va = p.v0;
    double xb1 = 0.0, xb2 = 0.0, vb = p.v0;
    for (int s = 0; s < steps; ++s) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const double z3 = rng.normal();
      const double w1 = z1;
      const double w2 = p.rho * z1 + l22 * z2;
      const double wv = p.rho1 * z1 + l32 * z2 + l33 * z3;
      {
        // Full truncation: the clipped variance drives drift and diffusion.
        const double vp = std::max(va, 0.0);
        const double sq = std::sqrt(vp);
        xa1 += d1t - 0.5 * p.sigma1 * p.sigma1 * vp * dt +
               p.sigma1 * sq * sqdt * w1;
        xa2 += d2t - 0.5 * p.sigma2 * p.sigma2 * vp * dt +
               p.sigma2 * sq * sqdt * w2;
        va += p.kappa * (p.mu - vp) * dt + p.sigma_v * sq * sqdt * wv;
      }
      if (anti) {
        const double vp = std::max(vb, 0.0);
        const double sq = std::sqrt(vp);
        xb1 += d1t - 0.5 * p.sigma1 * p.sigma1 * vp * dt -
               p.sigma1 * sq * sqdt * w1;
        xb2 += d2t - 0.5 * p.sigma2 * p.sigma2 * vp * dt -
               p.sigma2 * sq * sqdt * w2;
        vb += p.kappa * (p.mu - vp) * dt - p.sigma_v * sq * sqdt * wv;
      }
    }
    if (anti)
      acc.add_pair(xa1, xa2, xb1, xb2);
    else
      acc.add1(xa1, xa2);
  }
};

struct VgKernel {
  const VgParams& p;
  double lam_c, lam_i, th_c, th_i, sg_c, sg_i, mu_t;
  explicit VgKernel(const VgParams& q) : p(q) {
    const double gap = 1.0 / p.a_plus - 1.0 / p.a_minus;
    const double prod = p.a_plus * p.a_minus;
    lam_c = p.alpha * p.lambda;
    lam_i = (1.0 - p.alpha) * p.lambda;
    th_c = lam_c * gap;
    th_i = lam_i * gap;
    sg_c = lam_c > 0.0 ? std::sqrt(2.0 * lam_c / prod) : 0.0;
    sg_i = lam_i > 0.0 ? std::sqrt(2.0 * lam_i / prod) : 0.0;
    mu_t = p.mu_eff() * p.T;
  }
  // One variance-gamma component: drift th per unit of gamma time plus a
  // Brownian part run on the gamma clock.
  static double component(double g, double th, double sg, double z) {
    return th * g + sg * std::sqrt(g) * z;
  }
  template <class Acc>
  void sample(Rng& rng, bool anti, Acc& acc) const {
    const double gc =
        lam_c > 0.0 ? rng.gamma_draw(lam_c * p.T) / lam_c : 0.0;
    const double g1 =
        lam_i > 0.0 ? rng.gamma_draw(lam_i * p.T) / lam_i : 0.0;
    const double g2 =
        lam_i > 0.0 ? rng.gamma_draw(lam_i * p.T) / lam_i : 0.0;
    const double zc = rng.normal();
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double yc = component(gc, th_c, sg_c, zc);
    const double x1 = mu_t + component(g1, th_i, sg_i, z1) + yc;
    const double x2 = mu_t + component(g2, th_i, sg_i, z2) + yc;
    if (anti) {
      // Shared gamma clocks, mirrored normals.
      const double ycb = component(gc, th_c, sg_c, -zc);
      const double xb1 = mu_t + component(g1, th_i, sg_i, -z1) + ycb;
      const double xb2 = mu_t + component(g2, th_i, sg_i, -z2) + ycb;
      acc.add_pair(x1, x2, xb1, xb2);
    } else {
      acc.add1(x1, x2);
    }
  }
};

struct SpreadAccum {
  std::span<const double> strikes;
  double s10, s20, disc;
  std::vector<Partial>& parts;
  void add1(double x1, double x2) {
    const double base = s10 * std::exp(x1) - s20 * std::exp(x2);
    for (size_t k = 0; k < strikes.size(); ++k)
      parts[k].add(disc * std::max(base - strikes[k], 0.0));
  }
  void add_pair(double xa1, double xa2, double xb1, double xb2) {
    const double ba = s10 * std::exp(xa1) - s20 * std::exp(xa2);
    const double bb = s10 * std::exp(xb1) - s20 * std::exp(xb2);
    for (size_t k = 0; k < strikes.size(); ++k)
      parts[k].add(0.5 * disc *
                   (std::max(ba - strikes[k], 0.0) +
                    std::max(bb - strikes[k], 0.0)));
  }
};

struct CharAccum {
  cplx u1, u2;
  std::vector<Partial>& parts;  // [0] real, [1] imaginary
  void add1(double x1, double x2) {
    const cplx v = std::exp(cplx(0.0, 1.0) * (u1 * x1 + u2 * x2));
    parts[0].add(v.real());
    parts[1].add(v.imag());
  }
  void add_pair(double xa1, double xa2, double xb1, double xb2) {
    const cplx va = std::exp(cplx(0.0, 1.0) * (u1 * xa1 + u2 * xa2));
    const cplx vb = std::exp(cplx(0.0, 1.0) * (u1 * xb1 + u2 * xb2));
    parts[0].add(0.5 * (va.real() + vb.real()));
    parts[1].add(0.5 * (va.imag() + vb.imag()));
  }
};

template <class Acc>
void sweep_model(const Model& m, const McConfig& cfg, Rng& rng,
                 long long count, Acc& acc) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GbmParams>) {
          const GbmKernel k(p);
          for (long long i = 0; i < count; ++i)
            k.sample(rng, cfg.antithetic, acc);
        } else if constexpr (std::is_same_v<P, SvParams>) {
          const SvKernel k(p, cfg.n_steps);
          for (long long i = 0; i < count; ++i)
            k.sample(rng, cfg.antithetic, acc);
        } else {
          const VgKernel k(p);
          for (long long i = 0; i < count; ++i)
            k.sample(rng, cfg.antithetic, acc);
        }
      },
      m);
}

}  // namespace

std::vector<McResult> mc_price_multi(const Model& m, double s10, double s20,
                                     std::span<const double> strikes,
                                     const McConfig& cfg) {
  std::visit([](const auto& p) { p.validate(); }, m);
  if (!(s10 > 0.0) || !(s20 > 0.0))
    throw DomainError("mc: spots must be positive");
  if (strikes.empty()) throw DomainError("mc: no strikes given");
  for (double k : strikes)
    if (!(k > 0.0)) throw DomainError("mc: strikes must be positive");
  const double disc = std::exp(-model_r(m) * model_T(m));
  const auto parts = run_chunks(
      cfg, strikes.size(), [&](Rng& rng, long long count, std::vector<Partial>& row) {
        SpreadAccum acc{strikes, s10, s20, disc, row};
        sweep_model(m, cfg, rng, count, acc);
      });
  std::vector<McResult> out(strikes.size());
  for (size_t j = 0; j < out.size(); ++j) out[j] = partial_to_result(parts[j]);
  return out;
}

McResult mc_price(const Model& m, double s10, double s20, double strike,
                  const McConfig& cfg) {
  const double ks[1] = {strike};
  return mc_price_multi(m, s10, s20, ks, cfg)[0];
}

McCharResult mc_char(const Model& m, cplx u1, cplx u2, const McConfig& cfg) {
  std::visit([](const auto& p) { p.validate(); }, m);
  if (const auto* vg = std::get_if<VgParams>(&m))
    vg_check_strip(*vg, u1.imag(), u2.imag());
  const auto parts = run_chunks(
      cfg, 2, [&](Rng& rng, long long count, std::vector<Partial>& row) {
        CharAccum acc{u1, u2, row};
        sweep_model(m, cfg, rng, count, acc);
      });
  const McResult re = partial_to_result(parts[0]);
  const McResult im = partial_to_result(parts[1]);
  McCharResult r;
  r.value = cplx(re.price, im.price);
  r.std_error = std::hypot(re.std_error, im.std_error);
  return r;
}

McResult mc_price_basket(const GbmBasketParams& p, double s_tilde0,
                         std::span<const double> s0, double strike,
                         const McConfig& cfg) {
  p.validate();
  if (!(strike > 0.0)) throw DomainError("mc: strike must be positive");
  if (!(s_tilde0 > 0.0)) throw DomainError("mc: spots must be positive");
  const int n = p.n();
  if (static_cast<int>(s0.size()) + 1 != n)
    throw DomainError("mc: basket spot count does not match the model");
  for (double sp : s0)
    if (!(sp > 0.0)) throw DomainError("mc: spots must be positive");

  // Lower-triangular Cholesky factor of the correlation matrix.
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k <= j; ++k) {
      double acc = p.corr[j][k];
      for (int q = 0; q < k; ++q) acc -= l[j][q] * l[k][q];
      if (k == j) {
        if (acc <= 0.0)
          throw DomainError("mc: correlation matrix is not positive definite");
        l[j][j] = std::sqrt(acc);
      } else {
        l[j][k] = acc / l[k][k];
      }
    }
  }

  const double t = p.T;
  const double disc = std::exp(-p.r * t);
  std::vector<double> mj(n), st(n), logs0(n);
  logs0[0] = std::log(s_tilde0);
  for (int j = 1; j < n; ++j) logs0[j] = std::log(s0[j - 1]);
  for (int j = 0; j < n; ++j) {
    mj[j] = (p.r - p.delta[j] - 0.5 * p.sigma[j] * p.sigma[j]) * t;
    st[j] = p.sigma[j] * std::sqrt(t);
  }

  const auto payoff = [&](std::span<const double> w) {
    double v = std::exp(logs0[0] + mj[0] + st[0] * w[0]);
    for (int j = 1; j < n; ++j)
      v -= std::exp(logs0[j] + mj[j] + st[j] * w[j]);
    return std::max(v - strike, 0.0);
  };

  const auto parts = run_chunks(
      cfg, 1, [&](Rng& rng, long long count, std::vector<Partial>& row) {
        std::vector<double> z(n), w(n), wn(n);
        for (long long i = 0; i < count; ++i) {
          for (int j = 0; j < n; ++j) z[j] = rng.normal();
          for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k <= j; ++k) acc += l[j][k] * z[k];
            w[j] = acc;
          }
          if (cfg.antithetic) {
            for (int j = 0; j < n; ++j) wn[j] = -w[j];
            row[0].add(0.5 * disc * (payoff(w) + payoff(wn)));
          } else {
            row[0].add(disc * payoff(w));
          }
        }
      });
  return partial_to_result(parts[0]);
}

ErrReport err_objective(std::span<const double> method,
                        std::span<const double> benchmark,
                        std::span<const std::array<double, 2>> spots,
                        bool strict) {
  if (method.size() != benchmark.size() || method.size() != spots.size())
    throw DomainError("err: input sizes do not match");
  if (method.empty()) throw DomainError("err: no points given");
  ErrReport rep;
  rep.points.reserve(method.size());
  double acc_log = 0.0, acc_abs = 0.0;
  bool log_ok = true;
  for (size_t i = 0; i < method.size(); ++i) {
    rep.points.push_back(
        {spots[i][0], spots[i][1], method[i], benchmark[i]});
    acc_abs += std::abs(method[i] - benchmark[i]);
    if (method[i] > 0.0 && benchmark[i] > 0.0) {
      acc_log += std::abs(std::log(method[i]) - std::log(benchmark[i]));
    } else if (strict) {
      throw DomainError("err: non-positive value at spot pair (" +
                        std::to_string(spots[i][0]) + ", " +
                        std::to_string(spots[i][1]) +
                        "); the log metric is undefined");
    } else {
      log_ok = false;
    }
  }
  const double n = static_cast<double>(method.size());
  rep.err = log_ok ? acc_log / n : std::numeric_limits<double>::quiet_NaN();
  rep.err_abs = acc_abs / n;
  return rep;
}

std::vector<std::array<double, 2>> err_study_grid() {
  std::vector<std::array<double, 2>> grid;
  grid.reserve(36);
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= 6; ++j)
      grid.push_back({std::exp(i * kPi / 10.0),
                      std::exp(-kPi / 5.0 + j * kPi / 10.0)});
  return grid;
}

}  // namespace spreadfft
