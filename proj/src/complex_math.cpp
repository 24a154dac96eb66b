#include "spreadfft/complex_math.hpp"

#include <cmath>
#include <numbers>

namespace spreadfft {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
constexpr double kPoleTol = 1e-14;
// exp() overflows past ~709.78; leave a little headroom.
constexpr double kExpOverflow = 709.0;

// Lanczos approximation, g = 7, 9 coefficients. Relative error ~1e-13 over
// the half-plane Re(z) >= 0.5, which covers every argument the transform
// assembly produces after reflection.
constexpr double kG = 7.0;
constexpr double kCoef[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

bool near_nonpositive_integer(cplx z) {
  if (z.real() > 0.5) return false;
  const double nearest = std::round(z.real());
  return nearest <= 0.0 && std::abs(z.real() - nearest) <= kPoleTol &&
         std::abs(z.imag()) <= kPoleTol;
}

// Core sum, valid for Re(z) >= 0.5 only. Written so that conjugating z
// conjugates the result bit-for-bit (every operation is conjugate-symmetric).
cplx lanczos_log_gamma(cplx z) {
  const cplx zm1 = z - 1.0;
  cplx a = kCoef[0];
  for (int k = 1; k < 9; ++k) a += kCoef[k] / (zm1 + static_cast<double>(k));
  const cplx t = zm1 + (kG + 0.5);
  return (zm1 + 0.5) * std::log(t) - t + std::log(std::sqrt(2.0 * kPi) * a);
}

// log(sin(pi z)) without overflow for large |Im z|: pull out the dominant
// exponential and log1p what remains. |e^{2 pi i z}| < 1 on the branch taken,
// so the residual log argument stays in the right half-plane.
cplx log_sin_pi(cplx z) {
  const cplx ipz = cplx(0.0, kPi) * z;
  if (z.imag() > 0.0) {
    // sin(pi z) = -e^{-i pi z} (1 - e^{2 i pi z}) / (2i)
    return -ipz + std::log(1.0 - std::exp(2.0 * ipz)) + cplx(-kLn2, kPi / 2.0);
  }
  // sin(pi z) = e^{i pi z} (1 - e^{-2 i pi z}) / (2i)
  return ipz + std::log(1.0 - std::exp(-2.0 * ipz)) + cplx(-kLn2, -kPi / 2.0);
}

}  // namespace

cplx log_gamma(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("log_gamma: non-finite argument");
  if (near_nonpositive_integer(z))
    throw PoleError("log_gamma: argument within 1e-14 of a pole");
  if (z.real() >= 0.5) return lanczos_log_gamma(z);
  // Reflection: log Gamma(z) = log(pi) - log sin(pi z) - log Gamma(1 - z).
  // 1 - z has real part > 0.5 here, so the direct sum applies.
  return std::log(kPi) - log_sin_pi(z) - lanczos_log_gamma(1.0 - z);
}

cplx gamma(cplx z) {
  const cplx lg = log_gamma(z);
  if (lg.real() > kExpOverflow)
    throw RangeError("gamma: result overflows double range");
  return std::exp(lg);
}

cplx log_beta(cplx a, cplx b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace spreadfft
