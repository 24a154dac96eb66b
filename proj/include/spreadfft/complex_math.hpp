#pragma once

#include <complex>

#include "spreadfft/errors.hpp"

namespace spreadfft {

using cplx = std::complex<double>;

// log Gamma(z) for complex z. Direct Lanczos evaluation for Re(z) >= 0.5,
// reflection formula in log space otherwise (stable for large |Im z|; the
// imaginary part in the reflection region is branch-consistent along any
// path that stays off the real axis, but is not guaranteed to match the
// principal analytic continuation there). Throws PoleError when z is within
// 1e-14 of a non-positive integer, DomainError on non-finite input.
cplx log_gamma(cplx z);

// exp(log_gamma(z)). Throws RangeError instead of overflowing to inf.
cplx gamma(cplx z);

// log B(a, b) = log_gamma(a) + log_gamma(b) - log_gamma(a + b).
cplx log_beta(cplx a, cplx b);

}  // namespace spreadfft
