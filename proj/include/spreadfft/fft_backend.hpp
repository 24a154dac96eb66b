#pragma once

#include <span>

#include "spreadfft/complex_math.hpp"

namespace spreadfft {

// In-place inverse DFT of a row-major multi-dimensional complex array.
// FFTW's backward transform is unnormalized; the 1/prod(dims) normalization
// is applied here and nowhere else in the codebase.
void ifft_inplace(std::span<cplx> data, std::span<const int> dims);

}  // namespace spreadfft
