#include "spreadfft/fft_backend.hpp"

#include <fftw3.h>

#include <cstddef>

namespace spreadfft {

void ifft_inplace(std::span<cplx> data, std::span<const int> dims) {
  size_t total = 1;
  for (int d : dims) {
    if (d < 1) throw DomainError("ifft: dimensions must be positive");
    total *= static_cast<size_t>(d);
  }
  if (total != data.size())
    throw DomainError("ifft: buffer size does not match dimensions");

  // std::complex<double> is layout-compatible with fftw_complex.
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                                 buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan) throw Error("ifft: fftw plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const double inv = 1.0 / static_cast<double>(total);
  for (cplx& v : data) v *= inv;
}

}  // namespace spreadfft
