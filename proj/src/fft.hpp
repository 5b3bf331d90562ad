#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

namespace mouseleak::detail {

/// Real-to-complex forward DFT of a fixed length, backed by FFTW.
///
/// Plans are shared per length; each instance owns its own buffers so
/// instances can run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// Input buffer of size() reals; fill before calling execute().
  std::span<double> input() noexcept { return {in_, n_}; }

  /// Unnormalized X[k] = sum_n x[n] exp(-2 pi i k n / N), k in [0, N/2].
  std::span<const std::complex<double>> execute();

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace mouseleak::detail
