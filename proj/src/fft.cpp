#include "fft.hpp"

#include <map>
#include <mutex>
#include <new>

namespace mouseleak::detail {

namespace {

// The FFTW planner is not thread safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan shared_plan(std::size_t n, double* in, fftw_complex* out) {
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(planner_mutex());
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out,
                                     FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  plans.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
  out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins()));
  if (in_ == nullptr || out_ == nullptr) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
  plan_ = shared_plan(n_, in_, out_);
}

RealFft::~RealFft() {
  fftw_free(in_);
  fftw_free(out_);
}

std::span<const std::complex<double>> RealFft::execute() {
  fftw_execute_dft_r2c(plan_, in_, out_);
  return {reinterpret_cast<const std::complex<double>*>(out_), bins()};
}

}  // namespace mouseleak::detail
