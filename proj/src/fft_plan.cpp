#include "fft_plan.hpp"

#include <mutex>
#include <vector>

namespace chfam {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(int n) : n_(n) {
  std::vector<double> re(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> co(static_cast<std::size_t>(n / 2 + 1));
  auto* cptr = reinterpret_cast<fftw_complex*>(co.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  r2c_ = fftw_plan_dft_r2c_1d(n, re.data(), cptr, flags);
  c2r_ = fftw_plan_dft_c2r_1d(n, cptr, re.data(), flags);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
}

void FftPlan::forward(const double* in, std::complex<double>* out) const {
  // r2c does not modify its input.
  fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void FftPlan::inverse(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace chfam
