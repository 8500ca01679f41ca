#pragma once

#include <complex>

#include <fftw3.h>

namespace chfam {

// Real-to-complex FFT pair of a fixed length. Plans are created with
// FFTW_UNALIGNED so they can be executed on any buffer; execution through the
// new-array interface is thread-safe, planning is serialized internally.
class FftPlan {
 public:
  explicit FftPlan(int n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int size() const noexcept { return n_; }

  // Unnormalized forward transform: out has n/2+1 entries.
  void forward(const double* in, std::complex<double>* out) const;
  // Unnormalized inverse; overwrites in.
  void inverse(std::complex<double>* in, double* out) const;

 private:
  int n_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace chfam
