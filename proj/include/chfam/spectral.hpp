#pragma once

// Periodic pseudospectral machinery on [-L, L).
//
// Transform convention: a field with node values f_i, x_i = -L + i*dx, is
// represented by the normalized real-to-complex DFT
//
//     f(x) = sum_j c_j exp(i k_j (x + L)),   k_j = pi j / L,
//
// with j = 0..N/2 stored (the negative half is the complex conjugate). The
// full wavenumber list returned by Grid::wavenumbers() uses the ordering
// 0, 1, ..., N/2, -(N/2 - 1), ..., -1 (times pi/L), i.e. the Nyquist mode is
// listed with a positive sign. Odd-order derivative multipliers zero the
// Nyquist mode; even-order ones keep it.
//
// The truncation of the real line to a periodic interval introduces an
// aliasing error of the order of the data's boundary values (e^{-L} for
// exponentially decaying profiles). Callers pick L so that this is below
// their tolerance.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "chfam/error.hpp"

namespace chfam {

using Spectrum = std::vector<std::complex<double>>;

class FftPlan;

/// Uniform periodic grid on [-L, L) with its spectral wavenumbers.
class Grid {
 public:
  Grid(int num_points, double half_length);

  int size() const noexcept { return impl_->num_points; }
  double half_length() const noexcept { return impl_->half_length; }
  double length() const noexcept { return 2.0 * impl_->half_length; }
  double spacing() const noexcept { return impl_->spacing; }
  /// Number of stored complex modes, N/2 + 1.
  int num_modes() const noexcept { return impl_->num_points / 2 + 1; }
  /// Wavenumber of stored mode j (0 <= j <= N/2).
  double mode_wavenumber(int j) const noexcept { return impl_->dk * j; }

  double node(int i) const noexcept { return impl_->nodes[static_cast<std::size_t>(i)]; }
  std::span<const double> nodes() const noexcept { return impl_->nodes; }
  std::span<const double> wavenumbers() const noexcept { return impl_->wavenumbers; }

  /// Index of the node nearest to x (after periodic wrapping).
  int nearest_node(double x) const noexcept;

  const FftPlan& fft() const noexcept { return *impl_->plan; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.impl_ == b.impl_ ||
           (a.size() == b.size() && a.half_length() == b.half_length());
  }

 private:
  struct Impl {
    int num_points;
    double half_length;
    double spacing;
    double dk;
    std::vector<double> nodes;
    std::vector<double> wavenumbers;
    std::shared_ptr<const FftPlan> plan;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Throws InvalidArgument for odd or too small num_points, or half_length <= 0.
Grid make_grid(int num_points, double half_length);

/// Real samples of a function on a Grid. Entries are always finite: the
/// constructor throws NonFiniteError otherwise.
class Field {
 public:
  explicit Field(Grid grid);  // zero field
  Field(Grid grid, std::vector<double> values);

  template <class F>
  static Field sample(const Grid& grid, F&& fn) {
    std::vector<double> v(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = fn(grid.node(i));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  double operator[](int i) const noexcept { return values_[static_cast<std::size_t>(i)]; }
  double x(int i) const noexcept { return grid_.node(i); }

  double max_abs() const noexcept;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);

/// Max-norm of a - b; grids must match.
double max_abs_diff(const Field& a, const Field& b);

// ---------------------------------------------------------------------------
// Transforms

Spectrum forward_transform(const Field& f);
Field inverse_transform(const Grid& grid, Spectrum coeffs);

// ---------------------------------------------------------------------------
// Fourier multipliers

Field spectral_derivative(const Field& f);
Field spectral_second_derivative(const Field& f);
/// (1 - d^2/dx^2) f.
Field helmholtz(const Field& f);
/// (1 - d^2/dx^2)^{-1} f, multiplier 1/(1+k^2).
Field helmholtz_inverse(const Field& f);
/// d/dx (1 - d^2/dx^2)^{-1} f, multiplier ik/(1+k^2).
Field dx_helmholtz_inverse(const Field& f);

// ---------------------------------------------------------------------------
// Dealiasing

enum class DealiasRule {
  none,
  two_thirds,  // keep |j| < N/3
  strict,      // keep |j| < N/(n+2), exact for degree n+1 products
};

struct Dealias {
  DealiasRule rule = DealiasRule::two_thirds;
  int model_order = 1;  // n, used by the strict rule
};

/// Largest retained mode index plus one: modes 0 <= j < cutoff are kept.
int dealias_cutoff(int num_points, const Dealias& d);

Field dealias(const Field& f, const Dealias& d = {});

// ---------------------------------------------------------------------------
// Quadrature and evaluation

/// Rectangle (= periodic trapezoid) rule: dx * sum f_i.
double quadrature(const Field& f);

/// 2L * sum_k |c_k|^2 over the full symmetric spectrum; equals quadrature(f^2).
double spectral_energy(const Field& f);

/// (2L sum_k (1+k^2)^s |c_k|^2)^{1/2}.
double sobolev_norm(const Field& f, double s);

/// Value of the trigonometric interpolant of f at an arbitrary x.
double spectral_interpolate(const Field& f, double x);
double spectral_interpolate(const Grid& grid, const Spectrum& coeffs, double x);

// ---------------------------------------------------------------------------
// Direct Green-function convolution (oracle for the multipliers above)

enum class GreenKernel {
  g,     // e^{-|x|}/2
  dx_g,  // -sgn(x) e^{-|x|}/2
};

struct BoundaryPolicy {
  double threshold = 1e-12;  // relative to max|f|
  bool strict = false;       // throw BoundaryDecayError instead of warning
};

/// True if |f| at the two end nodes is below threshold * max(1, max|f|).
bool boundary_decayed(const Field& f, double threshold);

/// Applies the policy: warns on stderr or throws BoundaryDecayError.
void check_boundary_decay(const Field& f, const BoundaryPolicy& policy, const char* what);

/// (kernel * f)(x_i) by quadrature over the truncated, non-periodized domain.
/// The integral is split at y = x_i and each half uses the trapezoid rule
/// with Gregory end corrections at the kernel's kink, so the result is
/// high-order accurate and independent of the FFT path.
Field green_convolve(const Field& f, GreenKernel kernel, const BoundaryPolicy& policy = {});

/// Correction weights c_0..c_{p-1} added to trapezoid weights at one end of a
/// half-line integral, giving order-p accuracy for smooth integrands.
std::vector<double> gregory_end_weights(int order);

}  // namespace chfam
