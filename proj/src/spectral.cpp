#include "chfam/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "fft_plan.hpp"

namespace chfam {

namespace {

constexpr int kMinPoints = 8;

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
}

template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& mult) {
  Spectrum c = forward_transform(f);
  const Grid& g = f.grid();
  for (int j = 0; j < g.num_modes(); ++j) c[static_cast<std::size_t>(j)] *= mult(j, g.mode_wavenumber(j));
  return inverse_transform(g, std::move(c));
}

// Small dense solve with partial pivoting; a is row-major n x n.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const auto n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= m * a[col * n + k];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int num_points, double half_length) {
  if (num_points < kMinPoints || num_points % 2 != 0) {
    std::ostringstream os;
    os << "grid size must be an even integer >= " << kMinPoints << ", got " << num_points;
    throw InvalidArgument(os.str());
  }
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw InvalidArgument("grid half-length must be positive and finite");
  }
  Impl impl;
  impl.num_points = num_points;
  impl.half_length = half_length;
  impl.spacing = 2.0 * half_length / num_points;
  impl.dk = std::numbers::pi / half_length;
  impl.nodes.resize(static_cast<std::size_t>(num_points));
  impl.wavenumbers.resize(static_cast<std::size_t>(num_points));
  for (int i = 0; i < num_points; ++i) {
    impl.nodes[static_cast<std::size_t>(i)] = -half_length + i * impl.spacing;
    const int j = i <= num_points / 2 ? i : i - num_points;
    impl.wavenumbers[static_cast<std::size_t>(i)] = impl.dk * j;
  }
  impl.plan = std::make_shared<const FftPlan>(num_points);
  impl_ = std::make_shared<const Impl>(std::move(impl));
}

int Grid::nearest_node(double x) const noexcept {
  const int n = size();
  const long i = std::lround((x + half_length()) / spacing());
  return static_cast<int>(((i % n) + n) % n);
}

Grid make_grid(int num_points, double half_length) { return Grid(num_points, half_length); }

// ---------------------------------------------------------------------------
// Field

Field::Field(Grid grid) : grid_(std::move(grid)), values_(static_cast<std::size_t>(grid_.size()), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.size())) {
    std::ostringstream os;
    os << "field has " << values_.size() << " values but the grid has " << grid_.size() << " nodes";
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os << "non-finite field value " << values_[i] << " at node " << i << " (x = " << grid_.node(static_cast<int>(i))
         << ")";
      throw NonFiniteError(os.str());
    }
  }
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.vector());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b.vector()[i];
  return Field(a.grid(), std::move(v));
}

double max_abs_diff(const Field& a, const Field& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Transforms

Spectrum forward_transform(const Field& f) {
  const Grid& g = f.grid();
  Spectrum c(static_cast<std::size_t>(g.num_modes()));
  g.fft().forward(f.vector().data(), c.data());
  const double inv_n = 1.0 / g.size();
  for (auto& z : c) z *= inv_n;
  return c;
}

Field inverse_transform(const Grid& grid, Spectrum coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(grid.num_modes()))
    throw InvalidArgument("spectrum length does not match grid");
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  grid.fft().inverse(coeffs.data(), v.data());
  return Field(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Multipliers

Field spectral_derivative(const Field& f) {
  const int nyq = f.size() / 2;
  return apply_multiplier(f, [nyq](int j, double k) {
    return j == nyq ? std::complex<double>(0.0) : std::complex<double>(0.0, k);
  });
}

Field spectral_second_derivative(const Field& f) {
  return apply_multiplier(f, [](int, double k) { return std::complex<double>(-k * k); });
}

Field helmholtz(const Field& f) {
  return apply_multiplier(f, [](int, double k) { return std::complex<double>(1.0 + k * k); });
}

Field helmholtz_inverse(const Field& f) {
  return apply_multiplier(f, [](int, double k) { return std::complex<double>(1.0 / (1.0 + k * k)); });
}

Field dx_helmholtz_inverse(const Field& f) {
  const int nyq = f.size() / 2;
  return apply_multiplier(f, [nyq](int j, double k) {
    return j == nyq ? std::complex<double>(0.0) : std::complex<double>(0.0, k / (1.0 + k * k));
  });
}

// ---------------------------------------------------------------------------
// Dealiasing

int dealias_cutoff(int num_points, const Dealias& d) {
  int order = 0;
  switch (d.rule) {
    case DealiasRule::none:
      return num_points / 2 + 1;
    case DealiasRule::two_thirds:
      order = 3;
      break;
    case DealiasRule::strict:
      if (d.model_order < 1) throw InvalidArgument("strict dealiasing needs a model order >= 1");
      order = d.model_order + 2;
      break;
  }
  return (num_points + order - 1) / order;
}

Field dealias(const Field& f, const Dealias& d) {
  const int cutoff = dealias_cutoff(f.size(), d);
  if (cutoff > f.size() / 2) return f;
  Spectrum c = forward_transform(f);
  for (std::size_t j = static_cast<std::size_t>(cutoff); j < c.size(); ++j) c[j] = 0.0;
  return inverse_transform(f.grid(), std::move(c));
}

// ---------------------------------------------------------------------------
// Quadrature and evaluation

double quadrature(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().spacing();
}

double spectral_energy(const Field& f) {
  const Spectrum c = forward_transform(f);
  const int nyq = f.size() / 2;
  double s = std::norm(c[0]) + std::norm(c[static_cast<std::size_t>(nyq)]);
  for (int j = 1; j < nyq; ++j) s += 2.0 * std::norm(c[static_cast<std::size_t>(j)]);
  return f.grid().length() * s;
}

double sobolev_norm(const Field& f, double s) {
  const Spectrum c = forward_transform(f);
  const Grid& g = f.grid();
  const int nyq = f.size() / 2;
  double acc = 0.0;
  for (int j = 0; j <= nyq; ++j) {
    const double k = g.mode_wavenumber(j);
    const double w = (j == 0 || j == nyq) ? 1.0 : 2.0;
    acc += w * std::pow(1.0 + k * k, s) * std::norm(c[static_cast<std::size_t>(j)]);
  }
  return std::sqrt(g.length() * acc);
}

double spectral_interpolate(const Grid& grid, const Spectrum& c, double x) {
  const int nyq = grid.size() / 2;
  const double xi = x + grid.half_length();
  double s = c[0].real();
  for (int j = 1; j < nyq; ++j) {
    s += 2.0 * (c[static_cast<std::size_t>(j)] * std::polar(1.0, grid.mode_wavenumber(j) * xi)).real();
  }
  s += c[static_cast<std::size_t>(nyq)].real() * std::cos(grid.mode_wavenumber(nyq) * xi);
  return s;
}

double spectral_interpolate(const Field& f, double x) {
  return spectral_interpolate(f.grid(), forward_transform(f), x);
}

// ---------------------------------------------------------------------------
// Green convolution

bool boundary_decayed(const Field& f, double threshold) {
  const double edge = std::max(std::abs(f[0]), std::abs(f[f.size() - 1]));
  return edge <= threshold * f.max_abs();
}

void check_boundary_decay(const Field& f, const BoundaryPolicy& policy, const char* what) {
  if (boundary_decayed(f, policy.threshold)) return;
  std::ostringstream os;
  os << what << ": data does not decay below " << policy.threshold
     << " (relative) at the domain boundary; periodic truncation error may dominate";
  if (policy.strict) throw BoundaryDecayError(os.str());
  std::cerr << "chfam: warning: " << os.str() << '\n';
}

std::vector<double> gregory_end_weights(int order) {
  if (order < 1) return {};
  // Bernoulli numbers B_2, B_4, ... needed up to B_order.
  static constexpr double bern[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
  if (order > 12) throw InvalidArgument("Gregory correction order above 12 not supported");
  const auto p = static_cast<std::size_t>(order);
  std::vector<double> a(p * p), b(p, 0.0);
  for (std::size_t m = 0; m < p; ++m) {
    for (std::size_t j = 0; j < p; ++j) a[m * p + j] = std::pow(static_cast<double>(j), static_cast<double>(m));
    if (m % 2 == 1) b[m] = bern[(m - 1) / 2] / static_cast<double>(m + 1);
  }
  return solve_dense(std::move(a), std::move(b));
}

Field green_convolve(const Field& f, GreenKernel kernel, const BoundaryPolicy& policy) {
  check_boundary_decay(f, policy, "green_convolve");
  constexpr int kOrder = 8;
  const Grid& grid = f.grid();
  const int n = grid.size();
  const double h = grid.spacing();
  const double left_sign = kernel == GreenKernel::g ? 0.5 : -0.5;  // y < x
  const double right_sign = 0.5;                                    // y > x

  std::vector<std::vector<double>> corr(kOrder + 1);
  for (int q = 1; q <= kOrder; ++q) corr[static_cast<std::size_t>(q)] = gregory_end_weights(q);

  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<double> integrand(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    // Left piece: y_j, j = 0..i, kernel evaluated from the y < x side.
    {
      for (int j = 0; j <= i; ++j)
        integrand[static_cast<std::size_t>(j)] = left_sign * std::exp(-(h * (i - j))) * f[j];
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += integrand[static_cast<std::size_t>(j)];
      s -= 0.5 * (integrand[0] + integrand[static_cast<std::size_t>(i)]);
      const int q = std::min(kOrder, i);
      if (q > 0) {
        const auto& c = corr[static_cast<std::size_t>(q)];
        for (int k = 0; k < q; ++k) s += c[static_cast<std::size_t>(k)] * integrand[static_cast<std::size_t>(i - k)];
      }
      total += h * s;
    }
    // Right piece: y_j, j = i..n-1, kernel evaluated from the y > x side.
    {
      for (int j = i; j < n; ++j)
        integrand[static_cast<std::size_t>(j)] = right_sign * std::exp(-(h * (j - i))) * f[j];
      double s = 0.0;
      for (int j = i; j < n; ++j) s += integrand[static_cast<std::size_t>(j)];
      s -= 0.5 * (integrand[static_cast<std::size_t>(i)] + integrand[static_cast<std::size_t>(n - 1)]);
      const int q = std::min(kOrder, n - 1 - i);
      if (q > 0) {
        const auto& c = corr[static_cast<std::size_t>(q)];
        for (int k = 0; k < q; ++k) s += c[static_cast<std::size_t>(k)] * integrand[static_cast<std::size_t>(i + k)];
      }
      total += h * s;
    }
    out[static_cast<std::size_t>(i)] = total;
  }
  return Field(grid, std::move(out));
}

}  // namespace chfam
