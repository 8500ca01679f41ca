#pragma once

// Measured quantities connecting runs to the analytical statements: conserved
// functionals, L^p and weighted norms, tail-exponent fits, support probes and
// the kernel identities behind the unique-continuation argument.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chfam/dynamics.hpp"

namespace chfam {

// ---------------------------------------------------------------------------
// Conserved quantities and norms

/// ∫ u dx.
double conserved_H1(const Field& u);
/// ∫ (u^2 + u_x^2)/2 dx with spectral u_x.
double conserved_H(const Field& u);

/// (∫|u|^p)^{1/p} for p >= 1; p = +infinity gives max|u|.
double lp_norm(const Field& u, double p);

/// ‖u‖_{H^2} + ‖u_x‖_{H^2}, a discrete stand-in for sup-in-time Sobolev
/// bounds. Not a sharp constant.
double sobolev_bound(const Field& u);

// ---------------------------------------------------------------------------
// Exponential weights

/// φ_N(x) = 1 (x <= 0), e^{θx} (0 < x < N), e^{θN} (x >= N). θ may be 0.
double phi_weight(int N, double theta, double x) noexcept;

/// Sampled φ_N. Requires θ in (0,1), N >= 1 and θN < 700.
Field weight_phi(int N, double theta, const Grid& grid);

/// max_i |φ_i u_i|.
double weighted_sup(const Field& u, const Field& phi);

/// ‖φ_N u‖_∞ + ‖φ_N u_x‖_∞.
double weighted_sup_pair(const Field& u, const Field& phi);

/// φ_N(x) ∫ e^{-|x-y|} / φ_N(y) dy over the grid's interval [-L, L], by
/// Gauss-Legendre panels split at the breakpoints 0, x and N.
double weight_convolution_integral(double theta, int N, double x, const Grid& grid);

/// (2 - θ)/(1 - θ): the supremum over x of the weighted kernel integral as
/// N grows. It is approached at x = N; in the interior of (0, N) the
/// integral tends to 2/(1 - θ^2) instead.
double weight_convolution_bound(double theta);

/// weight_convolution_integral evaluated at x = N, where the bound is attained.
double weight_convolution_identity(double theta, int N, const Grid& grid);

// ---------------------------------------------------------------------------
// Tail fits and support probes

enum class TailSide { right, left };

inline constexpr double kTailFloor = 1e-14;
inline constexpr int kMinTailNodes = 8;

struct TailFit {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double exponent = 0.0;   // θ̂
  double intercept = 0.0;  // log-amplitude at x = 0
  double residual = 0.0;   // RMS of the log-linear fit
  TailSide side = TailSide::right;
  int nodes_used = 0;
};

/// Least-squares line through (x, log|u|) over nodes in [x_lo, x_hi] with
/// |u| > kTailFloor. θ̂ = -slope on the right, +slope on the left. Throws
/// InsufficientData with fewer than kMinTailNodes usable nodes.
TailFit fit_tail(const Field& u, double x_lo, double x_hi, TailSide side);

/// ∫ u^2 over nodes outside [a, b].
double support_mass(const Field& u, double a, double b);

/// ∫ u^2 over nodes inside [a, b].
double local_mass(const Field& u, double a, double b);

struct Apex {
  double position = 0.0;
  double amplitude = 0.0;
};

/// Location and height of max u by a parabola through the top node and its
/// two neighbours (periodic).
Apex track_apex(const Field& u);

// ---------------------------------------------------------------------------
// Kernel identity

/// S_{a,b}(y) = ½ sgn(a-y) e^{-|a-y|} - ½ sgn(b-y) e^{-|b-y|}, with sgn(0) = 0.
/// Positive outside [a, b]; evaluated in a cancellation-free form.
double s_kernel(double a, double b, double y);

struct KernelIdentityCheck {
  double lhs = 0.0;       // F(b) - F(a)
  double rhs = 0.0;       // ∫ S_{a,b} f
  double residual = 0.0;  // |lhs - rhs|
  double scale = 0.0;     // ∫ |S_{a,b} f|

  double relative() const noexcept { return scale > 0.0 ? residual / scale : residual; }
};

/// Both sides of F(b) - F(a) = ∫ S_{a,b}(y) f(y) dy. The left side uses the
/// spectral flux F interpolated at a and b; the right side integrates the
/// trigonometric interpolant of f against S with Gauss-Legendre panels on
/// each grid cell, splitting the cells that contain a and b.
KernelIdentityCheck kernel_identity(const Field& u, const ModelParams& params, double a, double b,
                                    const DynamicsOptions& opts = {});

/// |(F(b) - F(a)) - ∫ S_{a,b} f|.
double kernel_identity_residual(const Field& u, const ModelParams& params, double a, double b,
                                const DynamicsOptions& opts = {});

// ---------------------------------------------------------------------------
// Records

struct TailWindow {
  double x_lo = 10.0;
  double x_hi = 30.0;
  TailSide side = TailSide::right;
};

struct DiagnosticsConfig {
  std::vector<int> lp_orders;       // even p
  std::vector<int> weight_ladder;   // N values for φ_N
  double weight_theta = 0.5;
  std::optional<TailWindow> tail;
  std::optional<std::pair<double, double>> support_interval;  // [a, b]
};

struct DiagnosticsRecord {
  double time = 0.0;
  double H1 = 0.0;
  double H = 0.0;
  double sup_norm = 0.0;
  double sup_norm_ux = 0.0;
  double sobolev = 0.0;
  std::map<int, double> lp_norms;
  std::map<int, double> weighted_sup;
  std::optional<TailFit> tail_fit;
  std::optional<double> support_mass;
};

DiagnosticsRecord make_record(const Field& u, double time, const DiagnosticsConfig& cfg);

/// Frozen column order:
///   time, H1, H, sup_norm, sup_norm_ux, sobolev,
///   lp_<p> for each configured p (ascending),
///   weighted_sup_<N> for each configured N (ascending),
///   tail_exponent, tail_intercept, tail_residual, tail_x_lo, tail_x_hi, tail_side,
///   support_mass.
/// Absent optional values are written as empty cells.
std::vector<std::string> csv_columns(const DiagnosticsConfig& cfg);
std::vector<std::string> csv_cells(const DiagnosticsRecord& rec, const DiagnosticsConfig& cfg);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string_view to_string(TailSide s) noexcept;

}  // namespace chfam
