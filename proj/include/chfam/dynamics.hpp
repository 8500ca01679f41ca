#pragma once

// Right-hand side of the generalized Camassa-Holm family
//
//   u_t - u_txx + (n+1)(n+2)/2 u^n u_x
//       = n(n-1)/2 u^{n-2} u_x^3 + 2n u^{n-1} u_x u_xx + u^n u_xxx
//
// integrated in its nonlocal form
//
//   u_t = -(u^n u_x + F),   F = d/dx (1 - d^2/dx^2)^{-1} f,
//   f   = n/2 u^{n-1} u_x^2 + n(n+3)/(2(n+1)) u^{n+1}.

#include "chfam/spectral.hpp"

namespace chfam {

/// Model order n (n = 1 is Camassa-Holm).
struct ModelParams {
  int n = 1;

  bool odd() const noexcept { return n % 2 == 1; }
  /// Throws InvalidArgument unless n >= 1.
  void validate() const;
};

/// Discretization options shared by the nonlinear evaluations.
struct DynamicsOptions {
  DealiasRule dealias = DealiasRule::two_thirds;

  Dealias dealias_for(const ModelParams& p) const { return Dealias{dealias, p.n}; }
};

/// Convolution source f and nonlocal flux F = d/dx Λ^{-2} f.
struct FluxPair {
  Field f;
  Field F;
};

/// x^p for integer p >= 0 by repeated squaring.
double int_pow(double x, int p) noexcept;

/// m = u - u_xx.
Field compute_m(const Field& u);

/// f = n/2 u^{n-1} u_x^2 + n(n+3)/(2(n+1)) u^{n+1}, dealiased.
Field compute_f(const Field& u, const ModelParams& params, const DynamicsOptions& opts = {});

/// F = d/dx Λ^{-2} f.
Field compute_F(const Field& f);

FluxPair compute_fluxes(const Field& u, const ModelParams& params, const DynamicsOptions& opts = {});

/// u_t = -(u^n u_x + F) with both terms dealiased.
Field rhs(const Field& u, const ModelParams& params, const DynamicsOptions& opts = {});

/// Below this |u| the u^{n-2} u_x^3 term is not evaluated for n = 1.
inline constexpr double kMformMaskThreshold = 1e-6;

/// Max-norm residual of the momentum form
///   m_t + 2n u^{n-1} u_x m + u^n m_x = n(1-n)/2 (u^n u_x - u^{n-2} u_x^3)
/// with m_t = u_t - u_txx. For n = 1 nodes with |u| <= kMformMaskThreshold
/// are excluded.
double rhs_mform_residual(const Field& u, const Field& u_t, const ModelParams& params);

/// u(x) -> -u(-x) on the symmetric grid (node i maps to node N - i).
Field reflect_negate(const Field& u);

}  // namespace chfam
