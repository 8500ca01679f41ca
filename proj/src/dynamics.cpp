#include "chfam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chfam {

void ModelParams::validate() const {
  if (n < 1) throw InvalidArgument("model order n must be a positive integer, got " + std::to_string(n));
}

double int_pow(double x, int p) noexcept {
  double result = 1.0;
  double base = x;
  while (p > 0) {
    if (p & 1) result *= base;
    base *= base;
    p >>= 1;
  }
  return result;
}

Field compute_m(const Field& u) { return helmholtz(u); }

namespace {

std::vector<double> flux_source_values(const Field& u, const Field& ux, int n) {
  const double c_grad = 0.5 * n;
  const double c_pow = n * (n + 3.0) / (2.0 * (n + 1.0));
  std::vector<double> f(static_cast<std::size_t>(u.size()));
  for (int i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    const double upow = int_pow(ui, n - 1);
    f[static_cast<std::size_t>(i)] = c_grad * upow * ux[i] * ux[i] + c_pow * upow * ui * ui;
  }
  return f;
}

}  // namespace

Field compute_f(const Field& u, const ModelParams& params, const DynamicsOptions& opts) {
  params.validate();
  const Field ux = spectral_derivative(u);
  return dealias(Field(u.grid(), flux_source_values(u, ux, params.n)), opts.dealias_for(params));
}

Field compute_F(const Field& f) { return dx_helmholtz_inverse(f); }

FluxPair compute_fluxes(const Field& u, const ModelParams& params, const DynamicsOptions& opts) {
  Field f = compute_f(u, params, opts);
  Field F = compute_F(f);
  return {std::move(f), std::move(F)};
}

Field rhs(const Field& u, const ModelParams& params, const DynamicsOptions& opts) {
  params.validate();
  const Dealias d = opts.dealias_for(params);
  const Field ux = spectral_derivative(u);

  std::vector<double> adv(static_cast<std::size_t>(u.size()));
  for (int i = 0; i < u.size(); ++i) adv[static_cast<std::size_t>(i)] = int_pow(u[i], params.n) * ux[i];
  const Field f = dealias(Field(u.grid(), flux_source_values(u, ux, params.n)), d);

  Field out = dealias(Field(u.grid(), std::move(adv)), d);
  out += compute_F(f);
  out *= -1.0;
  return out;
}

double rhs_mform_residual(const Field& u, const Field& u_t, const ModelParams& params) {
  params.validate();
  const int n = params.n;
  const Field ux = spectral_derivative(u);
  const Field m = compute_m(u);
  const Field mx = spectral_derivative(m);
  const Field mt = compute_m(u_t);
  const double c_rhs = n * (1.0 - n) / 2.0;

  double worst = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    const double uxi = ux[i];
    const double un1 = int_pow(ui, n - 1);
    const double un = un1 * ui;
    double singular = 0.0;  // u^{n-2} u_x^3
    if (n >= 2) {
      singular = int_pow(ui, n - 2) * uxi * uxi * uxi;
    } else if (std::abs(ui) > kMformMaskThreshold) {
      singular = uxi * uxi * uxi / ui;
    } else {
      continue;
    }
    const double lhs = mt[i] + 2.0 * n * un1 * uxi * m[i] + un * mx[i];
    const double rhs_val = c_rhs * (un * uxi - singular);
    worst = std::max(worst, std::abs(lhs - rhs_val));
  }
  return worst;
}

Field reflect_negate(const Field& u) {
  const int n = u.size();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = -u[(n - i) % n];
  return Field(u.grid(), std::move(v));
}

}  // namespace chfam
