#include "chfam/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "gauss_legendre.hpp"

namespace chfam {

double conserved_H1(const Field& u) { return quadrature(u); }

double conserved_H(const Field& u) {
  const Field ux = spectral_derivative(u);
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += u[i] * u[i] + ux[i] * ux[i];
  return 0.5 * u.grid().spacing() * s;
}

double lp_norm(const Field& u, double p) {
  if (std::isinf(p) && p > 0) return u.max_abs();
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm needs p >= 1");
  // Scale by max|u| so large p neither overflows nor underflows.
  const double m = u.max_abs();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : u.values()) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(u.grid().spacing() * s, 1.0 / p);
}

double sobolev_bound(const Field& u) { return sobolev_norm(u, 2.0) + sobolev_norm(spectral_derivative(u), 2.0); }

// ---------------------------------------------------------------------------

double phi_weight(int N, double theta, double x) noexcept {
  if (x <= 0.0) return 1.0;
  if (x < N) return std::exp(theta * x);
  return std::exp(theta * N);
}

Field weight_phi(int N, double theta, const Grid& grid) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("weight theta must lie in (0, 1)");
  if (N < 1) throw InvalidArgument("weight index N must be >= 1");
  if (theta * N >= 700.0) {
    std::ostringstream os;
    os << "weight e^{theta N} overflows for theta = " << theta << ", N = " << N;
    throw InvalidArgument(os.str());
  }
  return Field::sample(grid, [&](double x) { return phi_weight(N, theta, x); });
}

double weighted_sup(const Field& u, const Field& phi) {
  if (!(u.grid() == phi.grid())) throw InvalidArgument("weighted_sup: field and weight live on different grids");
  double m = 0.0;
  for (int i = 0; i < u.size(); ++i) m = std::max(m, std::abs(phi[i] * u[i]));
  return m;
}

double weighted_sup_pair(const Field& u, const Field& phi) {
  return weighted_sup(u, phi) + weighted_sup(spectral_derivative(u), phi);
}

double weight_convolution_integral(double theta, int N, double x, const Grid& grid) {
  if (!(theta >= 0.0 && theta < 1.0)) throw InvalidArgument("weight theta must lie in [0, 1)");
  if (N < 1) throw InvalidArgument("weight index N must be >= 1");
  const double L = grid.half_length();
  if (!(x > -L && x < L)) throw InvalidArgument("evaluation point outside the grid interval");

  std::vector<double> cuts{-L, L};
  for (double c : {0.0, x, static_cast<double>(N)})
    if (c > -L && c < L) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // The ratio φ(x)/φ(y) is formed as a single exponent to stay finite for large θN.
  auto log_phi = [&](double y) {
    if (y <= 0.0) return 0.0;
    return theta * std::min(y, static_cast<double>(N));
  };
  const double lx = log_phi(x);
  auto integrand = [&](double y) { return std::exp(lx - log_phi(y) - std::abs(x - y)); };

  const auto rule = detail::gauss_legendre(20);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const int panels = std::max(1, static_cast<int>(std::ceil(cuts[k + 1] - cuts[k])));
    total += detail::integrate_panels(rule, cuts[k], cuts[k + 1], panels, integrand);
  }
  return total;
}

double weight_convolution_bound(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw InvalidArgument("weight theta must lie in [0, 1)");
  return (2.0 - theta) / (1.0 - theta);
}

double weight_convolution_identity(double theta, int N, const Grid& grid) {
  return weight_convolution_integral(theta, N, static_cast<double>(N), grid);
}

// ---------------------------------------------------------------------------

TailFit fit_tail(const Field& u, double x_lo, double x_hi, TailSide side) {
  if (!(x_lo < x_hi)) throw InvalidArgument("tail window needs x_lo < x_hi");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    const double a = std::abs(u[i]);
    if (x < x_lo || x > x_hi || !(a > kTailFloor)) continue;
    const double y = std::log(a);
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < kMinTailNodes) {
    std::ostringstream os;
    os << "tail window [" << x_lo << ", " << x_hi << "] has " << m << " usable nodes (need " << kMinTailNodes
       << ")";
    throw InsufficientData(os.str());
  }
  // Centered sums keep the normal equations well conditioned on far windows.
  const double xm = sx / m, ym = sy / m;
  double cxx = 0, cxy = 0;
  for (const auto& [x, y] : pts) {
    cxx += (x - xm) * (x - xm);
    cxy += (x - xm) * (y - ym);
  }
  const double slope = cxy / cxx;
  const double intercept = ym - slope * xm;
  double ss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (intercept + slope * x);
    ss += r * r;
  }
  TailFit fit;
  fit.x_lo = x_lo;
  fit.x_hi = x_hi;
  fit.exponent = side == TailSide::right ? -slope : slope;
  fit.intercept = intercept;
  fit.residual = std::sqrt(ss / m);
  fit.side = side;
  fit.nodes_used = m;
  return fit;
}

double support_mass(const Field& u, double a, double b) {
  if (!(a < b)) throw InvalidArgument("support interval needs a < b");
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < a || x > b) s += u[i] * u[i];
  }
  return u.grid().spacing() * s;
}

double local_mass(const Field& u, double a, double b) {
  if (!(a < b)) throw InvalidArgument("interval needs a < b");
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x >= a && x <= b) s += u[i] * u[i];
  }
  return u.grid().spacing() * s;
}

Apex track_apex(const Field& u) {
  const auto v = u.values();
  const int n = u.size();
  const int i = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  const double ym = u[(i + n - 1) % n], y0 = u[i], yp = u[(i + 1) % n];
  const double denom = ym - 2.0 * y0 + yp;
  double s = 0.0;
  if (denom < 0.0) s = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
  const double h = u.grid().spacing();
  return Apex{u.x(i) + s * h, y0 - 0.25 * (ym - yp) * s};
}

// ---------------------------------------------------------------------------

double s_kernel(double a, double b, double y) {
  if (!(a < b)) throw InvalidArgument("s_kernel needs a < b");
  const double gap = -std::expm1(-(b - a));  // 1 - e^{-(b-a)}
  if (y < a) return 0.5 * std::exp(-(a - y)) * gap;
  if (y > b) return 0.5 * std::exp(-(y - b)) * gap;
  const double left = y == a ? 0.0 : -0.5 * std::exp(-(y - a));
  const double right = y == b ? 0.0 : -0.5 * std::exp(-(b - y));
  return left + right;
}

namespace {

// Values of the trigonometric interpolant of f at x_i + s h for every node i.
std::vector<double> shifted_values(const Grid& grid, const Spectrum& coeffs, double s) {
  const double delta = s * grid.spacing();
  Spectrum c = coeffs;
  for (int j = 0; j < grid.num_modes(); ++j) c[static_cast<std::size_t>(j)] *= std::polar(1.0, grid.mode_wavenumber(j) * delta);
  return inverse_transform(grid, std::move(c)).vector();
}

}  // namespace

KernelIdentityCheck kernel_identity(const Field& u, const ModelParams& params, double a, double b,
                                    const DynamicsOptions& opts) {
  if (!(a < b)) throw InvalidArgument("kernel identity needs a < b");
  const Grid& grid = u.grid();
  const double L = grid.half_length();
  const double h = grid.spacing();
  if (!(a > -L && b < L - h)) throw InvalidArgument("kernel identity interval must lie inside the grid");

  const FluxPair fl = compute_fluxes(u, params, opts);
  KernelIdentityCheck out;
  out.lhs = spectral_interpolate(fl.F, b) - spectral_interpolate(fl.F, a);

  const Spectrum coeffs = forward_transform(fl.f);
  const auto rule = detail::gauss_legendre(16);
  const int n = grid.size();
  auto cell_of = [&](double x) { return std::clamp(static_cast<int>(std::floor((x + L) / h)), 0, n - 1); };
  const int ca = cell_of(a), cb = cell_of(b);

  // Cells away from a and b: one interpolant evaluation per node and GL abscissa.
  double rhs = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double s = 0.5 * (rule.nodes[k] + 1.0);
    const std::vector<double> fv = shifted_values(grid, coeffs, s);
    const double w = 0.5 * h * rule.weights[k];
    for (int i = 0; i < n; ++i) {
      if (i == ca || i == cb) continue;
      const double y = grid.node(i) + s * h;
      const double v = s_kernel(a, b, y) * fv[static_cast<std::size_t>(i)];
      rhs += w * v;
      scale += w * std::abs(v);
    }
  }

  // Cells holding a jump of S: split at the jump and evaluate directly.
  auto split_cell = [&](int c) {
    const double lo = grid.node(c), hi = lo + h;
    std::vector<double> cuts{lo, hi};
    for (double p : {a, b})
      if (p > lo && p < hi) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      rhs += detail::integrate_panels(rule, cuts[k], cuts[k + 1], 1,
                                      [&](double y) { return s_kernel(a, b, y) * spectral_interpolate(grid, coeffs, y); });
      scale += detail::integrate_panels(rule, cuts[k], cuts[k + 1], 1, [&](double y) {
        return std::abs(s_kernel(a, b, y) * spectral_interpolate(grid, coeffs, y));
      });
    }
  };
  split_cell(ca);
  if (cb != ca) split_cell(cb);

  out.rhs = rhs;
  out.scale = scale;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

double kernel_identity_residual(const Field& u, const ModelParams& params, double a, double b,
                                const DynamicsOptions& opts) {
  return kernel_identity(u, params, a, b, opts).residual;
}

// ---------------------------------------------------------------------------

DiagnosticsRecord make_record(const Field& u, double time, const DiagnosticsConfig& cfg) {
  DiagnosticsRecord r;
  r.time = time;
  r.H1 = conserved_H1(u);
  r.H = conserved_H(u);
  r.sup_norm = u.max_abs();
  const Field ux = spectral_derivative(u);
  r.sup_norm_ux = ux.max_abs();
  r.sobolev = sobolev_norm(u, 2.0) + sobolev_norm(ux, 2.0);
  for (int p : cfg.lp_orders) r.lp_norms[p] = lp_norm(u, p);
  for (int N : cfg.weight_ladder) {
    const Field phi = weight_phi(N, cfg.weight_theta, u.grid());
    r.weighted_sup[N] = weighted_sup(u, phi) + weighted_sup(ux, phi);
  }
  if (cfg.tail) {
    try {
      r.tail_fit = fit_tail(u, cfg.tail->x_lo, cfg.tail->x_hi, cfg.tail->side);
    } catch (const InsufficientData&) {
    }
  }
  if (cfg.support_interval) r.support_mass = support_mass(u, cfg.support_interval->first, cfg.support_interval->second);
  return r;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view to_string(TailSide s) noexcept { return s == TailSide::right ? "right" : "left"; }

namespace {

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<std::string> csv_columns(const DiagnosticsConfig& cfg) {
  std::vector<std::string> cols{"time", "H1", "H", "sup_norm", "sup_norm_ux", "sobolev"};
  for (int p : sorted_unique(cfg.lp_orders)) cols.push_back("lp_" + std::to_string(p));
  for (int N : sorted_unique(cfg.weight_ladder)) cols.push_back("weighted_sup_" + std::to_string(N));
  for (const char* c : {"tail_exponent", "tail_intercept", "tail_residual", "tail_x_lo", "tail_x_hi", "tail_side",
                        "support_mass"})
    cols.emplace_back(c);
  return cols;
}

std::vector<std::string> csv_cells(const DiagnosticsRecord& rec, const DiagnosticsConfig& cfg) {
  std::vector<std::string> cells{format_double(rec.time),     format_double(rec.H1),
                                 format_double(rec.H),        format_double(rec.sup_norm),
                                 format_double(rec.sup_norm_ux), format_double(rec.sobolev)};
  auto lookup = [](const std::map<int, double>& m, int key) {
    const auto it = m.find(key);
    return it == m.end() ? std::string() : format_double(it->second);
  };
  for (int p : sorted_unique(cfg.lp_orders)) cells.push_back(lookup(rec.lp_norms, p));
  for (int N : sorted_unique(cfg.weight_ladder)) cells.push_back(lookup(rec.weighted_sup, N));
  if (rec.tail_fit) {
    const TailFit& t = *rec.tail_fit;
    for (double v : {t.exponent, t.intercept, t.residual, t.x_lo, t.x_hi}) cells.push_back(format_double(v));
    cells.emplace_back(to_string(t.side));
  } else {
    cells.insert(cells.end(), 6, std::string());
  }
  cells.push_back(rec.support_mass ? format_double(*rec.support_mass) : std::string());
  return cells;
}

}  // namespace chfam
