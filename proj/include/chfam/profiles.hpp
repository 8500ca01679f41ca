#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "chfam/spectral.hpp"

namespace chfam {

enum class ProfileKind { peakon, mollified_peakon, gaussian, exp_decay, bump, custom_expression };

std::string_view to_string(ProfileKind k) noexcept;
/// Throws ConfigError for unknown names.
ProfileKind parse_profile_kind(std::string_view name);

struct ProfileSpec {
  ProfileKind kind = ProfileKind::gaussian;
  /// Peakon speed c for (mollified) peakons; peak amplitude for the others.
  double amplitude = 1.0;
  double theta = 0.5;   // exp_decay rate, in (0, 1)
  double center = 0.0;  // x0
  double sigma = 0.0;   // mollification width
  double width = 1.0;   // gaussian: exp(-((x - x0)/width)^2)
  double support_lo = -1.0;
  double support_hi = 1.0;
  bool one_sided = false;  // exp_decay: Gaussian-fast left tail
  std::string expression;  // custom_expression, in x

  /// Throws InvalidArgument when the kind-specific invariants fail.
  void validate() const;
};

/// Samples the profile at t = 0 for model order n. Warns (or throws
/// BoundaryDecayError when policy.strict) if the profile does not decay at
/// the domain boundary.
///
///   peakon            c^{1/n} e^{-|x - x0|}
///   mollified_peakon  peakon convolved with a unit-mass Gaussian of std sigma,
///                     by Gauss-Legendre quadrature split at the kink
///   gaussian          A exp(-((x - x0)/width)^2)
///   exp_decay         A exp(-theta s(x - x0)), s(r) = |r| for |r| >= 1 and a
///                     C-infinity even blend of |r| and (1 + r^2)/2 inside
///   bump              A e exp(-1/(1 - s^2)) on [a, b], s mapped to (-1, 1);
///                     exactly zero outside
///   custom_expression expression evaluated per node
Field sample_profile(const ProfileSpec& spec, const Grid& grid, int n, const BoundaryPolicy& policy = {});

/// c^{1/n} e^{-|x - c t|}.
double exact_peakon_at(double t, double x, double c, int n);

/// Smooth step: 0 for r <= 0, 1 for r >= 1, C-infinity in between.
double smooth_step(double r) noexcept;

/// Blend used by exp_decay: equals |r| for |r| >= 1.
double blended_abs(double r) noexcept;

/// Parsed arithmetic expression in one variable x.
///
/// Grammar: numbers, x, + - * / ^ (right-associative), unary minus,
/// parentheses, and the functions exp, sin, cos, abs.
class Expression {
 public:
  explicit Expression(std::string_view source);
  double operator()(double x) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace chfam
