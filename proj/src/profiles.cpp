#include "chfam/profiles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gauss_legendre.hpp"

namespace chfam {

std::string_view to_string(ProfileKind k) noexcept {
  switch (k) {
    case ProfileKind::peakon: return "peakon";
    case ProfileKind::mollified_peakon: return "mollified_peakon";
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::exp_decay: return "exp_decay";
    case ProfileKind::bump: return "bump";
    case ProfileKind::custom_expression: return "custom_expression";
  }
  return "?";
}

ProfileKind parse_profile_kind(std::string_view name) {
  for (auto k : {ProfileKind::peakon, ProfileKind::mollified_peakon, ProfileKind::gaussian, ProfileKind::exp_decay,
                 ProfileKind::bump, ProfileKind::custom_expression}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown profile kind '" + std::string(name) +
                    "' (expected peakon, mollified_peakon, gaussian, exp_decay, bump or custom_expression)");
}

void ProfileSpec::validate() const {
  if (!std::isfinite(center)) throw InvalidArgument("profile center must be finite");
  switch (kind) {
    case ProfileKind::peakon:
    case ProfileKind::mollified_peakon:
      if (!(amplitude > 0.0)) throw InvalidArgument("peakon speed c must be positive");
      if (kind == ProfileKind::mollified_peakon && !(sigma > 0.0))
        throw InvalidArgument("mollified peakon needs sigma > 0");
      break;
    case ProfileKind::exp_decay:
      if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("exp_decay needs theta in (0, 1)");
      break;
    case ProfileKind::bump:
      if (!(support_lo < support_hi)) throw InvalidArgument("bump needs support_lo < support_hi");
      break;
    case ProfileKind::gaussian:
      if (!(width > 0.0)) throw InvalidArgument("gaussian width must be positive");
      break;
    case ProfileKind::custom_expression:
      if (expression.empty()) throw InvalidArgument("custom_expression needs an expression");
      break;
  }
}

double exact_peakon_at(double t, double x, double c, int n) {
  if (!(c > 0.0)) throw InvalidArgument("peakon speed must be positive");
  if (n < 1) throw InvalidArgument("model order must be >= 1");
  return std::pow(c, 1.0 / n) * std::exp(-std::abs(x - c * t));
}

double smooth_step(double r) noexcept {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / r);
  const double b = std::exp(-1.0 / (1.0 - r));
  return a / (a + b);
}

double blended_abs(double r) noexcept {
  const double a = std::abs(r);
  if (a >= 1.0) return a;
  const double w = smooth_step(a);
  return w * a + (1.0 - w) * 0.5 * (1.0 + r * r);
}

namespace {

double mollified_peakon_value(double z, double sigma, const detail::GaussRule& rule) {
  // ∫ e^{-|z - s|} φ_σ(s) ds over s in [-12σ, 12σ], split at the kink s = z.
  const double lim = 12.0 * sigma;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double s) { return std::exp(-std::abs(z - s) - 0.5 * (s / sigma) * (s / sigma)) * norm; };
  constexpr int kPanels = 24;
  if (z <= -lim || z >= lim) return detail::integrate_panels(rule, -lim, lim, kPanels, integrand);
  const double lo_panels = std::max(1, static_cast<int>(std::ceil(kPanels * (z + lim) / (2 * lim))));
  const double hi_panels = std::max(1, static_cast<int>(std::ceil(kPanels * (lim - z) / (2 * lim))));
  return detail::integrate_panels(rule, -lim, z, static_cast<int>(lo_panels), integrand) +
         detail::integrate_panels(rule, z, lim, static_cast<int>(hi_panels), integrand);
}

}  // namespace

Field sample_profile(const ProfileSpec& spec, const Grid& grid, int n, const BoundaryPolicy& policy) {
  spec.validate();
  if (n < 1) throw InvalidArgument("model order must be >= 1");
  const double x0 = spec.center;
  const double A = spec.amplitude;
  Field out(grid);

  switch (spec.kind) {
    case ProfileKind::peakon: {
      const double a = std::pow(A, 1.0 / n);
      out = Field::sample(grid, [&](double x) { return a * std::exp(-std::abs(x - x0)); });
      break;
    }
    case ProfileKind::mollified_peakon: {
      const double a = std::pow(A, 1.0 / n);
      const auto rule = detail::gauss_legendre(16);
      out = Field::sample(grid, [&](double x) { return a * mollified_peakon_value(x - x0, spec.sigma, rule); });
      break;
    }
    case ProfileKind::gaussian:
      out = Field::sample(grid, [&](double x) {
        const double r = (x - x0) / spec.width;
        return A * std::exp(-r * r);
      });
      break;
    case ProfileKind::exp_decay:
      out = Field::sample(grid, [&](double x) {
        const double r = x - x0;
        double v = A * std::exp(-spec.theta * blended_abs(r));
        if (spec.one_sided) v *= std::exp(-r * r * smooth_step(-r));
        return v;
      });
      break;
    case ProfileKind::bump: {
      const double mid = 0.5 * (spec.support_lo + spec.support_hi);
      const double half = 0.5 * (spec.support_hi - spec.support_lo);
      out = Field::sample(grid, [&](double x) {
        if (x <= spec.support_lo || x >= spec.support_hi) return 0.0;
        const double s = (x - mid) / half;
        const double q = 1.0 - s * s;
        if (q <= 0.0) return 0.0;
        return A * std::numbers::e * std::exp(-1.0 / q);
      });
      break;
    }
    case ProfileKind::custom_expression: {
      const Expression expr(spec.expression);
      std::vector<double> v(static_cast<std::size_t>(grid.size()));
      for (int i = 0; i < grid.size(); ++i) {
        v[static_cast<std::size_t>(i)] = expr(grid.node(i));
        if (!std::isfinite(v[static_cast<std::size_t>(i)])) {
          std::ostringstream os;
          os << "expression '" << spec.expression << "' is not finite at x = " << grid.node(i);
          throw InvalidArgument(os.str());
        }
      }
      out = Field(grid, std::move(v));
      break;
    }
  }
  check_boundary_decay(out, policy, "sample_profile");
  return out;
}

// ---------------------------------------------------------------------------
// Expression

struct Expression::Node {
  enum class Kind { number, var, neg, add, sub, mul, div, pow, fexp, fsin, fcos, fabs } kind;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x) const {
    switch (kind) {
      case Kind::number: return value;
      case Kind::var: return x;
      case Kind::neg: return -lhs->eval(x);
      case Kind::add: return lhs->eval(x) + rhs->eval(x);
      case Kind::sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::div: return lhs->eval(x) / rhs->eval(x);
      case Kind::pow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Kind::fexp: return std::exp(lhs->eval(x));
      case Kind::fsin: return std::sin(lhs->eval(x));
      case Kind::fcos: return std::cos(lhs->eval(x));
      case Kind::fabs: return std::abs(lhs->eval(x));
    }
    return 0.0;
  }
};

class ExpressionParser {
 public:
  using Node = Expression::Node;
  using Kind = Node::Kind;

  explicit ExpressionParser(std::string_view s) : src_(s) {}

  std::shared_ptr<const Node> parse() {
    auto n = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return n;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression error at position " << pos_ << ": " << msg << " in '" << src_ << "'";
    throw ConfigError(os.str());
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static std::shared_ptr<const Node> make(Kind k, std::shared_ptr<const Node> a = {},
                                          std::shared_ptr<const Node> b = {}, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    return n;
  }

  std::shared_ptr<const Node> expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make(Kind::add, n, term());
      else if (accept('-')) n = make(Kind::sub, n, term());
      else return n;
    }
  }

  std::shared_ptr<const Node> term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = make(Kind::mul, n, unary());
      else if (accept('/')) n = make(Kind::div, n, unary());
      else return n;
    }
  }

  std::shared_ptr<const Node> unary() {
    if (accept('-')) return make(Kind::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  std::shared_ptr<const Node> power() {
    auto base = primary();
    if (accept('^')) return make(Kind::pow, base, unary());
    return base;
  }

  std::shared_ptr<const Node> primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(src_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return make(Kind::number, {}, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (name == "x") return make(Kind::var);
      Kind k;
      if (name == "exp") k = Kind::fexp;
      else if (name == "sin") k = Kind::fsin;
      else if (name == "cos") k = Kind::fcos;
      else if (name == "abs") k = Kind::fabs;
      else fail("unknown identifier '" + std::string(name) + "'");
      if (!accept('(')) fail("expected '(' after function name");
      auto arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(k, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

Expression::Expression(std::string_view source) : source_(source), root_(ExpressionParser(source).parse()) {}

double Expression::operator()(double x) const { return root_->eval(x); }

}  // namespace chfam
