#include <doctest.h>

#include <cmath>

#include "chfam/experiment.hpp"
#include "chfam/spectral.hpp"
#include "test_support.hpp"

using namespace chfam;
using testing::pi;

TEST_CASE("grid geometry") {
  const Grid g = make_grid(8, pi);
  CHECK(g.size() == 8);
  CHECK(g.spacing() == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK(g.node(0) == doctest::Approx(-pi));
  CHECK(g.node(4) == doctest::Approx(0.0));
  const std::vector<double> k(g.wavenumbers().begin(), g.wavenumbers().end());
  const std::vector<double> expect{0, 1, 2, 3, 4, -3, -2, -1};
  REQUIRE(k.size() == expect.size());
  for (std::size_t j = 0; j < k.size(); ++j) CHECK(k[j] == doctest::Approx(expect[j]).epsilon(1e-15));

  CHECK(make_grid(16, 4 * pi).spacing() == doctest::Approx(pi / 2).epsilon(1e-15));
  const Grid big = make_grid(1024, 40 * pi);
  CHECK(big.spacing() == doctest::Approx(0.2454369260617026).epsilon(1e-15));
  CHECK(std::abs(big.spacing() * big.size() - 2 * big.half_length()) <= 4 * std::numeric_limits<double>::epsilon() * 80 * pi);
}

TEST_CASE("grid rejects bad sizes") {
  CHECK_THROWS_AS(make_grid(7, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(6, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(16, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(16, -1.0), InvalidArgument);
}

TEST_CASE("field rejects non-finite values") {
  const Grid g(8, 1.0);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(Field(g, v), NonFiniteError);
  v[3] = INFINITY;
  CHECK_THROWS_AS(Field(g, v), NonFiniteError);
  CHECK_THROWS_AS(Field(g, std::vector<double>(7, 0.0)), InvalidArgument);
}

TEST_CASE("spectral derivative") {
  SUBCASE("constant") {
    const Grid g(32, pi);
    CHECK(spectral_derivative(Field::sample(g, [](double) { return 3.0; })).max_abs() < 1e-14);
  }
  SUBCASE("band-limited trigonometric input is exact") {
    const Grid g(32, pi);
    const Field d = spectral_derivative(Field::sample(g, [](double x) { return std::sin(x) + 0.5 * std::cos(5 * x); }));
    CHECK(testing::max_err(d, [](double x) { return std::cos(x) - 2.5 * std::sin(5 * x); }) < 1e-12);
  }
  SUBCASE("gaussian on the reference grid") {
    const Grid g(1024, 40 * pi);
    const Field d = spectral_derivative(testing::gaussian(g));
    CHECK(testing::max_err(d, [](double x) { return -2 * x * std::exp(-x * x); }) <= 1e-10);
  }
  SUBCASE("second derivative") {
    const Grid g(32, pi);
    const Field d2 = spectral_second_derivative(Field::sample(g, [](double x) { return std::cos(3 * x); }));
    CHECK(testing::max_err(d2, [](double x) { return -9 * std::cos(3 * x); }) < 1e-12);
  }
}

TEST_CASE("Helmholtz multipliers") {
  const Grid g(32, pi);
  SUBCASE("zero") {
    CHECK(helmholtz_inverse(Field(g)).max_abs() == 0.0);
    CHECK(dx_helmholtz_inverse(Field(g)).max_abs() == 0.0);
  }
  SUBCASE("eigenfunctions") {
    const Field c = Field::sample(g, [](double x) { return std::cos(x); });
    CHECK(testing::max_err(helmholtz_inverse(c), [](double x) { return 0.5 * std::cos(x); }) < 1e-14);
    const Field c2 = Field::sample(g, [](double x) { return std::cos(2 * x); });
    CHECK(testing::max_err(helmholtz_inverse(c2), [](double x) { return 0.2 * std::cos(2 * x); }) < 1e-14);
    const Field s = Field::sample(g, [](double x) { return std::sin(x); });
    CHECK(testing::max_err(dx_helmholtz_inverse(s), [](double x) { return 0.5 * std::cos(x); }) < 1e-14);
  }
  SUBCASE("round trip through (1 - d^2)") {
    const Grid gg(512, 32.0);
    const Field f = random_smooth_field(gg, 7, 1);
    CHECK(testing::max_rel_diff(helmholtz(helmholtz_inverse(f)), f) < 1e-10);
  }
  SUBCASE("dx composition") {
    const Grid gg(512, 32.0);
    const Field f = random_smooth_field(gg, 7, 2);
    CHECK(testing::max_rel_diff(dx_helmholtz_inverse(f), spectral_derivative(helmholtz_inverse(f))) < 1e-12);
  }
}

TEST_CASE("spectral multipliers agree with Green-kernel quadrature") {
  const Grid g(2048, 32.0);
  const Field f = testing::gaussian(g);
  CHECK(testing::max_rel_diff(helmholtz_inverse(f), green_convolve(f, GreenKernel::g)) <= 1e-8);
  CHECK(testing::max_rel_diff(dx_helmholtz_inverse(f), green_convolve(f, GreenKernel::dx_g)) <= 1e-8);

  for (int k = 1; k <= 6; ++k) {
    const Field r = random_smooth_field(g, 11, k);
    CHECK(testing::max_rel_diff(helmholtz_inverse(r), green_convolve(r, GreenKernel::g)) <= 1e-6);
    CHECK(testing::max_rel_diff(dx_helmholtz_inverse(r), green_convolve(r, GreenKernel::dx_g)) <= 1e-6);
  }
}

TEST_CASE("green_convolve closed forms") {
  SUBCASE("zero") {
    const Grid g(64, 20.0);
    CHECK(green_convolve(Field(g), GreenKernel::g).max_abs() == 0.0);
  }
  SUBCASE("e^{-2|x|}") {
    auto conv = [](int N) {
      const Grid g(N, 20.0);
      return green_convolve(Field::sample(g, [](double x) { return std::exp(-2 * std::abs(x)); }), GreenKernel::g);
    };
    auto exact = [](double x) { return (2 * std::exp(-std::abs(x)) - std::exp(-2 * std::abs(x))) / 3; };
    const Field c = conv(4096);
    const int mid = c.grid().size() / 2;
    REQUIRE(c.grid().node(mid) == 0.0);
    CHECK(c[mid] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // Away from x = 0 the kink of f is not aligned with the split, so accuracy is second order.
    const double e1 = testing::max_err(conv(2048), exact), e2 = testing::max_err(c, exact);
    CHECK(e2 < 1e-4);
    CHECK(e1 / e2 > 3.8);
  }
  SUBCASE("narrowing delta approximations approach the kernel") {
    const Grid g(8192, 20.0);
    double prev = INFINITY;
    for (double w : {0.4, 0.2, 0.1}) {
      const Field d = Field::sample(g, [&](double x) { return std::exp(-(x / w) * (x / w)) / (w * std::sqrt(pi)); });
      const Field c = green_convolve(d, GreenKernel::g);
      double err = 0.0;
      for (int i = 0; i < g.size(); ++i)
        if (std::abs(g.node(i)) > 1.0) err = std::max(err, std::abs(c[i] - 0.5 * std::exp(-std::abs(g.node(i)))));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 2e-3);
  }
}

TEST_CASE("Gregory end corrections raise the order of the half-line trapezoid rule") {
  const double h = 0.1;
  auto integrate = [&](int order) {
    const auto c = gregory_end_weights(order);
    double s = 0.5;
    for (int j = 1; j < 2000; ++j) s += std::exp(-j * h);
    for (int k = 0; k < order; ++k) s += c[static_cast<std::size_t>(k)] * std::exp(-k * h);
    return h * s;
  };
  double prev = std::abs(integrate(0) - 1.0);
  CHECK(prev == doctest::Approx(h * h / 12).epsilon(1e-2));
  for (int order : {2, 4, 6, 8}) {
    const double e = std::abs(integrate(order) - 1.0);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-11);
  CHECK(gregory_end_weights(0).empty());
  CHECK_THROWS_AS(gregory_end_weights(13), InvalidArgument);
}

TEST_CASE("dealiasing") {
  const Grid g(64, pi);
  SUBCASE("cutoffs") {
    CHECK(dealias_cutoff(1024, {DealiasRule::none, 1}) == 513);
    CHECK(dealias_cutoff(1024, {DealiasRule::two_thirds, 1}) == 342);
    CHECK(dealias_cutoff(1024, {DealiasRule::strict, 1}) == 342);
    CHECK(dealias_cutoff(1024, {DealiasRule::strict, 3}) == 205);
  }
  SUBCASE("retained band is untouched") {
    const Field f = Field::sample(g, [](double x) { return std::cos(3 * x) + std::sin(10 * x); });
    CHECK(max_abs_diff(dealias(f), f) < 1e-14);
  }
  SUBCASE("Nyquist mode is removed") {
    std::vector<double> v(64);
    for (int i = 0; i < 64; ++i) v[static_cast<std::size_t>(i)] = i % 2 ? -1.0 : 1.0;
    CHECK(dealias(Field(g, v)).max_abs() < 1e-14);
  }
  SUBCASE("removed band") {
    const Field f = Field::sample(g, [](double x) { return std::cos(25 * x); });
    CHECK(dealias(f).max_abs() < 1e-14);
    CHECK(max_abs_diff(dealias(f, {DealiasRule::none, 1}), f) == 0.0);
  }
}

TEST_CASE("quadrature and Parseval") {
  const Grid g(64, pi);
  CHECK(quadrature(Field::sample(g, [](double) { return 1.0; })) == doctest::Approx(2 * pi));
  CHECK(std::abs(quadrature(Field::sample(g, [](double x) { return std::sin(x); }))) < 1e-14);

  // Trapezoid sum of the sampled kink e^{-|x|}: h coth(h/2), close to 2.
  const Grid big(1024, 40 * pi);
  const double h = big.spacing();
  const double q = quadrature(Field::sample(big, [](double x) { return std::exp(-std::abs(x)); }));
  CHECK(q == doctest::Approx(h / std::tanh(h / 2)).epsilon(1e-12));
  CHECK(std::abs(q - 2.0) < h * h / 5);

  const Grid gg(512, 32.0);
  for (int k = 1; k <= 5; ++k) {
    const Field f = random_smooth_field(gg, 3, k);
    CHECK(spectral_energy(f) == doctest::Approx(quadrature(hadamard(f, f))).epsilon(1e-10));
    CHECK(sobolev_norm(f, 0.0) * sobolev_norm(f, 0.0) == doctest::Approx(spectral_energy(f)).epsilon(1e-12));
  }
}

TEST_CASE("spectral interpolation") {
  const Grid g(32, pi);
  const Field f = Field::sample(g, [](double x) { return std::sin(3 * x) + 0.25 * std::cos(7 * x); });
  for (int i = 0; i < g.size(); i += 5) CHECK(spectral_interpolate(f, g.node(i)) == doctest::Approx(f[i]).epsilon(1e-13));
  for (double x : {-2.9, -0.123, 0.5, 1.7, 3.0})
    CHECK(spectral_interpolate(f, x) == doctest::Approx(std::sin(3 * x) + 0.25 * std::cos(7 * x)).epsilon(1e-12));
}

TEST_CASE("boundary decay policy") {
  const Grid g(64, 4.0);
  const Field wide = Field::sample(g, [](double x) { return std::exp(-0.1 * x * x); });
  CHECK_FALSE(boundary_decayed(wide, 1e-12));
  CHECK_THROWS_AS(green_convolve(wide, GreenKernel::g, {1e-12, true}), BoundaryDecayError);
  CHECK(boundary_decayed(Field(g), 1e-12));
}
