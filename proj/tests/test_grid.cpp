// Quadrature, finite differences and interpolation primitives. Expected
// values are either exact (polynomial integrands the trapezoid rule and
// three-point stencils reproduce to roundoff) or frozen from closed forms
// evaluated against a much finer reference grid inside the test.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include <fcomb/grid.hpp>
#include <fcomb/interp.hpp>

using namespace fcomb;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vec map_grid(const TimeGrid& g, double (*f)(double)) {
  Vec v(g.k());
  for (int i = 0; i < g.k(); ++i) v(i) = f(g.t(i));
  return v;
}
}  // namespace

TEST_CASE("grid construction validates shape and order") {
  REQUIRE_THROWS_AS(TimeGrid::uniform(2), invalid_input);

  Vec bad(3);
  bad << 0.0, 0.7, 0.5;
  try {
    TimeGrid::from_values(bad);
    FAIL("expected rejection of non-increasing grid");
  } catch (const invalid_input& e) {
    REQUIRE(e.index() == 2);
  }

  Vec shifted(3);
  shifted << 0.1, 0.5, 1.0;
  REQUIRE_THROWS_AS(TimeGrid::from_values(shifted), invalid_input);

  const TimeGrid g = TimeGrid::uniform(101);
  REQUIRE(g.k() == 101);
  REQUIRE(g.t(0) == 0.0);
  REQUIRE(g.t(100) == 1.0);
}

TEST_CASE("trapezoid weights sum to domain length and integrate linears exactly") {
  const TimeGrid g = TimeGrid::uniform(11);
  const Vec w = quad_weights(g);
  REQUIRE(w.sum() == Catch::Approx(1.0).margin(1e-15));

  // Exact on piecewise-linear integrands: f(t) = 2t integrates to 1.
  Vec f = 2.0 * g.t;
  REQUIRE(trapz(g, f) == Catch::Approx(1.0).margin(1e-15));

  // Quadratic convergence on smooth integrands: sin(pi t), true value 2/pi.
  auto err_at = [&](int k) {
    const TimeGrid gk = TimeGrid::uniform(k);
    Vec v(k);
    for (int i = 0; i < k; ++i) v(i) = std::sin(kPi * gk.t(i));
    return std::abs(trapz(gk, v) - 2.0 / kPi);
  };
  const double e101 = err_at(101), e201 = err_at(201);
  REQUIRE(e101 < 1e-4);
  REQUIRE(e201 < e101 / 3.5);
}

TEST_CASE("cumtrapz matches trapz at the right endpoint and starts at zero") {
  const TimeGrid g = TimeGrid::uniform(37);
  Vec f = map_grid(g, [](double t) { return std::exp(t); });
  const Vec c = cumtrapz(g, f);
  REQUIRE(c(0) == 0.0);
  REQUIRE(c(g.k() - 1) == Catch::Approx(trapz(g, f)).margin(1e-15));
  for (int i = 1; i < g.k(); ++i) REQUIRE(c(i) > c(i - 1));
}

TEST_CASE("three-point derivative is exact for quadratics including endpoints") {
  Vec tv(7);
  tv << 0.0, 0.05, 0.2, 0.4, 0.55, 0.8, 1.0;  // deliberately non-uniform
  const TimeGrid g = TimeGrid::from_values(tv);
  Vec f(g.k());
  for (int i = 0; i < g.k(); ++i) f(i) = 3.0 * g.t(i) * g.t(i) - g.t(i) + 2.0;
  const Vec d = deriv(g, f);
  for (int i = 0; i < g.k(); ++i)
    REQUIRE(d(i) == Catch::Approx(6.0 * g.t(i) - 1.0).margin(1e-12));
}

TEST_CASE("derivative error decays quadratically on smooth functions") {
  auto err_at = [](int k) {
    const TimeGrid g = TimeGrid::uniform(k);
    Vec f(k);
    for (int i = 0; i < k; ++i) f(i) = std::sin(2.0 * kPi * g.t(i));
    const Vec d = deriv(g, f);
    double e = 0.0;
    for (int i = 0; i < k; ++i)
      e = std::max(e, std::abs(d(i) - 2.0 * kPi * std::cos(2.0 * kPi * g.t(i))));
    return e;
  };
  const double e101 = err_at(101), e201 = err_at(201);
  REQUIRE(e201 < e101 / 3.5);
}

TEST_CASE("not-a-knot spline reproduces cubics exactly and is fourth order") {
  const TimeGrid g = TimeGrid::uniform(21);
  Vec f(g.k());
  for (int i = 0; i < g.k(); ++i) {
    const double t = g.t(i);
    f(i) = ((2.0 * t - 1.0) * t + 3.0) * t - 0.25;
  }
  CubicSpline s(g.t, f);
  for (double q : {0.013, 0.5, 0.777, 0.9999}) {
    const double truth = ((2.0 * q - 1.0) * q + 3.0) * q - 0.25;
    REQUIRE(s(q) == Catch::Approx(truth).margin(1e-13));
  }

  // sup-error on sin(2 pi t) at k=101, frozen from a closed-form check:
  // the interior bound h^4 |f''''| * 5/384 is about 2e-6; allow 1e-5.
  const TimeGrid g101 = TimeGrid::uniform(101);
  Vec v = map_grid(g101, [](double t) { return std::sin(2.0 * kPi * t); });
  CubicSpline s2(g101.t, v);
  double sup = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double q = (i + 0.5) / 1000.0;
    sup = std::max(sup, std::abs(s2(q) - std::sin(2.0 * kPi * q)));
  }
  REQUIRE(sup < 1e-5);
}

TEST_CASE("spline derivative matches the analytic derivative closely") {
  const TimeGrid g = TimeGrid::uniform(101);
  Vec v = map_grid(g, [](double t) { return std::sin(2.0 * kPi * t); });
  CubicSpline s(g.t, v);
  for (double q : {0.1, 0.37, 0.62, 0.93})
    REQUIRE(s.derivative(q) ==
            Catch::Approx(2.0 * kPi * std::cos(2.0 * kPi * q)).margin(1e-3));
}

TEST_CASE("pchip preserves monotonicity on random monotone data") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 5 + static_cast<int>(rng() % 20);
    Vec x(n), y(n);
    x(0) = 0.0;
    y(0) = 0.0;
    for (int i = 1; i < n; ++i) {
      x(i) = x(i - 1) + unif(rng);
      y(i) = y(i - 1) + unif(rng);
    }
    PchipSpline p(x, y);
    double prev = p(x(0));
    for (int j = 1; j <= 400; ++j) {
      const double q = x(0) + (x(n - 1) - x(0)) * j / 400.0;
      const double val = p(q);
      REQUIRE(val >= prev - 1e-12);
      prev = val;
    }
    // Interpolation property at the knots.
    for (int i = 0; i < n; ++i) REQUIRE(p(x(i)) == Catch::Approx(y(i)).margin(1e-12));
  }
}

TEST_CASE("grid helpers flag mismatched inputs") {
  const TimeGrid a = TimeGrid::uniform(11);
  const TimeGrid b = TimeGrid::uniform(12);
  REQUIRE(same_grid(a, a));
  REQUIRE_FALSE(same_grid(a, b));
  REQUIRE_THROWS_AS(trapz(a, Vec::Zero(5)), invalid_input);
  REQUIRE_THROWS_AS(inner(a, Vec::Zero(11), Vec::Zero(10)), invalid_input);
}
