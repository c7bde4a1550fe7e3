// Penalized B-spline smoothing. Basis correctness is pinned by partition
// of unity, finite-difference agreement of derivative rows, and quadrature
// cross-checks of the penalty Gram matrix; the smoother itself by exact
// polynomial reproduction, Monte-Carlo noise recovery, and its large-lambda
// polynomial limit.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include <fcomb/bspline.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/rng.hpp>
#include <fcomb/smooth.hpp>

using namespace fcomb;

namespace {

constexpr double kPi = 3.14159265358979323846;

RawRecord make_record(const Vec& t, const Vec& y, const char* id = "r") {
  return RawRecord{t, y, id};
}


}  // namespace

TEST_CASE("basis functions form a partition of unity with positive values") {
  Vec bp(7);
  bp << 0.0, 0.07, 0.22, 0.41, 0.66, 0.85, 1.0;
  const BSplineBasis basis(bp, 4);
  REQUIRE(basis.size() == 6 - 1 + 1 + 4);  // breakpoints-1 + degree
  Mat ders;
  for (int i = 0; i <= 500; ++i) {
    const double x = i / 500.0;
    const int first = basis.eval(x, 0, ders);
    REQUIRE(first >= 0);
    REQUIRE(first + 4 < basis.size());
    double sum = 0.0;
    for (int j = 0; j <= 4; ++j) {
      REQUIRE(ders(0, j) >= -1e-14);
      sum += ders(0, j);
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("basis derivative rows agree with finite differences") {
  Vec bp(6);
  bp << 0.0, 0.18, 0.42, 0.63, 0.77, 1.0;
  const BSplineBasis basis(bp, 4);
  const double h = 1e-6;
  Mat lo, hi, at;
  for (double x : {0.1, 0.3, 0.55, 0.69, 0.9}) {
    const int first = basis.eval(x, 2, at);
    const int f_lo = basis.eval(x - h, 1, lo);
    const int f_hi = basis.eval(x + h, 1, hi);
    REQUIRE(f_lo == first);
    REQUIRE(f_hi == first);
    for (int j = 0; j <= 4; ++j) {
      const double fd1 = (hi(0, j) - lo(0, j)) / (2.0 * h);
      const double fd2 = (hi(1, j) - lo(1, j)) / (2.0 * h);
      REQUIRE(at(1, j) == Catch::Approx(fd1).margin(1e-4));
      REQUIRE(at(2, j) == Catch::Approx(fd2).margin(1e-3));
    }
  }
}

TEST_CASE("penalty Gram matrix matches brute-force quadrature") {
  Vec bp(5);
  bp << 0.0, 0.3, 0.55, 0.8, 1.0;
  const BSplineBasis basis(bp, 4);
  const Mat pen = basis.penalty(2);
  REQUIRE(pen.rows() == basis.size());
  REQUIRE((pen - pen.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  // Dense trapezoid cross-check of a few entries.
  const int fine = 40001;
  const TimeGrid g = TimeGrid::uniform(fine);
  Mat d2 = basis.design(g.t, 2);
  const Vec w = quad_weights(g);
  for (int r : {0, 2, 5}) {
    for (int c : {0, 3, basis.size() - 1}) {
      double acc = 0.0;
      for (int i = 0; i < fine; ++i) acc += w(i) * d2(i, r) * d2(i, c);
      REQUIRE(pen(r, c) == Catch::Approx(acc).margin(1e-4 * (1.0 + std::abs(acc))));
    }
  }

  // Second-derivative penalty annihilates exactly the linear functions.
  Eigen::SelfAdjointEigenSolver<Mat> eig(pen);
  int null_dim = 0;
  for (int i = 0; i < basis.size(); ++i)
    if (eig.eigenvalues()(i) < 1e-8 * eig.eigenvalues().maxCoeff()) ++null_dim;
  REQUIRE(null_dim == 2);
}

TEST_CASE("noiseless straight line is reproduced for any lambda") {
  const int m = 31;
  const TimeGrid g = TimeGrid::uniform(m);
  Vec y(m);
  for (int i = 0; i < m; ++i) y(i) = 2.0 - 0.75 * g.t(i);
  const RawRecord rec = make_record(g.t, y);

  for (double lam : {1e-8, 1e-2, 1.0, 1e6}) {
    const SmoothCurve fit = fit_smooth(rec, 4, 2, lam);
    REQUIRE(fit.selected_lambda == lam);
    const SampledCurve at_obs = eval_curve(fit, g, 0);
    REQUIRE((at_obs.v - y).cwiseAbs().maxCoeff() < 1e-8);
  }
  const SmoothCurve gcv_fit = fit_smooth(rec);
  const SampledCurve at_obs = eval_curve(gcv_fit, g, 0);
  REQUIRE((at_obs.v - y).cwiseAbs().maxCoeff() < 1e-8);

  // Degree-2 derivative of the line fit vanishes.
  const SampledCurve d2 = eval_curve(fit_smooth(rec, 4, 2, 1.0), g, 2);
  REQUIRE(d2.v.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("noisy sine is recovered within the expected risk") {
  const int m = 101;
  const TimeGrid g = TimeGrid::uniform(m);
  Vec truth(m);
  for (int i = 0; i < m; ++i) truth(i) = std::sin(2.0 * kPi * g.t(i));

  double total_rmse = 0.0;
  const int reps = 25;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = Rng::substream(404, static_cast<std::uint64_t>(rep));
    Vec y = truth;
    for (int i = 0; i < m; ++i) y(i) += rng.normal(0.0, 0.1);
    const SmoothCurve fit = fit_smooth(make_record(g.t, y));
    const SampledCurve fitted = eval_curve(fit, g, 0);
    const double rmse =
        std::sqrt((fitted.v - truth).squaredNorm() / static_cast<double>(m));
    REQUIRE(rmse < 0.15);
    total_rmse += rmse;
  }
  REQUIRE(total_rmse / reps < 0.1);
}

TEST_CASE("selected lambda minimizes the reported criterion over the sweep") {
  const int m = 61;
  const TimeGrid g = TimeGrid::uniform(m);
  Rng rng(77);
  Vec y(m);
  for (int i = 0; i < m; ++i)
    y(i) = std::cos(3.0 * g.t(i)) + rng.normal(0.0, 0.2);
  const RawRecord rec = make_record(g.t, y);
  const SmoothCurve fit = fit_smooth(rec);
  const double chosen = gcv_score(rec, 4, 2, fit.selected_lambda);
  for (int i = 0; i < 41; ++i) {
    const double lam = std::pow(10.0, -10.0 + 12.0 * i / 40.0);
    REQUIRE(chosen <= gcv_score(rec, 4, 2, lam) * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("derivative of a clean quadratic fit tracks the analytic slope") {
  const int m = 101;
  const TimeGrid g = TimeGrid::uniform(m);
  Vec y(m);
  for (int i = 0; i < m; ++i) y(i) = g.t(i) * g.t(i);
  const SmoothCurve fit = fit_smooth(make_record(g.t, y));
  const SampledCurve d1 = eval_curve(fit, g, 1);
  double sup = 0.0;
  for (int i = 0; i < m; ++i) {
    if (g.t(i) < 0.05 || g.t(i) > 0.95) continue;
    sup = std::max(sup, std::abs(d1.v(i) - 2.0 * g.t(i)));
  }
  REQUIRE(sup < 1e-3);
}

TEST_CASE("smoother is linear in the observations at fixed lambda") {
  const int m = 23;
  Vec t(m);
  for (int i = 0; i < m; ++i) t(i) = std::pow(i / (m - 1.0), 1.3);
  t(0) = 0.0;
  t(m - 1) = 1.0;
  Rng rng(5150);
  Vec y1(m), y2(m);
  for (int i = 0; i < m; ++i) {
    y1(i) = rng.normal();
    y2(i) = rng.normal();
  }
  const double a = 1.7, b = -0.4;
  const SmoothCurve f1 = fit_smooth(make_record(t, y1), 4, 2, 0.37);
  const SmoothCurve f2 = fit_smooth(make_record(t, y2), 4, 2, 0.37);
  const SmoothCurve fc =
      fit_smooth(make_record(t, Vec(a * y1 + b * y2)), 4, 2, 0.37);
  const Vec combo = a * f1.coefficients + b * f2.coefficients;
  REQUIRE((fc.coefficients - combo).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("large lambda drives the fit to the least-squares line") {
  const int m = 51;
  const TimeGrid g = TimeGrid::uniform(m);
  Vec y(m);
  for (int i = 0; i < m; ++i)
    y(i) = std::sin(2.0 * kPi * g.t(i)) + 0.3 * g.t(i) + 1.0;

  Mat line_design(m, 2);
  line_design.col(0).setOnes();
  line_design.col(1) = g.t;
  const Vec ab = (line_design.transpose() * line_design)
                     .ldlt()
                     .solve(line_design.transpose() * y);
  const Vec line = line_design * ab;

  const SmoothCurve fit = fit_smooth(make_record(g.t, y), 4, 2, 1e6);
  const SampledCurve fitted = eval_curve(fit, g, 0);
  REQUIRE((fitted.v - line).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duplicated observation times are averaged") {
  Vec t(8), y(8);
  t << 0.0, 0.2, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0;
  y << 0.0, 1.0, 3.0, 2.0, 1.5, 0.5, 0.25, 0.0;
  Vec tu(7), yu(7);
  tu << 0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0;
  yu << 0.0, 2.0, 2.0, 1.5, 0.5, 0.25, 0.0;
  const SmoothCurve a = fit_smooth(make_record(t, y), 4, 2, 0.01);
  const SmoothCurve b = fit_smooth(make_record(tu, yu), 4, 2, 0.01);
  REQUIRE((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(a.knots.size() == 7);
}

TEST_CASE("smoothing rejects bad inputs with specific errors") {
  Vec t(4), y(4);
  t << 0.0, 0.3, 0.7, 1.0;
  y << 1.0, 2.0, 3.0, 4.0;
  REQUIRE_THROWS_AS(fit_smooth(make_record(t, y)), invalid_input);

  Vec t2(8), y2(8);
  t2 << 0.0, 0.1, 0.3, 0.42, 0.58, 0.74, 0.9, 1.0;
  y2 << 0.0, 0.2, 0.1, 0.4, 0.3, 0.6, 0.5, 0.8;
  REQUIRE_THROWS_AS(fit_smooth(make_record(t2, y2), 4, 2, -1.0), invalid_input);
  REQUIRE_THROWS_AS(fit_smooth(make_record(t2, y2), 4, 2, 1e-300),
                    numeric_failure);

  Vec bad_t = t2;
  bad_t(3) = 1.4;
  REQUIRE_THROWS_AS(fit_smooth(make_record(bad_t, y2)), invalid_input);

  const SmoothCurve ok = fit_smooth(make_record(t2, y2));
  REQUIRE_THROWS_AS(eval_curve(ok, TimeGrid::uniform(11), 4), invalid_input);
  REQUIRE_NOTHROW(eval_curve(ok, TimeGrid::uniform(11), 3));
}
