// Elastic alignment. The dynamic program is pinned by exact trivial cases
// (self-alignment, feasibility of the identity path) and by recovery of a
// known constructed warp; the set-level aligner by its centering,
// reconstruction, and variance-reduction contracts.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include <fcomb/align.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/rng.hpp>
#include <fcomb/warp.hpp>

using namespace fcomb;

namespace {

constexpr double kPi = 3.14159265358979323846;

SampledCurve sine_curve(const TimeGrid& g, double freq = 1.0) {
  Vec v(g.k());
  for (int i = 0; i < g.k(); ++i) v(i) = std::sin(2.0 * kPi * freq * g.t(i));
  return SampledCurve{g, v};
}

WarpingFunction bump_warp(const TimeGrid& g, double a) {
  Vec v(g.k());
  for (int i = 0; i < g.k(); ++i) {
    const double t = g.t(i);
    v(i) = t + a * t * (1.0 - t);
  }
  v(0) = 0.0;
  v(g.k() - 1) = 1.0;
  return WarpingFunction{g, v};
}

double grid_cell(const TimeGrid& g) { return 1.0 / (g.k() - 1); }

}  // namespace

TEST_CASE("signed transform of elementary curves") {
  const TimeGrid g = TimeGrid::uniform(101);

  Vec line = g.t;
  const SampledCurve q_line = curve_srvf(SampledCurve{g, line});
  REQUIRE((q_line.v.array() - 1.0).abs().maxCoeff() < 1e-12);

  const SampledCurve q_flat =
      curve_srvf(SampledCurve{g, Vec::Constant(g.k(), 2.5)});
  REQUIRE(q_flat.v.cwiseAbs().maxCoeff() < 1e-12);

  Vec falling = Vec::Ones(g.k()) - g.t;
  const SampledCurve q_fall = curve_srvf(SampledCurve{g, falling});
  REQUIRE((q_fall.v.array() + 1.0).abs().maxCoeff() < 1e-12);

  // Margin reflects sqrt amplification of derivative roundoff near zero.
  Vec square = g.t.array().square();
  const SampledCurve q_sq = curve_srvf(SampledCurve{g, square});
  for (int i = 0; i < g.k(); ++i)
    REQUIRE(q_sq.v(i) == Catch::Approx(std::sqrt(2.0 * g.t(i))).margin(1e-7));

  // No normalization: doubling the curve scales the transform by sqrt(2).
  const SampledCurve q2 = curve_srvf(SampledCurve{g, Vec(2.0 * square)});
  for (int i = 0; i < g.k(); ++i)
    REQUIRE(q2.v(i) == Catch::Approx(std::sqrt(2.0) * q_sq.v(i)).margin(1e-12));
}

TEST_CASE("aligning a curve to itself returns the identity warp") {
  const TimeGrid g = TimeGrid::uniform(101);
  const SampledCurve q = curve_srvf(sine_curve(g));
  const WarpingFunction w = pairwise_optimal_warp(q, q);
  w.check();
  REQUIRE((w.v - g.t).cwiseAbs().maxCoeff() <= grid_cell(g) + 1e-12);
}

TEST_CASE("pairwise warp recovers a constructed deformation") {
  const TimeGrid g = TimeGrid::uniform(101);
  const WarpingFunction g0 = bump_warp(g, 0.55);
  const SampledCurve f = sine_curve(g);
  const SampledCurve f_warped = compose_with_warp(f, g0);

  const SampledCurve q_ref = curve_srvf(f);
  const SampledCurve q_mov = curve_srvf(f_warped);
  const WarpingFunction w = pairwise_optimal_warp(q_ref, q_mov);
  w.check();

  const WarpingFunction g0_inv = invert_warp(g0);
  REQUIRE((w.v - g0_inv.v).cwiseAbs().maxCoeff() <= 2.0 * grid_cell(g) + 1e-9);
}

TEST_CASE("optimal cost never exceeds the identity path's cost") {
  const TimeGrid g = TimeGrid::uniform(81);
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    Vec a(g.k()), b(g.k());
    const double pa = rng.uniform(0.5, 3.0), pb = rng.uniform(0.5, 3.0);
    const double sa = rng.uniform(-1.0, 1.0), sb = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < g.k(); ++i) {
      const double t = g.t(i);
      a(i) = std::sin(2.0 * kPi * pa * t) + sa * t;
      b(i) = std::cos(2.0 * kPi * pb * t) + sb * t * t;
    }
    const SampledCurve qa = curve_srvf(SampledCurve{g, a});
    const SampledCurve qb = curve_srvf(SampledCurve{g, b});
    const auto res = pairwise_optimal_warp_with_cost(qa, qb);
    res.warp.check();
    const double ident_cost = l2dist(g, qa.v, qb.v);
    REQUIRE(res.cost <= ident_cost * ident_cost + 1e-12);
  }
}

TEST_CASE("aligning identical curves is a no-op") {
  const TimeGrid g = TimeGrid::uniform(101);
  const std::vector<SampledCurve> curves(5, sine_curve(g));
  const AlignmentResult res = align_set(curves);
  REQUIRE(res.converged);
  for (int i = 0; i < 5; ++i) {
    REQUIRE((res.warps[i].v - g.t).cwiseAbs().maxCoeff() <=
            grid_cell(g) + 1e-9);
    REQUIRE(res.phases[i].x.cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE((res.aligned[i].v - curves[i].v).cwiseAbs().maxCoeff() < 1e-6);
  }
}

namespace {

// Common shape warped by known phase plus mild amplitude scaling.
std::vector<SampledCurve> phase_varied_set(const TimeGrid& g, int n,
                                           std::uint64_t seed) {
  std::vector<SampledCurve> curves;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-0.5, 0.5);
    const double amp = 1.0 + 0.1 * rng.normal();
    const WarpingFunction wi = bump_warp(g, a);
    Vec v(g.k());
    for (int j = 0; j < g.k(); ++j)
      v(j) = amp * std::sin(2.0 * kPi * wi.v(j));
    curves.push_back(SampledCurve{g, v});
  }
  return curves;
}

double total_pointwise_variance(const std::vector<SampledCurve>& curves) {
  const int n = static_cast<int>(curves.size());
  const int k = curves.front().grid.k();
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += curves[i].v(j);
    mean /= n;
    for (int i = 0; i < n; ++i) {
      const double d = curves[i].v(j) - mean;
      total += d * d / (n - 1);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("alignment centers phases and reconstructs the inputs") {
  const TimeGrid g = TimeGrid::uniform(101);
  const int n = 12;
  const std::vector<SampledCurve> curves = phase_varied_set(g, n, 909);
  const AlignmentResult res = align_set(curves);

  REQUIRE(static_cast<int>(res.aligned.size()) == n);
  REQUIRE(res.iterations >= 1);
  REQUIRE(std::abs(l2norm(g, res.template_srvf.v) - 1.0) < 1e-9);

  // Phases sum to zero at every grid point.
  Vec phase_sum = Vec::Zero(g.k());
  for (const TangentFunction& x : res.phases) phase_sum += x.x;
  REQUIRE(phase_sum.cwiseAbs().maxCoeff() < 1e-6);

  // Warps are valid and phases match them.
  double range = 0.0;
  for (const SampledCurve& c : curves)
    range = std::max(range, c.v.maxCoeff() - c.v.minCoeff());
  for (int i = 0; i < n; ++i) {
    res.warps[i].check();
    res.phases[i].check(1e-6);
    const SampledCurve recon = compose_with_warp(res.aligned[i], res.warps[i]);
    REQUIRE((recon.v - curves[i].v).cwiseAbs().maxCoeff() < 1e-2 * range);
  }

  // Aligning removes most of the pointwise spread of a phase-varied set.
  const double before = total_pointwise_variance(curves);
  const double after = total_pointwise_variance(res.aligned);
  REQUIRE(after < before);
}

TEST_CASE("alignment is idempotent up to grid resolution") {
  const TimeGrid g = TimeGrid::uniform(101);
  const std::vector<SampledCurve> curves = phase_varied_set(g, 8, 1234);
  const AlignmentResult first = align_set(curves);
  const AlignmentResult second = align_set(first.aligned);
  for (const WarpingFunction& w : second.warps)
    REQUIRE((w.v - g.t).cwiseAbs().maxCoeff() <= 2.0 * grid_cell(g) + 1e-9);
}
