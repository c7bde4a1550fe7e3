#pragma once

// Elastic alignment of a set of curves: signed square-root-slope
// transforms, pairwise optimal warping by dynamic programming on a lattice
// of admissible slopes, an iterated spherical-mean template, and centering
// so the sample phase functions sum to zero at every grid point.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/interp.hpp>
#include <fcomb/parallel.hpp>
#include <fcomb/sphere.hpp>
#include <fcomb/warp.hpp>

namespace fcomb {

struct AlignmentResult {
  std::vector<SampledCurve> aligned;        // y_i with phase removed
  std::vector<WarpingFunction> warps;       // gamma_i, f_i = y_i(gamma_i)
  std::vector<TangentFunction> phases;      // x_i, summing to zero
  SampledCurve template_srvf;               // unit-norm template
  int iterations = 0;
  bool converged = true;
};

// Signed square-root-slope transform of a curve. Unlike warp SRVFs this is
// not normalized: the amplitude scale stays in the transform.
inline SampledCurve curve_srvf(const SampledCurve& f) {
  f.check();
  const Vec d = deriv(f.grid, f.v);
  Vec q(d.size());
  for (int i = 0; i < d.size(); ++i)
    q(i) = (d(i) < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(d(i)));
  return SampledCurve{f.grid, std::move(q)};
}

namespace detail {

// Admissible lattice steps: coprime (dt, dv) with components in 1..5.
inline const std::vector<std::pair<int, int>>& warp_steps() {
  static const std::vector<std::pair<int, int>> steps = [] {
    std::vector<std::pair<int, int>> s;
    for (int a = 1; a <= 5; ++a)
      for (int b = 1; b <= 5; ++b)
        if (std::gcd(a, b) == 1) s.emplace_back(a, b);
    return s;
  }();
  return steps;
}

inline double interp_linear(const TimeGrid& g, const Vec& v, double x) {
  const int i = find_interval(g.t, x);
  const double h = g.t(i + 1) - g.t(i);
  const double w = (x - g.t(i)) / h;
  return (1.0 - w) * v(i) + w * v(i + 1);
}

struct DpResult {
  WarpingFunction warp;
  double cost = 0.0;
};

// Dynamic program over the k x k lattice. An edge from (ii, jj) to (i, j)
// represents gamma linear on [t_ii, t_i] with slope (t_j - t_jj)/(t_i -
// t_ii); its cost integrates (q_ref - q_mov(gamma) sqrt(slope))^2 by
// trapezoid on the covered grid points, interpolating q_mov linearly.
inline DpResult pairwise_optimal_warp_impl(const TimeGrid& g, const Vec& qr,
                                           const Vec& qm) {
  const int k = g.k();
  const auto& steps = warp_steps();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Mat cost = Mat::Constant(k, k, kInf);
  Eigen::MatrixXi back = Eigen::MatrixXi::Constant(k, k, -1);
  cost(0, 0) = 0.0;

  auto edge_cost = [&](int ii, int jj, int i, int j) {
    const double dt = g.t(i) - g.t(ii);
    const double slope = (g.t(j) - g.t(jj)) / dt;
    const double root = std::sqrt(slope);
    double acc = 0.0;
    double prev = 0.0;
    for (int m = ii; m <= i; ++m) {
      const double gm = g.t(jj) + slope * (g.t(m) - g.t(ii));
      const double diff = qr(m) - root * interp_linear(g, qm, std::min(gm, 1.0));
      const double val = diff * diff;
      if (m > ii) acc += 0.5 * (g.t(m) - g.t(m - 1)) * (val + prev);
      prev = val;
    }
    return acc;
  };

  for (int i = 1; i < k; ++i) {
    for (int j = 1; j < k; ++j) {
      double best = kInf;
      int arg = -1;
      for (int s = 0; s < static_cast<int>(steps.size()); ++s) {
        const int ii = i - steps[s].first;
        const int jj = j - steps[s].second;
        if (ii < 0 || jj < 0) continue;
        const double base = cost(ii, jj);
        if (!(base < kInf)) continue;
        const double c = base + edge_cost(ii, jj, i, j);
        if (c < best) {
          best = c;
          arg = s;
        }
      }
      cost(i, j) = best;
      back(i, j) = arg;
    }
  }

  // Backtrack and fill the piecewise-linear warp on the full grid.
  Vec v(k);
  int i = k - 1, j = k - 1;
  v(k - 1) = 1.0;
  while (i > 0) {
    const int s = back(i, j);
    const int ii = i - steps[s].first;
    const int jj = j - steps[s].second;
    const double slope = (g.t(j) - g.t(jj)) / (g.t(i) - g.t(ii));
    for (int m = ii; m < i; ++m)
      v(m) = g.t(jj) + slope * (g.t(m) - g.t(ii));
    i = ii;
    j = jj;
  }
  v(0) = 0.0;
  return DpResult{WarpingFunction{g, std::move(v)}, cost(k - 1, k - 1)};
}

}  // namespace detail

inline WarpingFunction pairwise_optimal_warp(const SampledCurve& q_ref,
                                             const SampledCurve& q_mov) {
  require_same_grid(q_ref.grid, q_mov.grid, "pairwise warp");
  return detail::pairwise_optimal_warp_impl(q_ref.grid, q_ref.v, q_mov.v).warp;
}

// Warp plus its achieved objective value; the identity path's objective is
// exactly the squared grid distance, so cost <= ||q_ref - q_mov||^2 always.
inline detail::DpResult pairwise_optimal_warp_with_cost(
    const SampledCurve& q_ref, const SampledCurve& q_mov) {
  require_same_grid(q_ref.grid, q_mov.grid, "pairwise warp");
  return detail::pairwise_optimal_warp_impl(q_ref.grid, q_ref.v, q_mov.v);
}

inline AlignmentResult align_set(const std::vector<SampledCurve>& curves,
                                 double tol = 1e-4, int max_iter = 20) {
  const int n = static_cast<int>(curves.size());
  if (n < 2) throw invalid_input("alignment needs at least two curves");
  const TimeGrid& g = curves.front().grid;
  for (const SampledCurve& c : curves) {
    c.check();
    require_same_grid(g, c.grid, "align_set");
  }
  const int k = g.k();

  std::vector<SampledCurve> srvfs;
  srvfs.reserve(n);
  for (const SampledCurve& c : curves) srvfs.push_back(curve_srvf(c));

  // Template: SRVF of the cross-sectional mean to start, then iterated
  // spherical mean of the aligned SRVFs rescaled back to amplitude size.
  Vec mean_curve = Vec::Zero(k);
  for (const SampledCurve& c : curves) mean_curve += c.v;
  mean_curve /= n;
  Vec templ = curve_srvf(SampledCurve{g, mean_curve}).v;

  std::vector<WarpingFunction> w(n, WarpingFunction::identity(g));
  std::vector<SampledCurve> aligned(n, SampledCurve{g, Vec::Zero(k)});
  int iterations = 0;
  bool converged = false;

  for (int iter = 0; iter < max_iter; ++iter) {
    ++iterations;
    parallel_for(n, [&](int i) {
      w[i] = detail::pairwise_optimal_warp_impl(g, templ, srvfs[i].v).warp;
      aligned[i] = compose_with_warp(curves[i], w[i]);
    });

    std::vector<Vec> unit(n);
    double norm_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      Vec q = curve_srvf(aligned[i]).v;
      const double nm = l2norm(g, q);
      if (!(nm > 0.0))
        throw numeric_failure("aligned curve has a vanishing transform", nm);
      norm_sum += nm;
      unit[i] = q / nm;
    }
    const Vec mean_unit = karcher_mean_sphere(g, unit);
    const Vec new_templ = (norm_sum / n) * mean_unit;

    const double before = l2norm(g, templ);
    const double movement =
        geodesic_distance(g, Vec(templ / before), mean_unit);
    templ = new_templ;
    if (movement < tol) {
      converged = true;
      break;
    }
  }

  // Centering. Stage one recenters the spherical mean of the warps at the
  // identity (a right action, which the metric treats as an isometry).
  // Stage two removes the residual tangent-space mean; the subtraction is
  // the final operation on the phases so their sum is zero in floating
  // point, and the aligned curves are rebuilt from the final warps so the
  // reconstruction identity holds exactly by construction.
  std::vector<WarpingFunction> gam(n, WarpingFunction::identity(g));
  for (int i = 0; i < n; ++i) gam[i] = invert_warp(w[i]);

  std::vector<Vec> warp_srvfs(n);
  for (int i = 0; i < n; ++i) warp_srvfs[i] = srvf_of_warp(gam[i]).q;
  const WarpingFunction gbar =
      warp_of_srvf(SrvfPoint{g, karcher_mean_sphere(g, warp_srvfs)});
  const WarpingFunction gbar_inv = invert_warp(gbar);
  for (int i = 0; i < n; ++i) gam[i] = compose_warps(gam[i], gbar_inv);

  Vec psi_mean = Vec::Zero(k);
  std::vector<Vec> psi(n);
  for (int i = 0; i < n; ++i) {
    psi[i] = phi(gam[i]).x;
    psi_mean += psi[i];
  }
  psi_mean /= n;

  AlignmentResult out;
  out.aligned.resize(n, SampledCurve{g, Vec::Zero(k)});
  out.warps.resize(n, WarpingFunction::identity(g));
  out.phases.resize(n, TangentFunction::zero(g));
  for (int i = 0; i < n; ++i) {
    out.phases[i] = TangentFunction{g, psi[i] - psi_mean};
    out.warps[i] = phi_inverse(out.phases[i]);
    out.aligned[i] = compose_with_warp(curves[i], invert_warp(out.warps[i]));
  }
  out.template_srvf = SampledCurve{g, templ / l2norm(g, templ)};
  out.iterations = iterations;
  out.converged = converged;
  return out;
}

}  // namespace fcomb
