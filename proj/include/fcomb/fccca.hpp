#pragma once

// Penalized canonical correlation between the amplitude and phase blocks of
// an aligned functional sample. Weights are grid functions; variances are
// taken in the quadrature inner product and roughness is penalized through
// a second-difference quadratic form.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/parallel.hpp>
#include <fcomb/warp.hpp>

namespace fcomb {

struct CcaModel {
  TimeGrid grid;
  Vec mean_amplitude;   // cross-sectional mean of the amplitude curves
  Mat amp_weights;      // k x r; column i pairs with phase_weights.col(i)
  Mat phase_weights;    // k x r; tangent functions (weighted mean removed)
  Vec correlations;     // sample correlations of score pairs, nonincreasing
  Vec slopes;           // slope of phase score regressed on amplitude score
  Mat amp_scores;       // n x r
  Mat phase_scores;     // n x r
  double lambda = 0.0;  // roughness penalty weight actually used
  bool truncated = false;  // fewer pairs returned than requested
  // Leave-one-out estimate of the first correlation at the chosen penalty
  // weight; only present when the weight was selected by cross-validation.
  std::optional<double> validated_first_correlation;
};

namespace detail {

// Quadratic form approximating the integrated squared second derivative:
// three-point difference quotients at interior nodes, trapezoid-weighted.
// Constants and linear functions are annihilated exactly.
inline Mat curvature_penalty(const TimeGrid& g) {
  const int k = g.k();
  Mat p = Mat::Zero(k, k);
  for (int i = 1; i + 1 < k; ++i) {
    const double hm = g.t(i) - g.t(i - 1);
    const double hp = g.t(i + 1) - g.t(i);
    const double cm = 2.0 / (hm * (hm + hp));
    const double cc = -2.0 / (hm * hp);
    const double cp = 2.0 / (hp * (hm + hp));
    const double w = 0.5 * (hm + hp);
    const double row[3] = {cm, cc, cp};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double prod = row[a] * row[b];  // commutes, keeps p symmetric
        p(i - 1 + a, i - 1 + b) += w * prod;
      }
  }
  return p;
}

// Symmetric inverse square root with an absolute eigenvalue floor, used to
// whiten the (possibly rank-deficient) penalized covariance matrices.
inline Mat inverse_sqrt_floor(const Mat& b, double floor_value = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(b);
  if (eig.info() != Eigen::Success)
    throw numeric_failure("symmetric eigen solve failed", 0.0);
  const Vec vals = eig.eigenvalues().cwiseMax(floor_value);
  return eig.eigenvectors() *
         vals.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

struct CcaCore {
  Mat amp_weights;    // k x r columns, normalized a' By a = 1
  Mat phase_weights;  // k x r columns, normalized b' Bx b = 1
  Vec penalized_covariances;  // singular values of the whitened cross matrix
};

// Whiten both blocks, take the SVD of the cross matrix, and back-transform
// the leading r singular vectors into canonical weight functions.
inline CcaCore solve_cca_core(const Mat& by, const Mat& bx, const Mat& a,
                              int r) {
  const Mat ry = inverse_sqrt_floor(by);
  const Mat rx = inverse_sqrt_floor(bx);
  Eigen::BDCSVD<Mat> svd(ry * a * rx,
                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  CcaCore core;
  core.amp_weights = ry * svd.matrixU().leftCols(r);
  core.phase_weights = rx * svd.matrixV().leftCols(r);
  core.penalized_covariances = svd.singularValues().head(r);
  return core;
}

// Shared discretization of one CCA problem instance.
struct CcaProblem {
  TimeGrid grid;
  Mat yc, xc;       // n x k centered data
  Vec mean_y, mean_x;
  Vec w;            // quadrature weights
  Mat penalty;      // curvature quadratic form
  Mat syy, sxx, syx;  // W * sample covariance * W
};

inline CcaProblem build_problem(const std::vector<SampledCurve>& ys,
                                const std::vector<TangentFunction>& xs) {
  const int n = static_cast<int>(ys.size());
  if (n < 3) throw invalid_input("canonical analysis needs at least 3 samples");
  if (xs.size() != ys.size())
    throw invalid_input("amplitude and phase sample counts differ");
  CcaProblem pr;
  pr.grid = ys.front().grid;
  const int k = pr.grid.k();
  pr.yc.resize(n, k);
  pr.xc.resize(n, k);
  for (int i = 0; i < n; ++i) {
    require_same_grid(pr.grid, ys[i].grid, "canonical analysis");
    require_same_grid(pr.grid, xs[i].grid, "canonical analysis");
    pr.yc.row(i) = ys[i].v.transpose();
    pr.xc.row(i) = xs[i].x.transpose();
  }
  pr.mean_y = pr.yc.colwise().mean();
  pr.mean_x = pr.xc.colwise().mean();
  pr.yc.rowwise() -= pr.mean_y.transpose();
  pr.xc.rowwise() -= pr.mean_x.transpose();
  pr.w = quad_weights(pr.grid);
  pr.penalty = curvature_penalty(pr.grid);
  const double den = n - 1.0;
  pr.syy = pr.w.asDiagonal() * (pr.yc.transpose() * pr.yc / den) *
           pr.w.asDiagonal();
  pr.sxx = pr.w.asDiagonal() * (pr.xc.transpose() * pr.xc / den) *
           pr.w.asDiagonal();
  pr.syx = pr.w.asDiagonal() * (pr.yc.transpose() * pr.xc / den) *
           pr.w.asDiagonal();
  return pr;
}

// Leading canonical pair given Cholesky factors of the penalized block
// matrices. Power iteration on the amplitude side; the start vector must
// overlap the leading direction (callers pass the full-data solution).
struct LeadingPair {
  Vec a, b;
};

inline LeadingPair leading_pair_from_factors(const Eigen::LLT<Mat>& by,
                                             const Eigen::LLT<Mat>& bx,
                                             const Mat& cross,
                                             const Vec& start) {
  Vec z = start;
  const double zn = z.norm();
  if (!(zn > 0.0)) throw numeric_failure("power iteration start vanished", 0.0);
  z /= zn;
  for (int it = 0; it < 120; ++it) {
    Vec next = by.solve(cross * bx.solve(cross.transpose() * z));
    const double nn = next.norm();
    if (!(nn > 0.0)) break;  // no cross coupling at all; keep current vector
    next /= nn;
    const double overlap = std::abs(next.dot(z));
    z = next;
    if (overlap > 1.0 - 1e-13) break;
  }
  if (z.dot(start) < 0.0) z = -z;  // sign fixed by the reference direction
  LeadingPair out;
  const double ay = (by.matrixU() * z).norm();
  if (!(ay > 0.0)) throw numeric_failure("degenerate amplitude norm", ay);
  out.a = z / ay;
  Vec braw = bx.solve(cross.transpose() * out.a);
  const double bn = (bx.matrixU() * braw).norm();
  if (!(bn > 0.0)) {
    // Held-out pair carries no phase information; a zero weight scores 0.
    out.b = Vec::Zero(braw.size());
    return out;
  }
  out.b = braw / bn;
  return out;
}

// Pearson correlation; zero when either side is degenerate.
inline double pearson(const Vec& u, const Vec& v) {
  const double mu = u.mean(), mv = v.mean();
  const Eigen::ArrayXd du = u.array() - mu, dv = v.array() - mv;
  const double su = std::sqrt((du * du).sum());
  const double sv = std::sqrt((dv * dv).sum());
  if (!(su > 0.0) || !(sv > 0.0)) return 0.0;
  return (du * dv).sum() / (su * sv);
}

// Validated first canonical correlation at one penalty weight: refit the
// leading pair with each sample held out and correlate the held-out score
// pairs. Fold matrices are rank-one downdates of a shared base, so each
// fold costs a pair of Cholesky downdates instead of fresh factorizations.
inline double loo_first_correlation(const CcaProblem& pr, double lambda,
                                    const Vec& amp_start) {
  const int n = static_cast<int>(pr.yc.rows());
  const double base_scale = (n - 1.0) / (n - 2.0);
  const double down = static_cast<double>(n) / ((n - 1.0) * (n - 2.0));
  const Mat base_by = base_scale * pr.syy + lambda * pr.penalty;
  const Mat base_bx = base_scale * pr.sxx + lambda * pr.penalty;
  const Eigen::LLT<Mat> by0(base_by);
  const Eigen::LLT<Mat> bx0(base_bx);
  const bool factored = by0.info() == Eigen::Success &&
                        bx0.info() == Eigen::Success;

  Vec held_u(n), held_v(n);
  parallel_for(n, [&](int i) {
    const Vec wd = pr.w.asDiagonal() * pr.yc.row(i).transpose();
    const Vec we = pr.w.asDiagonal() * pr.xc.row(i).transpose();
    const Mat cross = base_scale * pr.syx - down * (wd * we.transpose());
    LeadingPair pair;
    bool done = false;
    if (factored) {
      Eigen::LLT<Mat> by = by0;
      Eigen::LLT<Mat> bx = bx0;
      by.rankUpdate(std::sqrt(down) * wd, -1.0);
      bx.rankUpdate(std::sqrt(down) * we, -1.0);
      if (by.info() == Eigen::Success && bx.info() == Eigen::Success) {
        pair = leading_pair_from_factors(by, bx, cross, amp_start);
        done = true;
      }
    }
    if (!done) {
      // Degenerate downdate: fall back to the dense whitened solve.
      const Mat by = base_by - down * (wd * wd.transpose());
      const Mat bx = base_bx - down * (we * we.transpose());
      const CcaCore core = solve_cca_core(by, bx, cross, 1);
      pair.a = core.amp_weights.col(0);
      pair.b = core.phase_weights.col(0);
      if (pair.a.dot(amp_start) < 0.0) {
        pair.a = -pair.a;
        pair.b = -pair.b;
      }
    }
    const double lift = static_cast<double>(n) / (n - 1.0);
    held_u(i) = pair.a.dot(wd) * lift;
    held_v(i) = pair.b.dot(we) * lift;
  });
  return pearson(held_u, held_v);
}

}  // namespace detail

// Canonical weight pairs between amplitude and phase variation. Each weight
// is normalized so its sample score variance plus the lambda-weighted
// curvature of the weight equals one; correlations are sample correlations
// of the score pairs, reported in nonincreasing order. When lambda is not
// given it is chosen by leave-one-out cross-validation, maximizing the
// validated first canonical correlation over a fixed log-spaced grid.
inline CcaModel fit_cca(const std::vector<SampledCurve>& ys,
                        const std::vector<TangentFunction>& xs,
                        std::optional<double> lambda = std::nullopt,
                        int n_pairs = 1) {
  if (n_pairs < 1) throw invalid_input("pair count must be at least 1");
  if (lambda && !(*lambda > 0.0))
    throw invalid_input("penalty weight must be positive");
  const detail::CcaProblem pr = detail::build_problem(ys, xs);
  const int n = static_cast<int>(pr.yc.rows());
  const int k = pr.grid.k();

  double chosen = lambda.value_or(0.0);
  std::optional<double> validated;
  if (!lambda) {
    double best_score = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 17; ++j) {
      const double lg = -8.0 + 0.5 * j;
      const double lam = std::pow(10.0, lg);
      const Mat by = pr.syy + lam * pr.penalty;
      const Mat bx = pr.sxx + lam * pr.penalty;
      const detail::CcaCore warm = detail::solve_cca_core(by, bx, pr.syx, 1);
      const double score =
          detail::loo_first_correlation(pr, lam, warm.amp_weights.col(0));
      if (score > best_score) {
        best_score = score;
        chosen = lam;
      }
    }
    validated = best_score;
  }

  const Mat by = pr.syy + chosen * pr.penalty;
  const Mat bx = pr.sxx + chosen * pr.penalty;
  const int r_max = std::min(n - 1, k);
  int r = std::min(n_pairs, r_max);
  detail::CcaCore core = detail::solve_cca_core(by, bx, pr.syx, r);

  // Pairs whose penalized covariance is negligible against the leading one
  // sit beyond the rank of the cross-covariance; their directions are
  // numerical noise, so they are dropped rather than reported.
  int keep = 1;
  while (keep < r && core.penalized_covariances(keep) >
                         1e-10 * core.penalized_covariances(0))
    ++keep;

  CcaModel model;
  model.grid = pr.grid;
  model.mean_amplitude = pr.mean_y;
  model.lambda = chosen;
  model.truncated = n_pairs > keep;
  model.validated_first_correlation = validated;
  model.amp_weights = core.amp_weights.leftCols(keep);
  model.phase_weights = core.phase_weights.leftCols(keep);
  r = keep;

  // Phase weights live in the tangent space at the identity warp; remove
  // the weighted mean component. Constants are in the penalty's null space
  // and orthogonal to the centered data, so scores and normalizations are
  // unchanged by this projection.
  for (int j = 0; j < r; ++j) {
    const double mean_part = trapz(pr.grid, model.phase_weights.col(j));
    model.phase_weights.col(j).array() -= mean_part;
  }

  model.amp_scores = pr.yc * pr.w.asDiagonal() * model.amp_weights;
  model.phase_scores = pr.xc * pr.w.asDiagonal() * model.phase_weights;

  Vec corr(r), slope(r);
  for (int j = 0; j < r; ++j) {
    const double c = detail::pearson(model.amp_scores.col(j),
                                     model.phase_scores.col(j));
    if (c < 0.0) {  // roundoff only: the solve makes score covariances >= 0
      model.phase_weights.col(j) = -model.phase_weights.col(j);
      model.phase_scores.col(j) = -model.phase_scores.col(j);
    }
    corr(j) = std::clamp(std::abs(c), 0.0, 1.0);
  }

  // Report pairs by decreasing sample correlation; the whitened solve
  // orders by penalized covariance, which need not agree.
  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return corr(a) > corr(b); });
  CcaModel sorted = model;
  Vec corr_sorted(r);
  for (int j = 0; j < r; ++j) {
    const int src = order[j];
    sorted.amp_weights.col(j) = model.amp_weights.col(src);
    sorted.phase_weights.col(j) = model.phase_weights.col(src);
    sorted.amp_scores.col(j) = model.amp_scores.col(src);
    sorted.phase_scores.col(j) = model.phase_scores.col(src);
    corr_sorted(j) = corr(src);
  }
  sorted.correlations = corr_sorted;

  for (int j = 0; j < r; ++j) {
    const Vec u = sorted.amp_scores.col(j);
    const Vec v = sorted.phase_scores.col(j);
    const Eigen::ArrayXd du = u.array() - u.mean();
    const double var_u = (du * du).sum();
    slope(j) = var_u > 0.0
                   ? (du * (v.array() - v.mean())).sum() / var_u
                   : 0.0;
  }
  sorted.slopes = slope;
  return sorted;
}

// Curve traced by perturbing the mean amplitude along one canonical pair:
// amplitude moves by a times the amplitude weight while time is distorted
// by b times the phase weight. When b is not given it is set to a divided
// by the pair's regression slope, matching amplitude and phase movement.
inline SampledCurve canonical_mode(const CcaModel& model, int component,
                                   double a,
                                   std::optional<double> b = std::nullopt) {
  const int r = static_cast<int>(model.correlations.size());
  if (component < 0 || component >= r)
    throw invalid_input("canonical pair index out of range");
  double bb;
  if (b) {
    bb = *b;
  } else {
    bb = a / model.slopes(component);
    if (!std::isfinite(bb))
      throw invalid_input(
          "pair slope is zero; pass the phase coefficient explicitly");
  }
  SampledCurve y{model.grid,
                 model.mean_amplitude + a * model.amp_weights.col(component)};
  TangentFunction x{model.grid, bb * model.phase_weights.col(component)};
  return compose_amplitude_phase(y, x);
}

}  // namespace fcomb
