#pragma once

// Comparator reconstruction methods: plain functional PCA on the unaligned
// curves, and a composite method that truncates the amplitude and phase
// expansions separately before composing. A harness runs both against the
// combined method over a range of component counts.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <fcomb/align.hpp>
#include <fcomb/errors.hpp>
#include <fcomb/fcpca.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/smooth.hpp>
#include <fcomb/warp.hpp>

namespace fcomb {

enum class BaselineMethod { fcpca, fpca, composite };

inline const char* to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::fcpca: return "fcpca";
    case BaselineMethod::fpca: return "fpca";
    case BaselineMethod::composite: return "composite";
  }
  throw invalid_input("unknown baseline method");
}

struct MseCurve {
  BaselineMethod method = BaselineMethod::fpca;
  std::vector<int> m_values;
  std::vector<double> mse;
};

namespace detail {

// Weighted sample PCA of one block, same conventions as fit_eigen: SVD of
// the centered weight-scaled data over sqrt(n-1), components orthonormal in
// the quadrature inner product.
struct BlockPca {
  Vec mean;
  Vec eigenvalues;
  Mat components;  // k x r
  Mat scores;      // n x r
};

inline BlockPca fit_block_pca(const TimeGrid& g, const Mat& rows) {
  const int n = static_cast<int>(rows.rows());
  if (n < 2) throw invalid_input("block PCA needs at least two samples");
  Mat data = rows;
  Vec mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();

  const Vec w_sqrt = quad_weights(g).cwiseSqrt();
  const Mat scaled =
      (data * w_sqrt.asDiagonal()) / std::sqrt(static_cast<double>(n - 1));
  Eigen::BDCSVD<Mat> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const int r = std::min(n - 1, g.k());
  BlockPca out;
  out.mean = std::move(mean);
  out.eigenvalues = svd.singularValues().head(r).array().square();
  out.components = w_sqrt.cwiseInverse().asDiagonal() * svd.matrixV().leftCols(r);
  out.scores = std::sqrt(static_cast<double>(n - 1)) *
               svd.matrixU().leftCols(r) *
               svd.singularValues().head(r).asDiagonal();
  return out;
}

inline Vec block_reconstruct(const BlockPca& pca, int sample, int m) {
  return pca.mean + pca.components.leftCols(m) * pca.scores.row(sample).head(m).transpose();
}

}  // namespace detail

// Plain functional PCA reconstruction error on the curves as given, with no
// alignment; the m-term truncation is linear in the curve space.
inline double fpca_mse(const std::vector<SampledCurve>& fs, int m) {
  const int n = static_cast<int>(fs.size());
  if (n < 2) throw invalid_input("fpca needs at least two curves");
  if (m < 1) throw invalid_input("component count must be at least 1");
  const TimeGrid& g = fs.front().grid;
  Mat rows(n, g.k());
  for (int i = 0; i < n; ++i) {
    require_same_grid(g, fs[i].grid, "fpca_mse");
    rows.row(i) = fs[i].v.transpose();
  }
  const detail::BlockPca pca = detail::fit_block_pca(g, rows);
  const int use = std::min<int>(m, static_cast<int>(pca.eigenvalues.size()));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = l2dist(g, detail::block_reconstruct(pca, i, use), fs[i].v);
    total += d * d;
  }
  return total / n;
}

namespace detail {

// Separate m-term reconstructions of each block, with the score bookkeeping
// exposed: every sample spends exactly scores_used values across the two
// truncations.
struct CompositeParts {
  std::vector<Vec> amp;
  std::vector<Vec> phase;
  int scores_used = 0;
};

inline CompositeParts composite_reconstruct(
    const std::vector<SampledCurve>& ys, const std::vector<TangentFunction>& xs,
    int m) {
  const int n = static_cast<int>(ys.size());
  if (n < 2) throw invalid_input("composite needs at least two samples");
  if (xs.size() != ys.size())
    throw invalid_input("amplitude and phase sample counts differ");
  if (m < 1) throw invalid_input("component count must be at least 1");
  const TimeGrid& g = ys.front().grid;
  Mat amp_rows(n, g.k()), phase_rows(n, g.k());
  for (int i = 0; i < n; ++i) {
    require_same_grid(g, ys[i].grid, "composite_reconstruct");
    require_same_grid(g, xs[i].grid, "composite_reconstruct");
    amp_rows.row(i) = ys[i].v.transpose();
    phase_rows.row(i) = xs[i].x.transpose();
  }
  const BlockPca amp_pca = fit_block_pca(g, amp_rows);
  const BlockPca phase_pca = fit_block_pca(g, phase_rows);
  const int use_amp = std::min<int>(m, static_cast<int>(amp_pca.eigenvalues.size()));
  const int use_phase = std::min<int>(m, static_cast<int>(phase_pca.eigenvalues.size()));
  CompositeParts parts;
  parts.scores_used = use_amp + use_phase;
  parts.amp.reserve(n);
  parts.phase.reserve(n);
  for (int i = 0; i < n; ++i) {
    parts.amp.push_back(block_reconstruct(amp_pca, i, use_amp));
    parts.phase.push_back(block_reconstruct(phase_pca, i, use_phase));
  }
  return parts;
}

}  // namespace detail

// Composite reconstruction error: truncate amplitude and phase expansions
// independently, compose, and compare against the composition of the full
// pair. Reconstructions that leave the warp domain contribute the target's
// squared norm, matching the combined method's penalty rule.
inline double composite_mse(const std::vector<SampledCurve>& ys,
                            const std::vector<TangentFunction>& xs, int m) {
  const detail::CompositeParts parts = detail::composite_reconstruct(ys, xs, m);
  const int n = static_cast<int>(ys.size());
  const TimeGrid& g = ys.front().grid;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const SampledCurve target = compose_amplitude_phase(ys[i], xs[i]);
    double err2;
    try {
      const SampledCurve rec = compose_amplitude_phase(
          SampledCurve{g, parts.amp[i]}, TangentFunction{g, parts.phase[i]});
      const double d = l2dist(g, rec.v, target.v);
      err2 = d * d;
    } catch (const domain_exit&) {
      const double nm = l2norm(g, target.v);
      err2 = nm * nm;
    }
    total += err2;
  }
  return total / n;
}

// Full comparison harness: smooth and align the observed curves once, then
// evaluate all three methods for m = 1..m_max. The combined method re-selects
// its glue scale at every m. Returned in order: combined, plain, composite.
inline std::array<MseCurve, 3> mse_comparison(
    const std::vector<SampledCurve>& fs, int m_max, double align_tol = 1e-4,
    int align_max_iter = 20) {
  if (m_max < 1) throw invalid_input("component range must be at least 1");
  const int n = static_cast<int>(fs.size());
  if (n < 2) throw invalid_input("comparison needs at least two curves");
  const TimeGrid& g = fs.front().grid;

  std::vector<SampledCurve> smoothed;
  smoothed.reserve(n);
  for (const SampledCurve& f : fs)
    smoothed.push_back(eval_curve(fit_smooth(RawRecord{g.t, f.v, {}}), g));
  const AlignmentResult ar = align_set(smoothed, align_tol, align_max_iter);

  std::array<MseCurve, 3> out;
  out[0].method = BaselineMethod::fcpca;
  out[1].method = BaselineMethod::fpca;
  out[2].method = BaselineMethod::composite;
  for (int m = 1; m <= m_max; ++m) {
    const ScaleEstimate ce = estimate_C(ar.aligned, ar.phases, smoothed, m);
    const double combined =
        reconstruction_mse(ar.aligned, ar.phases, smoothed, ce.C, m);
    out[0].m_values.push_back(m);
    out[0].mse.push_back(combined);
    out[1].m_values.push_back(m);
    out[1].mse.push_back(fpca_mse(smoothed, m));
    out[2].m_values.push_back(m);
    out[2].mse.push_back(composite_mse(ar.aligned, ar.phases, m));
  }
  return out;
}

}  // namespace fcomb
