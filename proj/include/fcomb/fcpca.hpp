#pragma once

// Combined principal component analysis: amplitude and scaled phase are
// glued into one function on a doubled domain, eigen-analyzed through a
// weighted SVD, and mapped back to curves. The scale that balances the two
// blocks is chosen by minimizing reconstruction error in the original
// function space.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/warp.hpp>

namespace fcomb {

struct GluedSample {
  Vec values;  // [amplitude block; C * phase block], length 2k
  double scale_C = 1.0;
};

inline GluedSample glue(const SampledCurve& y, const TangentFunction& x,
                        double C) {
  if (!(C > 0.0)) throw invalid_input("glue scale must be positive");
  require_same_grid(y.grid, x.grid, "glue");
  const int k = y.grid.k();
  Vec v(2 * k);
  v.head(k) = y.v;
  v.tail(k) = C * x.x;
  return GluedSample{std::move(v), C};
}

// Quadrature weights on the doubled domain: each block integrates over its
// own unit interval.
inline Vec glued_weights(const TimeGrid& g) {
  const Vec w = quad_weights(g);
  Vec out(2 * g.k());
  out.head(g.k()) = w;
  out.tail(g.k()) = w;
  return out;
}

struct CombinedEigenModel {
  TimeGrid grid;       // base grid of k points
  double scale_C = 1.0;
  Vec mean;            // length 2k
  Vec eigenvalues;     // nonincreasing, length r
  Mat eigenfunctions;  // 2k x r, quadrature-orthonormal columns
  Mat scores;          // n x r, column variances equal the eigenvalues
};

// Weighted sample eigen-decomposition of glued samples. The SVD of the
// centered, weight-scaled data matrix (scaled by 1/sqrt(n-1)) yields
// eigenvalues matching the sample covariance convention, eigenfunctions
// orthonormal in the quadrature inner product, and scores whose per-column
// sample variances reproduce the eigenvalues exactly.
inline CombinedEigenModel fit_eigen(const std::vector<SampledCurve>& ys,
                                    const std::vector<TangentFunction>& xs,
                                    double C) {
  const int n = static_cast<int>(ys.size());
  if (n < 2) throw invalid_input("eigen fit needs at least two samples");
  if (xs.size() != ys.size())
    throw invalid_input("amplitude and phase sample counts differ");
  const TimeGrid& g = ys.front().grid;
  const int k = g.k();

  Mat data(n, 2 * k);
  for (int i = 0; i < n; ++i) {
    require_same_grid(g, ys[i].grid, "fit_eigen");
    data.row(i) = glue(ys[i], xs[i], C).values.transpose();
  }
  Vec mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();

  const Vec w = glued_weights(g);
  const Vec w_sqrt = w.cwiseSqrt();
  const Mat scaled =
      (data * w_sqrt.asDiagonal()) / std::sqrt(static_cast<double>(n - 1));
  Eigen::BDCSVD<Mat> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const int r = std::min(n - 1, 2 * k);
  CombinedEigenModel model;
  model.grid = g;
  model.scale_C = C;
  model.mean = std::move(mean);
  model.eigenvalues = svd.singularValues().head(r).array().square();
  model.eigenfunctions =
      w_sqrt.cwiseInverse().asDiagonal() * svd.matrixV().leftCols(r);
  model.scores = std::sqrt(static_cast<double>(n - 1)) *
                 svd.matrixU().leftCols(r) *
                 svd.singularValues().head(r).asDiagonal();
  return model;
}

namespace detail {

// Amplitude and phase parts of a truncated expansion with given scores.
// The phase block carries the glue scale, so it is divided back out.
inline std::pair<SampledCurve, TangentFunction> expansion_parts(
    const CombinedEigenModel& model, const Vec& scores_m) {
  const int k = model.grid.k();
  Vec glued = model.mean;
  glued += model.eigenfunctions.leftCols(scores_m.size()) * scores_m;
  SampledCurve y{model.grid, glued.head(k)};
  TangentFunction x{model.grid, glued.tail(k) / model.scale_C};
  return {std::move(y), std::move(x)};
}

}  // namespace detail

// Projection of sample i onto the first m combined components, mapped back
// to a curve in the original function space.
inline SampledCurve project_Am(const CombinedEigenModel& model, int sample,
                               int m) {
  const int n = static_cast<int>(model.scores.rows());
  const int r = static_cast<int>(model.eigenvalues.size());
  if (sample < 0 || sample >= n) throw invalid_input("sample index out of range");
  if (m < 1 || m > r) throw invalid_input("component count out of range");
  auto [y, x] = detail::expansion_parts(
      model, Vec(model.scores.row(sample).head(m).transpose()));
  try {
    return compose_amplitude_phase(y, x);
  } catch (const domain_exit& e) {
    std::ostringstream os;
    os << "projection of sample " << sample << " with " << m
       << " components leaves the warp domain: " << e.what();
    throw domain_exit(os.str(), e.min_value());
  }
}

// Mean squared distance between each input curve and its m-component
// reconstruction. Projections that leave the warp domain contribute the
// curve's own squared norm, keeping the scale search total.
inline double reconstruction_mse(const std::vector<SampledCurve>& ys,
                                 const std::vector<TangentFunction>& xs,
                                 const std::vector<SampledCurve>& fs,
                                 double C, int m) {
  if (fs.size() != ys.size())
    throw invalid_input("curve sample count differs from amplitude count");
  const CombinedEigenModel model = fit_eigen(ys, xs, C);
  const int n = static_cast<int>(ys.size());
  const int use = std::min<int>(m, static_cast<int>(model.eigenvalues.size()));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double err2;
    try {
      const SampledCurve rec = project_Am(model, i, use);
      const double d = l2dist(model.grid, rec.v, fs[i].v);
      err2 = d * d;
    } catch (const domain_exit&) {
      const double nm = l2norm(model.grid, fs[i].v);
      err2 = nm * nm;
    }
    total += err2;
  }
  return total / n;
}

struct ScaleEstimate {
  double C = 1.0;
  bool degenerate = false;  // flat objective, documented default returned
};

// Reconstruction-error-minimizing glue scale: a 25-point scan of log10 C
// over [-3, 3] brackets the minimum, then golden-section refines it. A
// flat scan (relative range below 1e-10) short-circuits to C=1.
inline ScaleEstimate estimate_C(const std::vector<SampledCurve>& ys,
                                const std::vector<TangentFunction>& xs,
                                const std::vector<SampledCurve>& fs,
                                int m = 2) {
  if (m < 1) throw invalid_input("component count must be at least 1");
  constexpr int kScan = 25;
  constexpr double kLo = -3.0, kHi = 3.0;
  double scan_min = std::numeric_limits<double>::infinity();
  double scan_max = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  std::vector<double> scores(kScan);
  auto objective = [&](double lg) {
    return reconstruction_mse(ys, xs, fs, std::pow(10.0, lg), m);
  };
  for (int i = 0; i < kScan; ++i) {
    const double lg = kLo + (kHi - kLo) * i / (kScan - 1);
    scores[i] = objective(lg);
    if (scores[i] < scan_min) {
      scan_min = scores[i];
      best_i = i;
    }
    scan_max = std::max(scan_max, scores[i]);
  }
  const double scale = std::max(std::abs(scan_max), std::abs(scan_min));
  if (!(scale > 0.0) || (scan_max - scan_min) < 1e-10 * scale)
    return ScaleEstimate{1.0, true};

  const double step = (kHi - kLo) / (kScan - 1);
  double lo = kLo + step * std::max(best_i - 1, 0);
  double hi = kLo + step * std::min(best_i + 1, kScan - 1);
  double best_lg = kLo + step * best_i;
  double best_val = scan_min;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  auto track = [&](double lg) {
    const double v = objective(lg);
    if (v < best_val) {
      best_val = v;
      best_lg = lg;
    }
    return v;
  };
  double f1 = track(x1), f2 = track(x2);
  while (hi - lo > 1e-3) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = track(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = track(x2);
    }
  }
  return ScaleEstimate{std::pow(10.0, best_lg), false};
}

// One curve of the mode-of-variation family: score z * sqrt(eigenvalue) on
// one component, zero on the rest.
inline SampledCurve mode_of_variation(const CombinedEigenModel& model,
                                      int component, double z) {
  const int r = static_cast<int>(model.eigenvalues.size());
  if (component < 0 || component >= r)
    throw invalid_input("component index out of range");
  Vec scores_m = Vec::Zero(component + 1);
  scores_m(component) = z * std::sqrt(std::max(model.eigenvalues(component), 0.0));
  auto [y, x] = detail::expansion_parts(model, scores_m);
  try {
    return compose_amplitude_phase(y, x);
  } catch (const domain_exit& e) {
    std::ostringstream os;
    os << "mode of variation at z=" << z
       << " leaves the warp domain: " << e.what();
    throw domain_exit(os.str(), e.min_value());
  }
}

}  // namespace fcomb
