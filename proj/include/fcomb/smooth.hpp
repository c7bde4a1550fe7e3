#pragma once

// Penalized B-spline smoothing of one noisy record, with the smoothing
// parameter chosen by generalized cross-validation, plus derivative
// evaluation of the fitted spline on arbitrary grids.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <fcomb/bspline.hpp>
#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>

namespace fcomb {

struct RawRecord {
  Vec times;         // nondecreasing, in [0, 1]
  Vec observations;  // same length
  std::string id;

  void check() const {
    if (times.size() != observations.size())
      throw invalid_input("record times and observations differ in length");
    for (int i = 0; i < times.size(); ++i)
      if (!(times(i) >= 0.0 && times(i) <= 1.0))
        throw invalid_input("record time outside [0, 1]",
                            static_cast<std::size_t>(i));
    for (int i = 1; i < times.size(); ++i)
      if (times(i) < times(i - 1))
        throw invalid_input("record times must be nondecreasing",
                            static_cast<std::size_t>(i));
  }
};

struct SmoothCurve {
  Vec knots;  // breakpoints; the basis clamps each end internally
  int degree = 4;
  Vec coefficients;
  double selected_lambda = 0.0;
};

namespace detail {

// Collapses duplicated times by averaging their observations.
inline void dedupe_record(const RawRecord& rec, Vec& t, Vec& y) {
  const int n = static_cast<int>(rec.times.size());
  std::vector<double> tu, yu;
  tu.reserve(n);
  yu.reserve(n);
  int i = 0;
  while (i < n) {
    int j = i;
    double sum = 0.0;
    while (j < n && rec.times(j) == rec.times(i)) sum += rec.observations(j++);
    tu.push_back(rec.times(i));
    yu.push_back(sum / (j - i));
    i = j;
  }
  t = Eigen::Map<const Vec>(tu.data(), static_cast<int>(tu.size()));
  y = Eigen::Map<const Vec>(yu.data(), static_cast<int>(yu.size()));
}

struct PenalizedDesign {
  BSplineBasis basis;
  Mat design;   // n x p
  Mat gram;     // design' * design
  Mat penalty;  // p x p
  Vec rhs;      // design' * y
  Vec y;
  int n = 0;

  PenalizedDesign(const Vec& t, const Vec& yobs, int degree, int order)
      : basis(t, degree),
        design(basis.design(t, 0)),
        gram(design.transpose() * design),
        penalty(basis.penalty(order)),
        rhs(design.transpose() * yobs),
        y(yobs),
        n(static_cast<int>(t.size())) {}

  // GCV score at one lambda via the normal equations; empty if the system
  // is not positive definite there. Score accuracy is ample for selection
  // even in the stiff large-lambda regime.
  std::optional<double> score(double lambda) const {
    const Mat lhs = gram + lambda * penalty;
    Eigen::LLT<Mat> llt(lhs);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Vec coef = llt.solve(rhs);
    coef += llt.solve(Vec(rhs - lhs * coef));
    const double rss = (y - design * coef).squaredNorm();
    const double trace_hat = llt.solve(gram).trace();
    const double denom = n - trace_hat;
    if (!(denom > 1e-12)) return std::numeric_limits<double>::infinity();
    return n * rss / (denom * denom);
  }

  // Final coefficients via QR on the stacked least-squares form
  // [design; sqrt(lambda) root] with root' root = penalty. The normal
  // equations lose about half the available digits when lambda is huge;
  // the stacked solve keeps the polynomial limit accurate to ~1e-10.
  Vec coefficients(double lambda) const {
    if (penalty_root.size() == 0) {
      // Eigenvalues that are zero in exact arithmetic come back as
      // ~eps*||penalty||; they must be flushed to exactly zero or a huge
      // lambda amplifies them into a spurious penalty on the null space.
      Eigen::SelfAdjointEigenSolver<Mat> eig(penalty);
      Vec vals = eig.eigenvalues().cwiseMax(0.0);
      const double floor = 1e-10 * vals.maxCoeff();
      for (int i = 0; i < vals.size(); ++i)
        if (vals(i) < floor) vals(i) = 0.0;
      penalty_root =
          vals.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    }
    const int p = static_cast<int>(gram.rows());
    Mat stacked(n + p, p);
    stacked.topRows(n) = design;
    stacked.bottomRows(p) = std::sqrt(lambda) * penalty_root;
    Vec full_rhs = Vec::Zero(n + p);
    full_rhs.head(n) = y;
    return stacked.colPivHouseholderQr().solve(full_rhs);
  }

  mutable Mat penalty_root;
};

}  // namespace detail

// GCV objective for one candidate lambda, exposed so selection can be
// audited against the fitted result.
inline double gcv_score(const RawRecord& record, int degree, int penalty_order,
                        double lambda) {
  record.check();
  Vec t, y;
  detail::dedupe_record(record, t, y);
  detail::PenalizedDesign pd(t, y, degree, penalty_order);
  const auto sc = pd.score(lambda);
  return sc ? *sc : std::numeric_limits<double>::infinity();
}

inline SmoothCurve fit_smooth(const RawRecord& record, int degree = 4,
                              int penalty_order = 2,
                              std::optional<double> lambda = std::nullopt) {
  record.check();
  if (degree < 2) throw invalid_input("smoothing degree must be at least 2");
  if (penalty_order < 1 || penalty_order >= degree)
    throw invalid_input("penalty order must be in [1, degree)");
  Vec t, y;
  detail::dedupe_record(record, t, y);
  if (static_cast<int>(t.size()) < degree + 2)
    throw invalid_input("too few observation points for this degree");

  detail::PenalizedDesign pd(t, y, degree, penalty_order);

  if (lambda) {
    if (!(*lambda > 0.0))
      throw invalid_input("smoothing parameter must be positive");
    if (!pd.score(*lambda))
      throw numeric_failure(
          "normal equations are singular at this smoothing parameter; try a "
          "larger lambda");
    return SmoothCurve{t, degree, pd.coefficients(*lambda), *lambda};
  }

  // Log-spaced sweep, then golden-section refinement around the grid
  // minimum. The best candidate over every evaluation wins.
  constexpr int kGridPoints = 41;
  constexpr double kLogLo = -10.0, kLogHi = 2.0;
  double best_score = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0;
  int best_index = -1;
  auto consider = [&](double lg) {
    const double lam = std::pow(10.0, lg);
    const auto sc = pd.score(lam);
    const double score = sc ? *sc : std::numeric_limits<double>::infinity();
    if (score < best_score) {
      best_score = score;
      best_lambda = lam;
    }
    return score;
  };
  for (int i = 0; i < kGridPoints; ++i) {
    const double lg = kLogLo + (kLogHi - kLogLo) * i / (kGridPoints - 1);
    const double score = consider(lg);
    if (score == best_score && best_lambda == std::pow(10.0, lg))
      best_index = i;
  }
  if (!std::isfinite(best_score))
    throw numeric_failure(
        "no candidate smoothing parameter yields a solvable fit");

  const double step = (kLogHi - kLogLo) / (kGridPoints - 1);
  double lo = kLogLo + step * std::max(best_index - 1, 0);
  double hi = kLogLo + step * std::min(best_index + 1, kGridPoints - 1);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = consider(x1), f2 = consider(x2);
  while (hi - lo > 1e-3) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = consider(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = consider(x2);
    }
  }
  return SmoothCurve{t, degree, pd.coefficients(best_lambda), best_lambda};
}

inline SampledCurve eval_curve(const SmoothCurve& curve, const TimeGrid& grid,
                               int deriv_order = 0) {
  if (deriv_order < 0 || deriv_order > curve.degree - 1)
    throw invalid_input("derivative order exceeds degree - 1");
  const BSplineBasis basis(curve.knots, curve.degree);
  if (basis.size() != curve.coefficients.size())
    throw invalid_input("coefficient count does not match the basis");
  const Mat design = basis.design(grid.t, deriv_order);
  return SampledCurve{grid, design * curve.coefficients};
}

}  // namespace fcomb
