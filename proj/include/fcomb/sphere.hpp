#pragma once
// Unit-sphere geometry for grid functions under the trapezoid inner
// product: geodesic distance, log and exponential maps at an arbitrary
// base point, and the intrinsic (Karcher) mean. Square-root slope
// representations of warping functions live on the positive orthant of
// this sphere, which keeps all pairwise distances below pi/2.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>

namespace fcomb {

constexpr double kHalfPi = 1.57079632679489661923;

inline void require_unit_norm(const TimeGrid& g, const Vec& q, const char* where) {
  const double n = l2norm(g, q);
  if (std::abs(n - 1.0) > 1e-6) {
    std::ostringstream os;
    os << where << ": expected unit quadrature norm, got " << n;
    throw invalid_input(os.str());
  }
}

// Arc length between two unit-norm grid functions; the inner product is
// clamped to [-1,1] so roundoff never produces NaN.
inline double geodesic_distance(const TimeGrid& g, const Vec& a, const Vec& b) {
  require_same_grid(g, g, "geodesic_distance");
  if (a.size() != g.t.size() || b.size() != g.t.size())
    throw invalid_input("geodesic_distance: length mismatch");
  require_unit_norm(g, a, "geodesic_distance");
  require_unit_norm(g, b, "geodesic_distance");
  const double ip = std::clamp(inner(g, a, b), -1.0, 1.0);
  return std::acos(ip);
}

// Tangent vector at mu pointing to q with length d_g(q, mu). The factor
// d/sin(d) has a removable singularity at d = 0, replaced below 1e-10.
inline Vec log_map(const TimeGrid& g, const Vec& q, const Vec& mu) {
  const double d = geodesic_distance(g, q, mu);
  if (d >= kHalfPi - 1e-6)
    throw domain_exit("log_map: points a quarter turn or more apart", d);
  if (d < 1e-10) return Vec::Zero(g.k());
  const double scale = d / std::sin(d);
  return scale * (q - std::cos(d) * mu);
}

// Geodesic from mu with initial direction x, evaluated at arc length
// ||x||. Requires x tangent at mu; sin(r)/r is 1 below r = 1e-10.
inline Vec exp_map(const TimeGrid& g, const Vec& x, const Vec& mu) {
  if (x.size() != g.t.size() || mu.size() != g.t.size())
    throw invalid_input("exp_map: length mismatch");
  require_unit_norm(g, mu, "exp_map");
  if (std::abs(inner(g, x, mu)) > 1e-6)
    throw invalid_input("exp_map: direction is not tangent at the base point");
  const double r = l2norm(g, x);
  if (r < 1e-10) return mu;
  return (std::sin(r) / r) * x + std::cos(r) * mu;
}

// Intrinsic mean on the sphere: average the log-mapped sample in the
// tangent space of the current estimate and shoot back until the tangent
// mean is negligible. Initialized at the normalized extrinsic mean.
inline Vec karcher_mean_sphere(const TimeGrid& g, const std::vector<Vec>& points,
                               double tol = 1e-9, int max_iter = 100) {
  if (points.empty()) throw invalid_input("karcher_mean_sphere: empty input");
  for (const Vec& p : points)
    if (p.size() != g.t.size())
      throw invalid_input("karcher_mean_sphere: length mismatch");
  if (points.size() == 1) return points.front();

  Vec mu = Vec::Zero(g.k());
  for (const Vec& p : points) mu += p;
  mu /= static_cast<double>(points.size());
  const double n0 = l2norm(g, mu);
  if (n0 < 1e-12)
    throw numeric_failure("karcher_mean_sphere: extrinsic mean vanished", n0);
  mu /= n0;

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Vec vbar = Vec::Zero(g.k());
    for (const Vec& p : points) vbar += log_map(g, p, mu);
    vbar /= static_cast<double>(points.size());
    residual = l2norm(g, vbar);
    if (residual < tol) return mu;
    mu = exp_map(g, vbar, mu);
  }
  std::ostringstream os;
  os << "karcher_mean_sphere: no convergence, final tangent-mean norm "
     << residual;
  throw numeric_failure(os.str(), residual);
}

}  // namespace fcomb
