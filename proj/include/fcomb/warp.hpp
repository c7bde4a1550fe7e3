#pragma once
// Warping functions and their sphere representation. A warp gamma is a
// strictly increasing bijection of [0,1]; its square-root slope transform
// sqrt(gamma') is a unit-norm positive function, so warps live on the
// positive orthant of the unit sphere and phases are tangent vectors at
// the constant function 1. This header provides the transform pair, the
// phase maps built on it, warp algebra (inverse, composition) and the
// composition of an amplitude curve with a phase function.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/interp.hpp>
#include <fcomb/sphere.hpp>

namespace fcomb {

// Strictly increasing, endpoints pinned to 0 and 1 exactly.
struct WarpingFunction {
  TimeGrid grid;
  Vec v;

  void check() const {
    if (v.size() != grid.t.size())
      throw invalid_input("warp length does not match its grid");
    if (v(0) != 0.0) throw invalid_input("warp must start at 0 exactly", 0);
    if (v(v.size() - 1) != 1.0)
      throw invalid_input("warp must end at 1 exactly",
                          static_cast<std::size_t>(v.size() - 1));
    for (int i = 1; i < v.size(); ++i)
      if (!(v(i) > v(i - 1))) {
        std::ostringstream os;
        os << "warp not strictly increasing at index " << i;
        throw invalid_input(os.str(), static_cast<std::size_t>(i));
      }
  }

  static WarpingFunction identity(const TimeGrid& g) {
    return WarpingFunction{g, g.t};
  }
};

// Unit-norm positive sphere point representing sqrt(gamma').
struct SrvfPoint {
  TimeGrid grid;
  Vec q;

  void check() const {
    if (q.size() != grid.t.size())
      throw invalid_input("sphere point length does not match its grid");
    for (int i = 1; i + 1 < q.size(); ++i)
      if (!(q(i) > 0.0)) {
        std::ostringstream os;
        os << "sphere point not positive at interior index " << i;
        throw invalid_input(os.str(), static_cast<std::size_t>(i));
      }
    require_unit_norm(grid, q, "sphere point");
  }
};

// Tangent vector at the constant function 1: quadrature-orthogonal to 1.
struct TangentFunction {
  TimeGrid grid;
  Vec x;

  void check(double tol = 1e-8) const {
    if (x.size() != grid.t.size())
      throw invalid_input("tangent length does not match its grid");
    const double m = trapz(grid, x);
    if (std::abs(m) > tol) {
      std::ostringstream os;
      os << "tangent function has nonzero mean " << m;
      throw invalid_input(os.str());
    }
  }

  static TangentFunction zero(const TimeGrid& g) {
    return TangentFunction{g, Vec::Zero(g.k())};
  }
};

inline Vec ones_point(const TimeGrid& g) { return Vec::Ones(g.k()); }

// sqrt of the warp's derivative, renormalized to unit quadrature norm so
// the result sits exactly on the sphere despite discretization. A zero
// slope at an endpoint is legitimate (the square warp starts flat); the
// endpoint stencils fall back to the adjacent secant only when a sharp but
// valid warp drives the one-sided three-point estimate negative.
inline SrvfPoint srvf_of_warp(const WarpingFunction& gamma) {
  gamma.check();
  const TimeGrid& g = gamma.grid;
  Vec d = deriv(g, gamma.v);
  const int k = g.k();
  if (d(0) < 0.0) {
    const double s = (gamma.v(1) - gamma.v(0)) / (g.t(1) - g.t(0));
    d(0) = (d(0) > -1e-10 * s) ? 0.0 : s;  // roundoff clamps to zero
  }
  if (d(k - 1) < 0.0) {
    const double s = (gamma.v(k - 1) - gamma.v(k - 2)) / (g.t(k - 1) - g.t(k - 2));
    d(k - 1) = (d(k - 1) > -1e-10 * s) ? 0.0 : s;
  }
  for (int i = 1; i + 1 < k; ++i)
    if (!(d(i) > 0.0)) {
      std::ostringstream os;
      os << "warp derivative not positive at index " << i;
      throw invalid_input(os.str(), static_cast<std::size_t>(i));
    }
  Vec q = d.array().sqrt();
  q /= l2norm(g, q);
  return SrvfPoint{g, std::move(q)};
}

// Integral of q^2, renormalized so the endpoints are exactly 0 and 1.
inline WarpingFunction warp_of_srvf(const SrvfPoint& point) {
  point.check();
  const TimeGrid& g = point.grid;
  Vec v = cumtrapz(g, Vec(point.q.array().square()));
  const double total = v(g.k() - 1);
  if (!(total > 0.0))
    throw invalid_input("sphere point integrates to zero");
  v /= total;
  v(0) = 0.0;
  v(g.k() - 1) = 1.0;
  WarpingFunction out{g, std::move(v)};
  out.check();
  return out;
}

// Phase of a warp: log map of its sphere representation at 1.
inline TangentFunction phi(const WarpingFunction& gamma) {
  const SrvfPoint q = srvf_of_warp(gamma);
  return TangentFunction{gamma.grid, log_map(gamma.grid, q.q, ones_point(gamma.grid))};
}

// Warp of a phase: geodesic shoot from 1, then square and integrate.
// Fails with the offending minimum when the shoot leaves the admissible
// set (interior positivity); clamping here would corrupt roundtrips.
inline WarpingFunction phi_inverse(const TangentFunction& x) {
  x.check(1e-6);
  const TimeGrid& g = x.grid;
  const Vec q = exp_map(g, x.x, ones_point(g));
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < g.k(); ++i) mn = std::min(mn, q(i));
  if (!(mn > 0.0)) {
    std::ostringstream os;
    os << "phase leaves the admissible set: exp map minimum " << mn;
    throw domain_exit(os.str(), mn);
  }
  return warp_of_srvf(SrvfPoint{g, q});
}

// gamma^-1 on the same grid via monotone interpolation of the reflected
// graph; endpoints stay exact.
inline WarpingFunction invert_warp(const WarpingFunction& gamma) {
  gamma.check();
  const TimeGrid& g = gamma.grid;
  PchipSpline inv(gamma.v, g.t);
  Vec v = inv(g.t);
  v(0) = 0.0;
  v(g.k() - 1) = 1.0;
  WarpingFunction out{g, std::move(v)};
  out.check();
  return out;
}

// (outer o inner)(t) = outer(inner(t)) by monotone interpolation.
inline WarpingFunction compose_warps(const WarpingFunction& outer,
                                     const WarpingFunction& inner) {
  outer.check();
  inner.check();
  require_same_grid(outer.grid, inner.grid, "compose_warps");
  const TimeGrid& g = outer.grid;
  PchipSpline sp(g.t, outer.v);
  Vec v = sp(inner.v);
  v(0) = 0.0;
  v(g.k() - 1) = 1.0;
  WarpingFunction out{g, std::move(v)};
  out.check();
  return out;
}

// y evaluated along a warp, cubic interpolation off-grid.
inline SampledCurve compose_with_warp(const SampledCurve& y,
                                      const WarpingFunction& gamma) {
  y.check();
  gamma.check();
  require_same_grid(y.grid, gamma.grid, "compose_with_warp");
  CubicSpline sp(y.grid.t, y.v);
  return SampledCurve{y.grid, sp(gamma.v)};
}

// f = y o phi_inverse(x): amplitude and phase composed into one curve.
inline SampledCurve compose_amplitude_phase(const SampledCurve& y,
                                            const TangentFunction& x) {
  y.check();
  require_same_grid(y.grid, x.grid, "compose_amplitude_phase");
  return compose_with_warp(y, phi_inverse(x));
}

}  // namespace fcomb
