#pragma once
// Grid-sampled functions on [0,1]: time grids, trapezoid quadrature,
// cumulative integrals and three-point finite differences. Every module
// builds on these primitives, so the conventions here (weights, endpoint
// handling) are the single source of truth for discretization.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>

#include <fcomb/errors.hpp>

namespace fcomb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Strictly increasing sample times with endpoints pinned to 0 and 1.
struct TimeGrid {
  Vec t;

  int k() const { return static_cast<int>(t.size()); }

  static TimeGrid uniform(int k) {
    if (k < 3) throw invalid_input("time grid needs at least 3 points");
    Vec t(k);
    for (int i = 0; i < k; ++i) t(i) = static_cast<double>(i) / (k - 1);
    t(k - 1) = 1.0;
    return TimeGrid{std::move(t)};
  }

  static TimeGrid from_values(Vec v) {
    const int k = static_cast<int>(v.size());
    if (k < 3) throw invalid_input("time grid needs at least 3 points");
    if (v(0) != 0.0)
      throw invalid_input("time grid must start at 0 exactly", 0);
    if (v(k - 1) != 1.0)
      throw invalid_input("time grid must end at 1 exactly",
                          static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) {
      if (!(v(i) > v(i - 1))) {
        std::ostringstream os;
        os << "time grid not strictly increasing at index " << i;
        throw invalid_input(os.str(), static_cast<std::size_t>(i));
      }
    }
    return TimeGrid{std::move(v)};
  }
};

inline bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  return a.t.size() == b.t.size() && a.t == b.t;
}

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b,
                              const char* where) {
  if (!same_grid(a, b))
    throw invalid_input(std::string(where) + ": grids do not match");
}

// One function sampled on a grid.
struct SampledCurve {
  TimeGrid grid;
  Vec v;

  void check() const {
    if (v.size() != grid.t.size())
      throw invalid_input("curve length does not match its grid");
  }
};

// Trapezoid quadrature weights; sum equals the domain length 1.
inline Vec quad_weights(const TimeGrid& g) {
  const int k = g.k();
  Vec w = Vec::Zero(k);
  for (int i = 0; i + 1 < k; ++i) {
    const double h = g.t(i + 1) - g.t(i);
    w(i) += 0.5 * h;
    w(i + 1) += 0.5 * h;
  }
  return w;
}

inline double trapz(const TimeGrid& g, const Vec& f) {
  if (f.size() != g.t.size()) throw invalid_input("trapz: length mismatch");
  double s = 0.0;
  for (int i = 0; i + 1 < g.k(); ++i)
    s += 0.5 * (g.t(i + 1) - g.t(i)) * (f(i) + f(i + 1));
  return s;
}

// Running trapezoid integral, zero at t(0).
inline Vec cumtrapz(const TimeGrid& g, const Vec& f) {
  if (f.size() != g.t.size()) throw invalid_input("cumtrapz: length mismatch");
  Vec out(g.k());
  out(0) = 0.0;
  for (int i = 1; i < g.k(); ++i)
    out(i) = out(i - 1) + 0.5 * (g.t(i) - g.t(i - 1)) * (f(i) + f(i - 1));
  return out;
}

inline double inner(const TimeGrid& g, const Vec& a, const Vec& b) {
  if (a.size() != g.t.size() || b.size() != g.t.size())
    throw invalid_input("inner: length mismatch");
  const Vec w = quad_weights(g);
  return (w.array() * a.array() * b.array()).sum();
}

inline double l2norm(const TimeGrid& g, const Vec& a) {
  return std::sqrt(std::max(0.0, inner(g, a, a)));
}

inline double l2dist(const TimeGrid& g, const Vec& a, const Vec& b) {
  return l2norm(g, Vec(a - b));
}

// Three-point finite differences, second order also on non-uniform grids,
// one-sided stencils at the endpoints. Exact for quadratics. Written as
// combinations of adjacent secants so constant data differentiates to an
// exact zero and monotone data keeps a positive interior derivative.
inline Vec deriv(const TimeGrid& g, const Vec& f) {
  const int k = g.k();
  if (f.size() != g.t.size()) throw invalid_input("deriv: length mismatch");
  Vec d(k);
  auto secant = [&](int a, int b) { return (f(b) - f(a)) / (g.t(b) - g.t(a)); };
  for (int i = 1; i + 1 < k; ++i) {
    const double hm = g.t(i) - g.t(i - 1);
    const double hp = g.t(i + 1) - g.t(i);
    d(i) = (hp * secant(i - 1, i) + hm * secant(i, i + 1)) / (hm + hp);
  }
  {
    const double h0 = g.t(1) - g.t(0), h1 = g.t(2) - g.t(1);
    const double s01 = secant(0, 1), s12 = secant(1, 2);
    d(0) = s01 + (s01 - s12) * h0 / (h0 + h1);
  }
  {
    const double ha = g.t(k - 2) - g.t(k - 3), hb = g.t(k - 1) - g.t(k - 2);
    const double sa = secant(k - 3, k - 2), sb = secant(k - 2, k - 1);
    d(k - 1) = sb + (sb - sa) * hb / (ha + hb);
  }
  return d;
}

}  // namespace fcomb
