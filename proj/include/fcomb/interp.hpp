#pragma once
// Off-grid evaluation. Two interpolants cover every need in the library:
//  - CubicSpline: not-a-knot cubic spline, used for curve values, where
//    fourth-order interior accuracy keeps composition errors negligible.
//  - PchipSpline: monotone piecewise cubic (Fritsch-Carlson), used for
//    warping functions, where preserving strict monotonicity matters more
//    than formal order.
// Both build in O(n) and evaluate in O(log n).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>

namespace fcomb {

namespace detail {

// Interval index i with x(i) <= q < x(i+1), clamped to valid intervals.
inline int find_interval(const Vec& x, double q) {
  const int n = static_cast<int>(x.size());
  if (q <= x(0)) return 0;
  if (q >= x(n - 1)) return n - 2;
  const double* beg = x.data();
  const double* it = std::upper_bound(beg, beg + n, q);
  int i = static_cast<int>(it - beg) - 1;
  return std::min(std::max(i, 0), n - 2);
}

}  // namespace detail

// Not-a-knot cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n != y_.size()) throw invalid_input("spline: length mismatch");
    if (n < 3) throw invalid_input("spline: needs at least 3 points");
    for (int i = 1; i < n; ++i)
      if (!(x_(i) > x_(i - 1)))
        throw invalid_input("spline: abscissae not strictly increasing",
                            static_cast<std::size_t>(i));
    m_ = Vec::Zero(n);
    if (n == 3) {
      // Single parabola; constant second derivative.
      const double h0 = x_(1) - x_(0), h1 = x_(2) - x_(1);
      const double m =
          2.0 * ((y_(2) - y_(1)) / h1 - (y_(1) - y_(0)) / h0) / (h0 + h1);
      m_.setConstant(m);
      return;
    }
    // Moments M_1..M_{n-2} from a tridiagonal system; the not-a-knot
    // conditions eliminate M_0 and M_{n-1} into the first and last rows.
    const int m = n - 2;
    Vec lo(m), di(m), up(m), rhs(m);
    auto h = [&](int i) { return x_(i + 1) - x_(i); };
    for (int i = 1; i <= n - 2; ++i) {
      const int r = i - 1;
      lo(r) = h(i - 1) / 6.0;
      di(r) = (h(i - 1) + h(i)) / 3.0;
      up(r) = h(i) / 6.0;
      rhs(r) = (y_(i + 1) - y_(i)) / h(i) - (y_(i) - y_(i - 1)) / h(i - 1);
    }
    {
      // M_0 = (1 + h0/h1) M_1 - (h0/h1) M_2 folded into row i=1.
      const double a = h(0) / h(1);
      di(0) += lo(0) * (1.0 + a);
      up(0) -= lo(0) * a;
      lo(0) = 0.0;
      // M_{n-1} = (1 + b) M_{n-2} - b M_{n-3},  b = h_{n-2}/h_{n-3}.
      const double b = h(n - 2) / h(n - 3);
      di(m - 1) += up(m - 1) * (1.0 + b);
      lo(m - 1) -= up(m - 1) * b;
      up(m - 1) = 0.0;
    }
    for (int r = 1; r < m; ++r) {  // Thomas elimination
      const double w = lo(r) / di(r - 1);
      di(r) -= w * up(r - 1);
      rhs(r) -= w * rhs(r - 1);
    }
    Vec sol(m);
    sol(m - 1) = rhs(m - 1) / di(m - 1);
    for (int r = m - 2; r >= 0; --r)
      sol(r) = (rhs(r) - up(r) * sol(r + 1)) / di(r);
    for (int i = 1; i <= n - 2; ++i) m_(i) = sol(i - 1);
    m_(0) = (1.0 + h(0) / h(1)) * m_(1) - (h(0) / h(1)) * m_(2);
    m_(n - 1) = (1.0 + h(n - 2) / h(n - 3)) * m_(n - 2) -
                (h(n - 2) / h(n - 3)) * m_(n - 3);
  }

  double operator()(double q) const {
    const int i = detail::find_interval(x_, q);
    const double h = x_(i + 1) - x_(i);
    const double a = x_(i + 1) - q, b = q - x_(i);
    return m_(i) * a * a * a / (6.0 * h) + m_(i + 1) * b * b * b / (6.0 * h) +
           (y_(i) / h - m_(i) * h / 6.0) * a +
           (y_(i + 1) / h - m_(i + 1) * h / 6.0) * b;
  }

  double derivative(double q) const {
    const int i = detail::find_interval(x_, q);
    const double h = x_(i + 1) - x_(i);
    const double a = x_(i + 1) - q, b = q - x_(i);
    return -m_(i) * a * a / (2.0 * h) + m_(i + 1) * b * b / (2.0 * h) +
           (y_(i + 1) - y_(i)) / h - (m_(i + 1) - m_(i)) * h / 6.0;
  }

  Vec operator()(const Vec& q) const {
    Vec out(q.size());
    for (int i = 0; i < q.size(); ++i) out(i) = (*this)(q(i));
    return out;
  }

 private:
  Vec x_, y_, m_;  // m_ holds second derivatives at the knots
};

// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes).
class PchipSpline {
 public:
  PchipSpline() = default;

  PchipSpline(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n != y_.size()) throw invalid_input("pchip: length mismatch");
    if (n < 2) throw invalid_input("pchip: needs at least 2 points");
    for (int i = 1; i < n; ++i)
      if (!(x_(i) > x_(i - 1)))
        throw invalid_input("pchip: abscissae not strictly increasing",
                            static_cast<std::size_t>(i));
    d_ = Vec::Zero(n);
    if (n == 2) {
      const double s = (y_(1) - y_(0)) / (x_(1) - x_(0));
      d_(0) = d_(1) = s;
      return;
    }
    Vec h(n - 1), delta(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      h(i) = x_(i + 1) - x_(i);
      delta(i) = (y_(i + 1) - y_(i)) / h(i);
    }
    for (int i = 1; i + 1 < n; ++i) {
      if (delta(i - 1) * delta(i) <= 0.0) {
        d_(i) = 0.0;
      } else {
        const double w1 = 2.0 * h(i) + h(i - 1);
        const double w2 = h(i) + 2.0 * h(i - 1);
        d_(i) = (w1 + w2) / (w1 / delta(i - 1) + w2 / delta(i));
      }
    }
    d_(0) = end_slope(h(0), h(1), delta(0), delta(1));
    d_(n - 1) = end_slope(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
  }

  double operator()(double q) const {
    const int i = detail::find_interval(x_, q);
    const double h = x_(i + 1) - x_(i);
    const double u = (q - x_(i)) / h;
    const double u2 = u * u, u3 = u2 * u;
    return y_(i) * (1.0 - 3.0 * u2 + 2.0 * u3) + y_(i + 1) * (3.0 * u2 - 2.0 * u3) +
           h * d_(i) * (u - 2.0 * u2 + u3) + h * d_(i + 1) * (u3 - u2);
  }

  Vec operator()(const Vec& q) const {
    Vec out(q.size());
    for (int i = 0; i < q.size(); ++i) out(i) = (*this)(q(i));
    return out;
  }

 private:
  // One-sided three-point slope with the usual shape-preserving clamps.
  static double end_slope(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  }

  Vec x_, y_, d_;  // d_ holds first derivatives at the knots
};

// Values of a curve at warped times, cubic interpolation of y.
inline Vec eval_at(const TimeGrid& g, const Vec& y, const Vec& times) {
  return CubicSpline(g.t, y)(times);
}

}  // namespace fcomb
