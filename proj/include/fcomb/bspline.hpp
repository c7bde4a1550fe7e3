#pragma once

// Clamped B-spline basis on a breakpoint sequence, with derivative
// evaluation (the triangular recurrence from the standard de Boor
// formulation) and exact Gauss-Legendre assembly of derivative Gram
// matrices. Dense matrices throughout: basis sizes here stay near the
// number of observation points, so sparsity buys nothing.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>

namespace fcomb {

namespace detail {

struct GaussRule {
  std::vector<double> node;    // on [-1, 1]
  std::vector<double> weight;  // sums to 2
};

inline GaussRule gauss_legendre(int points) {
  switch (points) {
    case 1:
      return {{0.0}, {2.0}};
    case 2:
      return {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}};
    case 3:
      return {{-0.7745966692414834, 0.0, 0.7745966692414834},
              {0.5555555555555556, 0.8888888888888888, 0.5555555555555556}};
    case 4:
      return {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
               0.8611363115940526},
              {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
               0.3478548451374538}};
    default:
      return {{-0.9061798459386640, -0.5384693101056831, 0.0,
               0.5384693101056831, 0.9061798459386640},
              {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
               0.4786286704993665, 0.2369268850561891}};
  }
}

}  // namespace detail

class BSplineBasis {
 public:
  // Breakpoints must be strictly increasing; the knot vector clamps each
  // end with multiplicity degree+1.
  BSplineBasis(const Vec& breakpoints, int degree) : deg_(degree) {
    if (degree < 1) throw invalid_input("spline degree must be at least 1");
    const int m = static_cast<int>(breakpoints.size());
    if (m < 2) throw invalid_input("need at least two breakpoints");
    for (int i = 1; i < m; ++i)
      if (!(breakpoints(i) > breakpoints(i - 1)))
        throw invalid_input("breakpoints must be strictly increasing",
                            static_cast<std::size_t>(i));
    size_ = m - 1 + degree;
    knots_.resize(size_ + degree + 1);
    for (int i = 0; i <= degree; ++i) knots_(i) = breakpoints(0);
    for (int i = 1; i < m - 1; ++i) knots_(degree + i) = breakpoints(i);
    for (int i = 0; i <= degree; ++i)
      knots_(size_ + i) = breakpoints(m - 1);
  }

  int size() const { return size_; }
  int degree() const { return deg_; }
  double domain_lo() const { return knots_(deg_); }
  double domain_hi() const { return knots_(size_); }

  // Values of the degree+1 active basis functions and their derivatives up
  // to nderiv at x. ders is (nderiv+1) x (degree+1); row r holds the r-th
  // derivative. Returns the index of the first active basis function.
  int eval(double x, int nderiv, Mat& ders) const {
    const int p = deg_;
    const int span = find_span(x);
    ders.setZero(nderiv + 1, p + 1);

    Mat ndu(p + 1, p + 1);
    Vec left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
      left(j) = x - knots_(span + 1 - j);
      right(j) = knots_(span + j) - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu(j, r) = right(r + 1) + left(j - r);
        const double temp = ndu(r, j - 1) / ndu(j, r);
        ndu(r, j) = saved + right(r + 1) * temp;
        saved = left(j - r) * temp;
      }
      ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    Mat a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
      int s1 = 0, s2 = 1;
      a(0, 0) = 1.0;
      for (int k = 1; k <= nderiv; ++k) {
        double acc = 0.0;
        const int rk = r - k;
        const int pk = p - k;
        if (r >= k) {
          a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
          acc = a(s2, 0) * ndu(rk, pk);
        }
        const int j1 = (rk >= -1) ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
          acc += a(s2, j) * ndu(rk + j, pk);
        }
        if (r <= pk) {
          a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
          acc += a(s2, k) * ndu(r, pk);
        }
        ders(k, r) = acc;
        std::swap(s1, s2);
      }
    }
    double factor = p;
    for (int k = 1; k <= nderiv; ++k) {
      for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
      factor *= (p - k);
    }
    return span - p;
  }

  // Dense design matrix of the deriv_order-th derivative at the points x.
  Mat design(const Vec& x, int deriv_order) const {
    Mat out = Mat::Zero(x.size(), size_);
    Mat ders;
    for (int i = 0; i < x.size(); ++i) {
      const int first = eval(x(i), deriv_order, ders);
      for (int j = 0; j <= deg_; ++j)
        out(i, first + j) = ders(deriv_order, j);
    }
    return out;
  }

  // Gram matrix of deriv_order-th derivatives, integrated exactly span by
  // span with a rule sharp for the piecewise-polynomial integrand degree.
  Mat penalty(int deriv_order) const {
    Mat out = Mat::Zero(size_, size_);
    const int prod_degree = 2 * std::max(deg_ - deriv_order, 0);
    const int points = std::clamp(prod_degree / 2 + 1, 1, 5);
    const detail::GaussRule rule = detail::gauss_legendre(points);
    Mat ders;
    for (int span = deg_; span < size_; ++span) {
      const double a = knots_(span), b = knots_(span + 1);
      if (!(b > a)) continue;
      for (int gq = 0; gq < points; ++gq) {
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.node[gq];
        const double w = 0.5 * (b - a) * rule.weight[gq];
        const int first = eval(x, deriv_order, ders);
        for (int r = 0; r <= deg_; ++r)
          for (int c = 0; c <= deg_; ++c)
            out(first + r, first + c) +=
                w * ders(deriv_order, r) * ders(deriv_order, c);
      }
    }
    return out;
  }

 private:
  // Index i with knots_(i) <= x < knots_(i+1), clamped to [deg_, size_-1]
  // so values outside the breakpoint range use the end-span polynomial.
  int find_span(double x) const {
    if (x >= knots_(size_)) return size_ - 1;
    if (x <= knots_(deg_)) return deg_;
    int lo = deg_, hi = size_;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x < knots_(mid) ? hi : lo) = mid;
    }
    return lo;
  }

  Vec knots_;
  int deg_ = 0;
  int size_ = 0;
};

}  // namespace fcomb
