#include "tunnelsplit/series.hpp"

#include <cmath>

namespace tunnel {

BiPoly BiPoly::operator+(const BiPoly& o) const {
  BiPoly r(degree());
  r.c_ = c_ + o.c_;
  return r;
}

BiPoly BiPoly::operator-(const BiPoly& o) const {
  BiPoly r(degree());
  r.c_ = c_ - o.c_;
  return r;
}

BiPoly BiPoly::operator*(double s) const {
  BiPoly r(degree());
  r.c_ = c_ * s;
  return r;
}

BiPoly BiPoly::operator*(const BiPoly& o) const {
  const int n = degree();
  BiPoly r(n);
  for (int p = 0; p <= n; ++p)
    for (int q = 0; p + q <= n; ++q) {
      const double a = c_(p, q);
      if (a == 0.0) continue;
      for (int r1 = 0; p + q + r1 <= n; ++r1)
        for (int r2 = 0; p + q + r1 + r2 <= n; ++r2) r.c_(p + r1, q + r2) += a * o.c_(r1, r2);
    }
  return r;
}

BiPoly BiPoly::d1() const {
  const int n = degree();
  BiPoly r(n);
  for (int p = 1; p <= n; ++p)
    for (int q = 0; p + q <= n; ++q) r.c_(p - 1, q) = p * c_(p, q);
  return r;
}

BiPoly BiPoly::d2() const {
  const int n = degree();
  BiPoly r(n);
  for (int p = 0; p <= n; ++p)
    for (int q = 1; p + q <= n; ++q) r.c_(p, q - 1) = q * c_(p, q);
  return r;
}

BiPoly BiPoly::part(int k) const {
  BiPoly r(degree());
  for (int p = 0; p <= k; ++p) r.c_(p, k - p) = c_(p, k - p);
  return r;
}

double BiPoly::operator()(const Vec2& z) const {
  // Horner in z2 inside Horner in z1, summed from the highest degree down
  const int n = degree();
  double acc = 0.0;
  for (int p = n; p >= 0; --p) {
    double inner = 0.0;
    for (int q = n - p; q >= 0; --q) inner = inner * z[1] + c_(p, q);
    acc = acc * z[0] + inner;
  }
  return acc;
}

BiPoly BiPoly::constant(int degree, double v) {
  BiPoly r(degree);
  r.c_(0, 0) = v;
  return r;
}

BiPoly BiPoly::linear(int degree, double c0, double c1, double c2) {
  BiPoly r(degree);
  r.c_(0, 0) = c0;
  r.c_(1, 0) = c1;
  r.c_(0, 1) = c2;
  return r;
}

EikonalSeries::EikonalSeries(const PotentialSpec& pot, const HarmonicData& well, int order)
    : well_(well), v_(order), s_(order) {
  const int n = order;
  const Coefficients& k = pot.coefficients();
  // x = minimum + frame^T z
  const Mat2& f = well.frame;
  const BiPoly x1 = BiPoly::linear(n, well.minimum[0], f(0, 0), f(1, 0));
  const BiPoly x2 = BiPoly::linear(n, well.minimum[1], f(0, 1), f(1, 1));
  const BiPoly x1s = x1 * x1;
  const BiPoly u = x1s - BiPoly::constant(n, k.a * k.a);
  v_ = u * u * k.alpha + x2 * x2 * (k.omega * k.omega) + x1s * x2 * x2 * k.c + u * x2 * k.d;
  // the minimum is exact to rounding: drop the spurious constant/linear/cross parts
  v_(0, 0) = 0.0;
  v_(1, 0) = 0.0;
  v_(0, 1) = 0.0;
  v_(1, 1) = 0.0;

  const double l1 = well.lambda1, l2 = well.lambda2;
  s_(2, 0) = 0.5 * l1;
  s_(0, 2) = 0.5 * l2;
  for (int deg = 3; deg <= n; ++deg) {
    // 2 (l1 z1 d1 + l2 z2 d2) S_deg = V_deg - sum_{p+q = deg+2, 3<=p,q} grad S_p . grad S_q
    BiPoly rhs = v_.part(deg);
    for (int p = 3; p <= deg - 1; ++p) {
      const int q = deg + 2 - p;
      if (q < 3 || q > deg - 1) continue;
      const BiPoly sp = s_.part(p), sq = s_.part(q);
      rhs = rhs - (sp.d1() * sq.d1() + sp.d2() * sq.d2()).part(deg);
    }
    for (int p = 0; p <= deg; ++p) {
      const int q = deg - p;
      s_(p, q) = rhs(p, q) / (2.0 * (l1 * p + l2 * q));
    }
  }
  g1_ = s_.d1();
  g2_ = s_.d2();
  h11_ = g1_.d1();
  h12_ = g1_.d2();
  h22_ = g2_.d2();
}

Mat2 EikonalSeries::hessian(const Vec2& z) const {
  Mat2 h;
  h(0, 0) = h11_(z);
  h(0, 1) = h(1, 0) = h12_(z);
  h(1, 1) = h22_(z);
  return h;
}

double EikonalSeries::eikonal_residual(const Vec2& z) const {
  const Vec2 g = gradient(z);
  return g.squaredNorm() - v_(z);
}

}  // namespace tunnel
