#pragma once

#include <Eigen/Dense>

#include "tunnelsplit/potential.hpp"

namespace tunnel {

/// Dense bivariate polynomial sum c(p,q) z1^p z2^q, truncated at total degree N.
class BiPoly {
 public:
  explicit BiPoly(int degree = 0) : c_(Eigen::MatrixXd::Zero(degree + 1, degree + 1)) {}

  int degree() const { return static_cast<int>(c_.rows()) - 1; }
  double& operator()(int p, int q) { return c_(p, q); }
  double operator()(int p, int q) const { return c_(p, q); }

  BiPoly operator+(const BiPoly& o) const;
  BiPoly operator-(const BiPoly& o) const;
  BiPoly operator*(const BiPoly& o) const;
  BiPoly operator*(double s) const;
  BiPoly d1() const;
  BiPoly d2() const;
  /// Homogeneous part of degree n.
  BiPoly part(int n) const;
  double operator()(const Vec2& z) const;

  static BiPoly constant(int degree, double v);
  static BiPoly linear(int degree, double c0, double c1, double c2);

 private:
  Eigen::MatrixXd c_;
};

/// Power series of the eikonal |grad S|^2 = V at a well, with S = sum lambda_j z_j^2 / 2
/// + higher orders in the well's principal frame. grad S generates the
/// unstable manifold of the minimum for the inverted flow.
class EikonalSeries {
 public:
  EikonalSeries() = default;
  EikonalSeries(const PotentialSpec& pot, const HarmonicData& well, int order = 12);

  int order() const { return s_.degree(); }
  const HarmonicData& well() const { return well_; }
  const BiPoly& potential_taylor() const { return v_; }

  double action(const Vec2& z) const { return s_(z); }
  Vec2 gradient(const Vec2& z) const { return Vec2(g1_(z), g2_(z)); }
  Mat2 hessian(const Vec2& z) const;
  /// Residual |grad S|^2 - V at z (frame coordinates).
  double eikonal_residual(const Vec2& z) const;

 private:
  HarmonicData well_;
  BiPoly v_, s_, g1_, g2_, h11_, h12_, h22_;
};

}  // namespace tunnel
