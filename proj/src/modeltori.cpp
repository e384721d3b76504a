#include "tunnelsplit/modeltori.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

namespace {

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

// int_y^x sqrt(t^2 - y^2) dt, 0 <= y <= x
double phi(double y, double x) {
  if (y == 0.0) return 0.5 * x * x;
  const double r = std::sqrt(std::max(0.0, (x - y) * (x + y)));
  return 0.5 * (x * r - y * y * std::log((x + r) / y));
}

}  // namespace

ModelTorus torus_from_actions(const HarmonicData& well, std::array<double, 2> iota, double x2_sign) {
  if (!(iota[0] >= 0.0 && iota[1] >= 0.0) || !std::isfinite(iota[0]) || !std::isfinite(iota[1]))
    throw Error(ErrorCode::InvalidArgument, "actions must be finite and non-negative");
  if (iota[0] == 0.0 && iota[1] == 0.0) throw Error(ErrorCode::ZeroTorus, "iota = (0, 0)");
  ModelTorus t;
  t.iota = iota;
  t.well = well;
  t.E = 2.0 * well.lambda1 * iota[0] + 2.0 * well.lambda2 * iota[1];
  // vertex on the barrier side of the well, x2 orientation from x2_sign
  const double s1 = sgn(-well.minimum[0]) * sgn(well.axis1()[0]);
  const double s2 = sgn(x2_sign) * sgn(well.axis2()[1]);
  t.umbilic_frame = Vec2(s1 * std::sqrt(2.0 * iota[0] / well.lambda1), s2 * std::sqrt(2.0 * iota[1] / well.lambda2));
  t.umbilic = well.from_frame(t.umbilic_frame);
  return t;
}

std::array<double, 2> ebk_actions(const HarmonicData& /*well*/, std::array<int, 2> k, double h, bool maslov_shift) {
  if (k[0] < 0 || k[1] < 0) throw Error(ErrorCode::InvalidArgument, "quantum numbers must be >= 0");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  const double shift = maslov_shift ? 0.5 : 0.0;
  return {h * (k[0] + shift), h * (k[1] + shift)};
}

ModelTorus ebk_torus(const HarmonicData& well, std::array<int, 2> k, double h, bool maslov_shift, double x2_sign) {
  ModelTorus t = torus_from_actions(well, ebk_actions(well, k, h, maslov_shift), x2_sign);
  t.k = k;
  return t;
}

double agmon_component(double lambda, double y, double x) {
  y = std::abs(y);
  x = std::abs(x);
  if (x < y) {
    std::ostringstream os;
    os << "|x| = " << x << " < |y| = " << y;
    throw Error(ErrorCode::InsideCaustic, os.str());
  }
  return lambda * phi(y, x);
}

double model_agmon_F(const HarmonicData& well, const Vec2& y, const Vec2& x) {
  return agmon_component(well.lambda1, y[0], x[0]) + agmon_component(well.lambda2, y[1], x[1]);
}

double model_agmon_F_quadrature(const HarmonicData& well, const Vec2& y, const Vec2& x) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double lam[2] = {well.lambda1, well.lambda2};
  double F = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double yj = std::abs(y[j]), xj = std::abs(x[j]);
    if (xj < yj) throw Error(ErrorCode::InsideCaustic, "quadrature point inside the caustic");
    if (xj == yj) continue;
    auto f = [yj](double t) { return std::sqrt(std::max(0.0, (t - yj) * (t + yj))); };
    F += lam[j] * q.integrate(f, yj, xj, 1e-14);
  }
  return F;
}

namespace {

struct SectionPhase {
  const ModelTorus* side[2];

  // value, derivative and second derivative in x2 on {x1 = 0}
  void eval(double x2, double* v, double* dv, double* ddv) const {
    double val = 0.0, d1 = 0.0, d2 = 0.0;
    for (const ModelTorus* t : side) {
      const Vec2 z = t->well.to_frame(Vec2(0.0, x2));
      const double lam[2] = {t->well.lambda1, t->well.lambda2};
      for (int j = 0; j < 2; ++j) {
        const double y = std::abs(t->umbilic_frame[j]);
        const double ax = std::abs(z[j]);
        const double dz = t->well.frame(j, 1);  // d z_j / d x2
        if (y == 0.0) {
          val += 0.5 * lam[j] * z[j] * z[j];
          d1 += lam[j] * z[j] * dz;
          d2 += lam[j] * dz * dz;
          continue;
        }
        if (ax <= y) continue;  // caustic strip: no decay in this direction
        const double r = std::sqrt((ax - y) * (ax + y));
        val += lam[j] * phi(y, ax);
        d1 += lam[j] * sgn(z[j]) * r * dz;
        d2 += lam[j] * (ax / r) * dz * dz;
      }
    }
    if (v) *v = val;
    if (dv) *dv = d1;
    if (ddv) *ddv = d2;
  }
  double deriv(double x2) const {
    double d;
    eval(x2, nullptr, &d, nullptr);
    return d;
  }
};

// leftmost point where pred flips from true to false on [lo, hi]
template <class Pred>
double bisect(Pred pred, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TunnelPath tunnel_distance(const ModelTorus& left, const ModelTorus& right, bool strict) {
  if (std::abs(left.E - right.E) > 1e-9) {
    std::ostringstream os;
    os << "umbilic energies differ: " << left.E << " vs " << right.E;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  const SectionPhase P{{&left, &right}};
  const double mid = 0.5 * (left.well.minimum[1] + right.well.minimum[1]);
  double half = 2.0 * std::max(std::abs(left.umbilic_frame[1]), std::abs(right.umbilic_frame[1])) + 1.0;

  double lo = mid - half, hi = mid + half;
  bool bracketed = P.deriv(lo) < 0.0 && P.deriv(hi) > 0.0;
  if (!bracketed) {
    half *= 2.0;
    lo = mid - half;
    hi = mid + half;
    bracketed = P.deriv(lo) < 0.0 && P.deriv(hi) > 0.0;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "Phi' has no sign change on [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::NoInteriorMinimum, os.str());
  }

  // Phi is convex: Phi' is non-decreasing and may vanish on a whole strip
  const double xl = bisect([&](double x) { return P.deriv(x) < 0.0; }, lo, hi);
  const double xr = bisect([&](double x) { return P.deriv(x) <= 0.0; }, lo, hi);

  TunnelPath out;
  out.yL = left.umbilic;
  out.yR = right.umbilic;
  const double xt = 0.5 * (xl + xr);
  out.x_tilde = Vec2(0.0, xt);
  P.eval(xt, &out.action, &out.gradient, &out.curvature);
  out.degenerate = !(out.curvature > 1e-10) || (xr - xl) > 1e-10 * (1.0 + std::abs(xt));
  if (out.degenerate && strict) {
    std::ostringstream os;
    os << "Phi'' = " << out.curvature << " at x2 = " << xt << " (flat on [" << xl << ", " << xr << "])";
    throw Error(ErrorCode::DegenerateCritical, os.str());
  }
  return out;
}

}  // namespace tunnel
