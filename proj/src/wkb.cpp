#include "tunnelsplit/wkb.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

using Eigen::VectorXd;

namespace {

const Mat2 kP = Eigen::Vector2d(-1.0, 1.0).asDiagonal();

Mat2 unpack_m(const VectorXd& y) {
  Mat2 m;
  m << y[0], y[1], y[1], y[2];
  return m;
}

Mat2 series_hessian(const Instanton& inst, double t) {
  const Mat2& f = inst.wells.left.frame;
  return f.transpose() * inst.series.hessian(inst.left_frame(t)) * f;
}

double gl(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 15>::integrate(f, a, b);
}

// int_{s}^{t_join} f dt over the series tail, Gauss-Legendre per dense step
class TailIntegral {
 public:
  TailIntegral(const Instanton& inst, std::function<double(double)> f) : f_(std::move(f)) {
    const auto& tt = inst.tail.times();  // decreasing from t_join
    nodes_.assign(tt.rbegin(), tt.rend());
    cum_.assign(nodes_.size(), 0.0);
    for (std::size_t i = nodes_.size() - 1; i-- > 0;) cum_[i] = cum_[i + 1] + gl(f_, nodes_[i], nodes_[i + 1]);
  }
  double from(double s) const {
    if (s >= nodes_.back()) return -gl(f_, nodes_.back(), s);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    if (i == 0) return cum_[0] + gl(f_, s, nodes_[0]);
    return cum_[i] + gl(f_, s, nodes_[i]);
  }

 private:
  std::function<double(double)> f_;
  std::vector<double> nodes_, cum_;
};

}  // namespace

DenseSolution riccati_integrate(const std::function<Mat2(double)>& half_hessian, const Mat2& M0, double t0,
                                double t1, double tol) {
  Rhs rhs = [&half_hessian](double t, const VectorXd& y, VectorXd& dy) {
    const Mat2 m = unpack_m(y);
    const Mat2 d = half_hessian(t) - m * m;
    dy[0] = d(0, 0);
    dy[1] = 0.5 * (d(0, 1) + d(1, 0));
    dy[2] = d(1, 1);
    dy[3] = m.trace();
  };
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol;
  VectorXd y0(4);
  y0 << M0(0, 0), 0.5 * (M0(0, 1) + M0(1, 0)), M0(1, 1), 0.0;
  std::vector<OdeEvent> ev{{[](double, const VectorXd& y) { return 1e6 - unpack_m(y).norm(); }, -1, true}};
  OdeResult r = integrate(rhs, t0, y0, t1, o, ev);
  if (r.event_fired) throw Error(ErrorCode::RiccatiBlowup, "||M|| exceeded 1e6 (focal point on the path)");
  return std::move(r.solution);
}

Mat2 RiccatiSamples::at(double time) const {
  if (time > 0.0) return kP * at(-time) * kP;
  if (time >= t_join) return unpack_m(core(time));
  // tail samples are analytic; interpolate linearly between stored nodes
  auto it = std::lower_bound(t.begin(), t.end(), time);
  if (it == t.begin()) return M.front();
  if (it == t.end()) return M.back();
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double w = (time - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - w) * M[i - 1] + w * M[i];
}

RiccatiSamples riccati_hessian(const Instanton& inst, const PotentialSpec& pot, double tol) {
  RiccatiSamples s;
  s.t_join = inst.t_join;
  s.t_deep = inst.t_deep;

  // tail: Hessian of the series phase, nodes in increasing time
  const auto& tt = inst.tail.times();
  std::vector<double> tail_t(tt.rbegin(), tt.rend());
  for (std::size_t i = 0; i + 1 < tail_t.size(); ++i) {
    for (double f : {0.0, 0.5}) {
      const double t = tail_t[i] + f * (tail_t[i + 1] - tail_t[i]);
      if (t >= inst.t_join) continue;
      s.t.push_back(t);
      s.M.push_back(series_hessian(inst, t));
    }
  }

  auto half_hess = [&](double t) { return Mat2(0.5 * pot.eval(inst.at(t).x).hessian); };
  s.core = riccati_integrate(half_hess, series_hessian(inst, inst.t_join), inst.t_join, 0.0, tol);
  for (std::size_t i = 0; i < s.core.times().size(); ++i) {
    const auto& st = s.core.states()[i];
    s.t.push_back(s.core.times()[i]);
    s.M.push_back(unpack_m(st));
    if (i + 1 < s.core.times().size()) {
      const double tm = 0.5 * (s.core.times()[i] + s.core.times()[i + 1]);
      s.t.push_back(tm);
      s.M.push_back(unpack_m(s.core(tm)));
    }
  }
  return s;
}

double riccati_left_right_gap(const Instanton& inst, const PotentialSpec& pot, const RiccatiSamples& M, double tol) {
  // on the right branch xi = -grad S_R, so N = Hess S_R obeys dN/dt = N^2 - Hess V / 2
  auto neg_half_hess = [&](double t) { return Mat2(-0.5 * pot.eval(inst.at(t).x).hessian); };
  const double t_start = -inst.t_join;
  const Mat2 N0 = kP * series_hessian(inst, inst.t_join) * kP;
  Rhs rhs = [&](double t, const VectorXd& y, VectorXd& dy) {
    const Mat2 n = unpack_m(y);
    const Mat2 d = n * n + neg_half_hess(t);
    dy[0] = d(0, 0);
    dy[1] = 0.5 * (d(0, 1) + d(1, 0));
    dy[2] = d(1, 1);
  };
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol;
  VectorXd y0(3);
  y0 << N0(0, 0), N0(0, 1), N0(1, 1);
  const OdeResult r = integrate(rhs, t_start, y0, 0.0, o);
  double gap = 0.0;
  for (double t : r.solution.times()) {
    gap = std::max(gap, (unpack_m(r.solution(t)) - kP * M.at(-t) * kP).norm());
  }
  return gap;
}

JayResult jay_factor(const Instanton& inst, const RiccatiSamples& M) {
  const double l1 = inst.wells.left.lambda1, l2 = inst.wells.left.lambda2;
  const double tj = M.t_join;
  const VectorXd core_end = M.core.states().back();
  auto f_tail = [&](double t) { return 0.5 * (l1 + l2 - inst.series.hessian(inst.left_frame(t)).trace()); };
  const TailIntegral tail(inst, f_tail);
  // int_{s}^{0} f dt for s <= 0
  auto integral_from = [&](double s) {
    if (s >= tj) {
      const VectorXd ys = M.core(s);
      return 0.5 * (l1 + l2) * (0.0 - s) - 0.5 * (core_end[3] - ys[3]);
    }
    const double core_part = 0.5 * (l1 + l2) * (0.0 - tj) - 0.5 * core_end[3];
    return core_part + tail.from(s);
  };
  JayResult j;
  const double f_deep = f_tail(inst.t_deep);
  j.tail_integrand = f_deep;
  if (std::abs(f_deep) > 1e-8) throw Error(ErrorCode::TailNotConverged, "J integrand at the series tail end > 1e-8");
  // stitch the tail quadrature piecewise for accuracy over the long interval
  const double total = integral_from(inst.t_deep) + f_deep / l1;
  j.J = std::exp(total);

  for (double s : M.t) {
    if (s < inst.t_trunc) continue;
    j.t.push_back(-s);
    j.J_t.push_back(std::exp(integral_from(s)));
  }
  std::reverse(j.t.begin(), j.t.end());
  std::reverse(j.J_t.begin(), j.J_t.end());
  return j;
}

SigmaFit sigma_extract(const Instanton& inst, double window) {
  const double l1 = inst.wells.left.lambda1;
  if (window <= 0.0) window = 1.0 / l1;
  const SigmaFit f = fit_sigma(inst, inst.t_trunc, inst.t_trunc + window);
  if (f.relative_slope > 1e-4) throw Error(ErrorCode::NoPlateau, "e^{lambda1 t} z1(t) has no plateau on the window");
  return f;
}

CrossingConstants crossing_constants(const Instanton& inst, const RiccatiSamples& M) {
  int changes = 0;
  double prev = 0.0;
  for (double t : M.t) {
    if (t < inst.t_trunc) continue;
    const double x1 = inst.at(t).x[0];
    if (std::abs(x1) < 1e-10) continue;  // the crossing itself
    if (prev != 0.0 && x1 != 0.0 && (x1 > 0) != (prev > 0)) ++changes;
    if (x1 != 0.0) prev = x1;
  }
  if (changes > 0) throw Error(ErrorCode::MultipleCrossings, "x1(t) changes sign before the midpoint");
  CrossingConstants c;
  const PhasePoint p = inst.at(0.0);
  c.x0 = Vec2(0.0, p.x[1]);
  c.P0 = p.xi[0];
  c.D = M.at(0.0)(1, 1);
  return c;
}

double tee_constant(const WkbConstants& w) {
  return w.J * w.J * (w.P0 / (w.lambda1 * w.sigma)) * std::sqrt(w.lambda2 / w.D);
}

WkbConstants compute_wkb(const PotentialSpec& pot, const Instanton& inst, double tol) {
  const RiccatiSamples M = riccati_hessian(inst, pot, tol);
  WkbConstants w;
  w.lambda1 = inst.wells.left.lambda1;
  w.lambda2 = inst.wells.left.lambda2;
  w.S0 = inst.S0;
  w.J = jay_factor(inst, M).J;
  w.sigma = sigma_extract(inst).sigma;
  const CrossingConstants c = crossing_constants(inst, M);
  w.x0 = c.x0;
  w.P0 = c.P0;
  w.D = c.D;
  w.T_const = tee_constant(w);
  return w;
}

double rho(const PotentialSpec& pot, const WkbConstants& w, const Instanton& inst, int m, double h) {
  if (m < 0 || !(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho needs m >= 0 and h > 0");
  const double E = h * (2.0 * m + 1.0) * w.lambda1;
  const double TE = truncation_time(pot, inst, E);
  return w.sigma * std::sqrt(w.lambda1 / h) * std::exp(-0.5 * w.lambda1 * TE);
}

TransportAmplitude transport_amplitude(const Instanton& inst, const RiccatiSamples& M, int m, double window) {
  const double l1 = inst.wells.left.lambda1, l2 = inst.wells.left.lambda2;
  if (window <= 0.0) window = 1.0 / l1;
  const double log_norm = 0.25 * ((1.0 + 2.0 * m) * std::log(l1) + std::log(l2)) + 0.5 * m * std::log(2.0) -
                          0.5 * (std::lgamma(m + 1.0) + std::log(std::numbers::pi));
  const JayResult jr = jay_factor(inst, M);
  // log J(t) = log J - int_{-infinity}^{-t} f
  auto f_tail = [&](double t) { return 0.5 * (l1 + l2 - inst.series.hessian(inst.left_frame(t)).trace()); };
  const TailIntegral tail(inst, f_tail);
  const double below_deep = f_tail(inst.t_deep) / l1;
  const double full_tail = tail.from(inst.t_deep);
  TransportAmplitude out;
  const int n = 33;
  const double t_hi = -inst.t_trunc, t_lo = t_hi - window;
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (n - 1);
    const double s = -t;  // mirror time on the left branch
    const double log_Jt = std::log(jr.J) - (full_tail - tail.from(s) + below_deep);
    const double z1 = std::abs(inst.left_frame(s)[0]);
    const double b = std::exp(log_norm + m * std::log(z1));
    const double b0 = std::exp(log_Jt + m * l1 * t) * b;
    out.t.push_back(t);
    out.b.push_back(b0);
    lo = std::min(lo, b0);
    hi = std::max(hi, b0);
    sum += b0;
  }
  out.b0 = sum / n;
  out.variation = (hi - lo) / out.b0;
  if (out.variation > 1e-4) throw Error(ErrorCode::NoPlateau, "transport amplitude b(0) not stable on the window");
  return out;
}

}  // namespace tunnel
