#include "tunnelsplit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

using Eigen::VectorXd;

Vec4 pack(const PhasePoint& p) {
  Vec4 y;
  y << p.x, p.xi;
  return y;
}

PhasePoint unpack(const VectorXd& y) {
  PhasePoint p;
  p.x = Vec2(y[0], y[1]);
  p.xi = Vec2(y[2], y[3]);
  return p;
}

double energy(const PotentialSpec& pot, const PhasePoint& p) { return p.xi.squaredNorm() - pot.value(p.x); }

double TrajectorySegment::max_energy_drift(const PotentialSpec& pot) const {
  const auto& ts = dense.times();
  double m = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    m = std::max(m, std::abs(tunnel::energy(pot, at(ts[i])) - energy));
    if (i + 1 < ts.size()) m = std::max(m, std::abs(tunnel::energy(pot, at(0.5 * (ts[i] + ts[i + 1]))) - energy));
  }
  return m;
}

namespace {

constexpr double kPi = std::numbers::pi;

// state: x1 x2 xi1 xi2 [action] [16 variational entries, column-major]
Rhs hamiltonian_rhs(const PotentialSpec& pot, bool with_action, bool with_variational) {
  return [&pot, with_action, with_variational](double, const VectorXd& y, VectorXd& dy) {
    const Vec2 x(y[0], y[1]);
    const Derivatives d = pot.eval(x);
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = 0.5 * d.gradient[0];
    dy[3] = 0.5 * d.gradient[1];
    int off = 4;
    if (with_action) {
      dy[4] = y[2] * y[2] + y[3] * y[3];
      off = 5;
    }
    if (with_variational) {
      // d/dt Phi = A Phi, A = [[0, I], [Hess/2, 0]]
      for (int c = 0; c < 4; ++c) {
        const double* ph = y.data() + off + 4 * c;
        double* dph = dy.data() + off + 4 * c;
        dph[0] = ph[2];
        dph[1] = ph[3];
        dph[2] = 0.5 * (d.hessian(0, 0) * ph[0] + d.hessian(0, 1) * ph[1]);
        dph[3] = 0.5 * (d.hessian(1, 0) * ph[0] + d.hessian(1, 1) * ph[1]);
      }
    }
  };
}

OdeOptions options_for(double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-5)) throw Error(ErrorCode::InvalidArgument, "tolerance outside [1e-13, 1e-6]");
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol;
  return o;
}

std::vector<OdeEvent> crossing_and_box_events(double W) {
  std::vector<OdeEvent> ev;
  ev.push_back({[](double, const VectorXd& y) { return y[0]; }, +1, true});
  ev.push_back({[W](double, const VectorXd& y) { return W - y[0]; }, -1, true});
  ev.push_back({[W](double, const VectorXd& y) { return W + y[0]; }, -1, true});
  ev.push_back({[W](double, const VectorXd& y) { return W - y[1]; }, -1, true});
  ev.push_back({[W](double, const VectorXd& y) { return W + y[1]; }, -1, true});
  return ev;
}

// One shot towards the symmetry line.
struct Shot {
  bool crossed = false;
  double sign = 0.0;  // side indicator, continuous through the crossing/miss boundary
  double g = 0.0;     // xi2 / |xi| at the crossing
  double tau = 0.0;
  VectorXd y_end;
  OdeResult run;
};

Shot shoot(const PotentialSpec& pot, const VectorXd& y0, double t_max, double tol, bool keep) {
  const OdeOptions opt = options_for(tol);
  static thread_local std::vector<OdeEvent> events;
  events = crossing_and_box_events(pot.box_half_width());
  Shot s;
  OdeResult r;
  try {
    r = integrate(hamiltonian_rhs(pot, y0.size() > 4, false), 0.0, y0, t_max, opt, events);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::StepFailure && e.code() != ErrorCode::BlowUp) throw;
    s.sign = 0.0;
    return s;
  }
  s.y_end = r.event_fired ? r.y_event : VectorXd(r.solution.states().back());
  if (r.event_fired && r.event_index == 0) {
    s.crossed = true;
    s.tau = r.t_event;
    const double nx = std::hypot(s.y_end[2], s.y_end[3]);
    s.g = s.y_end[3] / nx;
    s.sign = s.g > 0 ? 1.0 : (s.g < 0 ? -1.0 : 0.0);
  } else {
    const double dx2 = s.y_end[1] - pot.saddle()[1];
    s.sign = dx2 > 0 ? 1.0 : -1.0;
  }
  if (keep) s.run = std::move(r);
  return s;
}

// Root of the side indicator of a one-parameter shooting family:
// bisection while either end misses, then TOMS748 on xi2/|xi|.
template <class Family>
std::optional<double> refine_root(Family&& fam, double lo, double hi, Shot slo, Shot shi) {
  for (int it = 0; it < 200 && !(slo.crossed && shi.crossed); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    Shot sm = fam(mid);
    if (sm.sign == 0.0 && sm.crossed) return mid;
    if (sm.sign == 0.0) return std::nullopt;
    if (sm.sign == slo.sign) {
      lo = mid;
      slo = std::move(sm);
    } else {
      hi = mid;
      shi = std::move(sm);
    }
  }
  if (!(slo.crossed && shi.crossed)) {
    return std::nullopt;
  }
  if (slo.g == 0.0) return lo;
  if (shi.g == 0.0) return hi;
  auto g = [&](double p) {
    Shot s = fam(p);
    if (!s.crossed) return s.sign;  // should not happen inside a crossing bracket
    return s.g;
  };
  boost::uintmax_t iters = 300;
  auto tol = [](double a, double b) { return std::abs(a - b) <= 2e-16 * std::max(std::abs(a), std::abs(b)); };
  try {
    const auto br = boost::math::tools::toms748_solve(g, lo, hi, slo.g, shi.g, tol, iters);
    return 0.5 * (br.first + br.second);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

template <class Family>
std::vector<double> bracket_roots(Family&& fam, const std::vector<double>& params) {
  std::vector<Shot> shots;
  shots.reserve(params.size());
  for (double p : params) shots.push_back(fam(p));
  std::vector<double> roots;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (shots[i].crossed && shots[i].g == 0.0) roots.push_back(params[i]);
  }
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    const Shot& a = shots[i];
    const Shot& b = shots[i + 1];
    if (a.sign == 0.0 || b.sign == 0.0 || a.sign == b.sign) continue;
    if (auto r = refine_root(fam, params[i], params[i + 1], a, b)) roots.push_back(*r);
  }
  return roots;
}

Vec2 reflect(const Vec2& x) { return Vec2(-x[0], x[1]); }

}  // namespace

TrajectorySegment flow(const PotentialSpec& pot, const PhasePoint& start, double duration, double tol) {
  OdeOptions opt = options_for(tol);
  opt.guard = [&pot](const VectorXd& y) { return pot.in_box(Vec2(y[0], y[1])); };
  TrajectorySegment seg;
  seg.energy = energy(pot, start);
  seg.dense = integrate(hamiltonian_rhs(pot, false, false), 0.0, pack(start), duration, opt).solution;
  return seg;
}

// ---------------------------------------------------------------------------
// instanton

PhasePoint Instanton::at(double t) const {
  if (t > 0.0) {
    PhasePoint p = at(-t);
    p.x = reflect(p.x);
    p.xi[1] = -p.xi[1];
    return p;
  }
  const HarmonicData& w = wells.left;
  if (t >= t_join) return unpack(core(t));
  const Vec2 z = tail(std::max(t, t_deep));
  PhasePoint p;
  p.x = w.from_frame(z);
  p.xi = w.frame.transpose() * series.gradient(z);
  return p;
}

Vec2 Instanton::left_frame(double t) const {
  if (t < t_join) return tail(std::max(t, t_deep));
  return wells.left.to_frame(at(t).x);
}

namespace {

struct InstantonCandidate {
  double param;
  Vec2 z_start;
  double S0;
  double residual;
  OdeResult run;
};

}  // namespace

Instanton compute_instanton(const PotentialSpec& pot, double tol, double eps_trunc_factor) {
  const OdeOptions base = options_for(tol);
  (void)base;
  Instanton inst;
  inst.wells = locate_minima(pot);
  inst.tol = tol;
  const HarmonicData& w = inst.wells.left;
  inst.series = EikonalSeries(pot, w, 12);
  const double a = pot.coefficients().a;
  const double eps0 = 1e-2 * a;
  const double t_max = 60.0 / w.lambda1;

  auto start_state = [&](const Vec2& z) {
    const Vec2 x = w.from_frame(z);
    Vec2 xi = w.frame.transpose() * inst.series.gradient(z);
    xi *= std::sqrt(pot.value(x)) / xi.norm();  // e = 0 exactly
    VectorXd y(5);
    y << x, xi, 0.0;
    return y;
  };

  auto solve_family = [&](auto to_z) {
    auto fam = [&](double p) { return shoot(pot, start_state(to_z(p)), t_max, tol, false); };
    std::vector<double> params;
    for (int k = 56; k >= 0; --k) params.push_back(-eps0 * std::pow(10.0, -k / 4.0));
    params.push_back(0.0);
    for (int k = 56; k >= 0; --k) params.push_back(eps0 * std::pow(10.0, -k / 4.0));
    std::sort(params.begin(), params.end());
    std::vector<InstantonCandidate> out;
    for (double p : bracket_roots(fam, params)) {
      Shot s = shoot(pot, start_state(to_z(p)), t_max, tol, true);
      if (!s.crossed) continue;
      InstantonCandidate c;
      c.param = p;
      c.z_start = to_z(p);
      c.residual = std::abs(s.y_end[3]);
      c.S0 = 2.0 * (inst.series.action(c.z_start) + s.y_end[4]);
      c.run = std::move(s.run);
      out.push_back(std::move(c));
    }
    return out;
  };

  auto regular = solve_family([&](double p) { return Vec2(eps0, p); });
  const double accept = 1e-8;
  std::erase_if(regular, [&](const InstantonCandidate& c) { return c.residual > accept; });
  if (regular.empty()) {
    for (double side : {-1.0, 1.0}) {
      auto irr = solve_family([&](double p) { return Vec2(p, side * eps0); });
      for (const auto& c : irr) {
        if (c.residual <= accept) {
          throw Error(ErrorCode::IrregularArrival,
                      "heteroclinic orbit leaves along the lambda2 axis (regular arrival violated)");
        }
      }
    }
    throw Error(ErrorCode::NoHeteroclinic, "no shooting parameter closes the orbit on x1 = 0");
  }
  auto best = std::min_element(regular.begin(), regular.end(),
                               [](const auto& l, const auto& r) { return l.S0 < r.S0; });
  InstantonCandidate& c = *best;

  inst.core = std::move(c.run.solution);
  const double tau = c.run.t_event;
  inst.core.shift_time(-tau);
  inst.t_join = -tau;
  inst.S0 = c.S0;
  inst.match_residual = c.residual;
  inst.shooting_parameter = c.param;
  inst.x0 = Vec2(0.0, c.run.y_event[1]);
  inst.P0 = c.run.y_event[2];

  // series tail: reduced flow dz/dt = grad S backward into the minimum
  inst.eps_trunc = eps_trunc_factor * a;
  const double eps_deep = 1e-14 * a;
  OdeOptions to;
  to.rtol = std::min(tol, 1e-12);
  to.atol = 1e-30 * a;
  const EikonalSeries& ser = inst.series;
  Rhs reduced = [&ser](double, const VectorXd& z, VectorXd& dz) {
    const Vec2 g = ser.gradient(Vec2(z[0], z[1]));
    dz[0] = g[0];
    dz[1] = g[1];
  };
  std::vector<OdeEvent> deep{{[eps_deep](double, const VectorXd& z) { return z.norm() - eps_deep; }, -1, true}};
  const double t_back = 4.0 * std::log(eps0 / eps_deep) / w.lambda1 + 10.0;
  VectorXd z0(2);
  z0 << c.z_start;
  OdeResult tr = integrate(reduced, inst.t_join, z0, inst.t_join - t_back, to, deep);
  if (!tr.event_fired) throw Error(ErrorCode::NonConvergence, "series tail did not reach the minimum");
  inst.tail = std::move(tr.solution);
  inst.t_deep = tr.t_event;
  {
    auto h = [&](double t) { return inst.tail(t).norm() - inst.eps_trunc; };
    boost::uintmax_t it = 200;
    auto btol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)); };
    const auto br = boost::math::tools::toms748_solve(h, inst.t_deep, inst.t_join, btol, it);
    inst.t_trunc = 0.5 * (br.first + br.second);
  }

  // arrival direction: alignment of the approach with the lambda1 axis
  const Vec2 z_tr = inst.tail(inst.t_trunc);
  inst.arrival_alignment = std::abs(z_tr[0]) / z_tr.norm();
  inst.arrival_direction_ok = inst.arrival_alignment > 0.99;

  // curvature |x' x x''| / |x'|^3 = |xi x grad V / 2| / |xi|^3
  double kmax = 0.0;
  const auto& ts = inst.core.times();
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    for (double f : {0.0, 0.5}) {
      const PhasePoint p = inst.at(ts[i] + f * (ts[i + 1] - ts[i]));
      const Vec2 acc = 0.5 * pot.eval(p.x).gradient;
      const double n = p.xi.norm();
      if (n > 0) kmax = std::max(kmax, std::abs(p.xi[0] * acc[1] - p.xi[1] * acc[0]) / (n * n * n));
    }
  }
  inst.curvature_max = kmax;

  const SigmaFit sf = fit_sigma(inst, inst.t_trunc, inst.t_trunc + 1.0 / w.lambda1);
  inst.sigma = sf.sigma;
  return inst;
}

SigmaFit fit_sigma(const Instanton& inst, double t_lo, double t_hi, int samples) {
  const double l1 = inst.wells.left.lambda1;
  Eigen::MatrixXd A(samples, 2);
  VectorXd b(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (samples - 1);
    const Vec2 z = inst.left_frame(t);
    A(i, 0) = 1.0;
    A(i, 1) = std::exp(l1 * (t - t_hi));
    b[i] = std::abs(z[0]) * std::exp(-l1 * t);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  SigmaFit r;
  r.sigma = coef[0];
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  r.relative_slope = std::abs(coef[1]) * (1.0 - std::exp(l1 * (t_lo - t_hi))) / std::abs(coef[0]);
  return r;
}

double truncation_time(const PotentialSpec& pot, const Instanton& inst, double E) {
  if (!(E > 0.0)) throw Error(ErrorCode::EnergyNonPositive, "E must be positive");
  auto vpath = [&](double t) {
    if (t < inst.t_join) return inst.series.potential_taylor()(inst.left_frame(t));
    return pot.value(inst.at(t).x);
  };
  const double vmax = vpath(0.0);
  if (E >= vmax) throw Error(ErrorCode::NoCrossing, "E is above the maximum of V along the instanton");
  if (E <= vpath(inst.t_deep)) throw Error(ErrorCode::NoCrossing, "E is below the resolved tail of the instanton");
  auto h = [&](double t) { return vpath(t) - E; };
  boost::uintmax_t it = 300;
  auto btol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)); };
  const auto br = boost::math::tools::toms748_solve(h, inst.t_deep, 0.0, btol, it);
  return -2.0 * 0.5 * (br.first + br.second);
}

// ---------------------------------------------------------------------------
// libration

PhasePoint Libration::at(double t) const {
  const double period = 4.0 * tau;
  t = std::fmod(t, period);
  if (t < 0) t += period;
  if (t <= tau) return unpack(quarter(t));
  if (t <= 2.0 * tau) {
    PhasePoint p = at(2.0 * tau - t);
    p.x[0] = -p.x[0];
    p.xi[1] = -p.xi[1];
    return p;
  }
  PhasePoint p = at(4.0 * tau - t);
  p.xi = -p.xi;
  return p;
}

namespace {

Vec2 boundary_point(const PotentialSpec& pot, const HarmonicData& w, double E, double theta) {
  const Vec2 u = w.frame.transpose() * Vec2(std::cos(theta), std::sin(theta));
  auto h = [&](double r) { return pot.value(w.minimum + r * u) - E; };
  double lo = 0.0;
  double hi = 0.25 * std::sqrt(E) / w.lambda2;
  while (h(hi) < 0.0) {
    lo = hi;
    hi *= 1.5;
    if (hi > 4.0 * pot.box_half_width()) throw Error(ErrorCode::EnergyAboveBarrier, "ray never reaches V = E");
  }
  boost::uintmax_t it = 200;
  auto btol = [](double x, double y) { return std::abs(x - y) <= 1e-16 * std::max(std::abs(x), std::abs(y)); };
  const auto br = boost::math::tools::toms748_solve(h, lo, hi, btol, it);
  return w.minimum + 0.5 * (br.first + br.second) * u;
}

double instanton_direction(const PotentialSpec& pot, const Instanton& inst, double E) {
  double te;
  try {
    te = -0.5 * truncation_time(pot, inst, E);
  } catch (const Error&) {
    return 0.0;
  }
  const Vec2 z = inst.left_frame(te);
  return std::atan2(z[1], z[0]);
}

}  // namespace

Libration compute_libration(const PotentialSpec& pot, double E, const LibrationOptions& opt) {
  const Instanton inst = compute_instanton(pot, opt.tol);
  return compute_libration(pot, inst, E, opt);
}

Libration compute_libration(const PotentialSpec& pot, const Instanton& inst, double E, const LibrationOptions& opt) {
  if (!(E > 0.0)) throw Error(ErrorCode::EnergyNonPositive, "E must be positive");
  if (E >= pot.barrier()) throw Error(ErrorCode::EnergyAboveBarrier, "E must lie below the barrier");
  const HarmonicData& w = inst.wells.left;
  const double t_max = 60.0 / w.lambda1;

  auto start_state = [&](double theta) {
    VectorXd y(5);
    y << boundary_point(pot, w, E, theta), 0.0, 0.0, 0.0;
    return y;
  };
  auto fam = [&](double theta) { return shoot(pot, start_state(theta), t_max, opt.tol, false); };

  const double centre = instanton_direction(pot, inst, E);
  const double half = opt.window_degrees * kPi / 180.0;
  std::vector<double> roots;

  if (opt.theta_seed) {
    const double s = *opt.theta_seed;
    for (double d = 1e-4; d <= half; d *= 4.0) {
      const double lo = std::max(s - d, centre - half), hi = std::min(s + d, centre + half);
      Shot a = fam(lo), b = fam(hi);
      if (a.sign != 0.0 && b.sign != 0.0 && a.sign != b.sign) {
        if (auto r = refine_root(fam, lo, hi, std::move(a), std::move(b))) roots.push_back(*r);
        break;
      }
    }
  }
  int found_in_scan = 0;
  if (roots.empty()) {
    std::vector<double> params(opt.scan_points);
    for (int i = 0; i < opt.scan_points; ++i) params[i] = centre - half + 2.0 * half * i / (opt.scan_points - 1);
    roots = bracket_roots(fam, params);
    found_in_scan = static_cast<int>(roots.size());
  }

  Libration best;
  bool have = false;
  int valid = 0;
  for (double th : roots) {
    Shot s = shoot(pot, start_state(th), t_max, opt.tol, true);
    if (!s.crossed) continue;
    const double res = std::abs(s.g);
    if (res > 1e-8) continue;
    ++valid;
    const double S_E = 2.0 * s.y_end[4];
    if (have && S_E >= best.S_E) continue;
    have = true;
    best = Libration{};
    best.E = E;
    best.quarter = std::move(s.run.solution);
    best.tau = s.tau;
    best.T = 4.0 * s.tau;
    best.T_half = 2.0 * s.tau;
    best.S_E = S_E;
    best.theta = th;
    best.yL = Vec2(best.quarter.states().front()[0], best.quarter.states().front()[1]);
    best.yR = reflect(best.yL);
    best.xE = Vec2(0.0, s.y_end[1]);
    best.residual = res;
  }
  if (!have) {
    throw Error(ErrorCode::NoLibration, "no root of the transversality function for E = " + std::to_string(E));
  }
  best.roots_found = std::max(valid, found_in_scan);
  best.multiple_roots_warning = valid > 1;
  if (opt.with_monodromy) monodromy_and_floquet(pot, best, opt.tol);
  return best;
}

FloquetResult monodromy_and_floquet(const PotentialSpec& pot, Libration& lib, double tol) {
  OdeOptions o = options_for(tol);
  VectorXd y0(21);
  y0.setZero();
  y0.head<2>() = lib.yL;
  for (int i = 0; i < 4; ++i) y0[5 + 5 * i] = 1.0;
  const OdeResult r = integrate(hamiltonian_rhs(pot, true, true), 0.0, y0, lib.tau, o);
  const VectorXd& yend = r.solution.states().back();
  Mat4 F;
  for (int c = 0; c < 4; ++c)
    for (int rr = 0; rr < 4; ++rr) F(rr, c) = yend[5 + 4 * c + rr];

  Mat4 G = Vec4(-1, 1, 1, -1).asDiagonal();
  Mat4 TR = Vec4(1, 1, -1, -1).asDiagonal();
  // symplectic inverse -J A^T J: exact in structure, no loss to conditioning
  Mat4 J = Mat4::Zero();
  J.block<2, 2>(0, 2) = Mat2::Identity();
  J.block<2, 2>(2, 0) = -Mat2::Identity();
  auto sinv = [&J](const Mat4& A) -> Mat4 { return -J * A.transpose() * J; };
  const Mat4 H = G * sinv(F) * G * F;
  const Mat4 M = TR * sinv(H) * TR * H;

  FloquetResult fr;
  fr.M = M;
  Eigen::EigenSolver<Mat4> es(M);
  fr.eigenvalues = es.eigenvalues();
  double rho = 0.0;
  for (int i = 0; i < 4; ++i) rho = std::max(rho, std::abs(fr.eigenvalues[i]));
  if (rho <= 1.0 + 1e-6) throw Error(ErrorCode::NonHyperbolic, "spectral radius of the monodromy is 1");
  fr.beta = std::log(rho) / lib.T;
  lib.quarter_map = F;
  lib.monodromy = M;
  lib.beta = fr.beta;
  return fr;
}

std::vector<ScanRow> libration_scan(const PotentialSpec& pot, const std::vector<double>& E_grid, double tol,
                                    int jobs) {
  if (E_grid.empty()) return {};
  const Instanton inst = compute_instanton(pot, tol);
  return libration_scan(pot, inst, E_grid, tol, jobs);
}

namespace {

ScanRow row_of(const Libration& l) {
  return ScanRow{l.E, l.T, l.S_E, l.beta, l.xE, l.yL, l.yR, l.theta};
}

}  // namespace

std::vector<ScanRow> libration_scan(const PotentialSpec& pot, const Instanton& inst, const std::vector<double>& E_grid,
                                    double tol, int jobs) {
  std::vector<ScanRow> rows(E_grid.size());
  if (E_grid.empty()) return rows;
  if (!std::is_sorted(E_grid.begin(), E_grid.end())) throw Error(ErrorCode::InvalidArgument, "E grid must be sorted");
  auto solve = [&](std::size_t i, std::optional<double> seed) {
    LibrationOptions o;
    o.tol = tol;
    o.theta_seed = seed;
    try {
      return compute_libration(pot, inst, E_grid[i], o);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " [E = " + std::to_string(E_grid[i]) + "]");
    }
  };
  if (jobs <= 1) {
    std::optional<double> seed;
    for (std::size_t i = 0; i < E_grid.size(); ++i) {
      const Libration l = solve(i, seed);
      seed = l.theta;
      rows[i] = row_of(l);
    }
    return rows;
  }
  // independent seeding: every point runs its own window scan
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(jobs));
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      try {
        for (std::size_t i = static_cast<std::size_t>(j); i < E_grid.size(); i += static_cast<std::size_t>(jobs)) {
          rows[i] = row_of(solve(i, std::nullopt));
        }
      } catch (...) {
        errs[static_cast<std::size_t>(j)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace tunnel
