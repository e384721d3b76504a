#include "tunnelsplit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

using Eigen::VectorXd;
using Coeffs = Eigen::Matrix<double, Eigen::Dynamic, 5>;

void DenseSolution::clear() {
  times_.clear();
  states_.clear();
  coeffs_.clear();
}

void DenseSolution::push_step(double t0, double t1, const VectorXd& y0, const VectorXd& y1, Coeffs coeffs) {
  if (times_.empty()) {
    times_.push_back(t0);
    states_.push_back(y0);
  }
  times_.push_back(t1);
  states_.push_back(y1);
  coeffs_.push_back(std::move(coeffs));
}

std::size_t DenseSolution::segment(double t) const {
  const bool forward = times_.back() >= times_.front();
  std::size_t i;
  if (forward) {
    i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  } else {
    i = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>()) - times_.begin());
  }
  if (i == 0) i = 1;
  if (i >= times_.size()) i = times_.size() - 1;
  return i - 1;
}

VectorXd DenseSolution::operator()(double t) const {
  const std::size_t i = segment(t);
  const double h = times_[i + 1] - times_[i];
  if (h == 0.0) return states_[i];
  const double th = (t - times_[i]) / h;
  const double th1 = 1.0 - th;
  const Coeffs& r = coeffs_[i];
  return r.col(0) + th * (r.col(1) + th1 * (r.col(2) + th * (r.col(3) + th1 * r.col(4))));
}

void DenseSolution::truncate(double t, const VectorXd& y) {
  const std::size_t i = segment(t);
  // the interpolant of segment i stays valid on [times_[i], t]; we only
  // shorten the recorded end point, reparameterizing the polynomial
  const double t0 = times_[i];
  const double h_old = times_[i + 1] - t0;
  const double h_new = t - t0;
  Coeffs& r = coeffs_[i];
  if (h_new != 0.0 && h_new != h_old) {
    // sample the old interpolant at 5 nodes and refit in the new variable
    const int n = 5;
    Eigen::Matrix<double, 5, 5> basis;
    Eigen::Matrix<double, Eigen::Dynamic, 5> samples(r.rows(), 5);
    for (int k = 0; k < n; ++k) {
      const double s = static_cast<double>(k) / (n - 1);
      const double th_old = s * h_new / h_old;
      const double th1o = 1.0 - th_old;
      samples.col(k) = r.col(0) + th_old * (r.col(1) + th1o * (r.col(2) + th_old * (r.col(3) + th1o * r.col(4))));
      const double th1 = 1.0 - s;
      // value = c0 + s(c1 + (1-s)(c2 + s(c3 + (1-s)c4)))
      basis(k, 0) = 1.0;
      basis(k, 1) = s;
      basis(k, 2) = s * th1;
      basis(k, 3) = s * th1 * s;
      basis(k, 4) = s * th1 * s * th1;
    }
    const Eigen::Matrix<double, 5, 5> inv = basis.inverse();
    r = samples * inv.transpose();
  }
  times_.resize(i + 2);
  states_.resize(i + 2);
  coeffs_.resize(i + 1);
  times_[i + 1] = t;
  states_[i + 1] = y;
}

void DenseSolution::shift_time(double dt) {
  for (double& t : times_) t += dt;
}

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const VectorXd& err, const VectorXd& y0, const VectorXd& y1, const OdeOptions& opt) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(err.size()));
}

double initial_step(const Rhs& f, double t0, const VectorXd& y0, const VectorXd& k1, double dir,
                    const OdeOptions& opt) {
  VectorXd sc = (opt.atol + opt.rtol * y0.array().abs()).matrix();
  const double dnf = (k1.array() / sc.array()).square().sum() / y0.size();
  const double dny = (y0.array() / sc.array()).square().sum() / y0.size();
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  if (opt.max_step > 0) h = std::min(h, opt.max_step);
  VectorXd y1 = y0 + dir * h * k1;
  VectorXd k2(y0.size());
  f(t0 + dir * h, y1, k2);
  const double der2 = std::sqrt(((k2 - k1).array() / sc.array()).square().sum() / y0.size()) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * h, h1);
  if (opt.max_step > 0) h = std::min(h, opt.max_step);
  return h;
}

}  // namespace

OdeResult integrate(const Rhs& f, double t0, const VectorXd& y0, double t1, const OdeOptions& opt,
                    const std::vector<OdeEvent>& events) {
  OdeResult res;
  const Eigen::Index n = y0.size();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  if (!y0.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite initial state");
  if (opt.guard && !opt.guard(y0)) throw Error(ErrorCode::BlowUp, "initial state outside the admissible box");

  VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  VectorXd y = y0;
  double t = t0;
  f(t, y, k1);
  double h = opt.initial_step > 0 ? opt.initial_step : initial_step(f, t, y, k1, dir, opt);
  constexpr double safe = 0.9, beta = 0.04, fac1 = 0.2, fac2 = 10.0;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;

  std::vector<double> g_prev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t, y);

  if (t0 == t1) {
    res.solution.push_step(t0, t1, y0, y0, Coeffs::Zero(n, 5));
    res.solution.truncate(t1, y0);
    return res;
  }

  while (true) {
    if (res.accepted + res.rejected > opt.max_steps) {
      throw Error(ErrorCode::StepFailure, "maximum number of steps exceeded");
    }
    if (opt.max_step > 0) h = std::min(h, opt.max_step);
    bool final_step = false;
    if ((t + dir * h - t1) * dir >= 0.0) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    if (!final_step && h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::StepFailure, "step size underflow");
    }
    const double hs = dir * h;

    ytmp = y + hs * a21 * k1;
    f(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    f(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tph = final_step ? t1 : t + hs;
    f(tph, ytmp, k6);
    y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(tph, y1, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = y1.allFinite() && k7.allFinite() ? error_norm(err, y, y1, opt)
                                                 : std::numeric_limits<double>::infinity();
    if (!std::isfinite(en)) en = 1e10;
    const double fac11 = std::pow(en, expo1);

    if (en <= 1.0) {
      if (opt.guard && !opt.guard(y1)) {
        throw Error(ErrorCode::BlowUp, "trajectory left the admissible box");
      }
      Coeffs r(n, 5);
      r.col(0) = y;
      r.col(1) = y1 - y;
      r.col(2) = hs * k1 - r.col(1);
      r.col(3) = r.col(1) - hs * k7 - r.col(2);
      r.col(4) = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      res.solution.push_step(t, tph, y, y1, std::move(r));
      ++res.accepted;

      // event detection on the accepted step
      double best_t = std::numeric_limits<double>::quiet_NaN();
      int best_e = -1;
      for (std::size_t e = 0; e < events.size(); ++e) {
        const double g1 = events[e].g(tph, y1);
        const double g0 = g_prev[e];
        g_prev[e] = g1;
        const bool rising = g0 < 0.0 && g1 >= 0.0;
        const bool falling = g0 > 0.0 && g1 <= 0.0;
        if (!((rising && events[e].direction >= 0) || (falling && events[e].direction <= 0))) continue;
        if (!events[e].terminal) continue;
        const DenseSolution& sol = res.solution;
        auto gg = [&](double s) { return events[e].g(s, sol(s)); };
        double te;
        if (g1 == 0.0) {
          te = tph;
        } else {
          double lo = t, hi = tph;
          double glo = g0, ghi = g1;
          if (lo > hi) {
            std::swap(lo, hi);
            std::swap(glo, ghi);
          }
          boost::uintmax_t it = 200;
          auto tol = [](double a, double b) { return std::abs(a - b) <= 4e-16 * std::max(1.0, std::abs(a)); };
          const auto br = boost::math::tools::toms748_solve(gg, lo, hi, glo, ghi, tol, it);
          te = 0.5 * (br.first + br.second);
        }
        if (best_e < 0 || (te - best_t) * dir < 0.0) {
          best_t = te;
          best_e = static_cast<int>(e);
        }
      }
      if (best_e >= 0) {
        const VectorXd ye = res.solution(best_t);
        res.solution.truncate(best_t, ye);
        res.event_fired = true;
        res.event_index = best_e;
        res.t_event = best_t;
        res.y_event = ye;
        return res;
      }

      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
      facold = std::max(en, 1e-4);
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      k1 = k7;
      y = y1;
      t = tph;
      if (final_step) break;
      h = hnew;
    } else {
      h = h / std::min(1.0 / fac1, fac11 / safe);
      last_rejected = true;
      ++res.rejected;
    }
  }
  return res;
}

}  // namespace tunnel
