#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tunnelsplit/ode.hpp"
#include "tunnelsplit/potential.hpp"
#include "tunnelsplit/series.hpp"

namespace tunnel {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// Clock: dx/dt = xi, dxi/dt = grad V / 2; e = |xi|^2 - V is conserved and the
// equilibrium exponents are +-lambda_j.

struct PhasePoint {
  Vec2 x = Vec2::Zero();
  Vec2 xi = Vec2::Zero();
};

Vec4 pack(const PhasePoint& p);
PhasePoint unpack(const Eigen::VectorXd& y);
double energy(const PotentialSpec& pot, const PhasePoint& p);

struct TrajectorySegment {
  DenseSolution dense;  // state (x1, x2, xi1, xi2)
  double energy = 0.0;  // value at the start

  double t_begin() const { return dense.t_begin(); }
  double t_end() const { return dense.t_end(); }
  PhasePoint at(double t) const { return unpack(dense(t)); }
  /// max |e(t) - e(0)| over the step nodes and midpoints.
  double max_energy_drift(const PotentialSpec& pot) const;
};

/// Integrates the inverted-potential flow for `duration` (negative: backward).
TrajectorySegment flow(const PotentialSpec& pot, const PhasePoint& start, double duration, double tol = 1e-10);

/// Heteroclinic orbit a_L -> a_R with the time origin at its x1 = 0 crossing.
/// The left half is stored; the right half follows from
/// x(t) = R x(-t), xi(t) = (xi1(-t), -xi2(-t)).
struct Instanton {
  WellPair wells;
  EikonalSeries series;  // unstable manifold of a_L
  DenseSolution core;    // (x, xi, action) on [t_join, 0]
  DenseSolution tail;    // z (left frame) on [t_deep, t_join], reduced flow dz/dt = grad S
  double t_join = 0.0;
  double t_trunc = 0.0;  // |z| = eps_trunc
  double t_deep = 0.0;   // end of the series tail
  double eps_trunc = 0.0;
  double S0 = 0.0;  // action of one traversal L -> R
  Vec2 x0 = Vec2::Zero();
  double P0 = 0.0;  // xi1 at the crossing
  double sigma = 0.0;
  bool arrival_direction_ok = false;
  double arrival_alignment = 0.0;  // |cos| between the approach and the lambda1 axis
  double curvature_max = 0.0;
  double match_residual = 0.0;  // |xi2| at the crossing
  double shooting_parameter = 0.0;
  double tol = 0.0;

  /// State at any t in [t_deep, -t_deep].
  PhasePoint at(double t) const;
  /// Left-frame coordinates z = frame (x - a_L), t <= 0, full relative precision in the tail.
  Vec2 left_frame(double t) const;
  double t_end() const { return -t_trunc; }
  double t_start() const { return t_trunc; }
};

Instanton compute_instanton(const PotentialSpec& pot, double tol = 1e-10, double eps_trunc_factor = 1e-6);

/// Periodic brake orbit at energy -E. The quarter orbit from y_L (at rest) to
/// the perpendicular x1 = 0 crossing is stored; the rest follows by symmetry.
struct Libration {
  double E = 0.0;
  DenseSolution quarter;  // (x, xi, action) on [0, tau]
  double tau = 0.0;
  double T = 0.0;
  double T_half = 0.0;
  double S_E = 0.0;
  Vec2 yL = Vec2::Zero(), yR = Vec2::Zero(), xE = Vec2::Zero();
  double theta = 0.0;  // ray angle of y_L around a_L
  Mat4 quarter_map = Mat4::Identity();
  Mat4 monodromy = Mat4::Identity();
  double beta = 0.0;
  double residual = 0.0;  // |xi2| / |xi| at the crossing
  int roots_found = 0;
  bool multiple_roots_warning = false;

  PhasePoint at(double t) const;
};

struct LibrationOptions {
  double tol = 1e-10;
  std::optional<double> theta_seed;
  bool with_monodromy = true;
  double window_degrees = 60.0;
  int scan_points = 121;
};

Libration compute_libration(const PotentialSpec& pot, double E, const LibrationOptions& opt = {});
Libration compute_libration(const PotentialSpec& pot, const Instanton& inst, double E,
                            const LibrationOptions& opt = {});

struct FloquetResult {
  Mat4 M;
  double beta = 0.0;
  Eigen::Vector4cd eigenvalues;
};

/// Monodromy over one full period assembled from the quarter map by the
/// reversing symmetries; beta = log(spectral radius) / T.
FloquetResult monodromy_and_floquet(const PotentialSpec& pot, Libration& lib, double tol = 1e-10);

struct ScanRow {
  double E, T, S_E, beta;
  Vec2 xE, yL, yR;
  double theta;
};

std::vector<ScanRow> libration_scan(const PotentialSpec& pot, const std::vector<double>& E_grid,
                                    double tol = 1e-10, int jobs = 1);
std::vector<ScanRow> libration_scan(const PotentialSpec& pot, const Instanton& inst,
                                    const std::vector<double>& E_grid, double tol = 1e-10, int jobs = 1);

/// Time along the instanton between its two crossings of {V = E}.
double truncation_time(const PotentialSpec& pot, const Instanton& inst, double E);

/// sigma = lim e^{-lambda1 t} |z1(t)| on the left branch (equivalently the right
/// branch in the right frame), fitted as sigma + c e^{lambda1 t} on a window.
struct SigmaFit {
  double sigma = 0.0;
  double relative_slope = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
};
SigmaFit fit_sigma(const Instanton& inst, double t_lo, double t_hi, int samples = 64);

}  // namespace tunnel
