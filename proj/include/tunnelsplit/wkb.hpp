#pragma once

#include <functional>
#include <vector>

#include "tunnelsplit/dynamics.hpp"

namespace tunnel {

/// Hessian of the left-well phase S_L along the left half of the instanton,
/// global coordinates. Samples cover [t_deep, 0]; the right half is
/// M_R(t) = P M_L(-t) P with P = diag(-1, 1).
struct RiccatiSamples {
  std::vector<double> t;
  std::vector<Mat2> M;
  DenseSolution core;  // (M11, M12, M22, int (l1 + l2 - tr M)/2 dt) on [t_join, 0]
  double t_join = 0.0;
  double t_deep = 0.0;

  Mat2 at(double time) const;  // any time in [t_deep, -t_deep]
};

/// dM/dt = Hess V(x(t)) / 2 - M^2 from M(t0) = M0; throws RiccatiBlowup if ||M|| > 1e6.
DenseSolution riccati_integrate(const std::function<Mat2(double)>& half_hessian, const Mat2& M0, double t0,
                                double t1, double tol = 1e-10);

RiccatiSamples riccati_hessian(const Instanton& inst, const PotentialSpec& pot, double tol = 1e-10);

/// Independent backward integration of Hess S_R on the right branch,
/// dN/dt = N^2 - Hess V / 2, from the right end to the crossing; returns
/// max ||N(t) - P M_L(-t) P|| on the sample times.
double riccati_left_right_gap(const Instanton& inst, const PotentialSpec& pot, const RiccatiSamples& M,
                              double tol = 1e-10);

struct JayResult {
  std::vector<double> t;    // t >= 0 on the right branch
  std::vector<double> J_t;  // J(t) = exp int_0^t (l1 + l2 - tr M_R) / 2
  double J = 0.0;           // J(+infinity)
  double tail_integrand = 0.0;
};

JayResult jay_factor(const Instanton& inst, const RiccatiSamples& M);

SigmaFit sigma_extract(const Instanton& inst, double window = 0.0);

struct CrossingConstants {
  Vec2 x0 = Vec2::Zero();
  double P0 = 0.0;
  double D = 0.0;
};

CrossingConstants crossing_constants(const Instanton& inst, const RiccatiSamples& M);

struct WkbConstants {
  double lambda1 = 0.0, lambda2 = 0.0;
  double S0 = 0.0;
  double J = 0.0;
  double sigma = 0.0;
  Vec2 x0 = Vec2::Zero();
  double P0 = 0.0;
  double D = 0.0;
  double T_const = 0.0;
};

double tee_constant(const WkbConstants& w);

WkbConstants compute_wkb(const PotentialSpec& pot, const Instanton& inst, double tol = 1e-10);

/// rho = sigma sqrt(lambda1 / h) exp(-lambda1 T_E / 2) at E = h (2m + 1) lambda1.
double rho(const PotentialSpec& pot, const WkbConstants& w, const Instanton& inst, int m, double h);

struct TransportAmplitude {
  double b0 = 0.0;
  double variation = 0.0;  // relative spread over the plateau window
  std::vector<double> t, b;
};

/// b(0) from the harmonic matching b(t) ~ N_m z1(t)^m on the right branch,
/// N_m = (l1^{1+2m} l2)^{1/4} 2^{m/2} / sqrt(m! pi).
TransportAmplitude transport_amplitude(const Instanton& inst, const RiccatiSamples& M, int m, double window = 0.0);

}  // namespace tunnel
