#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelsplit/dynamics.hpp"
#include "tunnelsplit/potential.hpp"
#include "tunnelsplit/wkb.hpp"

namespace tunnel {

/// b_m = sqrt(pi) (2m+1)^{m+1/2} / (2^m m! e^{m+1/2}), evaluated in log space.
double b_coeff(int m);
double log_b_coeff(int m);

// ---------------------------------------------------------------------------
// 1-D

/// Even double well with v(0) = barrier > 0 the local maximum, minima at
/// +-a with v(+-a) = 0, v increasing on (a, infinity).
struct Potential1D {
  std::function<double(double)> v, dv;
  double a = 0.0;
  double barrier = 0.0;
  double lambda = 0.0;  // v = lambda^2 (x - a)^2 + ...
  std::string canonical;
};

Potential1D quartic_1d(double alpha = 1.0, double a = 1.0);
/// omega^2 x^2: a single well, rejected by every splitting formula.
Potential1D harmonic_1d(double omega);
/// v(x1) = V(x1, 0); meaningful for potentials with d = 0.
Potential1D slice_x1(const PotentialSpec& pot);

struct TurningPoints {
  double inner = 0.0, outer = 0.0;  // 0 < inner < a < outer
};

/// Throws TurningPointDegeneracy if v' is numerically zero at a turning point.
TurningPoints turning_points(const Potential1D& p, double E);
/// 2 int_0^{x_t} sqrt(v - E) dx (the whole barrier between the inner turning points).
double barrier_action_1d(const Potential1D& p, double E);
/// 2 int_{inner}^{outer} dx / sqrt(E - v).
double well_period_1d(const Potential1D& p, double E);

enum class Method { LL, Ground, Excited1D, Theorem1, Formula9, Formula11, Formula11x2 };

std::string_view to_string(Method m) noexcept;

struct SplittingEstimate {
  Method method = Method::LL;
  int m = 0;
  double hbar = 0.0;
  double energy = 0.0;    // energy at which the action is taken
  double exponent = 0.0;  // S / hbar
  double prefactor = 0.0;
  double value = 0.0;     // prefactor * exp(-exponent)
  std::string inputs_digest;
};

SplittingEstimate ll_splitting_1d(const Potential1D& p, double E, double hbar);
SplittingEstimate excited_splitting_1d(const Potential1D& p, int m, double hbar, bool enforce_regime = true);
SplittingEstimate ground_splitting_1d(const Potential1D& p, double hbar);

// ---------------------------------------------------------------------------
// 2-D

/// Libration data on an energy grid with monotone cubic interpolation of
/// S_E, beta and T. Below the smallest node S_E follows the small-energy
/// expansion built on the instanton.
class ActionTable {
 public:
  ActionTable(const PotentialSpec& pot, const Instanton& inst, std::vector<ScanRow> rows);

  double S_at(double E) const;
  double beta_at(double E) const;
  double T_at(double E) const;
  double E_min() const { return E_.front(); }
  double E_max() const { return E_.back(); }
  const std::vector<double>& energies() const { return E_; }
  const std::vector<ScanRow>& rows() const { return rows_; }
  const PotentialSpec& potential() const { return pot_; }
  const Instanton& instanton() const { return *inst_; }
  std::string digest() const;

 private:
  struct Interp;
  PotentialSpec pot_;
  std::shared_ptr<const Instanton> inst_;
  std::vector<ScanRow> rows_;
  std::vector<double> E_;
  std::shared_ptr<const Interp> S_, beta_, T_;
};

/// Geometric grid from lo_frac to hi_frac of the barrier.
std::vector<double> default_energy_grid(const PotentialSpec& pot, int n = 36, double lo_frac = 2e-3,
                                        double hi_frac = 0.9);

ActionTable build_action_table(const PotentialSpec& pot, const Instanton& inst, const std::vector<double>& E_grid,
                               double tol = 1e-10, int jobs = 1);

/// S0 - (E / 2 lambda1)(1 + 2 log 2) - E T_E / 2, with T_E the time the
/// instanton spends above the level V = E.
double small_energy_action(const PotentialSpec& pot, const Instanton& inst, double E);

SplittingEstimate ground_splitting(const ActionTable& table, double hbar);
/// Direct libration at E = lambda1 hbar.
SplittingEstimate ground_splitting(const PotentialSpec& pot, const Instanton& inst, double hbar);

struct Eq7Solution {
  double E_tilde = 0.0;
  double residual = 0.0;  // G(E~)
  bool non_monotone = false;
  double E_lo = 0.0, E_hi = 0.0;
};

/// Root of G(E) = E + hbar beta(E) - hbar (lambda1 (1 + 2m) + lambda2).
Eq7Solution solve_energy_eq7(const ActionTable& table, int m, double hbar);

struct Theorem1Options {
  bool direct_action = true;  // libration solve at E~ instead of interpolation
  double tol = 1e-10;
};

SplittingEstimate theorem1_splitting(const ActionTable& table, int m, double hbar, const Theorem1Options& opt = {});

SplittingEstimate formula9_splitting(const PotentialSpec& pot, int m, double hbar, const WkbConstants& w);

/// factor * b_m (hbar lambda1 / pi) T e^{-S_E / hbar} at E = hbar (1 + 2m) lambda1;
/// factor 1 gives Formula11, factor 2 Formula11x2.
SplittingEstimate formula11_splitting(const ActionTable& table, int m, double hbar, const WkbConstants& w,
                                      int factor);

struct ActionRemainder {
  double E = 0.0;
  double S_E = 0.0;
  double T_E = 0.0;
  double r = 0.0;              // S_E - S0 + (E / 2 lambda1)(1 + 2 log 2) + E T_E / 2
  double r_over_E = 0.0;
  double r_printed = 0.0;      // S_E - S0 - (E / 2 lambda1)(1 + log 2) - E T_E
  double r_printed_over_E = 0.0;
};

/// S_E from a direct libration solve.
ActionRemainder action_expansion_check(const PotentialSpec& pot, const Instanton& inst, double E,
                                       double tol = 1e-10);

struct Prop2Result {
  double E = 0.0;
  double T = 0.0;  // full libration period
  double beta_direct = 0.0;
  double beta_formula = 0.0;
  double gap = 0.0;
};

Prop2Result prop2_check(const PotentialSpec& pot, const Instanton& inst, double E, const WkbConstants& w,
                        double tol = 1e-10);

}  // namespace tunnel
