#include <doctest.h>

#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/formulas.hpp"

using namespace tunnel;

TEST_SUITE_BEGIN("formulas");

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

PotentialSpec separable(double omega = 3.0) {
  return PotentialSpec(Family::SeparableQuartic, Coefficients{1.0, 1.0, omega, 0.0, 0.0});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::InvalidArgument;
}

struct SeparableFixture {
  PotentialSpec pot = separable();
  Instanton inst = compute_instanton(pot);
  WkbConstants w = compute_wkb(pot, inst);
  ActionTable table = build_action_table(pot, inst, default_energy_grid(pot));
};

const SeparableFixture& sep() {
  static const SeparableFixture f;
  return f;
}

}  // namespace

TEST_CASE("b_m coefficients") {
  CHECK(b_coeff(0) == doctest::Approx(std::sqrt(kPi / std::exp(1.0))).epsilon(1e-15));
  // Stirling: b_m -> 1
  CHECK(b_coeff(400) == doctest::Approx(1.0).epsilon(2e-4));
  for (int m = 1; m < 30; ++m) {
    const double direct = std::sqrt(kPi) * std::pow(2.0 * m + 1, m + 0.5) /
                          (std::pow(2.0, m) * std::tgamma(m + 1.0) * std::exp(m + 0.5));
    CHECK(b_coeff(m) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(b_coeff(-1), Error);
}

TEST_CASE("1-D quartic action, period and turning points against quadrature") {
  const Potential1D q = quartic_1d();
  boost::math::quadrature::tanh_sinh<double> ts;
  CHECK(barrier_action_1d(q, 1e-8) == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  for (double E : {0.01, 0.1, 0.4}) {
    const TurningPoints tp = turning_points(q, E);
    CHECK(tp.inner == doctest::Approx(std::sqrt(1 - std::sqrt(E))).epsilon(1e-13));
    CHECK(tp.outer == doctest::Approx(std::sqrt(1 + std::sqrt(E))).epsilon(1e-13));
    auto v = [](double x) { return (x * x - 1) * (x * x - 1); };
    const double S = 2 * ts.integrate([&](double x) { return std::sqrt(std::max(0.0, v(x) - E)); }, 0.0, tp.inner);
    const double T = 2 * ts.integrate([&](double x) { return 1.0 / std::sqrt(std::max(1e-300, E - v(x))); },
                                      tp.inner, tp.outer);
    CHECK(barrier_action_1d(q, E) == doctest::Approx(S).epsilon(1e-10));
    CHECK(well_period_1d(q, E) == doctest::Approx(T).epsilon(1e-7));
  }
  // small oscillations at frequency lambda
  CHECK(well_period_1d(q, 1e-8) == doctest::Approx(2 * kPi / q.lambda).epsilon(1e-6));
  CHECK(code_of([&] { turning_points(q, 1e-14); }) == ErrorCode::TurningPointDegeneracy);
}

TEST_CASE("1-D estimates: structure and error classes") {
  const Potential1D q = quartic_1d();
  const double h = 0.03;
  const SplittingEstimate g = ground_splitting_1d(q, h);
  const SplittingEstimate e0 = excited_splitting_1d(q, 0, h);
  CHECK(g.value == doctest::Approx(e0.value).epsilon(1e-14));
  CHECK(g.value == doctest::Approx(g.prefactor * std::exp(-g.exponent)).epsilon(1e-14));
  CHECK(g.energy == doctest::Approx(h * q.lambda));
  CHECK(g.exponent == doctest::Approx(barrier_action_1d(q, g.energy) / h).epsilon(1e-13));
  const SplittingEstimate ll = ll_splitting_1d(q, 0.1, h);
  CHECK(ll.exponent == doctest::Approx(barrier_action_1d(q, 0.1) / h).epsilon(1e-13));

  CHECK(code_of([&] { excited_splitting_1d(q, 5, h); }) == ErrorCode::EnergyOutOfRegime);
  CHECK_NOTHROW(excited_splitting_1d(q, 5, h, false));
  CHECK(code_of([&] { ground_splitting_1d(harmonic_1d(1.0), h); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { ground_splitting_1d(q, -h); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { ll_splitting_1d(q, 1.2, h); }) != ErrorCode::ConfigError);
}

TEST_CASE("slice of a separable potential is the 1-D quartic") {
  const Potential1D s = slice_x1(separable());
  const Potential1D q = quartic_1d();
  for (double x : {-1.3, 0.2, 0.9}) CHECK(s.v(x) == doctest::Approx(q.v(x)));
  CHECK(s.lambda == doctest::Approx(q.lambda));
  CHECK_THROWS_AS(slice_x1(PotentialSpec(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3})), Error);
}

TEST_CASE("action table: interpolation, small-energy branch and range") {
  const SeparableFixture& f = sep();
  const Potential1D q = quartic_1d();
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double E : {0.01, 0.05, 0.3}) {
    const double xt = turning_points(q, E).inner;
    const double T = 2 * ts.integrate([&](double x) { return 1.0 / std::sqrt(std::max(1e-300, q.v(x) - E)); }, -xt, xt);
    CHECK(f.table.S_at(E) == doctest::Approx(barrier_action_1d(q, E)).epsilon(1e-5));
    CHECK(f.table.beta_at(E) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(f.table.T_at(E) == doctest::Approx(T).epsilon(1e-4));
  }
  const double lo = f.table.E_min() / 4;
  CHECK(f.table.S_at(lo) == doctest::Approx(small_energy_action(f.pot, f.inst, lo)).epsilon(1e-14));
  CHECK(code_of([&] { f.table.S_at(2.0 * f.table.E_max()); }) == ErrorCode::NoBracket);
  CHECK(f.table.digest() == build_action_table(f.pot, f.inst, default_energy_grid(f.pot)).digest());
}

TEST_CASE("energy equation with constant transverse rate") {
  const SeparableFixture& f = sep();
  for (int m = 0; m < 3; ++m) {
    const double h = 0.02;
    const Eq7Solution s = solve_energy_eq7(f.table, m, h);
    // beta = omega: E = h lambda1 (1 + 2m)
    CHECK(s.E_tilde == doctest::Approx(2.0 * h * (1 + 2 * m)).epsilon(1e-6));
    CHECK(std::abs(s.residual) < 1e-12);
    CHECK_FALSE(s.non_monotone);
  }
}

TEST_CASE("instanton prefactor estimate in closed form for the separable constants") {
  const SeparableFixture& f = sep();
  const double h = 0.04;
  const SplittingEstimate e = formula9_splitting(f.pot, 0, h, f.w);
  // 2^2 sqrt(h) (l1 l2)^{1/2} J^2 P0 / sqrt(pi D) with l = (2, 3), J = 2, P0 = 1, D = 3
  CHECK(e.prefactor == doctest::Approx(16.0 * std::sqrt(2.0 * h / kPi)).epsilon(1e-6));
  CHECK(e.exponent == doctest::Approx(4.0 / 3.0 / h).epsilon(1e-10));
  WkbConstants w2 = f.w;
  w2.sigma *= 2.0;
  for (int m = 0; m < 4; ++m)
    CHECK(formula9_splitting(f.pot, m, h, w2).prefactor / formula9_splitting(f.pot, m, h, f.w).prefactor ==
          doctest::Approx(std::pow(4.0, m)).epsilon(1e-12));
}

TEST_CASE("libration prefactor estimate, single and doubled") {
  const SeparableFixture& f = sep();
  const double h = 0.03;
  for (int m = 0; m < 2; ++m) {
    const SplittingEstimate a = formula11_splitting(f.table, m, h, f.w, 1);
    const SplittingEstimate b = formula11_splitting(f.table, m, h, f.w, 2);
    CHECK(b.value == doctest::Approx(2.0 * a.value).epsilon(1e-14));
    CHECK(a.energy == doctest::Approx(2.0 * h * (1 + 2 * m)));
    CHECK(a.prefactor == doctest::Approx(b_coeff(m) * 2.0 * h / kPi).epsilon(1e-5));
  }
  CHECK_THROWS_AS(formula11_splitting(f.table, 0, h, f.w, 3), Error);
}

TEST_CASE("theorem1 estimate requires the gap condition") {
  const SeparableFixture& f = sep();
  CHECK(code_of([&] { theorem1_splitting(f.table, 0, 0.05); }) == ErrorCode::AssumptionViolated);

  const PotentialSpec p = separable(5.0);
  const Instanton in = compute_instanton(p);
  const ActionTable t = build_action_table(p, in, default_energy_grid(p));
  const Potential1D q = quartic_1d();
  for (int m = 0; m < 2; ++m) {
    const SplittingEstimate th = theorem1_splitting(t, m, 0.02);
    const SplittingEstimate ex = excited_splitting_1d(q, m, 0.02);
    CHECK(th.value == doctest::Approx(ex.value).epsilon(1e-7));
  }
}

TEST_CASE("input digests identify the inputs") {
  const SeparableFixture& f = sep();
  const auto a = formula11_splitting(f.table, 0, 0.03, f.w, 2);
  const auto b = formula11_splitting(f.table, 0, 0.03, f.w, 2);
  const auto c = formula11_splitting(f.table, 0, 0.031, f.w, 2);
  CHECK(a.inputs_digest == b.inputs_digest);
  CHECK(a.inputs_digest != c.inputs_digest);
  CHECK(a.inputs_digest.size() == 64);
}

TEST_CASE("separable Floquet rate needs no correction") {
  const PotentialSpec p = separable(5.0);
  const Instanton in = compute_instanton(p);
  const WkbConstants w = compute_wkb(p, in);
  for (double frac : {0.1, 0.02}) {
    const Prop2Result r = prop2_check(p, in, frac * p.barrier(), w);
    CHECK(r.beta_direct == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(r.gap < 1e-6);
  }
}

TEST_CASE("action expansion remainder shrinks faster than E") {
  const PotentialSpec p(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3});
  const Instanton in = compute_instanton(p);
  double prev = INFINITY;
  for (double E : {0.08, 0.04, 0.02, 0.01}) {
    const ActionRemainder r = action_expansion_check(p, in, E);
    CHECK(std::abs(r.r_over_E) < prev);
    prev = std::abs(r.r_over_E);
    CHECK(r.r == doctest::Approx(r.S_E - in.S0 + E / (2 * in.wells.left.lambda1) * (1 + 2 * std::log(2.0)) +
                                 E * r.T_E / 2));
  }
}

TEST_SUITE_END();
