#include <doctest.h>

#include <cmath>

#include "tunnelsplit/wkb.hpp"

using namespace tunnel;

TEST_SUITE_BEGIN("wkb");

namespace {

PotentialSpec curved() { return PotentialSpec(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3}); }
PotentialSpec separable() { return PotentialSpec(Family::SeparableQuartic, Coefficients{1.0, 1.0, 3.0, 0.0, 0.0}); }

}  // namespace

TEST_CASE("separable constants from the closed-form instanton") {
  // x = tanh t: S_L'' = -2 x, sigma = 2, P0 = 1, transverse Hessian omega
  const PotentialSpec p = separable();
  const Instanton in = compute_instanton(p);
  const RiccatiSamples M = riccati_hessian(in, p);
  for (double t : {-2.0, -0.5, 0.0}) {
    const Mat2 h = M.at(t);
    CHECK(h(0, 0) == doctest::Approx(-2.0 * std::tanh(t)).epsilon(1e-7));
    CHECK(h(1, 1) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(std::abs(h(0, 1)) < 1e-9);
  }
  const WkbConstants w = compute_wkb(p, in);
  // J = exp int_0^inf (2 + 3 - (2 tanh t + 3)) / 2 dt = exp int (1 - tanh t) dt = 2
  CHECK(w.J == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(w.sigma == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(w.P0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.D == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(w.T_const == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Riccati solution is symmetric and consistent across branches") {
  const PotentialSpec p = curved();
  const Instanton in = compute_instanton(p);
  const RiccatiSamples M = riccati_hessian(in, p);
  for (std::size_t k = 0; k < M.M.size(); k += 7) CHECK(std::abs(M.M[k](0, 1) - M.M[k](1, 0)) <= 1e-12);
  CHECK(riccati_left_right_gap(in, p, M) <= 1e-8);
}

TEST_CASE("curved constants are mutually consistent") {
  const PotentialSpec p = curved();
  const Instanton in = compute_instanton(p);
  const WkbConstants w = compute_wkb(p, in);
  CHECK(w.P0 == doctest::Approx(in.P0).epsilon(1e-12));
  CHECK(w.S0 == doctest::Approx(in.S0).epsilon(1e-12));
  CHECK(w.T_const == doctest::Approx(tee_constant(w)).epsilon(1e-15));
  // sigma from a late window of the instanton tail
  const SigmaFit f = fit_sigma(in, in.t_deep * 0.9, in.t_deep * 0.6);
  CHECK(f.sigma == doctest::Approx(w.sigma).epsilon(1e-5));
  CHECK(w.J > 0.0);
  CHECK(w.T_const > 0.0);
}

TEST_CASE("transport amplitude matches the harmonic normalization in the separable case") {
  const PotentialSpec p = separable();
  const Instanton in = compute_instanton(p);
  const RiccatiSamples M = riccati_hessian(in, p);
  const TransportAmplitude a = transport_amplitude(in, M, 0);
  CHECK(a.variation < 1e-4);
  CHECK(a.b0 > 0.0);
}

TEST_CASE("rho at the harmonic level energy") {
  const PotentialSpec p = separable();
  const Instanton in = compute_instanton(p);
  const WkbConstants w = compute_wkb(p, in);
  // rho = sigma sqrt(l1/h) exp(-l1 T_E / 2), T_E = 2 atanh(sqrt(1 - sqrt E))
  const double h = 0.05, E = h * 2.0;
  const double TE = 2.0 * std::atanh(std::sqrt(1.0 - std::sqrt(E)));
  CHECK(rho(p, w, in, 0, h) == doctest::Approx(2.0 * std::sqrt(2.0 / h) * std::exp(-TE)).epsilon(1e-6));
}

TEST_SUITE_END();
