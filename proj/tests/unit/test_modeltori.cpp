#include <doctest.h>

#include <cmath>

#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/modeltori.hpp"

using namespace tunnel;

TEST_SUITE_BEGIN("modeltori");

namespace {

PotentialSpec curved() { return PotentialSpec(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3}); }
PotentialSpec separable() { return PotentialSpec(Family::SeparableQuartic, Coefficients{1.0, 1.0, 3.0, 0.0, 0.0}); }

// antiderivative of sqrt(t^2 - y^2) from y
double agmon_closed(double lambda, double y, double x) {
  const double r = std::sqrt(x * x - y * y);
  return 0.5 * lambda * (x * r - y * y * std::log((x + r) / y));
}

}  // namespace

TEST_CASE("one-dimensional Agmon integral against its antiderivative") {
  for (double y : {0.05, 0.3, 0.9})
    for (double x : {1.0, 1.7})
      CHECK(agmon_component(1.3, y, x) == doctest::Approx(agmon_closed(1.3, y, x)).epsilon(1e-12));
  CHECK(agmon_component(2.0, 0.4, 0.4) == doctest::Approx(0.0));
  CHECK(agmon_component(2.0, 0.4, -1.0) == doctest::Approx(agmon_closed(2.0, 0.4, 1.0)).epsilon(1e-12));
}

TEST_CASE("two-dimensional model distance: closed form and quadrature") {
  const WellPair w = locate_minima(curved());
  const HarmonicData& L = w.left;
  const Vec2 y(0.1, 0.05), x(0.9, -0.3);
  const double F = model_agmon_F(L, y, x);
  CHECK(F == doctest::Approx(agmon_closed(L.lambda1, 0.1, 0.9) + agmon_closed(L.lambda2, 0.05, 0.3)).epsilon(1e-12));
  CHECK(F == doctest::Approx(model_agmon_F_quadrature(L, y, x)).epsilon(1e-9));
  CHECK_THROWS_AS(model_agmon_F(L, y, Vec2(0.05, 1.0)), Error);
}

TEST_CASE("EBK tori carry the harmonic energies") {
  const WellPair w = locate_minima(curved());
  const double h = 0.07;
  for (int k1 = 0; k1 < 3; ++k1)
    for (int k2 = 0; k2 < 2; ++k2) {
      const ModelTorus t = ebk_torus(w.left, {k1, k2}, h);
      CHECK(t.E == doctest::Approx(h * (w.left.lambda1 * (2 * k1 + 1) + w.left.lambda2 * (2 * k2 + 1))).epsilon(1e-14));
      CHECK(std::abs(t.umbilic_frame[0]) == doctest::Approx(std::sqrt(h * (2 * k1 + 1) / w.left.lambda1)));
      CHECK((w.left.from_frame(t.umbilic_frame) - t.umbilic).norm() < 1e-14);
    }
  const auto io = ebk_actions(w.left, {2, 1}, h, false);
  CHECK(io[0] == doctest::Approx(2 * h));
  CHECK(io[1] == doctest::Approx(h));
  CHECK_THROWS_AS(torus_from_actions(w.left, {0.0, 0.0}), Error);
}

TEST_CASE("separable tunnel distance is flat across the caustic strip") {
  const WellPair w = locate_minima(separable());
  const double h = 0.05;
  const ModelTorus L = ebk_torus(w.left, {0, 0}, h), R = ebk_torus(w.right, {0, 0}, h);
  CHECK_THROWS_AS(tunnel_distance(L, R, true), Error);
  const TunnelPath p = tunnel_distance(L, R, false);
  CHECK(p.degenerate);
  const double y1 = std::sqrt(h / 2.0);
  CHECK(p.action == doctest::Approx(2.0 * agmon_closed(2.0, y1, 1.0)).epsilon(1e-10));
}

TEST_CASE("curved tunnel distance has an interior minimum on the symmetry line") {
  const WellPair w = locate_minima(curved());
  const double h = 0.05;
  const ModelTorus L = ebk_torus(w.left, {0, 0}, h), R = ebk_torus(w.right, {0, 0}, h);
  const TunnelPath p = tunnel_distance(L, R);
  CHECK(!p.degenerate);
  CHECK(std::abs(p.x_tilde[0]) < 1e-14);
  CHECK(std::abs(p.gradient) < 1e-7);
  CHECK(p.curvature > 0.0);
  // mirror symmetry of the two wells
  const double phi = model_agmon_F(w.left, w.left.to_frame(L.umbilic), w.left.to_frame(p.x_tilde));
  CHECK(p.action == doctest::Approx(2.0 * phi).epsilon(1e-10));
}

TEST_SUITE_END();
