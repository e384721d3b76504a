#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tunnelsplit/dynamics.hpp"
#include "tunnelsplit/errors.hpp"

using namespace tunnel;

TEST_SUITE_BEGIN("dynamics");

namespace {

PotentialSpec curved() { return PotentialSpec(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3}); }
PotentialSpec separable() { return PotentialSpec(Family::SeparableQuartic, Coefficients{1.0, 1.0, 3.0, 0.0, 0.0}); }

Mat4 J4() {
  Mat4 J = Mat4::Zero();
  J.block<2, 2>(0, 2) = Mat2::Identity();
  J.block<2, 2>(2, 0) = -Mat2::Identity();
  return J;
}

}  // namespace

TEST_CASE("energy is conserved along the inverted flow") {
  const PotentialSpec p = curved();
  PhasePoint s;
  s.x = Vec2(-0.8, 0.1);
  s.xi = Vec2(0.05, -0.02);
  const TrajectorySegment seg = flow(p, s, 0.8, 1e-11);
  CHECK(seg.max_energy_drift(p) <= 1e-9 * std::max(1.0, std::abs(seg.energy)));
}

TEST_CASE("separable instanton against the closed form x1 = tanh t") {
  const Instanton in = compute_instanton(separable());
  CHECK(in.S0 == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  CHECK(in.P0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(in.sigma == doctest::Approx(2.0).epsilon(1e-6));
  for (double t : {-1.0, -0.3, 0.4, 1.2}) {
    const PhasePoint q = in.at(t);
    CHECK(q.x[0] == doctest::Approx(std::tanh(t)).epsilon(1e-8));
    CHECK(std::abs(q.x[1]) < 1e-10);
  }
  CHECK(in.arrival_direction_ok);
}

TEST_CASE("curved instanton action lies between the valley bounds") {
  const PotentialSpec p = curved();
  const Instanton in = compute_instanton(p);
  const double al = 0.25, om2 = 6.25, d = 0.3;
  auto vmin = [&](double x) {
    const double u = x * x - 1.0;
    return al * u * u - d * d * u * u / (4 * om2);
  };
  auto valley = [&](double x) { return -d * (x * x - 1.0) / (2 * om2); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double lower = GK::integrate([&](double x) { return std::sqrt(vmin(x)); }, -1.0, 1.0, 15, 1e-13);
  const double upper = GK::integrate(
      [&](double x) {
        const double y = valley(x), dy = -d * x / om2;
        return std::sqrt(p.value(Vec2(x, y))) * std::sqrt(1 + dy * dy);
      },
      -1.0, 1.0, 15, 1e-13);
  CHECK(in.S0 >= lower - 1e-10);
  CHECK(in.S0 <= upper + 1e-10);
  CHECK(in.S0 == doctest::Approx(0.661987414).epsilon(1e-8));
  CHECK(in.match_residual < 1e-8);
}

TEST_CASE("separable librations against 1-D quadrature") {
  const PotentialSpec p = separable();
  const Instanton in = compute_instanton(p);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double E : {0.02, 0.1, 0.5}) {
    const Libration l = compute_libration(p, in, E);
    const double xt = std::sqrt(1.0 - std::sqrt(E));
    auto gap = [&](double x) { return (x * x - 1) * (x * x - 1) - E; };
    const double S = ts.integrate([&](double x) { return std::sqrt(std::max(0.0, gap(x))); }, -xt, xt);
    const double T = 2.0 * ts.integrate([&](double x) { return 1.0 / std::sqrt(gap(x)); }, -xt, xt);
    CHECK(l.S_E == doctest::Approx(S).epsilon(1e-9));
    CHECK(l.T == doctest::Approx(T).epsilon(1e-8));
    // transverse growth rate is omega
    CHECK(l.beta == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(l.yL[0] == doctest::Approx(-xt).epsilon(1e-10));
  }
}

TEST_CASE("monodromy is symplectic relative to its size") {
  for (const PotentialSpec& p : {separable(), curved()}) {
    const Instanton in = compute_instanton(p);
    for (double f : {0.1, 0.5}) {
      const Libration l = compute_libration(p, in, f * p.barrier());
      const Mat4& M = l.monodromy;
      const double defect = (M.transpose() * J4() * M - J4()).norm() / M.squaredNorm();
      CHECK(defect <= 1e-8);
      CHECK(std::log(M.eigenvalues().cwiseAbs().maxCoeff()) / l.T == doctest::Approx(l.beta).epsilon(1e-8));
    }
  }
}

TEST_CASE("libration errors") {
  const PotentialSpec p = separable();
  CHECK_THROWS_AS(compute_libration(p, -0.1), Error);
  CHECK_THROWS_AS(compute_libration(p, 1.5), Error);
}

TEST_CASE("truncation time matches the instanton closed form") {
  // x = tanh t, V = sech^4 t = E at t = +-atanh(sqrt(1 - sqrt E))
  const Instanton in = compute_instanton(separable());
  for (double E : {1e-3, 0.05}) {
    const double t = std::atanh(std::sqrt(1.0 - std::sqrt(E)));
    CHECK(truncation_time(separable(), in, E) == doctest::Approx(2 * t).epsilon(1e-9));
  }
}

TEST_SUITE_END();
