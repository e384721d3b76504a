#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/formulas.hpp"
#include "tunnelsplit/spectral.hpp"

using namespace tunnel;

TEST_SUITE_BEGIN("spectral");

namespace {

PotentialSpec curved() { return PotentialSpec(Family::CurvedQuartic, Coefficients{0.25, 1.0, 2.5, 0.0, 0.3}); }
PotentialSpec separable() { return PotentialSpec(Family::SeparableQuartic, Coefficients{1.0, 1.0, 3.0, 0.0, 0.0}); }

Eigen::VectorXd dense_lowest(const SparseMat& A, int count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(count);
}

// -h^2 u'' + v u on 2N+1 interior points of [-L, L]
Eigen::VectorXd dense_1d(const std::function<double(double)>& v, double hbar, const Grid1D& g, int count) {
  const int n = 2 * g.N + 1;
  const double dx = g.h(), k = hbar * hbar / (dx * dx);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2 * k + v(-g.L + (i + 1) * dx);
    if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = -k;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(count);
}

}  // namespace

TEST_CASE("Lanczos agrees with a dense solver on a small grid") {
  const GridSpec g{2.0, 1.2, 31, 17};
  for (Parity par : {Parity::None, Parity::Even, Parity::Odd}) {
    const Operator op = build_operator(curved(), 0.15, g, par);
    const Eigen::VectorXd ref = dense_lowest(op.A, 4);
    for (SolverMode mode : {SolverMode::ShiftInvert, SolverMode::Plain}) {
      EigenOptions opt;
      opt.mode = mode;
      opt.tol = 1e-11;
      const Eigenpairs ep = lowest_eigenpairs(op.A, 4, opt);
      for (int k = 0; k < 4; ++k) {
        CHECK(ep.values[k] == doctest::Approx(ref[k]).epsilon(1e-9));
        CHECK(ep.residuals[k] < 1e-8);
      }
      CHECK((ep.vectors.transpose() * ep.vectors - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-10);
    }
  }
}

TEST_CASE("even and odd half grids reproduce the full grid") {
  const GridSpec g{2.0, 1.2, 31, 17};
  const double h = 0.15;
  const Eigen::VectorXd full = dense_lowest(build_operator(curved(), h, g, Parity::None).A, 6);
  const Eigen::VectorXd ev = dense_lowest(build_operator(curved(), h, g, Parity::Even).A, 3);
  const Eigen::VectorXd od = dense_lowest(build_operator(curved(), h, g, Parity::Odd).A, 3);
  std::vector<double> merged(ev.data(), ev.data() + 3);
  merged.insert(merged.end(), od.data(), od.data() + 3);
  std::sort(merged.begin(), merged.end());
  for (int k = 0; k < 6; ++k) CHECK(merged[k] == doctest::Approx(full[k]).epsilon(1e-12));
}

TEST_CASE("full-grid eigenvectors keep unit grid norm and parity") {
  const GridSpec g{2.0, 1.2, 31, 17};
  const Operator op = build_operator(curved(), 0.15, g, Parity::Odd);
  const Eigenpairs ep = lowest_eigenpairs(op.A, 1);
  const Eigen::MatrixXd u = op.to_full(ep.vectors.col(0));
  CHECK(u.squaredNorm() * g.h1() * g.h2() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) CHECK(u(i, j) == doctest::Approx(-u(g.n1 - 1 - i, j)).epsilon(1e-12));
}

TEST_CASE("walls too close to the wells are rejected") {
  const GridSpec g{1.05, 0.3, 31, 17};
  CHECK_THROWS_AS(build_operator(curved(), 0.1, g, Parity::Even, 0.3), Error);
  CHECK_THROWS_AS((GridSpec{2.0, 1.0, 30, 17}.validate()), Error);
}

TEST_CASE("1-D solver against a dense tridiagonal matrix and harmonic levels") {
  const Potential1D q = quartic_1d();
  const Grid1D g{2.0, 200};
  const double h = 0.1;
  const Eigen::VectorXd ref = dense_1d(q.v, h, g, 6);
  const std::vector<double> full = solve_1d_full(q.v, h, g, 6);
  for (int k = 0; k < 6; ++k) CHECK(full[k] == doctest::Approx(ref[k]).epsilon(1e-11));
  const Solve1DResult r = solve_1d(q.v, h, g, 3, false);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.even[k] == doctest::Approx(ref[2 * k]).epsilon(1e-11));
    CHECK(r.odd[k] == doctest::Approx(ref[2 * k + 1]).epsilon(1e-11));
    CHECK(r.splittings[k] == doctest::Approx(ref[2 * k + 1] - ref[2 * k]).epsilon(1e-6));
  }

  // harmonic levels h omega (2k + 1) up to O(dx^2)
  const Potential1D osc = harmonic_1d(1.5);
  const std::vector<double> lv = solve_1d_full(osc.v, 0.05, Grid1D{1.5, 1500}, 4);
  for (int k = 0; k < 4; ++k) CHECK(lv[k] == doctest::Approx(0.05 * 1.5 * (2 * k + 1)).epsilon(1e-5));
}

TEST_CASE("separable 2-D splitting reduces to the 1-D one") {
  const double h = 0.1;
  const SpectralResult s = splittings(separable(), h, GridSpec{2.0, 1.2, 257, 129}, 1);
  const Solve1DResult r = solve_1d(slice_x1(separable()).v, h, Grid1D{2.0, 128}, 2, false);
  for (int m = 0; m < 2; ++m) CHECK(s.splitting(m) == doctest::Approx(r.splittings[m]).epsilon(1e-8));
  for (const PairSplitting& p : s.pairs)
    if (p.label.n == 0) CHECK(p.delta_flux == doctest::Approx(p.delta_direct).epsilon(1e-6));
  CHECK_FALSE(s.label_ambiguity);
}

TEST_CASE("Herring flux integral against the pair splitting") {
  const double h = 0.1;
  const GridSpec g{2.0, 1.2, 257, 129};
  const double exact = splittings(separable(), h, g, 0).splitting(0);
  const HerringResult hr = herring_splitting(separable(), h, g, 0);
  CHECK(hr.delta == doctest::Approx(exact).epsilon(0.1));
  CHECK(hr.edge_ratio < 1e-3);
}

TEST_SUITE_END();
