#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tunnelsplit/potential.hpp"

namespace tunnel {

/// Interior grid of [-L1, L1] x [-L2, L2] with Dirichlet walls; n1 is odd so
/// that x1 = 0 is a grid line.
struct GridSpec {
  double L1 = 2.0, L2 = 1.5;
  int n1 = 129, n2 = 65;

  double h1() const { return 2.0 * L1 / (n1 + 1); }
  double h2() const { return 2.0 * L2 / (n2 + 1); }
  double x1(int i) const { return -L1 + (i + 1) * h1(); }  // i = 0 .. n1-1
  double x2(int j) const { return -L2 + (j + 1) * h2(); }
  int centre() const { return (n1 - 1) / 2; }
  void validate() const;
};

enum class Parity { None, Even, Odd };

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discretized P = -hbar^2 Laplacian + V on the full grid or, for a parity,
/// on the half grid x1 >= 0 (x1 > 0 for odd). Half-grid unknowns carry a
/// factor sqrt(2) off the symmetry line so the matrix stays symmetric and the
/// Euclidean norm matches the full-grid norm of the symmetric extension.
struct Operator {
  SparseMat A;
  GridSpec grid;
  Parity parity = Parity::None;
  double hbar = 0.0;
  int i_begin = 0;  // first grid column represented
  int cols = 0;     // number of columns represented

  Eigen::Index size() const { return A.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return A * v; }
  Eigen::VectorXd diagonal() const { return A.diagonal(); }
  /// Full-grid values (n1 x n2, column-major in (i, j)) with unit L2 norm
  /// on the grid (sum u^2 h1 h2 = 1).
  Eigen::MatrixXd to_full(const Eigen::VectorXd& v) const;
  int index(int i, int j) const { return (i - i_begin) * grid.n2 + j; }
};

/// Throws BoxTooSmall if min V on the walls is below 3 * target_energy.
Operator build_operator(const PotentialSpec& pot, double hbar, const GridSpec& grid, Parity parity,
                        double target_energy = 0.0);

/// Same construction for the left sub-box {x1 <= delta} with a Dirichlet wall
/// at the first grid line beyond delta.
Operator build_left_operator(const PotentialSpec& pot, double hbar, const GridSpec& grid, double delta);

enum class SolverMode { ShiftInvert, Plain };

struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // orthonormal columns
  std::vector<double> residuals;  // ||A u - E u|| / ||u||
  int iterations = 0;
};

struct EigenOptions {
  double tol = 1e-9;
  SolverMode mode = SolverMode::ShiftInvert;
  std::uint64_t seed = 12345;
  int max_basis = 0;  // 0: automatic
};

/// Lanczos with full reorthogonalization; in shift-invert mode the Krylov
/// space is built for (A - s)^{-1} with a sparse LDL^T factorization.
Eigenpairs lowest_eigenpairs(const SparseMat& A, int count, const EigenOptions& opt = {});

struct Label {
  int m = -1, n = -1;
  bool ambiguous = false;
};

struct PairSplitting {
  Label label;         // node counts in the right well
  Label energy_label;  // nearest harmonic level
  double E_even = 0.0, E_odd = 0.0;
  double delta_direct = 0.0;  // E_odd - E_even
  double delta_flux = 0.0;    // discrete flux identity on {x1 = 0}
  double delta = 0.0;         // value used downstream
};

struct SpectralResult {
  double hbar = 0.0;
  std::vector<double> eigenvalues;
  std::vector<int> parities;
  std::vector<double> residuals;
  std::vector<Label> labels;  // per eigenvalue
  std::vector<PairSplitting> pairs;
  std::map<std::pair<int, int>, double> splittings;
  bool label_ambiguity = false;

  /// Splitting of the (m, 0) pair; throws LabelAmbiguity if not labelled.
  double splitting(int m) const;
};

/// Even and odd half-grid solves, pairing by order and labelling by node
/// counts along the principal axes of the right well.
SpectralResult splittings(const PotentialSpec& pot, double hbar, const GridSpec& grid, int mmax,
                          const EigenOptions& opt = {}, int extra_states = 2);

struct HerringResult {
  double delta = 0.0;
  std::vector<double> x2, integrand;
  double edge_ratio = 0.0;  // |integrand| at the window edges / max
  double E_left = 0.0;
};

struct HerringOptions {
  double delta = -1.0;      // sub-box wall position; < 0: a / 2
  double window = -1.0;     // half-width around centre on {x1 = 0}; < 0: whole line
  double centre = 0.0;
  EigenOptions eig;
};

/// 4 hbar^2 int u_L(0, x2) d1 u_R(0, x2) dx2 with u_L the (m, 0) state of the
/// left sub-box and u_R its mirror image.
HerringResult herring_splitting(const PotentialSpec& pot, double hbar, const GridSpec& grid, int m,
                                const HerringOptions& opt = {});

// ---------------------------------------------------------------------------
// 1-D

/// Three-point discretization of -hbar^2 u'' + v u on [-L, L], 2N+1 interior
/// points, x = 0 on the grid.
struct Grid1D {
  double L = 2.5;
  int N = 2000;  // points on (0, L)
  double h() const { return L / (N + 1); }
};

struct Solve1DResult {
  std::vector<double> even, odd;    // lowest `count` per parity
  std::vector<double> splittings;   // odd[k] - even[k], extended precision
  std::vector<double> splittings_extrapolated;  // Richardson in log(Delta) over (N, 2N+1)
};

/// Sturm bisection in double, refined in 50-digit arithmetic; with
/// `richardson` the splittings are also computed on the grid with half the
/// spacing and extrapolated assuming an h^2 law in log(Delta).
Solve1DResult solve_1d(const std::function<double(double)>& v, double hbar, const Grid1D& grid, int count,
                       bool richardson = true);

/// Full-line eigenvalues (double) for the parity-merge check.
std::vector<double> solve_1d_full(const std::function<double(double)>& v, double hbar, const Grid1D& grid,
                                  int count);

}  // namespace tunnel
