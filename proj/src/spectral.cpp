#include "tunnelsplit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

void GridSpec::validate() const {
  if (!(L1 > 0.0 && L2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "box half-widths must be positive");
  if (n1 < 3 || n2 < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 points per axis");
  if (n1 % 2 == 0) throw Error(ErrorCode::InvalidArgument, "n1 must be odd so that x1 = 0 is a grid line");
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// column scale: half-grid unknowns off the symmetry line carry sqrt(2)
double column_scale(Parity p, int i, int c) {
  if (p == Parity::None) return 1.0;
  return i == c ? 1.0 : kSqrt2;
}

Operator assemble(const PotentialSpec& pot, double hbar, const GridSpec& g, Parity parity, int i_begin,
                  int i_end) {
  Operator op;
  op.grid = g;
  op.parity = parity;
  op.hbar = hbar;
  op.i_begin = i_begin;
  op.cols = i_end - i_begin;
  const int c = g.centre();
  const double k1 = hbar * hbar / (g.h1() * g.h1());
  const double k2 = hbar * hbar / (g.h2() * g.h2());
  const int n = op.cols * g.n2;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for (int i = i_begin; i < i_end; ++i) {
    const double x1 = g.x1(i);
    for (int j = 0; j < g.n2; ++j) {
      const int r = op.index(i, j);
      trip.emplace_back(r, r, 2.0 * k1 + 2.0 * k2 + pot.value(Vec2(x1, g.x2(j))));
      if (j > 0) trip.emplace_back(r, r - 1, -k2);
      if (j + 1 < g.n2) trip.emplace_back(r, r + 1, -k2);
      for (int di : {-1, 1}) {
        const int ii = i + di;
        if (ii < i_begin || ii >= i_end) continue;
        // sqrt(2) coupling between the symmetry line and its neighbour (even)
        const double w = (parity == Parity::Even && (i == c || ii == c)) ? kSqrt2 : 1.0;
        trip.emplace_back(r, op.index(ii, j), -k1 * w);
      }
    }
  }
  op.A.resize(n, n);
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  return op;
}

}  // namespace

Operator build_operator(const PotentialSpec& pot, double hbar, const GridSpec& grid, Parity parity,
                        double target_energy) {
  grid.validate();
  if (!(hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  if (target_energy > 0.0) {
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n1; ++i) {
      vmin = std::min(vmin, pot.value(Vec2(grid.x1(i), -grid.L2)));
      vmin = std::min(vmin, pot.value(Vec2(grid.x1(i), grid.L2)));
    }
    for (int j = 0; j < grid.n2; ++j) {
      vmin = std::min(vmin, pot.value(Vec2(-grid.L1, grid.x2(j))));
      vmin = std::min(vmin, pot.value(Vec2(grid.L1, grid.x2(j))));
    }
    if (vmin < 3.0 * target_energy) {
      std::ostringstream os;
      os << "min V on the walls " << vmin << " < 3 x target energy " << target_energy;
      throw Error(ErrorCode::BoxTooSmall, os.str());
    }
  }
  const int c = grid.centre();
  switch (parity) {
    case Parity::None: return assemble(pot, hbar, grid, parity, 0, grid.n1);
    case Parity::Even: return assemble(pot, hbar, grid, parity, c, grid.n1);
    case Parity::Odd: return assemble(pot, hbar, grid, parity, c + 1, grid.n1);
  }
  return {};
}

Operator build_left_operator(const PotentialSpec& pot, double hbar, const GridSpec& grid, double delta) {
  grid.validate();
  int wall = 0;
  while (wall < grid.n1 && grid.x1(wall) <= delta + 1e-12 * grid.h1()) ++wall;
  if (wall < 2 || wall >= grid.n1) throw Error(ErrorCode::InvalidArgument, "sub-box wall outside the grid");
  return assemble(pot, hbar, grid, Parity::None, 0, wall);
}

Eigen::MatrixXd Operator::to_full(const Eigen::VectorXd& v) const {
  const int c = grid.centre();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(grid.n1, grid.n2);
  for (int i = i_begin; i < i_begin + cols; ++i)
    for (int j = 0; j < grid.n2; ++j) {
      const double val = v[index(i, j)] / column_scale(parity, i, c);
      u(i, j) = val;
      if (parity == Parity::Even && i != c) u(2 * c - i, j) = val;
      if (parity == Parity::Odd) u(2 * c - i, j) = -val;
    }
  const double norm = std::sqrt(u.squaredNorm() * grid.h1() * grid.h2());
  if (norm > 0.0) u /= norm;
  return u;
}

// ---------------------------------------------------------------------------
// Lanczos

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; }

}  // namespace

Eigenpairs lowest_eigenpairs(const SparseMat& A, int count, const EigenOptions& opt) {
  const Eigen::Index n = A.rows();
  if (count < 1 || count > 50) throw Error(ErrorCode::InvalidArgument, "count must be in [1, 50]");
  if (count > n) throw Error(ErrorCode::InvalidArgument, "count exceeds the matrix size");
  if (!(opt.tol >= 1e-12)) throw Error(ErrorCode::InvalidArgument, "tol must be >= 1e-12");
  const bool invert = opt.mode == SolverMode::ShiftInvert;

  // small problems: dense solve
  if (n <= 400) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A)};
    Eigenpairs r;
    r.values = es.eigenvalues().head(count);
    r.vectors = es.eigenvectors().leftCols(count);
    for (int k = 0; k < count; ++k)
      r.residuals.push_back((A * r.vectors.col(k) - r.values[k] * r.vectors.col(k)).norm());
    return r;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  if (invert) {
    ldlt.compute(Eigen::SparseMatrix<double>(A));
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "sparse factorization failed");
  }
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (invert) return ldlt.solve(x);
    return A * x;
  };

  const Eigen::Index maxb = std::min<Eigen::Index>(
      n, opt.max_basis > 0 ? opt.max_basis : (invert ? 8 * count + 120 : std::max(20 * count + 400, 1200)));

  std::mt19937_64 rng(opt.seed);
  const Eigen::VectorXd diag = A.diagonal();
  const double dmin = diag.minCoeff();
  const double dscale = std::max(diag.maxCoeff() - dmin, 1e-300);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = uniform(rng) / (1.0 + (diag[i] - dmin) / (0.01 * dscale));
  q.normalize();

  Eigen::MatrixXd Q(n, maxb);
  std::vector<double> alpha, beta;
  Eigenpairs out;
  double worst = 0.0;

  auto fresh_direction = [&](Eigen::Index m) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng);
    for (int pass = 0; pass < 2; ++pass) v -= Q.leftCols(m) * (Q.leftCols(m).transpose() * v);
    return v.normalized();
  };

  for (Eigen::Index m = 0; m < maxb; ++m) {
    Q.col(m) = q;
    Eigen::VectorXd w = apply(q);
    const double a = q.dot(w);
    alpha.push_back(a);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(m + 1) * (Q.leftCols(m + 1).transpose() * w);
    double b = w.norm();
    const Eigen::Index msz = m + 1;
    const bool check = msz >= count + 2 && (msz % 8 == 0 || msz == maxb || b < 1e-13 * std::abs(a));
    if (check) {
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), msz);
      Eigen::VectorXd e = msz > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), msz - 1))
                                  : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ts;
      ts.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      // wanted Ritz values: largest of the inverse, smallest otherwise
      std::vector<int> idx(msz);
      for (int k = 0; k < msz; ++k) idx[k] = invert ? static_cast<int>(msz) - 1 - k : k;
      bool est_ok = true;
      for (int k = 0; k < count; ++k) {
        const double th = ts.eigenvalues()[idx[k]];
        const double est = std::abs(b * ts.eigenvectors()(msz - 1, idx[k]));
        if (invert ? est > 1e-2 * opt.tol * std::abs(th) * std::abs(th) : est > opt.tol) est_ok = false;
      }
      if (est_ok || msz == maxb) {
        Eigen::MatrixXd Y(msz, count);
        for (int k = 0; k < count; ++k) Y.col(k) = ts.eigenvectors().col(idx[k]);
        Eigen::MatrixXd X = Q.leftCols(msz) * Y;
        Eigen::VectorXd vals(count);
        std::vector<double> res(count);
        worst = 0.0;
        for (int k = 0; k < count; ++k) {
          Eigen::VectorXd x = X.col(k).normalized();
          X.col(k) = x;
          const Eigen::VectorXd Ax = A * x;
          vals[k] = x.dot(Ax);
          res[k] = (Ax - vals[k] * x).norm();
          worst = std::max(worst, res[k]);
        }
        if (worst <= opt.tol) {
          std::vector<int> order(count);
          for (int k = 0; k < count; ++k) order[k] = k;
          std::sort(order.begin(), order.end(), [&](int i, int j) { return vals[i] < vals[j]; });
          out.values.resize(count);
          out.vectors.resize(n, count);
          for (int k = 0; k < count; ++k) {
            out.values[k] = vals[order[k]];
            out.vectors.col(k) = X.col(order[k]);
            out.residuals.push_back(res[order[k]]);
          }
          out.iterations = static_cast<int>(msz);
          return out;
        }
      }
    }
    if (m + 1 == maxb) break;
    if (b < 1e-13 * std::max(1.0, std::abs(a))) {
      // invariant subspace: continue with a new orthogonal direction
      q = fresh_direction(m + 1);
      b = 0.0;
    } else {
      q = w / b;
    }
    beta.push_back(b);
  }
  std::ostringstream os;
  os << "Lanczos did not converge in " << maxb << " steps (worst residual " << worst << ")";
  throw Error(ErrorCode::NoConvergence, os.str());
}

// ---------------------------------------------------------------------------
// labels and splittings

namespace {

double bilinear(const Eigen::MatrixXd& u, const GridSpec& g, const Vec2& p) {
  const double fi = (p[0] + g.L1) / g.h1() - 1.0;
  const double fj = (p[1] + g.L2) / g.h2() - 1.0;
  const int i0 = static_cast<int>(std::floor(fi)), j0 = static_cast<int>(std::floor(fj));
  if (i0 < 0 || j0 < 0 || i0 + 1 >= g.n1 || j0 + 1 >= g.n2) return 0.0;
  const double s = fi - i0, t = fj - j0;
  return (1 - s) * (1 - t) * u(i0, j0) + s * (1 - t) * u(i0 + 1, j0) + (1 - s) * t * u(i0, j0 + 1) +
         s * t * u(i0 + 1, j0 + 1);
}

// sign changes along well.minimum + offset * normal + t axis, |t| <= reach,
// on the side of x1 = 0 that holds the well; the offset with the most weight
// is used so that nodal lines of the other axis are avoided
int count_nodes(const Eigen::MatrixXd& u, const GridSpec& g, const HarmonicData& well, const Vec2& axis,
                double reach, const Vec2& normal, double width) {
  constexpr int kSamples = 400;
  const double side = well.minimum[0] >= 0.0 ? 1.0 : -1.0;
  std::vector<double> best;
  double best_weight = -1.0;
  for (double off : {0.0, -0.5, 0.5, -1.0, 1.0, -1.5, 1.5}) {
    std::vector<double> vals;
    double weight = 0.0;
    for (int s = 0; s <= kSamples; ++s) {
      const double t = -reach + 2.0 * reach * s / kSamples;
      const Vec2 p = well.minimum + off * width * normal + t * axis;
      if (p[0] * side <= 0.0) continue;
      const double v = bilinear(u, g, p);
      vals.push_back(v);
      weight += v * v;
    }
    if (weight > best_weight) {
      best_weight = weight;
      best = std::move(vals);
    }
  }
  double vmax = 0.0;
  for (double v : best) vmax = std::max(vmax, std::abs(v));
  int nodes = 0;
  double last = 0.0;
  for (double v : best) {
    if (std::abs(v) < 1e-3 * vmax) continue;
    if (last != 0.0 && (v > 0.0) != (last > 0.0)) ++nodes;
    last = v;
  }
  return nodes;
}

Label node_label(const Eigen::MatrixXd& u, const GridSpec& g, const HarmonicData& well, double hbar, double E) {
  // reach: turning point of the level plus a few widths, per axis
  const double w1 = std::sqrt(hbar / well.lambda1), w2 = std::sqrt(hbar / well.lambda2);
  const double r1 = std::sqrt(std::max(E, hbar * well.lambda1) / (well.lambda1 * well.lambda1)) + 4.0 * w1;
  const double r2 = std::sqrt(std::max(E, hbar * well.lambda2) / (well.lambda2 * well.lambda2)) + 4.0 * w2;
  Label l;
  l.m = count_nodes(u, g, well, well.axis1(), r1, well.axis2(), w2);
  l.n = count_nodes(u, g, well, well.axis2(), r2, well.axis1(), w1);
  return l;
}

Label energy_label(double E, double hbar, const HarmonicData& w) {
  Label best;
  double dbest = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 60; ++m)
    for (int n = 0; n < 30; ++n) {
      const double Eh = hbar * (w.lambda1 * (2 * m + 1) + w.lambda2 * (2 * n + 1));
      if (std::abs(Eh - E) < dbest) {
        dbest = std::abs(Eh - E);
        best.m = m;
        best.n = n;
      }
    }
  return best;
}

int levels_below(double hbar, const HarmonicData& w, int mmax) {
  const double top = hbar * (w.lambda1 * (2 * mmax + 1) + w.lambda2);
  int k = 0;
  for (int m = 0; m < 200; ++m)
    for (int n = 0; n < 200; ++n)
      if (hbar * (w.lambda1 * (2 * m + 1) + w.lambda2 * (2 * n + 1)) <= top * (1.0 + 1e-12)) ++k;
  return k;
}

}  // namespace

double SpectralResult::splitting(int m) const {
  auto it = splittings.find({m, 0});
  if (it == splittings.end()) {
    std::ostringstream os;
    os << "no unambiguous (" << m << ", 0) pair at hbar = " << hbar;
    throw Error(ErrorCode::LabelAmbiguity, os.str());
  }
  return it->second;
}

SpectralResult splittings(const PotentialSpec& pot, double hbar, const GridSpec& grid, int mmax,
                          const EigenOptions& opt, int extra_states) {
  if (mmax < 0) throw Error(ErrorCode::InvalidArgument, "mmax must be >= 0");
  const WellPair wells = locate_minima(pot);
  const HarmonicData& wr = wells.right;
  const int count = std::min(50, levels_below(hbar, wr, mmax) + extra_states);
  const double E_top = hbar * (wr.lambda1 * (2 * (mmax + extra_states) + 1) + wr.lambda2);

  const Operator even = build_operator(pot, hbar, grid, Parity::Even, E_top);
  const Operator odd = build_operator(pot, hbar, grid, Parity::Odd);
  const Eigenpairs pe = lowest_eigenpairs(even.A, count, opt);
  const Eigenpairs po = lowest_eigenpairs(odd.A, count, opt);

  SpectralResult r;
  r.hbar = hbar;
  const int c = grid.centre();
  const double k1 = hbar * hbar / (grid.h1() * grid.h1());
  for (int k = 0; k < count; ++k) {
    const Eigen::VectorXd& we = pe.vectors.col(k);
    const Eigen::VectorXd& wo = po.vectors.col(k);
    const Eigen::MatrixXd ue = even.to_full(we), uo = odd.to_full(wo);
    Label le = node_label(ue, grid, wr, hbar, pe.values[k]);
    Label lo = node_label(uo, grid, wr, hbar, po.values[k]);
    const Label lE = energy_label(0.5 * (pe.values[k] + po.values[k]), hbar, wr);

    PairSplitting ps;
    ps.E_even = pe.values[k];
    ps.E_odd = po.values[k];
    ps.delta_direct = ps.E_odd - ps.E_even;
    // exact identity for the discrete pair: the flux through {x1 = 0}
    double num = 0.0, den = 0.0;
    for (int j = 0; j < grid.n2; ++j) num += we[even.index(c, j)] * wo[odd.index(c + 1, j)];
    for (int i = c + 1; i < grid.n1; ++i)
      for (int j = 0; j < grid.n2; ++j) den += we[even.index(i, j)] * wo[odd.index(i, j)];
    ps.delta_flux = kSqrt2 * k1 * num / den;
    ps.delta = ps.delta_flux;
    ps.label = le;
    ps.label.ambiguous = !(le.m == lo.m && le.n == lo.n);
    ps.energy_label = lE;
    r.label_ambiguity = r.label_ambiguity || ps.label.ambiguous;
    r.pairs.push_back(ps);

    le.ambiguous = lo.ambiguous = ps.label.ambiguous;
    r.eigenvalues.push_back(ps.E_even);
    r.parities.push_back(+1);
    r.residuals.push_back(pe.residuals[k]);
    r.labels.push_back(le);
    r.eigenvalues.push_back(ps.E_odd);
    r.parities.push_back(-1);
    r.residuals.push_back(po.residuals[k]);
    r.labels.push_back(lo);
  }
  // sort the merged spectrum, carrying parity/label/residual along
  std::vector<int> order(r.eigenvalues.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r.eigenvalues[a] < r.eigenvalues[b]; });
  SpectralResult sorted = r;
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted.eigenvalues[k] = r.eigenvalues[order[k]];
    sorted.parities[k] = r.parities[order[k]];
    sorted.residuals[k] = r.residuals[order[k]];
    sorted.labels[k] = r.labels[order[k]];
  }
  r.eigenvalues = sorted.eigenvalues;
  r.parities = sorted.parities;
  r.residuals = sorted.residuals;
  r.labels = sorted.labels;
  for (const PairSplitting& ps : r.pairs)
    if (!ps.label.ambiguous && ps.label.n == 0 && ps.label.m <= mmax) r.splittings[{ps.label.m, 0}] = ps.delta;
  return r;
}

HerringResult herring_splitting(const PotentialSpec& pot, double hbar, const GridSpec& grid, int m,
                                const HerringOptions& opt) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be >= 0");
  const WellPair wells = locate_minima(pot);
  const HarmonicData& wl = wells.left;
  const double delta = opt.delta < 0.0 ? 0.5 * pot.coefficients().a : opt.delta;
  const Operator op = build_left_operator(pot, hbar, grid, delta);
  const int count = std::min(50, levels_below(hbar, wl, m) + 2);
  const Eigenpairs ep = lowest_eigenpairs(op.A, count, opt.eig);

  int pick = -1;
  for (int k = 0; k < count && pick < 0; ++k) {
    const Eigen::MatrixXd u = op.to_full(ep.vectors.col(k));
    const Label l = node_label(u, grid, wl, hbar, ep.values[k]);
    if (l.m == m && l.n == 0) pick = k;
  }
  if (pick < 0) {
    std::ostringstream os;
    os << "no (" << m << ", 0) state in the left sub-box at hbar = " << hbar;
    throw Error(ErrorCode::LabelAmbiguity, os.str());
  }
  const Eigen::MatrixXd u = op.to_full(ep.vectors.col(pick));
  const int c = grid.centre();
  HerringResult hr;
  hr.E_left = ep.values[pick];
  double vmax = 0.0;
  for (int j = 0; j < grid.n2; ++j) {
    const double x2 = grid.x2(j);
    if (opt.window >= 0.0 && std::abs(x2 - opt.centre) > opt.window) continue;
    // mirror image: u_R(x1) = u_L(-x1), so d1 u_R(0) = (u_L(-h1) - u_L(h1)) / (2 h1)
    const double d1uR = (u(c - 1, j) - u(c + 1, j)) / (2.0 * grid.h1());
    const double f = u(c, j) * d1uR;
    hr.x2.push_back(x2);
    hr.integrand.push_back(f);
    vmax = std::max(vmax, std::abs(f));
  }
  if (hr.x2.size() < 3) throw Error(ErrorCode::WindowTooNarrow, "window holds fewer than 3 grid points");
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < hr.x2.size(); ++k)
    integral += 0.5 * (hr.integrand[k] + hr.integrand[k + 1]) * (hr.x2[k + 1] - hr.x2[k]);
  hr.edge_ratio = std::max(std::abs(hr.integrand.front()), std::abs(hr.integrand.back())) / vmax;
  if (opt.window >= 0.0 && hr.edge_ratio > 1e-6) {
    std::ostringstream os;
    os << "integrand at the window edge is " << hr.edge_ratio << " of its maximum";
    throw Error(ErrorCode::WindowTooNarrow, os.str());
  }
  hr.delta = 4.0 * hbar * hbar * integral;
  return hr;
}

}  // namespace tunnel
