#include "tunnelsplit/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "tunnelsplit/errors.hpp"

namespace tunnel {

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::SeparableQuartic: return "separable-quartic";
    case Family::CoupledQuartic: return "coupled-quartic";
    case Family::CurvedQuartic: return "curved-quartic";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "separable-quartic") return Family::SeparableQuartic;
  if (name == "coupled-quartic") return Family::CoupledQuartic;
  if (name == "curved-quartic") return Family::CurvedQuartic;
  throw Error(ErrorCode::InvalidArgument, "unknown potential family '" + std::string(name) + "'");
}

namespace {

double half_hessian_det(const Coefficients& k) {
  // (1/2) Hess V at (a, 0) = [[4 alpha a^2, d a], [d a, omega^2 + c a^2]]
  const double a2 = k.a * k.a;
  return 4.0 * k.alpha * a2 * (k.omega * k.omega + k.c * a2) - k.d * k.d * a2;
}

}  // namespace

PotentialSpec::PotentialSpec(Family family, Coefficients coeffs, double box_factor)
    : family_(family), k_(coeffs), box_factor_(box_factor) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(k_.alpha > 0.0) || !(k_.a > 0.0) || !(k_.omega > 0.0)) bad("alpha, a, omega must be positive");
  if (!std::isfinite(k_.c) || !std::isfinite(k_.d)) bad("c and d must be finite");
  if (k_.c < 0.0) bad("c must be non-negative");
  if (!(box_factor_ > 1.0)) bad("box factor must exceed 1");
  switch (family_) {
    case Family::SeparableQuartic:
      if (k_.c != 0.0 || k_.d != 0.0) bad("separable-quartic requires c = d = 0");
      break;
    case Family::CoupledQuartic:
      if (k_.d != 0.0) bad("coupled-quartic requires d = 0");
      break;
    case Family::CurvedQuartic:
      break;
  }
  if (half_hessian_det(k_) <= 0.0) {
    throw Error(ErrorCode::DegenerateMinimum, "det((1/2) Hess V) <= 0 at (+-a, 0)");
  }
  if (k_.d * k_.d >= 4.0 * k_.alpha * k_.omega * k_.omega) {
    bad("d^2 >= 4 alpha omega^2: (+-a, 0) are not the global minima");
  }
}

PotentialSpec PotentialSpec::from_map(std::string_view family,
                                      const std::map<std::string, double>& params,
                                      double box_factor) {
  Coefficients k;
  for (const auto& [key, value] : params) {
    if (key == "alpha") k.alpha = value;
    else if (key == "a") k.a = value;
    else if (key == "omega") k.omega = value;
    else if (key == "c") k.c = value;
    else if (key == "d") k.d = value;
    else throw Error(ErrorCode::InvalidArgument, "unknown potential coefficient '" + key + "'");
  }
  return PotentialSpec(family_from_string(family), k, box_factor);
}

double PotentialSpec::value(const Vec2& x) const noexcept {
  const double x1s = x[0] * x[0];
  const double u = x1s - k_.a * k_.a;
  const double x2 = x[1];
  return k_.alpha * u * u + k_.omega * k_.omega * x2 * x2 + k_.c * x1s * x2 * x2 + k_.d * u * x2;
}

Derivatives PotentialSpec::eval(const Vec2& x) const noexcept {
  const double x1 = x[0];
  const double x2 = x[1];
  const double x1s = x1 * x1;
  const double u = x1s - k_.a * k_.a;
  const double w2 = k_.omega * k_.omega;
  Derivatives r;
  r.value = k_.alpha * u * u + w2 * x2 * x2 + k_.c * x1s * x2 * x2 + k_.d * u * x2;
  r.gradient[0] = 4.0 * k_.alpha * u * x1 + 2.0 * k_.c * x1 * x2 * x2 + 2.0 * k_.d * x1 * x2;
  r.gradient[1] = 2.0 * w2 * x2 + 2.0 * k_.c * x1s * x2 + k_.d * u;
  const double h11 = 4.0 * k_.alpha * (3.0 * x1s - k_.a * k_.a) + 2.0 * k_.c * x2 * x2 + 2.0 * k_.d * x2;
  const double h12 = 4.0 * k_.c * x1 * x2 + 2.0 * k_.d * x1;
  const double h22 = 2.0 * w2 + 2.0 * k_.c * x1s;
  r.hessian << h11, h12, h12, h22;
  return r;
}

ThirdDerivatives PotentialSpec::third(const Vec2& x) const noexcept {
  ThirdDerivatives t;
  const double v111 = 24.0 * k_.alpha * x[0];
  const double v112 = 4.0 * k_.c * x[1] + 2.0 * k_.d;
  const double v122 = 4.0 * k_.c * x[0];
  const double v222 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        const int ones = (i == 1) + (j == 1) + (l == 1);
        t.t[i][j][l] = ones == 0 ? v111 : ones == 1 ? v112 : ones == 2 ? v122 : v222;
      }
  return t;
}

Vec2 PotentialSpec::saddle() const noexcept {
  // V(0, x2) = alpha a^4 + omega^2 x2^2 - d a^2 x2 (the c-term vanishes on x1 = 0)
  return Vec2(0.0, k_.d * k_.a * k_.a / (2.0 * k_.omega * k_.omega));
}

double PotentialSpec::barrier() const noexcept { return value(saddle()); }

bool PotentialSpec::in_box(const Vec2& x) const noexcept {
  const double w = box_half_width();
  return std::abs(x[0]) <= w && std::abs(x[1]) <= w;
}

std::string PotentialSpec::canonical() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "family=%s;alpha=%.17g;a=%.17g;omega=%.17g;c=%.17g;d=%.17g;box=%.17g",
                std::string(to_string(family_)).c_str(), k_.alpha, k_.a, k_.omega, k_.c, k_.d,
                box_factor_);
  return buf;
}

namespace {

HarmonicData harmonic_at(const PotentialSpec& pot, const Vec2& seed) {
  Vec2 x = seed;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const Derivatives d = pot.eval(x);
    if (d.gradient.norm() <= 1e-12) {
      converged = true;
      break;
    }
    x -= d.hessian.ldlt().solve(d.gradient);
  }
  if (!converged) throw Error(ErrorCode::NonConvergence, "Newton for the minimum did not converge in 50 steps");

  const Mat2 half_hess = 0.5 * pot.eval(x).hessian;
  if (half_hess.determinant() <= 0.0 || half_hess(0, 0) <= 0.0) {
    throw Error(ErrorCode::DegenerateMinimum, "Hessian at the minimum is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(half_hess);
  HarmonicData h;
  h.minimum = x;
  h.lambda1 = std::sqrt(es.eigenvalues()[0]);
  h.lambda2 = std::sqrt(es.eigenvalues()[1]);
  Vec2 e1 = es.eigenvectors().col(0).normalized();
  if (e1[0] < 0.0 || (e1[0] == 0.0 && e1[1] < 0.0)) e1 = -e1;
  h.frame.row(0) = e1.transpose();
  h.frame.row(1) = Vec2(-e1[1], e1[0]).transpose();
  return h;
}

}  // namespace

WellPair locate_minima(const PotentialSpec& pot) {
  const double a = pot.coefficients().a;
  return WellPair{harmonic_at(pot, Vec2(-a, 0.0)), harmonic_at(pot, Vec2(a, 0.0))};
}

AssumptionReport check_quasi1d_assumptions(const PotentialSpec& pot) {
  const WellPair wells = locate_minima(pot);
  AssumptionReport r;
  r.lambda1 = wells.right.lambda1;
  r.lambda2 = wells.right.lambda2;
  r.ratio = r.lambda2 / r.lambda1;
  r.gap_ok = 2.0 * r.lambda1 < r.lambda2;
  r.barrier = pot.barrier();
  return r;
}

// ---------------------------------------------------------------------------
// well boundary

double WellBoundary::enclosed_area() const {
  double s = 0.0;
  const std::size_t n = polyline.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polyline[i];
    const Vec2& q = polyline[(i + 1) % n];
    s += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(s);
}

Vec2 WellBoundary::at_arclength(double s) const {
  const double total = perimeter();
  s = std::fmod(s, total);
  if (s < 0) s += total;
  const auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
  const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - arclength.begin() - 1, 0));
  const std::size_t n = polyline.size();
  const double seg = arclength[i + 1] - arclength[i];
  const double t = seg > 0 ? (s - arclength[i]) / seg : 0.0;
  return (1.0 - t) * polyline[i % n] + t * polyline[(i + 1) % n];
}

double WellBoundary::max_level_error(const PotentialSpec& pot) const {
  double m = 0.0;
  for (const Vec2& p : polyline) m = std::max(m, std::abs(pot.value(p) - energy));
  return m;
}

namespace {

struct ContourLoop {
  std::vector<Vec2> points;
  bool closed = false;
};

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double xc = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < xc) inside = !inside;
    }
  }
  return inside;
}

// Marching squares over an nx-by-ny lattice of f = V - E on [lo, hi].
std::vector<ContourLoop> marching_squares(const PotentialSpec& pot, double level, const Vec2& lo,
                                          const Vec2& hi, int nx, int ny) {
  const double dx = (hi[0] - lo[0]) / (nx - 1);
  const double dy = (hi[1] - lo[1]) / (ny - 1);
  std::vector<double> f(static_cast<std::size_t>(nx) * ny);
  auto at = [&](int i, int j) -> double& { return f[static_cast<std::size_t>(j) * nx + i]; };
  auto node = [&](int i, int j) { return Vec2(lo[0] + i * dx, lo[1] + j * dy); };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double v = pot.value(node(i, j)) - level;
      if (v == 0.0) v = 1e-300;  // keep every node strictly on one side
      at(i, j) = v;
    }

  const int n_h = (nx - 1) * ny;
  auto h_edge = [&](int i, int j) { return j * (nx - 1) + i; };
  auto v_edge = [&](int i, int j) { return n_h + j * nx + i; };
  const int n_edges = n_h + nx * (ny - 1);

  std::vector<Vec2> edge_point(n_edges);
  std::vector<std::array<int, 2>> links(n_edges, {-1, -1});
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    const double f0 = at(i0, j0), f1 = at(i1, j1);
    const double t = f0 / (f0 - f1);
    return Vec2(node(i0, j0) + t * (node(i1, j1) - node(i0, j0)));
  };
  auto link = [&](int e0, int e1) {
    auto put = [&](int e, int other) {
      if (links[e][0] < 0) links[e][0] = other;
      else links[e][1] = other;
    };
    put(e0, e1);
    put(e1, e0);
  };

  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      const int edges[4] = {h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
      bool cut[4];
      for (int k = 0; k < 4; ++k) cut[k] = (c[k] < 0) != (c[(k + 1) % 4] < 0);
      if (cut[0]) edge_point[edges[0]] = crossing(i, j, i + 1, j);
      if (cut[1]) edge_point[edges[1]] = crossing(i + 1, j, i + 1, j + 1);
      if (cut[2]) edge_point[edges[2]] = crossing(i, j + 1, i + 1, j + 1);
      if (cut[3]) edge_point[edges[3]] = crossing(i, j, i, j + 1);
      const int ncut = cut[0] + cut[1] + cut[2] + cut[3];
      if (ncut == 2) {
        int a = -1, b = -1;
        for (int k = 0; k < 4; ++k)
          if (cut[k]) (a < 0 ? a : b) = edges[k];
        link(a, b);
      } else if (ncut == 4) {
        // saddle cell: cut off the corners whose sign differs from the centre
        const bool centre_inside = pot.value(node(i, j) + Vec2(0.5 * dx, 0.5 * dy)) < level;
        for (int k = 0; k < 4; ++k) {
          if ((c[k] < 0) != centre_inside) link(edges[(k + 3) % 4], edges[k]);
        }
      }
    }
  }

  std::vector<ContourLoop> loops;
  std::vector<char> seen(n_edges, 0);
  for (int start = 0; start < n_edges; ++start) {
    if (seen[start] || links[start][0] < 0) continue;
    // walk to one end of an open chain (or around a loop)
    int first = start;
    {
      int prev = -1, cur = start;
      for (int guard = 0; guard < n_edges; ++guard) {
        const int next = links[cur][0] != prev ? links[cur][0] : links[cur][1];
        if (next < 0) {
          first = cur;
          break;
        }
        prev = cur;
        cur = next;
        if (cur == start) break;
      }
    }
    ContourLoop loop;
    int prev = -1, cur = first;
    while (true) {
      seen[cur] = 1;
      loop.points.push_back(edge_point[cur]);
      int next = links[cur][0] != prev ? links[cur][0] : links[cur][1];
      if (links[cur][0] == links[cur][1] && prev >= 0) next = -1;
      if (next < 0) break;
      if (next == first) {
        loop.closed = true;
        break;
      }
      prev = cur;
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace

WellBoundary well_boundary(const PotentialSpec& pot, double energy, Side side, int resolution) {
  if (!(energy > 0.0)) throw Error(ErrorCode::EnergyNonPositive, "E must be positive");
  if (resolution < 32) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 32");
  const double barrier = pot.barrier();
  if (energy >= barrier) {
    throw Error(ErrorCode::EnergyAboveBarrier, "E >= barrier height: the wells are merged");
  }
  const WellPair wells = locate_minima(pot);
  const HarmonicData& well = wells.left;
  const double big = pot.box_half_width();

  double w = 4.0 * std::sqrt(energy) / well.lambda1 + 0.05 * pot.coefficients().a;
  std::optional<ContourLoop> found;
  while (true) {
    const Vec2 lo(std::max(-big, well.minimum[0] - w), std::max(-big, well.minimum[1] - w));
    const Vec2 hi(std::min(0.0, well.minimum[0] + w), std::min(big, well.minimum[1] + w));
    const bool maximal = lo[0] <= -big && lo[1] <= -big && hi[0] >= 0.0 && hi[1] >= big;
    const int nx = std::max(resolution, 8) + 1;
    const int ny = nx;
    const auto loops = marching_squares(pot, energy, lo, hi, nx, ny);
    bool enclosing_open = false;
    for (const auto& loop : loops) {
      if (loop.points.size() < 3) continue;
      if (point_in_polygon(loop.points, well.minimum)) {
        if (loop.closed) found = loop;
        else enclosing_open = true;
      }
    }
    // an open chain passing around the minimum means the grid clipped the curve
    if (found) break;
    if (maximal) {
      (void)enclosing_open;
      throw Error(ErrorCode::EnergyAboveBarrier, "level set around the minimum is not closed");
    }
    w *= 2.0;
  }

  std::vector<Vec2> pts = found->points;
  const double tol = std::min(1e-10, 1e-10 * energy);
  for (Vec2& p : pts) {
    for (int it = 0; it < 60; ++it) {
      const Derivatives d = pot.eval(p);
      const double f = d.value - energy;
      if (std::abs(f) <= 1e-3 * tol) break;
      const double g2 = d.gradient.squaredNorm();
      if (g2 == 0.0) break;
      p -= (f / g2) * d.gradient;
    }
    if (std::abs(pot.value(p) - energy) > tol) {
      throw Error(ErrorCode::NonConvergence, "Newton projection onto {V = E} failed");
    }
  }
  // counter-clockwise orientation
  double signed_area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    signed_area += p[0] * q[1] - q[0] * p[1];
  }
  if (signed_area < 0) std::reverse(pts.begin(), pts.end());

  if (side == Side::Right) {
    for (Vec2& p : pts) p[0] = -p[0];
    std::reverse(pts.begin(), pts.end());
  }

  WellBoundary b;
  b.energy = energy;
  b.side = side;
  b.polyline = std::move(pts);
  b.arclength.resize(b.polyline.size() + 1);
  b.arclength[0] = 0.0;
  for (std::size_t i = 0; i < b.polyline.size(); ++i) {
    b.arclength[i + 1] = b.arclength[i] + (b.polyline[(i + 1) % b.polyline.size()] - b.polyline[i]).norm();
  }
  return b;
}

}  // namespace tunnel
