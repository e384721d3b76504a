#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/spectral.hpp"

namespace tunnel {

namespace {

using mp50 = boost::multiprecision::cpp_bin_float_50;

// symmetric tridiagonal matrix: diagonal d, off-diagonal squares b2
struct Tridiag {
  std::vector<double> d, b2;
};

Tridiag half_line(const std::function<double(double)>& v, double hbar, const Grid1D& g, Parity p) {
  const double h = g.h();
  const double k = hbar * hbar / (h * h);
  Tridiag t;
  const int i0 = p == Parity::Even ? 0 : 1;
  for (int i = i0; i <= g.N; ++i) t.d.push_back(2.0 * k + v(i * h));
  for (int i = i0; i < g.N; ++i) t.b2.push_back((p == Parity::Even && i == 0 ? 2.0 : 1.0) * k * k);
  return t;
}

Tridiag full_line(const std::function<double(double)>& v, double hbar, const Grid1D& g) {
  const double h = g.h();
  const double k = hbar * hbar / (h * h);
  Tridiag t;
  for (int i = -g.N; i <= g.N; ++i) t.d.push_back(2.0 * k + v(i * h));
  t.b2.assign(t.d.size() - 1, k * k);
  return t;
}

// number of eigenvalues below x (Sturm count through the LDL^T pivots)
template <class T>
int sturm(const Tridiag& t, const T& x) {
  int neg = 0;
  T q = T(t.d[0]) - x;
  const T tiny = T(1e-300);
  for (std::size_t i = 0;; ++i) {
    if (q == 0) q = tiny;
    if (q < 0) ++neg;
    if (i + 1 == t.d.size()) break;
    q = T(t.d[i + 1]) - x - T(t.b2[i]) / q;
  }
  return neg;
}

double lower_bound(const Tridiag& t) {
  double lo = t.d[0];
  for (std::size_t i = 0; i < t.d.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::sqrt(t.b2[i - 1]);
    if (i < t.b2.size()) r += std::sqrt(t.b2[i]);
    lo = std::min(lo, t.d[i] - r);
  }
  return lo;
}

double upper_bound(const Tridiag& t) {
  double hi = t.d[0];
  for (std::size_t i = 0; i < t.d.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::sqrt(t.b2[i - 1]);
    if (i < t.b2.size()) r += std::sqrt(t.b2[i]);
    hi = std::max(hi, t.d[i] + r);
  }
  return hi;
}

// k-th eigenvalue (0-based) by bisection in double
std::pair<double, double> bracket_double(const Tridiag& t, int k) {
  double lo = lower_bound(t), hi = upper_bound(t);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (sturm(t, mid) > k ? hi : lo) = mid;
  }
  return {lo, hi};
}

mp50 refine(const Tridiag& t, int k, std::pair<double, double> br) {
  const double pad = 1e-10 * (1.0 + std::abs(br.first)) + (br.second - br.first);
  mp50 lo = br.first - pad, hi = br.second + pad;
  if (!(sturm(t, lo) <= k && sturm(t, hi) > k)) {
    std::ostringstream os;
    os << "extended-precision bracket lost eigenvalue " << k;
    throw Error(ErrorCode::NoConvergence, os.str());
  }
  const mp50 tol = mp50("1e-46") * (1 + abs(lo));
  while (hi - lo > tol) {
    const mp50 mid = (lo + hi) / 2;
    (sturm(t, mid) > k ? hi : lo) = mid;
  }
  return (lo + hi) / 2;
}

struct Level1D {
  std::vector<double> even, odd, split;
};

Level1D levels(const std::function<double(double)>& v, double hbar, const Grid1D& g, int count) {
  const Tridiag te = half_line(v, hbar, g, Parity::Even);
  const Tridiag to = half_line(v, hbar, g, Parity::Odd);
  Level1D r;
  for (int k = 0; k < count; ++k) {
    const auto be = bracket_double(te, k), bo = bracket_double(to, k);
    const mp50 ee = refine(te, k, be), eo = refine(to, k, bo);
    r.even.push_back(static_cast<double>(ee));
    r.odd.push_back(static_cast<double>(eo));
    r.split.push_back(static_cast<double>(eo - ee));
  }
  return r;
}

}  // namespace

Solve1DResult solve_1d(const std::function<double(double)>& v, double hbar, const Grid1D& grid, int count,
                       bool richardson) {
  if (!(hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  if (grid.N < 4 || !(grid.L > 0.0)) throw Error(ErrorCode::InvalidArgument, "invalid 1-D grid");
  if (count < 1 || count > grid.N) throw Error(ErrorCode::InvalidArgument, "invalid level count");
  const Level1D a = levels(v, hbar, grid, count);
  Solve1DResult r;
  r.even = a.even;
  r.odd = a.odd;
  r.splittings = a.split;
  if (richardson) {
    Grid1D fine = grid;
    fine.N = 2 * grid.N + 1;  // spacing halved exactly
    const Level1D b = levels(v, hbar, fine, count);
    for (int k = 0; k < count; ++k) {
      if (a.split[k] > 0.0 && b.split[k] > 0.0)
        r.splittings_extrapolated.push_back(std::exp((4.0 * std::log(b.split[k]) - std::log(a.split[k])) / 3.0));
      else
        r.splittings_extrapolated.push_back(b.split[k]);
    }
  }
  return r;
}

std::vector<double> solve_1d_full(const std::function<double(double)>& v, double hbar, const Grid1D& grid,
                                  int count) {
  const Tridiag t = full_line(v, hbar, grid);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const auto b = bracket_double(t, k);
    out.push_back(0.5 * (b.first + b.second));
  }
  return out;
}

}  // namespace tunnel
