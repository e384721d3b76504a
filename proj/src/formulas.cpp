#include "tunnelsplit/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

// the pchip header of Boost 1.74 calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "tunnelsplit/digest.hpp"
#include "tunnelsplit/errors.hpp"

namespace tunnel {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) { return fmt17(v); }

// canonical key=value record of the inputs, hashed
class InputRecord {
 public:
  InputRecord& add(std::string_view key, double v) {
    os_ << key << '=' << num(v) << ';';
    return *this;
  }
  InputRecord& add(std::string_view key, std::string_view v) {
    os_ << key << '=' << v << ';';
    return *this;
  }
  std::string digest() const { return sha256_hex(os_.str()); }

 private:
  std::ostringstream os_;
};

SplittingEstimate make_estimate(Method method, int m, double hbar, double E, double exponent, double prefactor,
                                InputRecord rec) {
  SplittingEstimate s;
  s.method = method;
  s.m = m;
  s.hbar = hbar;
  s.energy = E;
  s.exponent = exponent;
  s.prefactor = prefactor;
  s.value = prefactor * std::exp(-exponent);
  rec.add("method", to_string(method)).add("m", m).add("hbar", hbar);
  s.inputs_digest = rec.digest();
  return s;
}

void require_hbar(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
}

void require_m(int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be >= 0");
}

void require_barrier(const Potential1D& p) {
  if (!(p.barrier > 0.0) || !(p.a > 0.0)) throw Error(ErrorCode::InvalidArgument, "potential has no barrier");
}

template <class F>
double gk(F f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

template <class F>
double root_in(F f, double lo, double hi) {
  boost::uintmax_t it = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 4e-16 * std::max(1.0, std::abs(x)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, it);
  return 0.5 * (r.first + r.second);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::LL: return "LL";
    case Method::Ground: return "ground";
    case Method::Excited1D: return "excited1d";
    case Method::Theorem1: return "theorem1";
    case Method::Formula9: return "formula9";
    case Method::Formula11: return "formula11";
    case Method::Formula11x2: return "formula11x2";
  }
  return "?";
}

double log_b_coeff(int m) {
  require_m(m);
  const double k = 2.0 * m + 1.0;
  return 0.5 * std::log(kPi) + (m + 0.5) * std::log(k) - m * std::log(2.0) - std::lgamma(m + 1.0) - (m + 0.5);
}

double b_coeff(int m) { return std::exp(log_b_coeff(m)); }

// ---------------------------------------------------------------------------
// 1-D

Potential1D quartic_1d(double alpha, double a) {
  if (!(alpha > 0.0) || !(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha and a must be positive");
  Potential1D p;
  p.v = [alpha, a](double x) {
    const double u = x * x - a * a;
    return alpha * u * u;
  };
  p.dv = [alpha, a](double x) { return 4.0 * alpha * x * (x * x - a * a); };
  p.a = a;
  p.barrier = alpha * a * a * a * a;
  p.lambda = 2.0 * a * std::sqrt(alpha);
  p.canonical = "quartic1d;alpha=" + num(alpha) + ";a=" + num(a);
  return p;
}

Potential1D harmonic_1d(double omega) {
  Potential1D p;
  p.v = [omega](double x) { return omega * omega * x * x; };
  p.dv = [omega](double x) { return 2.0 * omega * omega * x; };
  p.a = 0.0;
  p.barrier = 0.0;
  p.lambda = std::abs(omega);
  p.canonical = "harmonic1d;omega=" + num(omega);
  return p;
}

Potential1D slice_x1(const PotentialSpec& pot) {
  const Coefficients k = pot.coefficients();
  if (k.d != 0.0) throw Error(ErrorCode::InvalidArgument, "x2 = 0 is not invariant when d != 0");
  Potential1D p = quartic_1d(k.alpha, k.a);
  p.canonical = "slice;" + pot.canonical();
  return p;
}

TurningPoints turning_points(const Potential1D& p, double E) {
  require_barrier(p);
  if (!(E > 0.0) || !(E < p.barrier)) {
    std::ostringstream os;
    os << "E = " << E << " outside (0, " << p.barrier << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  auto g = [&](double x) { return p.v(x) - E; };
  TurningPoints tp;
  tp.inner = root_in(g, 0.0, p.a);
  double X = 2.0 * p.a;
  for (int i = 0; i < 60 && g(X) <= 0.0; ++i) X *= 2.0;
  tp.outer = root_in(g, p.a, X);
  const double scale = std::max(1.0, p.lambda * p.lambda * p.a);
  for (double x : {tp.inner, tp.outer}) {
    if (std::abs(p.dv(x)) < 1e-7 * scale) {
      std::ostringstream os;
      os << "v'(" << x << ") = " << p.dv(x) << " at E = " << E;
      throw Error(ErrorCode::TurningPointDegeneracy, os.str());
    }
  }
  return tp;
}

double barrier_action_1d(const Potential1D& p, double E) {
  const double xt = turning_points(p, E).inner;
  // x = xt (1 - s^2) removes the square-root endpoint
  auto f = [&](double s) {
    const double x = xt * (1.0 - s * s);
    return std::sqrt(std::max(0.0, p.v(x) - E)) * 2.0 * xt * s;
  };
  return 2.0 * gk(f, 0.0, 1.0);
}

double well_period_1d(const Potential1D& p, double E) {
  const TurningPoints tp = turning_points(p, E);
  const double c = 0.5 * (tp.inner + tp.outer), r = 0.5 * (tp.outer - tp.inner);
  auto f = [&](double th) {
    const double s = std::sin(th);
    const double gap = E - p.v(c - r * std::cos(th));
    if (!(gap > 0.0)) return 0.0;
    return r * s / std::sqrt(gap);
  };
  return 2.0 * gk(f, 0.0, kPi);
}

SplittingEstimate ll_splitting_1d(const Potential1D& p, double E, double hbar) {
  require_hbar(hbar);
  require_barrier(p);
  const double T = well_period_1d(p, E);
  const double omega = 2.0 * kPi / T;
  const double S = barrier_action_1d(p, E);
  InputRecord rec;
  rec.add("potential", p.canonical).add("E", E);
  return make_estimate(Method::LL, 0, hbar, E, S / hbar, 2.0 * omega * hbar / kPi, std::move(rec));
}

namespace {

SplittingEstimate excited_impl(const Potential1D& p, int m, double hbar, bool enforce, Method method) {
  require_hbar(hbar);
  require_m(m);
  require_barrier(p);
  const double omega = p.lambda;
  const double E = (2.0 * m + 1.0) * omega * hbar;
  if (enforce && !(E < 0.5 * p.barrier)) {
    std::ostringstream os;
    os << "E = (2m+1) omega hbar = " << E << " >= barrier / 2 = " << 0.5 * p.barrier;
    throw Error(ErrorCode::EnergyOutOfRegime, os.str());
  }
  const double S = barrier_action_1d(p, E);
  InputRecord rec;
  rec.add("potential", p.canonical).add("enforce", enforce ? 1.0 : 0.0);
  return make_estimate(method, m, hbar, E, S / hbar, 2.0 * b_coeff(m) * omega * hbar / kPi, std::move(rec));
}

}  // namespace

SplittingEstimate excited_splitting_1d(const Potential1D& p, int m, double hbar, bool enforce_regime) {
  return excited_impl(p, m, hbar, enforce_regime, Method::Excited1D);
}

SplittingEstimate ground_splitting_1d(const Potential1D& p, double hbar) {
  return excited_impl(p, 0, hbar, false, Method::Ground);
}

// ---------------------------------------------------------------------------
// action table

struct ActionTable::Interp {
  boost::math::interpolators::pchip<std::vector<double>> f;
  double lo, hi;  // in log E
  Interp(std::vector<double> x, std::vector<double> y) : f(std::vector<double>(x), std::move(y)) {
    lo = x.front();
    hi = x.back();
  }
  double operator()(double E) const {
    const double x = std::log(E);
    if (x < lo - 1e-12 || x > hi + 1e-12) {
      std::ostringstream os;
      os << "E = " << E << " outside the table [" << std::exp(lo) << ", " << std::exp(hi) << "]";
      throw Error(ErrorCode::NoBracket, os.str());
    }
    return f(std::clamp(x, lo, hi));
  }
};

ActionTable::ActionTable(const PotentialSpec& pot, const Instanton& inst, std::vector<ScanRow> rows)
    : pot_(pot), inst_(std::make_shared<const Instanton>(inst)), rows_(std::move(rows)) {
  if (rows_.size() < 4) throw Error(ErrorCode::InvalidArgument, "action table needs at least 4 energies");
  std::vector<double> x, S, b, T;
  for (const ScanRow& r : rows_) {
    if (!E_.empty() && !(r.E > E_.back())) throw Error(ErrorCode::InvalidArgument, "energies must increase");
    E_.push_back(r.E);
    x.push_back(std::log(r.E));
    S.push_back(r.S_E);
    b.push_back(r.beta);
    T.push_back(r.T);
  }
  S_ = std::make_shared<const Interp>(x, S);
  beta_ = std::make_shared<const Interp>(x, b);
  T_ = std::make_shared<const Interp>(x, T);
}

double ActionTable::S_at(double E) const {
  if (E < E_.front()) return small_energy_action(pot_, *inst_, E);
  return (*S_)(E);
}

double ActionTable::beta_at(double E) const { return (*beta_)(E); }
double ActionTable::T_at(double E) const { return (*T_)(E); }

std::string ActionTable::digest() const {
  std::ostringstream os;
  os << pot_.canonical() << ";S0=" << num(inst_->S0);
  for (const ScanRow& r : rows_) os << ';' << num(r.E) << ',' << num(r.T) << ',' << num(r.S_E) << ',' << num(r.beta);
  return sha256_hex(os.str());
}

std::vector<double> default_energy_grid(const PotentialSpec& pot, int n, double lo_frac, double hi_frac) {
  if (n < 4 || !(0.0 < lo_frac && lo_frac < hi_frac && hi_frac < 1.0))
    throw Error(ErrorCode::InvalidArgument, "invalid energy grid");
  const double B = pot.barrier();
  std::vector<double> E(n);
  for (int i = 0; i < n; ++i) E[i] = B * lo_frac * std::pow(hi_frac / lo_frac, double(i) / (n - 1));
  return E;
}

ActionTable build_action_table(const PotentialSpec& pot, const Instanton& inst, const std::vector<double>& E_grid,
                               double tol, int jobs) {
  return ActionTable(pot, inst, libration_scan(pot, inst, E_grid, tol, jobs));
}

double small_energy_action(const PotentialSpec& pot, const Instanton& inst, double E) {
  const double l1 = inst.wells.left.lambda1;
  const double TE = truncation_time(pot, inst, E);
  return inst.S0 - (E / (2.0 * l1)) * (1.0 + 2.0 * std::log(2.0)) - 0.5 * E * TE;
}

// ---------------------------------------------------------------------------
// 2-D estimates

namespace {

double action_at(const ActionTable& t, double E, bool direct, double tol) {
  if (direct && E >= t.E_min()) {
    LibrationOptions o;
    o.tol = tol;
    o.with_monodromy = false;
    try {
      return compute_libration(t.potential(), t.instanton(), E, o).S_E;
    } catch (const Error&) {
      // fall through to the interpolant
    }
  }
  return t.S_at(E);
}

void require_assumptions(const PotentialSpec& pot, const Instanton& inst) {
  const AssumptionReport a = check_quasi1d_assumptions(pot);
  if (!a.gap_ok) {
    std::ostringstream os;
    os << "2 lambda1 = " << 2.0 * a.lambda1 << " >= lambda2 = " << a.lambda2;
    throw Error(ErrorCode::AssumptionViolated, os.str());
  }
  if (!inst.arrival_direction_ok) {
    std::ostringstream os;
    os << "irregular arrival direction, |cos| = " << inst.arrival_alignment;
    throw Error(ErrorCode::AssumptionViolated, os.str());
  }
}

std::string wkb_record(const WkbConstants& w) {
  std::ostringstream os;
  os << num(w.lambda1) << ',' << num(w.lambda2) << ',' << num(w.S0) << ',' << num(w.J) << ',' << num(w.sigma) << ','
     << num(w.P0) << ',' << num(w.D) << ',' << num(w.T_const);
  return os.str();
}

}  // namespace

SplittingEstimate ground_splitting(const ActionTable& table, double hbar) {
  require_hbar(hbar);
  const double l1 = table.instanton().wells.left.lambda1;
  const double E = l1 * hbar;
  const double S = table.S_at(E);
  InputRecord rec;
  rec.add("table", table.digest()).add("source", "table");
  return make_estimate(Method::Ground, 0, hbar, E, S / hbar, 2.0 * b_coeff(0) * l1 * hbar / kPi, std::move(rec));
}

SplittingEstimate ground_splitting(const PotentialSpec& pot, const Instanton& inst, double hbar) {
  require_hbar(hbar);
  const double l1 = inst.wells.left.lambda1;
  const double E = l1 * hbar;
  LibrationOptions o;
  o.tol = inst.tol > 0.0 ? inst.tol : 1e-10;
  o.with_monodromy = false;
  const double S = compute_libration(pot, inst, E, o).S_E;
  InputRecord rec;
  rec.add("potential", pot.canonical()).add("S0", inst.S0).add("source", "direct");
  return make_estimate(Method::Ground, 0, hbar, E, S / hbar, 2.0 * b_coeff(0) * l1 * hbar / kPi, std::move(rec));
}

Eq7Solution solve_energy_eq7(const ActionTable& table, int m, double hbar) {
  require_hbar(hbar);
  require_m(m);
  const HarmonicData& w = table.instanton().wells.left;
  const double rhs = hbar * (w.lambda1 * (1.0 + 2.0 * m) + w.lambda2);
  auto G = [&](double E) { return E + hbar * table.beta_at(E) - rhs; };

  const std::vector<double>& E = table.energies();
  std::vector<double> g(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) g[i] = E[i] + hbar * table.rows()[i].beta - rhs;
  Eq7Solution out;
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    if (!(g[i + 1] > g[i])) out.non_monotone = true;
  if (g.front() > 0.0) {
    std::ostringstream os;
    os << "G(E_min = " << E.front() << ") = " << g.front() << " > 0: root lies below the table";
    throw Error(ErrorCode::NoBracket, os.str());
  }
  std::size_t k = 0;
  while (k + 1 < g.size() && !(g[k] <= 0.0 && g[k + 1] > 0.0)) ++k;
  if (k + 1 == g.size()) {
    std::ostringstream os;
    os << "G has no sign change below E_max = " << E.back() << " (hbar = " << hbar << ", m = " << m << ")";
    throw Error(ErrorCode::NoBracket, os.str());
  }
  out.E_lo = E[k];
  out.E_hi = E[k + 1];
  out.E_tilde = g[k] == 0.0 ? E[k] : root_in(G, E[k], E[k + 1]);
  out.residual = G(out.E_tilde);
  return out;
}

SplittingEstimate theorem1_splitting(const ActionTable& table, int m, double hbar, const Theorem1Options& opt) {
  require_assumptions(table.potential(), table.instanton());
  const Eq7Solution e7 = solve_energy_eq7(table, m, hbar);
  const double l1 = table.instanton().wells.left.lambda1;
  const double S = action_at(table, e7.E_tilde, opt.direct_action, opt.tol);
  InputRecord rec;
  rec.add("table", table.digest()).add("direct", opt.direct_action ? 1.0 : 0.0).add("tol", opt.tol);
  return make_estimate(Method::Theorem1, m, hbar, e7.E_tilde, S / hbar, 2.0 * b_coeff(m) * l1 * hbar / kPi,
                       std::move(rec));
}

SplittingEstimate formula9_splitting(const PotentialSpec& pot, int m, double hbar, const WkbConstants& w) {
  require_hbar(hbar);
  require_m(m);
  if (!(w.D > 0.0 && w.sigma > 0.0 && w.J > 0.0 && w.P0 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "incomplete WKB constants");
  const double log_pref = (m + 2.0) * std::log(2.0) + (0.5 - m) * std::log(hbar) - std::lgamma(m + 1.0) -
                          0.5 * std::log(kPi) - 0.5 * std::log(w.D) +
                          0.5 * ((2.0 * m + 1.0) * std::log(w.lambda1) + std::log(w.lambda2)) +
                          2.0 * m * std::log(w.sigma) + 2.0 * std::log(w.J) + std::log(w.P0);
  InputRecord rec;
  rec.add("potential", pot.canonical()).add("wkb", wkb_record(w));
  return make_estimate(Method::Formula9, m, hbar, 0.0, w.S0 / hbar, std::exp(log_pref), std::move(rec));
}

SplittingEstimate formula11_splitting(const ActionTable& table, int m, double hbar, const WkbConstants& w,
                                      int factor) {
  require_hbar(hbar);
  require_m(m);
  if (factor != 1 && factor != 2) throw Error(ErrorCode::InvalidArgument, "factor must be 1 or 2");
  const double E = hbar * (1.0 + 2.0 * m) * w.lambda1;
  const double S = action_at(table, E, true, 1e-10);
  InputRecord rec;
  rec.add("table", table.digest()).add("wkb", wkb_record(w));
  return make_estimate(factor == 1 ? Method::Formula11 : Method::Formula11x2, m, hbar, E, S / hbar,
                       factor * b_coeff(m) * hbar * w.lambda1 / kPi * w.T_const, std::move(rec));
}

ActionRemainder action_expansion_check(const PotentialSpec& pot, const Instanton& inst, double E, double tol) {
  LibrationOptions o;
  o.tol = tol;
  o.with_monodromy = false;
  const double l1 = inst.wells.left.lambda1;
  ActionRemainder r;
  r.E = E;
  r.S_E = compute_libration(pot, inst, E, o).S_E;
  r.T_E = truncation_time(pot, inst, E);
  const double dS = r.S_E - inst.S0;
  r.r = dS + (E / (2.0 * l1)) * (1.0 + 2.0 * std::log(2.0)) + 0.5 * E * r.T_E;
  r.r_over_E = r.r / E;
  r.r_printed = dS - (E / (2.0 * l1)) * (1.0 + std::log(2.0)) - E * r.T_E;
  r.r_printed_over_E = r.r_printed / E;
  return r;
}

Prop2Result prop2_check(const PotentialSpec& pot, const Instanton& inst, double E, const WkbConstants& w,
                        double tol) {
  const AssumptionReport a = check_quasi1d_assumptions(pot);
  if (!a.gap_ok) throw Error(ErrorCode::AssumptionViolated, "the Floquet-rate formula requires 2 lambda1 < lambda2");
  LibrationOptions o;
  o.tol = tol;
  const Libration lib = compute_libration(pot, inst, E, o);
  Prop2Result r;
  r.E = E;
  r.T = lib.T;
  r.beta_direct = lib.beta;
  r.beta_formula = w.lambda2 - 4.0 * std::log(w.T_const) / lib.T;
  r.gap = std::abs(r.beta_direct - r.beta_formula);
  return r;
}

}  // namespace tunnel
