#include "cli/app.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/cache.hpp"
#include "cli/config.hpp"
#include "tunnelsplit/digest.hpp"
#include "tunnelsplit/dynamics.hpp"
#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/formulas.hpp"
#include "tunnelsplit/modeltori.hpp"
#include "tunnelsplit/spectral.hpp"
#include "tunnelsplit/wkb.hpp"

namespace tunnel::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// output helpers

std::string cell(double v) { return shortest(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }
std::string cell(std::string_view v) { return std::string(v); }

class Csv {
 public:
  explicit Csv(const std::string& header) : text_(header + "\n") {}
  template <class... T>
  void row(const T&... v) {
    text_ += join({cell(v)...}) + "\n";
  }
  const std::string& text() const { return text_; }

 private:
  static std::string join(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const std::string& c : cells) {
      if (!first) s += ",";
      s += c;
      first = false;
    }
    return s;
  }
  std::string text_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// runs f(0..n-1) on up to `jobs` threads; results in index order, the first
// failing index rethrown
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& f) {
  std::vector<std::optional<T>> res(n);
  std::vector<std::exception_ptr> err(n);
  auto work = [&](std::size_t start, std::size_t step) {
    for (std::size_t i = start; i < n; i += step) {
      try {
        res[i] = f(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs))));
  if (w == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < w; ++j) pool.emplace_back(work, j, w);
    for (auto& t : pool) t.join();
  }
  std::vector<T> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (err[i]) std::rethrow_exception(err[i]);
    out.push_back(std::move(*res[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// spectral results <-> json

json to_json(const SpectralResult& r) {
  json j;
  j["hbar"] = r.hbar;
  j["eigenvalues"] = r.eigenvalues;
  j["parities"] = r.parities;
  j["residuals"] = r.residuals;
  json labels = json::array();
  for (const Label& l : r.labels) labels.push_back({l.m, l.n, l.ambiguous});
  j["labels"] = labels;
  json pairs = json::array();
  for (const PairSplitting& p : r.pairs) {
    pairs.push_back({{"m", p.label.m},
                     {"n", p.label.n},
                     {"ambiguous", p.label.ambiguous},
                     {"energy_m", p.energy_label.m},
                     {"energy_n", p.energy_label.n},
                     {"E_even", p.E_even},
                     {"E_odd", p.E_odd},
                     {"delta_direct", p.delta_direct},
                     {"delta_flux", p.delta_flux},
                     {"delta", p.delta}});
  }
  j["pairs"] = pairs;
  j["label_ambiguity"] = r.label_ambiguity;
  return j;
}

SpectralResult spectral_from_json(const json& j, int mmax) {
  SpectralResult r;
  r.hbar = j.at("hbar").get<double>();
  r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  r.parities = j.at("parities").get<std::vector<int>>();
  r.residuals = j.at("residuals").get<std::vector<double>>();
  for (const json& l : j.at("labels")) r.labels.push_back(Label{l[0].get<int>(), l[1].get<int>(), l[2].get<bool>()});
  for (const json& p : j.at("pairs")) {
    PairSplitting s;
    s.label = Label{p.at("m").get<int>(), p.at("n").get<int>(), p.at("ambiguous").get<bool>()};
    s.energy_label = Label{p.at("energy_m").get<int>(), p.at("energy_n").get<int>(), false};
    s.E_even = p.at("E_even").get<double>();
    s.E_odd = p.at("E_odd").get<double>();
    s.delta_direct = p.at("delta_direct").get<double>();
    s.delta_flux = p.at("delta_flux").get<double>();
    s.delta = p.at("delta").get<double>();
    r.pairs.push_back(s);
  }
  r.label_ambiguity = j.at("label_ambiguity").get<bool>();
  for (const PairSplitting& ps : r.pairs)
    if (!ps.label.ambiguous && ps.label.n == 0 && ps.label.m <= mmax) r.splittings[{ps.label.m, 0}] = ps.delta;
  return r;
}

// ---------------------------------------------------------------------------
// run context

struct Exact {
  SpectralResult spectrum;
  std::optional<double> merge_gap;
  std::string key;
};

struct HerringCached {
  double delta = 0.0, edge_ratio = 0.0, E_left = 0.0, wall = 0.0;
  std::string key;
};

class Context {
 public:
  Context(ExperimentConfig cfg, fs::path out_dir, fs::path cache_dir, int jobs, std::uint64_t seed, std::string command,
          std::ostream& out, std::ostream& err)
      : cfg(std::move(cfg)),
        pot(this->cfg.potential()),
        out_dir(std::move(out_dir)),
        cache(std::move(cache_dir)),
        jobs(jobs),
        seed(seed),
        command(std::move(command)),
        out(out),
        err(err) {}

  ExperimentConfig cfg;
  PotentialSpec pot;
  fs::path out_dir;
  Cache cache;
  int jobs;
  std::uint64_t seed;
  std::string command;
  std::ostream& out;
  std::ostream& err;
  std::set<std::string> upstream;

  const Instanton& instanton() {
    if (!inst_) {
      inst_ = std::make_unique<Instanton>(compute_instanton(pot, cfg.ode_tol));
      upstream.insert("instanton:" + sha256_hex(pot.canonical() + ";tol=" + fmt17(cfg.ode_tol)));
    }
    return *inst_;
  }

  const WkbConstants& wkb() {
    if (!wkb_) wkb_ = std::make_unique<WkbConstants>(compute_wkb(pot, instanton(), cfg.ode_tol));
    return *wkb_;
  }

  std::vector<double> energy_grid() const {
    if (!cfg.E.empty()) return cfg.E;
    return default_energy_grid(pot, cfg.E_count, cfg.E_lo_frac, cfg.E_hi_frac);
  }

  const ActionTable& table() {
    if (!table_) {
      table_ = std::make_unique<ActionTable>(build_action_table(pot, instanton(), energy_grid(), cfg.ode_tol, jobs));
      upstream.insert("action-table:" + table_->digest());
    }
    return *table_;
  }

  EigenOptions eig() const {
    EigenOptions o;
    o.tol = cfg.eigen_tol;
    o.seed = seed;
    return o;
  }

  std::string grid_record() const {
    const GridSpec& g = cfg.grid;
    return "L1=" + fmt17(g.L1) + ";L2=" + fmt17(g.L2) + ";n1=" + std::to_string(g.n1) + ";n2=" + std::to_string(g.n2);
  }

  Exact exact(double hbar, int mmax) {
    const std::string key = sha256_hex("spectral;v1;" + pot.canonical() + ";" + grid_record() + ";hbar=" + fmt17(hbar) +
                                       ";mmax=" + std::to_string(mmax) + ";tol=" + fmt17(cfg.eigen_tol) +
                                       ";seed=" + std::to_string(seed) + ";mode=" + cfg.parity_mode);
    const auto t0 = std::chrono::steady_clock::now();
    Exact e;
    e.key = key;
    if (auto hit = cache.load(key)) {
      e.spectrum = spectral_from_json(hit->at("spectrum"), mmax);
      if (hit->contains("merge_gap")) e.merge_gap = hit->at("merge_gap").get<double>();
      log("[cache] hit spectral " + key.substr(0, 12) + " hbar=" + shortest(hbar), t0);
    } else {
      e.spectrum = splittings(pot, hbar, cfg.grid, mmax, eig());
      json payload;
      payload["spectrum"] = to_json(e.spectrum);
      if (cfg.parity_mode == "full") {
        e.merge_gap = full_grid_merge_gap(e.spectrum, hbar);
        payload["merge_gap"] = *e.merge_gap;
      }
      cache.store(key, "spectral", payload);
      log("[cache] miss spectral " + key.substr(0, 12) + " hbar=" + shortest(hbar) + " computed", t0);
    }
    upstream.insert("spectral:" + key);
    return e;
  }

  HerringCached herring(double hbar, int m) {
    const std::string key = sha256_hex("herring;v1;" + pot.canonical() + ";" + grid_record() + ";hbar=" + fmt17(hbar) +
                                       ";m=" + std::to_string(m) + ";delta=" + fmt17(cfg.herring_delta) +
                                       ";window=" + fmt17(cfg.herring_window) + ";tol=" + fmt17(cfg.eigen_tol) +
                                       ";seed=" + std::to_string(seed));
    const auto t0 = std::chrono::steady_clock::now();
    HerringCached h;
    h.key = key;
    if (auto hit = cache.load(key)) {
      h.delta = hit->at("delta").get<double>();
      h.edge_ratio = hit->at("edge_ratio").get<double>();
      h.E_left = hit->at("E_left").get<double>();
      h.wall = hit->at("wall").get<double>();
      log("[cache] hit herring " + key.substr(0, 12) + " hbar=" + shortest(hbar), t0);
    } else {
      HerringOptions o;
      o.delta = cfg.herring_delta;
      o.window = cfg.herring_window;
      o.eig = eig();
      const HerringResult r = herring_splitting(pot, hbar, cfg.grid, m, o);
      h.delta = r.delta;
      h.edge_ratio = r.edge_ratio;
      h.E_left = r.E_left;
      h.wall = cfg.herring_delta < 0.0 ? 0.5 * pot.coefficients().a : cfg.herring_delta;
      cache.store(key, "herring", json{{"delta", h.delta}, {"edge_ratio", h.edge_ratio}, {"E_left", h.E_left},
                                       {"wall", h.wall}});
      log("[cache] miss herring " + key.substr(0, 12) + " hbar=" + shortest(hbar) + " computed", t0);
    }
    upstream.insert("herring:" + key);
    return h;
  }

  void log(const std::string& msg, std::chrono::steady_clock::time_point t0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " in %.3f s", seconds_since(t0));
    std::lock_guard<std::mutex> lock(log_mutex_);
    err << msg << buf << "\n";
  }

  void emit(const std::string& name, const Csv& csv) {
    fs::create_directories(out_dir);
    if (cfg.wants("csv")) atomic_write(out_dir / (name + ".csv"), csv.text());
    if (cfg.wants("json")) {
      json rec;
      rec["schema_version"] = 1;
      rec["config_digest"] = cfg.digest();
      rec["command"] = command;
      rec["artifact"] = name;
      rec["timestamp"] = utc_now();
      rec["payload_csv"] = csv.text();
      rec["payload_sha256"] = sha256_hex(csv.text());
      rec["upstream"] = std::vector<std::string>(upstream.begin(), upstream.end());
      atomic_write(out_dir / (name + ".json"), rec.dump(2) + "\n");
    }
  }

  std::mutex log_mutex_;

 private:
  double full_grid_merge_gap(const SpectralResult& s, double hbar) {
    const int count = std::min<int>(50, static_cast<int>(s.eigenvalues.size()));
    const double top = s.eigenvalues.back();
    const Operator full = build_operator(pot, hbar, cfg.grid, Parity::None, top);
    const Eigenpairs ep = lowest_eigenpairs(full.A, count, eig());
    double gap = 0.0;
    for (int k = 0; k < count; ++k)
      gap = std::max(gap, std::abs(ep.values[k] - s.eigenvalues[k]) / std::max(1.0, std::abs(s.eigenvalues[k])));
    return gap;
  }

  std::unique_ptr<Instanton> inst_;
  std::unique_ptr<WkbConstants> wkb_;
  std::unique_ptr<ActionTable> table_;
};

int max_m(const std::vector<int>& ms) { return *std::max_element(ms.begin(), ms.end()); }

// ---------------------------------------------------------------------------
// commands

void cmd_inspect(Context& c) {
  const AssumptionReport a = check_quasi1d_assumptions(c.pot);
  const WellPair w = locate_minima(c.pot);
  const Coefficients& k = c.pot.coefficients();
  Csv csv("family,alpha,a,omega,c,d,lambda1,lambda2,ratio,barrier,saddle_x2,minimum_x1,minimum_x2,gap_ok");
  csv.row(c.cfg.family, k.alpha, k.a, k.omega, k.c, k.d, a.lambda1, a.lambda2, a.ratio, a.barrier, c.pot.saddle()[1],
          w.right.minimum[0], w.right.minimum[1], a.gap_ok);
  c.emit("inspect-potential", csv);
  char buf[160];
  std::snprintf(buf, sizeof buf, "lambda1=%.10g lambda2=%.10g barrier=%.10g gap_ok=%s", a.lambda1, a.lambda2,
                a.barrier, a.gap_ok ? "true" : "false");
  c.out << buf << "\n";
}

void cmd_instanton(Context& c) {
  const Instanton& in = c.instanton();
  Csv csv("S0,P0,sigma,x0_1,x0_2,t_trunc,eps_trunc,arrival_ok,arrival_alignment,match_residual,curvature_max");
  csv.row(in.S0, in.P0, in.sigma, in.x0[0], in.x0[1], in.t_trunc, in.eps_trunc, in.arrival_direction_ok,
          in.arrival_alignment, in.match_residual, in.curvature_max);
  c.emit("instanton", csv);
  Csv path("t,x1,x2,xi1,xi2");
  const int n = 401;
  const double t0 = in.t_start(), t1 = in.t_end();
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * i / (n - 1);
    const PhasePoint p = in.at(t);
    path.row(t, p.x[0], p.x[1], p.xi[0], p.xi[1]);
  }
  c.emit("instanton-path", path);
  char buf[160];
  std::snprintf(buf, sizeof buf, "S0=%.12g P0=%.12g sigma=%.12g arrival_ok=%s", in.S0, in.P0, in.sigma,
                in.arrival_direction_ok ? "true" : "false");
  c.out << buf << "\n";
}

void cmd_scan(Context& c) {
  const ActionTable& t = c.table();
  Csv csv("E,T,S_E,beta,xE_2,yL_1,yL_2,theta");
  for (const ScanRow& r : t.rows()) csv.row(r.E, r.T, r.S_E, r.beta, r.xE[1], r.yL[0], r.yL[1], r.theta);
  c.emit("libration-scan", csv);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu librations on [%.6g, %.6g]", t.rows().size(), t.E_min(), t.E_max());
  c.out << buf << "\n";
}

void cmd_wkb(Context& c) {
  const WkbConstants& w = c.wkb();
  Csv csv("lambda1,lambda2,S0,J,sigma,x0_1,x0_2,P0,D,T");
  csv.row(w.lambda1, w.lambda2, w.S0, w.J, w.sigma, w.x0[0], w.x0[1], w.P0, w.D, w.T_const);
  c.emit("wkb-constants", csv);
  char buf[200];
  std::snprintf(buf, sizeof buf, "S0=%.12g J=%.10g sigma=%.10g P0=%.10g D=%.10g T=%.10g", w.S0, w.J, w.sigma, w.P0,
                w.D, w.T_const);
  c.out << buf << "\n";
}

void cmd_modeltori(Context& c) {
  const WellPair w = locate_minima(c.pot);
  Csv csv("hbar,k1,k2,iota1,iota2,E,yL_1,yL_2,x_tilde_2,action,gradient,curvature,status");
  int rows = 0, degenerate = 0;
  for (double h : c.cfg.hbar) {
    for (int k1 : c.cfg.m) {
      for (int k2 : c.cfg.k2) {
        try {
          const ModelTorus L = ebk_torus(w.left, {k1, k2}, h, c.cfg.maslov_shift);
          const ModelTorus R = ebk_torus(w.right, {k1, k2}, h, c.cfg.maslov_shift);
          const TunnelPath p = tunnel_distance(L, R, false);
          degenerate += p.degenerate;
          csv.row(h, k1, k2, L.iota[0], L.iota[1], L.E, p.yL[0], p.yL[1], p.x_tilde[1], p.action, p.gradient,
                  p.curvature, std::string(p.degenerate ? "degenerate" : "ok"));
        } catch (const Error& e) {
          csv.row(h, k1, k2, "", "", "", "", "", "", "", "", "", std::string(to_string(e.code())));
        }
        ++rows;
      }
    }
  }
  c.emit("modeltori-table", csv);
  c.out << rows << " tori, " << degenerate << " degenerate tunnel paths\n";
}

std::vector<SplittingEstimate> theory_estimates(Context& c, int m, double h) {
  std::vector<SplittingEstimate> v;
  const ActionTable& t = c.table();
  const WkbConstants& w = c.wkb();
  try {
    v.push_back(theorem1_splitting(t, m, h, Theorem1Options{true, c.cfg.ode_tol}));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AssumptionViolated) throw;
    c.err << "theorem1 skipped: " << e.what() << "\n";
  }
  v.push_back(formula9_splitting(c.pot, m, h, w));
  v.push_back(formula11_splitting(t, m, h, w, 1));
  v.push_back(formula11_splitting(t, m, h, w, 2));
  if (m == 0) v.push_back(ground_splitting(t, h));
  const Coefficients& k = c.pot.coefficients();
  if (k.d == 0.0) {
    try {
      v.push_back(excited_splitting_1d(slice_x1(c.pot), m, h));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EnergyOutOfRegime) throw;
      c.err << "excited1d skipped: " << e.what() << "\n";
    }
  }
  return v;
}

void cmd_theory(Context& c) {
  Csv csv("method,m,hbar,energy,exponent,prefactor,value,inputs_digest");
  int n = 0;
  for (double h : c.cfg.hbar)
    for (int m : c.cfg.m)
      for (const SplittingEstimate& s : theory_estimates(c, m, h)) {
        csv.row(to_string(s.method), s.m, s.hbar, s.energy, s.exponent, s.prefactor, s.value, s.inputs_digest);
        ++n;
      }
  c.emit("splitting-theory", csv);
  c.out << n << " estimates\n";
}

std::vector<Exact> exact_sweep(Context& c) {
  const int mmax = max_m(c.cfg.m);
  const std::vector<double>& hs = c.cfg.hbar;
  return parallel_map<Exact>(hs.size(), c.jobs, [&](std::size_t i) { return c.exact(hs[i], mmax); });
}

void dump_grids(Context& c, double h, int count) {
  for (Parity p : {Parity::Even, Parity::Odd}) {
    const Operator op = build_operator(c.pot, h, c.cfg.grid, p);
    const Eigenpairs ep = lowest_eigenpairs(op.A, count, c.eig());
    const std::string tag = p == Parity::Even ? "even" : "odd";
    for (int k = 0; k < count; ++k) {
      const Eigen::MatrixXd u = op.to_full(ep.vectors.col(k));
      const std::string base = "eigen_h" + shortest(h) + "_" + tag + "_" + std::to_string(k);
      std::string bytes(reinterpret_cast<const char*>(u.data()), sizeof(double) * static_cast<std::size_t>(u.size()));
      atomic_write(c.out_dir / (base + ".bin"), bytes);
      json side{{"schema_version", 1},     {"dtype", "float64"},
                {"order", "column-major (i, j), i along x1"},
                {"n1", c.cfg.grid.n1},     {"n2", c.cfg.grid.n2},
                {"L1", c.cfg.grid.L1},     {"L2", c.cfg.grid.L2},
                {"hbar", h},               {"parity", tag},
                {"index", k},              {"energy", ep.values[k]},
                {"normalization", "sum u^2 h1 h2 = 1"}};
      atomic_write(c.out_dir / (base + ".json"), side.dump(2) + "\n");
    }
  }
}

void cmd_exact(Context& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Exact> ex = exact_sweep(c);
  Csv csv("hbar,m,n,ambiguous,E_even,E_odd,delta_direct,delta_flux,delta,merge_gap");
  for (const Exact& e : ex)
    for (const PairSplitting& p : e.spectrum.pairs)
      csv.row(e.spectrum.hbar, p.label.m, p.label.n, p.label.ambiguous, p.E_even, p.E_odd, p.delta_direct,
              p.delta_flux, p.delta, e.merge_gap ? shortest(*e.merge_gap) : std::string());
  c.emit("splitting-exact", csv);
  if (c.cfg.wants("grid"))
    for (std::size_t i = 0; i < ex.size(); ++i)
      dump_grids(c, c.cfg.hbar[i], std::min<int>(4, static_cast<int>(ex[i].spectrum.pairs.size())));
  std::ostringstream os;
  os << ex.size() << " spectra";
  for (const Exact& e : ex) {
    const auto it = e.spectrum.splittings.find({0, 0});
    if (it != e.spectrum.splittings.end()) os << " | hbar=" << shortest(e.spectrum.hbar) << " dE0=" << shortest(it->second);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, " | %.3f s", seconds_since(t0));
  c.out << os.str() << buf << "\n";
}

void cmd_compare(Context& c) {
  const std::vector<Exact> ex = exact_sweep(c);
  Csv csv("method,m,hbar,exponent,prefactor,value,exact,ratio");
  std::ostringstream summary;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const double h = c.cfg.hbar[i];
    for (int m : c.cfg.m) {
      const double exact = ex[i].spectrum.splitting(m);
      for (const SplittingEstimate& s : theory_estimates(c, m, h)) {
        csv.row(to_string(s.method), s.m, h, s.exponent, s.prefactor, s.value, exact, s.value / exact);
        if (s.method == Method::Theorem1) summary << " theorem1/exact(m=" << m << ",hbar=" << shortest(h) << ")=" << s.value / exact;
      }
      csv.row(std::string("exact"), m, h, "", "", exact, exact, 1.0);
    }
  }
  c.emit("splitting-compare", csv);
  c.out << "compared" << summary.str() << "\n";
}

void cmd_herring(Context& c) {
  const std::vector<Exact> ex = exact_sweep(c);
  Csv csv("hbar,m,wall,herring,exact,ratio,edge_ratio,E_left");
  std::ostringstream summary;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const double h = c.cfg.hbar[i];
    for (int m : c.cfg.m) {
      const double exact = ex[i].spectrum.splitting(m);
      const HerringCached r = c.herring(h, m);
      csv.row(h, m, r.wall, r.delta, exact, r.delta / exact, r.edge_ratio, r.E_left);
      summary << " herring/exact(m=" << m << ",hbar=" << shortest(h) << ")=" << r.delta / exact;
    }
  }
  c.emit("herring", csv);
  c.out << "herring" << summary.str() << "\n";
}

void cmd_prop2(Context& c, const std::vector<double>& E_override) {
  std::vector<double> Es = E_override;
  if (Es.empty())
    for (double f : c.cfg.prop2_frac) Es.push_back(f * c.pot.barrier());
  const WkbConstants& w = c.wkb();
  Csv csv("E,E_over_barrier,T,beta_direct,beta_formula,gap,gap_over_lambda2");
  std::ostringstream summary;
  for (double E : Es) {
    const Prop2Result r = prop2_check(c.pot, c.instanton(), E, w, c.cfg.ode_tol);
    csv.row(E, E / c.pot.barrier(), r.T, r.beta_direct, r.beta_formula, r.gap, r.gap / w.lambda2);
    summary << " gap(E=" << shortest(E) << ")=" << r.gap;
  }
  c.emit("prop2-check", csv);
  c.out << "prop2" << summary.str() << "\n";
}

void cmd_action(Context& c, const std::vector<double>& E_override) {
  const std::vector<double> Es = E_override.empty() ? c.cfg.check_E : E_override;
  Csv csv("E,S_E,T_E,r,r_over_E,r_printed,r_printed_over_E");
  std::ostringstream summary;
  for (double E : Es) {
    const ActionRemainder r = action_expansion_check(c.pot, c.instanton(), E, c.cfg.ode_tol);
    csv.row(E, r.S_E, r.T_E, r.r, r.r_over_E, r.r_printed, r.r_printed_over_E);
    summary << " r/E(" << shortest(E) << ")=" << r.r_over_E;
  }
  c.emit("action-check", csv);
  c.out << "action" << summary.str() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tunnelling splittings in symmetric double wells"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  std::string cache_dir = ".tunnelsplit-cache";
  std::optional<std::string> out_dir;
  int jobs = 1;
  std::uint64_t seed = 12345;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--set", sets, "override, section.key=value (repeatable)");
  app.add_option("--cache-dir", cache_dir, "cache directory");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "eigensolver start-vector seed");

  std::vector<double> hbar_opt, E_opt;
  std::vector<int> m_opt;
  int keep_latest = 1;
  const std::vector<std::pair<std::string, std::string>> names{
      {"inspect-potential", "minima, saddle, harmonic frequencies and the gap condition"},
      {"instanton", "heteroclinic orbit, its action and the sampled path"},
      {"libration-scan", "period, action and Floquet rate of librations over an energy grid"},
      {"wkb-constants", "constants of the instanton prefactor"},
      {"modeltori-table", "EBK tori and tunnel distances between the wells"},
      {"splitting-theory", "asymptotic splitting estimates"},
      {"splitting-exact", "parity splittings by exact diagonalization"},
      {"splitting-compare", "estimates against the exact splittings"},
      {"herring", "surface-integral splitting against the exact one"},
      {"prop2-check", "Floquet rate against its small-energy formula"},
      {"action-check", "remainder of the small-energy action expansion"}};
  for (const auto& [n, help] : names) {
    CLI::App* sub = app.add_subcommand(n, help);
    sub->add_option("--hbar", hbar_opt, "hbar values (overrides sweep.hbar)");
    sub->add_option("--m", m_opt, "m values (overrides sweep.m)");
    sub->add_option("--E", E_opt, "energies (libration-scan, prop2-check, action-check)");
  }
  CLI::App* gc = app.add_subcommand("cache-gc", "remove all but the newest cache entries");
  gc->add_option("--keep-latest", keep_latest, "entries to keep")->check(CLI::NonNegativeNumber);

  std::vector<std::string> argv_store{"tunnelsplit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gc->parsed()) {
      const GcReport r = cache_gc(cache_dir, keep_latest);
      for (const std::string& u : r.unremovable) err << "unremovable: " << u << "\n";
      out << "removed " << r.removed << "\n";
      return 0;
    }
    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> overrides = sets;
    ExperimentConfig cfg = load_config(config_path, overrides);
    if (!hbar_opt.empty()) {
      for (double h : hbar_opt)
        if (!(h > 0.0)) throw Error(ErrorCode::ConfigError, "--hbar must be positive");
      cfg.hbar = hbar_opt;
    }
    if (!m_opt.empty()) {
      for (int m : m_opt)
        if (m < 0) throw Error(ErrorCode::ConfigError, "--m must be >= 0");
      cfg.m = m_opt;
    }
    if (out_dir) cfg.out_dir = *out_dir;
    for (double E : E_opt)
      if (!(E > 0.0)) throw Error(ErrorCode::ConfigError, "--E must be positive");
    if (sub->get_name() == "libration-scan" && !E_opt.empty()) cfg.E = E_opt;

    Context c(cfg, cfg.out_dir, cache_dir, jobs, seed, sub->get_name(), out, err);
    const std::string& n = sub->get_name();
    if (n == "inspect-potential") cmd_inspect(c);
    else if (n == "instanton") cmd_instanton(c);
    else if (n == "libration-scan") cmd_scan(c);
    else if (n == "wkb-constants") cmd_wkb(c);
    else if (n == "modeltori-table") cmd_modeltori(c);
    else if (n == "splitting-theory") cmd_theory(c);
    else if (n == "splitting-exact") cmd_exact(c);
    else if (n == "splitting-compare") cmd_compare(c);
    else if (n == "herring") cmd_herring(c);
    else if (n == "prop2-check") cmd_prop2(c, E_opt);
    else if (n == "action-check") cmd_action(c, E_opt);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::ConfigError) return 1;
    if (e.code() == ErrorCode::CacheCorruption) return 3;
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tunnel::cli
