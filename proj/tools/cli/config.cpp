#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tunnelsplit/digest.hpp"
#include "tunnelsplit/errors.hpp"

namespace tunnel::cli {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"potential", {"family", "alpha", "a", "omega", "c", "d", "box_factor"}},
      {"grid", {"L1", "L2", "n1", "n2", "L_1d", "N_1d"}},
      {"sweep", {"hbar", "m", "k2", "E", "E_count", "E_lo_frac", "E_hi_frac", "check_E", "prop2_frac"}},
      {"tolerances", {"ode", "eigen"}},
      {"herring", {"delta", "window"}},
      {"output", {"dir", "formats"}},
      {"flags", {"maslov_shift", "parity_mode"}},
  };
  return s;
}

bool known(const std::string& section, const std::string& key) {
  const auto it = schema().find(section);
  return it != schema().end() && std::find(it->second.begin(), it->second.end(), key) != it->second.end();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    fail(key + ": not a number: '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(key + ": not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& s : split_list(v)) out.push_back(to_int(key, s));
  return out;
}

void positive(const std::string& key, double v) {
  if (!(v > 0.0)) fail(key + " must be positive");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

void apply(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  const std::string k = section + "." + key;
  if (section == "potential") {
    if (key == "family") {
      try {
        family_from_string(v);
      } catch (const Error& e) {
        fail(k + ": " + e.what());
      }
      c.family = v;
    } else if (key == "alpha") c.coeffs.alpha = to_double(k, v);
    else if (key == "a") c.coeffs.a = to_double(k, v);
    else if (key == "omega") c.coeffs.omega = to_double(k, v);
    else if (key == "c") c.coeffs.c = to_double(k, v);
    else if (key == "d") c.coeffs.d = to_double(k, v);
    else if (key == "box_factor") c.box_factor = to_double(k, v);
  } else if (section == "grid") {
    if (key == "L1") c.grid.L1 = to_double(k, v);
    else if (key == "L2") c.grid.L2 = to_double(k, v);
    else if (key == "n1") c.grid.n1 = to_int(k, v);
    else if (key == "n2") c.grid.n2 = to_int(k, v);
    else if (key == "L_1d") c.grid1d.L = to_double(k, v);
    else if (key == "N_1d") c.grid1d.N = to_int(k, v);
  } else if (section == "sweep") {
    if (key == "hbar") c.hbar = to_doubles(k, v);
    else if (key == "m") c.m = to_ints(k, v);
    else if (key == "k2") c.k2 = to_ints(k, v);
    else if (key == "E") c.E = v == "auto" ? std::vector<double>{} : to_doubles(k, v);
    else if (key == "E_count") c.E_count = to_int(k, v);
    else if (key == "E_lo_frac") c.E_lo_frac = to_double(k, v);
    else if (key == "E_hi_frac") c.E_hi_frac = to_double(k, v);
    else if (key == "check_E") c.check_E = to_doubles(k, v);
    else if (key == "prop2_frac") c.prop2_frac = to_doubles(k, v);
  } else if (section == "tolerances") {
    if (key == "ode") c.ode_tol = to_double(k, v);
    else if (key == "eigen") c.eigen_tol = to_double(k, v);
  } else if (section == "herring") {
    if (key == "delta") c.herring_delta = to_double(k, v);
    else if (key == "window") c.herring_window = to_double(k, v);
  } else if (section == "output") {
    if (key == "dir") c.out_dir = v;
    else if (key == "formats") c.formats = split_list(v);
  } else if (section == "flags") {
    if (key == "maslov_shift") c.maslov_shift = to_bool(k, v);
    else if (key == "parity_mode") c.parity_mode = v;
  }
}

void validate(const ExperimentConfig& c) {
  positive("potential.alpha", c.coeffs.alpha);
  positive("potential.a", c.coeffs.a);
  positive("potential.omega", c.coeffs.omega);
  positive("potential.box_factor", c.box_factor);
  if (c.coeffs.c < 0.0) fail("potential.c must be >= 0");
  positive("grid.L1", c.grid.L1);
  positive("grid.L2", c.grid.L2);
  if (c.grid.n1 < 5 || c.grid.n1 % 2 == 0) fail("grid.n1 must be odd and >= 5");
  if (c.grid.n2 < 3) fail("grid.n2 must be >= 3");
  positive("grid.L_1d", c.grid1d.L);
  if (c.grid1d.N < 4) fail("grid.N_1d must be >= 4");
  if (c.hbar.empty()) fail("sweep.hbar is empty");
  for (double h : c.hbar) positive("sweep.hbar", h);
  if (c.m.empty()) fail("sweep.m is empty");
  for (int m : c.m)
    if (m < 0) fail("sweep.m must be >= 0");
  for (int k : c.k2)
    if (k < 0) fail("sweep.k2 must be >= 0");
  for (double e : c.E) positive("sweep.E", e);
  if (!std::is_sorted(c.E.begin(), c.E.end())) fail("sweep.E must be increasing");
  if (c.E_count < 4) fail("sweep.E_count must be >= 4");
  if (!(0.0 < c.E_lo_frac && c.E_lo_frac < c.E_hi_frac && c.E_hi_frac < 1.0))
    fail("need 0 < sweep.E_lo_frac < sweep.E_hi_frac < 1");
  for (double e : c.check_E) positive("sweep.check_E", e);
  for (double f : c.prop2_frac)
    if (!(f > 0.0 && f < 1.0)) fail("sweep.prop2_frac must lie in (0, 1)");
  positive("tolerances.ode", c.ode_tol);
  positive("tolerances.eigen", c.eigen_tol);
  if (c.out_dir.empty()) fail("output.dir is empty");
  for (const std::string& f : c.formats)
    if (f != "csv" && f != "json" && f != "grid") fail("output.formats: unknown format '" + f + "'");
  if (c.parity_mode != "parity" && c.parity_mode != "full") fail("flags.parity_mode must be parity or full");
}

}  // namespace

PotentialSpec ExperimentConfig::potential() const {
  return PotentialSpec(family_from_string(family), coeffs, box_factor);
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"potential.family", family},
      {"potential.alpha", fmt17(coeffs.alpha)},
      {"potential.a", fmt17(coeffs.a)},
      {"potential.omega", fmt17(coeffs.omega)},
      {"potential.c", fmt17(coeffs.c)},
      {"potential.d", fmt17(coeffs.d)},
      {"potential.box_factor", fmt17(box_factor)},
      {"grid.L1", fmt17(grid.L1)},
      {"grid.L2", fmt17(grid.L2)},
      {"grid.n1", std::to_string(grid.n1)},
      {"grid.n2", std::to_string(grid.n2)},
      {"grid.L_1d", fmt17(grid1d.L)},
      {"grid.N_1d", std::to_string(grid1d.N)},
      {"sweep.hbar", join(hbar)},
      {"sweep.m", join(m)},
      {"sweep.k2", join(k2)},
      {"sweep.E", E.empty() ? "auto" : join(E)},
      {"sweep.E_count", std::to_string(E_count)},
      {"sweep.E_lo_frac", fmt17(E_lo_frac)},
      {"sweep.E_hi_frac", fmt17(E_hi_frac)},
      {"sweep.check_E", join(check_E)},
      {"sweep.prop2_frac", join(prop2_frac)},
      {"tolerances.ode", fmt17(ode_tol)},
      {"tolerances.eigen", fmt17(eigen_tol)},
      {"herring.delta", fmt17(herring_delta)},
      {"herring.window", fmt17(herring_window)},
      {"output.dir", out_dir},
      {"output.formats", join(formats)},
      {"flags.maslov_shift", maslov_shift ? "true" : "false"},
      {"flags.parity_mode", parity_mode},
  };
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

std::string ExperimentConfig::digest() const {
  // where results are written does not change them
  std::istringstream in(canonical());
  std::string line, kept;
  while (std::getline(in, line))
    if (line.rfind("output.", 0) != 0) kept += line + "\n";
  return sha256_hex(kept);
}

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ExperimentConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  ExperimentConfig c;
  if (path) {
    pt::ptree tree;
    try {
      pt::read_ini(*path, tree);
    } catch (const pt::ini_parser_error& e) {
      fail(std::string("cannot read config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (!schema().count(section)) {
        if (body.empty()) fail("key '" + section + "' outside any section");
        fail("unknown section [" + section + "]");
      }
      for (const auto& [key, value] : body) {
        if (!known(section, key)) fail("unknown key '" + key + "' in [" + section + "]");
        apply(c, section, key, value.data());
      }
    }
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      fail("override must read section.key=value: '" + o + "'");
    const std::string section = trim(o.substr(0, dot)), key = trim(o.substr(dot + 1, eq - dot - 1));
    if (!known(section, key)) fail("unknown override key '" + section + "." + key + "'");
    apply(c, section, key, o.substr(eq + 1));
  }
  validate(c);
  return c;
}

}  // namespace tunnel::cli
