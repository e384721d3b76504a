#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tunnelsplit/potential.hpp"
#include "tunnelsplit/spectral.hpp"

namespace tunnel::cli {

struct ExperimentConfig {
  // [potential]
  std::string family = "curved-quartic";
  Coefficients coeffs{0.25, 1.0, 2.5, 0.0, 0.3};
  double box_factor = 2.5;
  // [grid]
  GridSpec grid{2.2, 1.2, 385, 257};
  Grid1D grid1d{2.5, 2000};
  // [sweep]
  std::vector<double> hbar{0.12, 0.08, 0.05};
  std::vector<int> m{0};
  std::vector<int> k2{0};
  std::vector<double> E;  // empty: geometric grid below
  int E_count = 36;
  double E_lo_frac = 2e-3;
  double E_hi_frac = 0.9;
  std::vector<double> check_E{0.08, 0.04, 0.02, 0.01};
  std::vector<double> prop2_frac{0.1, 0.02};
  // [tolerances]
  double ode_tol = 1e-10;
  double eigen_tol = 1e-9;
  // [herring]
  double herring_delta = -1.0;
  double herring_window = -1.0;
  // [output]
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  // [flags]
  bool maslov_shift = true;
  std::string parity_mode = "parity";

  PotentialSpec potential() const;
  /// section.key=value lines, sorted, floats at 17 significant digits.
  std::string canonical() const;
  /// SHA-256 of the canonical form without the [output] section.
  std::string digest() const;
  bool wants(const std::string& format) const;
};

/// Defaults, then the INI file (if any), then `section.key=value` overrides.
/// Unknown sections or keys and malformed values throw ConfigError.
ExperimentConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

}  // namespace tunnel::cli
