#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "malab/harness.hpp"

namespace malab {

/// Grids, heights and thresholds of the acceptance run. Every field can be
/// overridden from a flat TOML file with the same key names.
struct AcceptanceConfig {
  // Monge-Ampère oracle
  std::vector<double> ma_h_2d{1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<double> ma_h_3d{1.0 / 8, 1.0 / 16, 1.0 / 32};
  double ma_error_factor = 5.0;  // max error <= factor * h²
  double ma_order = 1.7;
  double ma_seconds = 60.0;      // per solve

  // Radial oracles for g
  double h_2d = 1.0 / 128;
  double h_3d = 1.0 / 32;
  double green_tol_2d = 0.03;
  double green_tol_3d = 0.05;

  std::vector<double> heights_3d{0.005, 0.01, 0.02, 0.04, 0.08, 0.16};
  double slope_tol = 0.05;
  int min_fit_points = 5;
  double fit_r2 = 0.98;

  std::vector<double> doubling_heights_2d{0.001, 0.004, 0.016, 0.064};
  std::vector<double> doubling_heights_3d{0.005, 0.01, 0.02, 0.04};
  double doubling_spread_radial = 1.3;
  double doubling_spread_general = 10.0;

  // Stock densities (2D Newton solves)
  std::vector<double> stock_h{1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<double> stock_heights{0.0025, 0.005, 0.01, 0.02, 0.04, 0.08};
  std::vector<double> stock_flux_heights{0.18, 0.24, 0.32};
  double stock_v_height = 0.45;
  double green_mass_tol = 0.03;
  double rho_tol = 0.05;
  double boundary_flux_tol = 0.04;
  double monotone_slack = 1e-3;

  // Gradient integrability sweep
  std::vector<double> lp_h{1.0 / 32, 1.0 / 64, 1.0 / 128};
  double lp_section_height = 0.125;
  double lp_tol = 0.10;

  // Capacity
  double cap_tol_2d = 0.03;
  double cap_tol_3d = 0.05;
  double cutoff_t = 0.01;
  double cutoff_tol = 0.03;
  double cutoff_cap_tol = 0.05;
  std::vector<double> cutoff_heights_3d{0.02, 0.04, 0.08};
  double cutoff_ratio_max = 10.0;

  // Reciprocity
  std::vector<double> reciprocity_heights_2d{0.005, 0.02, 0.08, 0.16};
  std::vector<double> reciprocity_heights_3d{0.01, 0.04, 0.16};
  double reciprocity_tol = 0.05;
  double level_set_tol = 0.05;

  // Distribution decay
  std::vector<double> decay_levels{0.02, 0.03, 0.045, 0.0675, 0.10125, 0.151875, 0.2278125, 0.34171875, 0.512578125};
  double decay_tol = 0.1;

  // Removable singularity
  std::vector<double> removable_r{0.1, 0.05, 0.025};
  double removable_R = 0.4;
  double removable_final = 0.02;

  double runtime_limit = 600.0;
  std::uint64_t seed = 1;
  std::string output = "acceptance";

  /// Throws ErrorKind::Configuration naming the field for unknown keys or
  /// wrong types.
  static AcceptanceConfig from_toml_file(const std::filesystem::path& path);
  static AcceptanceConfig from_toml_string(const std::string& text);
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  double seconds = 0.0;
  bool all_pass() const;
};

/// Runs the eleven criteria in order, printing one PASS/FAIL line per
/// criterion to out as each finishes. Artifacts go under output_path(cfg.output).
AcceptanceReport run_acceptance(const AcceptanceConfig& cfg, std::ostream& out);

}  // namespace malab
