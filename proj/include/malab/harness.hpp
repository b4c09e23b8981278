#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "malab/capacity.hpp"
#include "malab/identities.hpp"

namespace malab {

/// Output root: $MALAB_OUTPUT_ROOT when set, else the working directory.
/// Absolute paths are returned unchanged.
std::filesystem::path output_path(const std::filesystem::path& p);

/// "X,Y" or "X,Y,Z". Throws ErrorKind::Configuration.
Point parse_point(const std::string& text);

/// "section:T" (the section of the given family at height T) or a domain spec
/// such as "disk:0.8". Throws ErrorKind::NotContained for a section reaching
/// the boundary layer.
Region parse_region(const std::string& text, const PotentialState& state, const SectionFamily& sections);

/// Pass/fail thresholds. Defaults are the acceptance thresholds.
struct Tolerances {
  double green_mass = 0.03;
  double rho = 0.05;
  double boundary_flux = 0.04;
  double trace = 0.04;
  double fit_r2 = 0.98;            // 2D log-linear fit
  double slope = 0.05;             // 3D: |slope + 1/2|
  double doubling_spread = 10.0;   // max/min of the doubling ratio
  double reciprocity = 0.05;
  double decay_slope = 0.1;        // |slope + 3|
  double monotone_slack = 1e-3;    // allowed rise of a discrepancy under refinement

  /// Overrides the named fields; unknown names are a configuration error.
  static Tolerances from_map(const std::map<std::string, double>& values);
};

/// One experiment family: a domain, a density or closed-form potential, and
/// the grids, poles and heights to sweep.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string domain = "disk:1.4142135623730951";
  std::string density = "1";
  double lambda = 1.0;
  double Lambda = 1.0;
  std::string potential;         // closed-form u instead of a Newton solve when nonempty
  std::string exact;             // closed-form solution for the error metric, optional
  std::vector<double> h;         // strictly decreasing
  std::vector<Point> poles{Point{}};
  std::vector<double> heights;
  std::vector<double> flux_heights;  // boundary-flux identity; defaults to heights
  double v_height = 0.45;        // V = S(x0, v_height)
  double trace_height = 0.02;
  std::vector<double> levels;    // decay suite: increasing thresholds T on g
  std::set<std::string> suites{"sections", "green", "capacity", "identities"};
  std::string output = "malab-out";
  std::uint64_t seed = 1;
  int workers = 1;
  double solver_tol = 1e-8;
  int max_newton = 200;
  Tolerances tol;

  static ExperimentConfig from_toml_file(const std::filesystem::path& path);
  static ExperimentConfig from_toml_string(const std::string& text);
  /// Throws ErrorKind::Configuration naming the offending field.
  void validate() const;
  int dim() const;
  DensitySpec density_spec() const;
};

/// Suites run_suite knows; "decay" needs three dimensions.
const std::set<std::string>& known_suites();

/// Potential for one grid spacing: Newton solve, or the closed form sampled on
/// the whole box.
PotentialState build_state(const ExperimentConfig& cfg, double h);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  double h = 0.0;
  Point pole{};
  std::string error;       // empty on success
  int error_code = 0;      // exit code for error
  std::vector<Check> checks;
  std::map<std::string, double> metrics;  // discrepancies used by the sweep
};

struct SuiteResult {
  std::vector<ExperimentResult> experiments;
  int exit_code = 0;        // 0 pass, 1 failed check, 2 configuration, 3 solver failure
  std::string summary_json;
};

/// Runs every (h, pole) combination through the selected suites on a pool of
/// cfg.workers threads. Writes per-experiment CSV/JSON under
/// output_path(cfg.output)/cfg.name and summary.json. An experiment that
/// throws is recorded and the rest continue. The summary carries no timings,
/// so a fixed config reproduces it byte for byte.
SuiteResult run_suite(const ExperimentConfig& cfg);

struct SweepTable {
  std::vector<double> h;
  std::map<std::string, std::vector<double>> values;  // metric -> value per h
  std::map<std::string, std::vector<double>> orders;  // metric -> observed order per refinement
  std::string to_csv() const;                         // h,metric,value,order
};

/// Metrics per h for the first pole (needs at least three h): ma_error when
/// cfg.exact is set, MA residual and the identity discrepancies, with
/// observed orders between consecutive h. Runs the suite first.
SweepTable convergence_sweep(const ExperimentConfig& cfg);
/// The same table from a finished run.
SweepTable sweep_table(const ExperimentConfig& cfg, const SuiteResult& result);

/// Discrepancies are nonincreasing under refinement up to slack.
bool nonincreasing(const std::vector<double>& v, double slack);

// Artifact writers shared by the CLI and the suite.
void write_sections_csv(const std::filesystem::path& path, const std::vector<Section>& sections);
void write_identities_csv(const std::filesystem::path& path, const std::vector<IdentityReport>& rows);
void write_text(const std::filesystem::path& path, const std::string& text);
/// {cap, q_form, sandwich_lo, sandwich_hi}; the sandwich fields come from the
/// reciprocity rows when given (tightest sandwich: max lo, min hi), else null.
std::string capacity_json(const CapacityResult& cap, const std::vector<ReciprocityRow>& rows);

}  // namespace malab
