#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace malab {

/// Least-squares fit of (t, value) pairs under a named model.
///   "power"       log value = slope log t + intercept
///   "log-linear"  value = slope |log t| + intercept
///   "linear"      value = slope t + intercept
struct FitReport {
  std::string model;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;
  std::map<std::string, double> extra;  // auxiliary numbers (ratios, floors, raw slopes)

  std::string to_json() const;
};

/// Ordinary least squares y = a x + b. Throws InsufficientData below two points.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Throws ErrorKind::InsufficientData with fewer than four points and
/// ErrorKind::Degenerate for nonpositive values under the power model.
FitReport fit_report(const std::string& model, std::vector<std::pair<double, double>> points);

/// Observed order log(e1/e2)/log(h1/h2) between consecutive refinements.
std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace malab
