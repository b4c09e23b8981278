#include "malab/fit.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "malab/error.hpp"

namespace malab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::Misuse, "fit_line: size mismatch");
  require(x.size() >= 2, ErrorKind::InsufficientData, "fit_line needs at least two points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::Degenerate, "fit_line: abscissae coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

FitReport fit_report(const std::string& model, std::vector<std::pair<double, double>> points) {
  require(points.size() >= 4, ErrorKind::InsufficientData,
          "fit needs at least 4 points, got " + std::to_string(points.size()));
  std::vector<double> x, y;
  for (auto [t, v] : points) {
    if (model == "power") {
      require(t > 0.0 && v > 0.0, ErrorKind::Degenerate, "power fit needs positive data");
      x.push_back(std::log(t));
      y.push_back(std::log(v));
    } else if (model == "log-linear") {
      require(t > 0.0, ErrorKind::Degenerate, "log-linear fit needs positive abscissae");
      x.push_back(std::abs(std::log(t)));
      y.push_back(v);
    } else if (model == "linear") {
      x.push_back(t);
      y.push_back(v);
    } else {
      fail(ErrorKind::Misuse, "unknown fit model " + model);
    }
  }
  LineFit f = fit_line(x, y);
  FitReport r;
  r.model = model;
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r2 = f.r2;
  r.points = std::move(points);
  return r;
}

std::string FitReport::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["slope"] = slope;
  j["intercept"] = intercept;
  j["r2"] = r2;
  j["points"] = nlohmann::json::array();
  for (auto [t, v] : points) j["points"].push_back({t, v});
  for (const auto& [k, v] : extra) j["extra"][k] = v;
  return j.dump(2);
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err) {
  require(h.size() == err.size(), ErrorKind::Misuse, "observed_orders: size mismatch");
  std::vector<double> out;
  for (std::size_t i = 1; i < h.size(); ++i) out.push_back(std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]));
  return out;
}

}  // namespace malab
