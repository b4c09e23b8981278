#include "malab/domain.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "malab/error.hpp"

namespace malab {

namespace {

std::vector<double> parse_numbers(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string s(text);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size())
      fail(ErrorKind::Configuration, "bad number '" + item + "' in " + std::string(what));
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double boundary_distance(const ConvexDomain& d, const Point& dir) {
  double hi = 1.0;
  auto at = [&](double s) {
    Point p = d.center();
    for (int k = 0; k < 3; ++k) p[k] += s * dir[k];
    return d.level(p);
  };
  while (at(hi) < 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (at(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ConvexDomain ConvexDomain::ball(int dim, double radius, Point center) {
  require(dim == 2 || dim == 3, ErrorKind::Dimension, "domain dimension must be 2 or 3");
  require(radius > 0.0, ErrorKind::Configuration, "ball radius must be positive");
  ConvexDomain d;
  d.dim_ = dim;
  d.kind_ = DomainKind::Ball;
  d.center_ = center;
  d.axes_ = {radius, radius, dim == 3 ? radius : 0.0};
  if (dim == 2) d.center_[2] = 0.0;
  return d;
}

ConvexDomain ConvexDomain::ellipsoid(int dim, Point semi_axes, Point center) {
  require(dim == 2 || dim == 3, ErrorKind::Dimension, "domain dimension must be 2 or 3");
  for (int k = 0; k < dim; ++k)
    require(semi_axes[k] > 0.0, ErrorKind::Configuration, "semi-axes must be positive");
  ConvexDomain d;
  d.dim_ = dim;
  d.kind_ = DomainKind::Ellipsoid;
  d.center_ = center;
  d.axes_ = semi_axes;
  if (dim == 2) {
    d.axes_[2] = 0.0;
    d.center_[2] = 0.0;
  }
  return d;
}

ConvexDomain ConvexDomain::smooth(int dim, double quartic_weight, Point center) {
  require(dim == 2 || dim == 3, ErrorKind::Dimension, "domain dimension must be 2 or 3");
  require(quartic_weight >= 0.0, ErrorKind::Configuration, "quartic weight must be >= 0");
  ConvexDomain d;
  d.dim_ = dim;
  d.kind_ = DomainKind::Smooth;
  d.center_ = center;
  d.quartic_ = quartic_weight;
  if (dim == 2) d.center_[2] = 0.0;
  return d;
}

ConvexDomain ConvexDomain::parse(std::string_view text) {
  auto colon = text.find(':');
  require(colon != std::string_view::npos, ErrorKind::Configuration,
          "domain spec '" + std::string(text) + "' must look like kind:params");
  std::string_view kind = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  Point center{};
  if (auto at = rest.find('@'); at != std::string_view::npos) {
    auto c = parse_numbers(rest.substr(at + 1), "domain center");
    require(c.size() <= 3, ErrorKind::Configuration, "domain center has too many coordinates");
    for (std::size_t k = 0; k < c.size(); ++k) center[k] = c[k];
    rest = rest.substr(0, at);
  }
  auto p = parse_numbers(rest, "domain spec");
  auto need = [&](std::size_t n) {
    require(p.size() == n, ErrorKind::Configuration,
            "domain '" + std::string(kind) + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (kind == "disk") {
    need(1);
    return ball(2, p[0], center);
  }
  if (kind == "ball") {
    need(1);
    return ball(3, p[0], center);
  }
  if (kind == "ellipse") {
    need(2);
    return ellipsoid(2, {p[0], p[1], 0.0}, center);
  }
  if (kind == "ellipsoid") {
    need(3);
    return ellipsoid(3, {p[0], p[1], p[2]}, center);
  }
  if (kind == "smooth2" || kind == "smooth3") {
    need(1);
    return smooth(kind == "smooth2" ? 2 : 3, p[0], center);
  }
  fail(ErrorKind::Configuration, "unknown domain kind '" + std::string(kind) + "'");
}

double ConvexDomain::level(const Point& x) const {
  double r2 = 0.0;
  switch (kind_) {
    case DomainKind::Ball:
      for (int k = 0; k < dim_; ++k) r2 += (x[k] - center_[k]) * (x[k] - center_[k]);
      return std::sqrt(r2) - axes_[0];
    case DomainKind::Ellipsoid: {
      double amin = axes_[0];
      for (int k = 0; k < dim_; ++k) {
        double s = (x[k] - center_[k]) / axes_[k];
        r2 += s * s;
        amin = std::min(amin, axes_[k]);
      }
      return (std::sqrt(r2) - 1.0) * amin;
    }
    case DomainKind::Smooth: {
      double q = 0.0;
      for (int k = 0; k < dim_; ++k) {
        double s = x[k] - center_[k];
        r2 += s * s;
        q += s * s * s * s;
      }
      return r2 + quartic_ * q - 1.0;
    }
  }
  return 1.0;
}

Point ConvexDomain::half_extent() const {
  Point e{};
  for (int k = 0; k < dim_; ++k) {
    Point dir{};
    dir[k] = 1.0;
    e[k] = kind_ == DomainKind::Smooth ? boundary_distance(*this, dir) : axes_[k];
  }
  return e;
}

double ConvexDomain::inradius() const {
  if (kind_ == DomainKind::Ball) return axes_[0];
  if (kind_ == DomainKind::Ellipsoid) {
    double a = axes_[0];
    for (int k = 1; k < dim_; ++k) a = std::min(a, axes_[k]);
    return a;
  }
  // Smooth kinds: sample directions; the minimum sits on an axis or a diagonal.
  double best = 1e300;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    double th = std::numbers::pi * i / n;
    if (dim_ == 2) {
      best = std::min(best, boundary_distance(*this, {std::cos(th), std::sin(th), 0.0}));
    } else {
      for (int j = 0; j < n; ++j) {
        double ph = 2.0 * std::numbers::pi * j / n;
        best = std::min(best, boundary_distance(*this, {std::sin(th) * std::cos(ph),
                                                        std::sin(th) * std::sin(ph), std::cos(th)}));
      }
    }
  }
  return best;
}

std::string ConvexDomain::spec() const {
  std::string s;
  switch (kind_) {
    case DomainKind::Ball: s = (dim_ == 2 ? "disk:" : "ball:") + fmt(axes_[0]); break;
    case DomainKind::Ellipsoid:
      s = dim_ == 2 ? "ellipse:" + fmt(axes_[0]) + "," + fmt(axes_[1])
                    : "ellipsoid:" + fmt(axes_[0]) + "," + fmt(axes_[1]) + "," + fmt(axes_[2]);
      break;
    case DomainKind::Smooth: s = (dim_ == 2 ? "smooth2:" : "smooth3:") + fmt(quartic_); break;
  }
  bool centered = center_[0] != 0.0 || center_[1] != 0.0 || center_[2] != 0.0;
  if (centered) {
    s += "@" + fmt(center_[0]) + "," + fmt(center_[1]);
    if (dim_ == 3) s += "," + fmt(center_[2]);
  }
  return s;
}

}  // namespace malab
