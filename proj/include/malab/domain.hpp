#pragma once

#include <array>
#include <string>
#include <string_view>

namespace malab {

/// Point in up to three dimensions; unused trailing coordinates stay zero.
using Point = std::array<double, 3>;

enum class DomainKind { Ball, Ellipsoid, Smooth };

/// Bounded, smooth, uniformly convex domain Ω = {level < 0}.
///
/// Text form (used by the CLI and configs):
///   disk:R  ball:R  ellipse:a,b  ellipsoid:a,b,c  smooth2:k  smooth3:k
/// optionally followed by "@cx,cy[,cz]" for the center. The smooth kinds are
/// the sublevel sets |x|^2 + k*sum(x_i^4) < 1.
class ConvexDomain {
 public:
  static ConvexDomain ball(int dim, double radius, Point center = {});
  static ConvexDomain ellipsoid(int dim, Point semi_axes, Point center = {});
  static ConvexDomain smooth(int dim, double quartic_weight, Point center = {});
  static ConvexDomain parse(std::string_view text);

  int dim() const { return dim_; }
  DomainKind kind() const { return kind_; }
  const Point& center() const { return center_; }
  const Point& semi_axes() const { return axes_; }

  /// Negative inside, zero on the boundary, positive outside. For balls this is
  /// the signed distance.
  double level(const Point& x) const;
  bool contains(const Point& x) const { return level(x) < 0.0; }

  /// Half-widths of the axis-aligned bounding box around the center.
  Point half_extent() const;
  /// Radius of the largest ball centered at center() inside the domain.
  double inradius() const;

  std::string spec() const;

 private:
  int dim_ = 2;
  DomainKind kind_ = DomainKind::Ball;
  Point center_{};
  Point axes_{1.0, 1.0, 1.0};
  double quartic_ = 0.0;
};

}  // namespace malab
