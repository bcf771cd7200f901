#pragma once

// Planar domains, exact boundary distance and the smoothed distance profile.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace renorm {

template <std::size_t N>
using Point = std::array<double, N>;
using Point2 = Point<2>;

inline Point2 operator+(const Point2& a, const Point2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point2 operator-(const Point2& a, const Point2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point2 operator*(double s, const Point2& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Point2& a) { return std::hypot(a[0], a[1]); }

/// Raised when an operation requires a point inside the domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Disk {
  Point2 center{0.0, 0.0};
  double radius = 1.0;
};

struct Annulus {
  Point2 center{0.0, 0.0};
  double r_inner = 0.5;
  double r_outer = 1.0;
};

struct Rectangle {
  Point2 lo{0.0, 0.0};
  Point2 hi{1.0, 1.0};
};

/// Simple polygon, vertices listed counterclockwise.
struct Polygon {
  std::vector<Point2> vertices;
};

struct BoundingBox {
  Point2 lo;
  Point2 hi;
};

/// A bounded open planar set with nonempty boundary.
///
/// Distances are exact: closed forms for disk, annulus and rectangle, and the
/// minimum of point-to-segment distances for polygons. Construction validates
/// the shape invariants and throws std::invalid_argument on violation.
class Domain {
 public:
  using Shape = std::variant<Disk, Annulus, Rectangle, Polygon>;

  static Domain disk(Point2 center, double radius);
  static Domain annulus(Point2 center, double r_inner, double r_outer);
  static Domain rectangle(Point2 lo, Point2 hi);
  static Domain polygon(std::vector<Point2> vertices);

  /// Unit disk centered at the origin.
  static Domain unit_disk() { return disk({0.0, 0.0}, 1.0); }
  /// The square (0,1)^2.
  static Domain unit_square() { return rectangle({0.0, 0.0}, {1.0, 1.0}); }
  /// (-1,1)^2 minus the closed quadrant [0,1]^2, as a six-vertex polygon.
  static Domain l_shape();

  const Shape& shape() const { return shape_; }
  std::string_view kind() const;

  /// Membership in the open set.
  bool contains(const Point2& p) const;

  /// Euclidean distance from p to the boundary; valid for p anywhere.
  double distance(const Point2& p) const;

  /// Distance to the boundary, positive inside and negative outside.
  double signed_distance(const Point2& p) const {
    const double d = distance(p);
    return contains(p) ? d : -d;
  }

  /// A closest boundary point to p (ties resolved deterministically).
  Point2 nearest_boundary_point(const Point2& p) const;

  /// Gradient of the distance function at an interior point off the ridge.
  Point2 distance_gradient(const Point2& p) const;

  /// True iff the closed axis-aligned square of the given center and side
  /// lies in the open domain.
  bool contains_closed_cube(const Point2& center, double side) const;

  BoundingBox bounding_box() const;
  double diameter() const;

  /// Largest boundary distance over the domain (sampled for polygons).
  double inradius() const;

 private:
  explicit Domain(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

/// Distance from p to the closed segment [a, b].
double segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Closest point on the closed segment [a, b] to p.
Point2 segment_closest_point(const Point2& p, const Point2& a, const Point2& b);

/// True iff the closed segment [a, b] meets the closed box [lo, hi].
bool segment_meets_box(const Point2& a, const Point2& b, const Point2& lo, const Point2& hi);

/// Monotone C^2 map F used to build d = F(delta).
///
/// F is the identity on [0, t0], a polynomial blend on [t0, 3 t0] with
/// F'(3 t0) = F''(3 t0) = 0, and the constant 2 t0 beyond. Negative arguments
/// are passed through unchanged so that F(signed distance) stays smooth across
/// the boundary.
class SmoothingProfile {
 public:
  explicit SmoothingProfile(double transition_start);

  /// Default profile t0 = min(0.2, inradius / 4).
  static SmoothingProfile for_domain(const Domain& domain);

  double transition_start() const { return t0_; }
  double cap() const { return 2.0 * t0_; }

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

 private:
  double t0_;
};

/// d(p) = F(delta(p)); throws DomainError when p is not in the domain.
double smoothed_distance(const Domain& domain, const SmoothingProfile& profile, const Point2& p);

}  // namespace renorm
