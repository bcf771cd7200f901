#include "renorm/geometry.hpp"

#include <algorithm>
#include <limits>

namespace renorm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Point2& a, const Point2& b) { return a[0] * b[1] - a[1] * b[0]; }

int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
         std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double signed_area(const std::vector<Point2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

bool polygon_contains(const std::vector<Point2>& v, const Point2& p) {
  // Crossing number; boundary points are rejected separately by the caller.
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Point2& a = v[i];
    const Point2& b = v[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

double polygon_distance(const std::vector<Point2>& v, const Point2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, segment_distance(p, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

std::array<Point2, 4> square_corners(const Point2& c, double side) {
  const double r = 0.5 * side;
  return {{{c[0] - r, c[1] - r}, {c[0] + r, c[1] - r}, {c[0] + r, c[1] + r}, {c[0] - r, c[1] + r}}};
}

double box_point_distance(const Point2& lo, const Point2& hi, const Point2& p) {
  const double dx = std::max({lo[0] - p[0], 0.0, p[0] - hi[0]});
  const double dy = std::max({lo[1] - p[1], 0.0, p[1] - hi[1]});
  return std::hypot(dx, dy);
}

Point2 radial_projection(const Point2& c, double radius, const Point2& p) {
  const Point2 d = p - c;
  const double r = norm(d);
  if (r == 0.0) return {c[0] + radius, c[1]};
  return c + (radius / r) * d;
}

}  // namespace

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  return norm(p - segment_closest_point(p, a, b));
}

Point2 segment_closest_point(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

bool segment_meets_box(const Point2& a, const Point2& b, const Point2& lo, const Point2& hi) {
  // Liang-Barsky clipping against the closed box.
  double t0 = 0.0;
  double t1 = 1.0;
  const Point2 d = b - a;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < lo[axis] || a[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - a[axis]) / d[axis];
    double tb = (hi[axis] - a[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

Domain Domain::disk(Point2 center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("disk radius must be positive");
  return Domain(Disk{center, radius});
}

Domain Domain::annulus(Point2 center, double r_inner, double r_outer) {
  if (!(r_inner > 0.0 && r_inner < r_outer) || !std::isfinite(r_outer)) {
    throw std::invalid_argument("annulus requires 0 < r_inner < r_outer");
  }
  return Domain(Annulus{center, r_inner, r_outer});
}

Domain Domain::rectangle(Point2 lo, Point2 hi) {
  if (!(lo[0] < hi[0] && lo[1] < hi[1])) throw std::invalid_argument("rectangle requires lo < hi componentwise");
  return Domain(Rectangle{lo, hi});
}

Domain Domain::polygon(std::vector<Point2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (const auto& v : vertices) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw std::invalid_argument("polygon vertex is not finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices[i];
    const Point2& b = vertices[(i + 1) % n];
    if (a == b) throw std::invalid_argument("polygon has a repeated vertex");
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a, b, vertices[j], vertices[(j + 1) % n])) {
        throw std::invalid_argument("polygon is not simple");
      }
    }
  }
  if (!(signed_area(vertices) > 0.0)) throw std::invalid_argument("polygon must be counterclockwise");
  return Domain(Polygon{std::move(vertices)});
}

Domain Domain::l_shape() {
  return polygon({{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
}

std::string_view Domain::kind() const {
  return std::visit(overloaded{[](const Disk&) { return std::string_view("disk"); },
                               [](const Annulus&) { return std::string_view("annulus"); },
                               [](const Rectangle&) { return std::string_view("rectangle"); },
                               [](const Polygon&) { return std::string_view("polygon"); }},
                    shape_);
}

bool Domain::contains(const Point2& p) const {
  return std::visit(
      overloaded{
          [&](const Disk& s) { return norm(p - s.center) < s.radius; },
          [&](const Annulus& s) {
            const double r = norm(p - s.center);
            return r > s.r_inner && r < s.r_outer;
          },
          [&](const Rectangle& s) { return p[0] > s.lo[0] && p[0] < s.hi[0] && p[1] > s.lo[1] && p[1] < s.hi[1]; },
          [&](const Polygon& s) { return polygon_contains(s.vertices, p) && polygon_distance(s.vertices, p) > 0.0; }},
      shape_);
}

double Domain::distance(const Point2& p) const {
  return std::visit(overloaded{[&](const Disk& s) { return std::abs(s.radius - norm(p - s.center)); },
                               [&](const Annulus& s) {
                                 const double r = norm(p - s.center);
                                 return std::min(std::abs(r - s.r_inner), std::abs(s.r_outer - r));
                               },
                               [&](const Rectangle& s) {
                                 if (p[0] >= s.lo[0] && p[0] <= s.hi[0] && p[1] >= s.lo[1] && p[1] <= s.hi[1]) {
                                   return std::min({p[0] - s.lo[0], s.hi[0] - p[0], p[1] - s.lo[1], s.hi[1] - p[1]});
                                 }
                                 return box_point_distance(s.lo, s.hi, p);
                               },
                               [&](const Polygon& s) { return polygon_distance(s.vertices, p); }},
                    shape_);
}

Point2 Domain::nearest_boundary_point(const Point2& p) const {
  return std::visit(
      overloaded{[&](const Disk& s) { return radial_projection(s.center, s.radius, p); },
                 [&](const Annulus& s) {
                   const double r = norm(p - s.center);
                   const double radius = std::abs(r - s.r_inner) <= std::abs(s.r_outer - r) ? s.r_inner : s.r_outer;
                   return radial_projection(s.center, radius, p);
                 },
                 [&](const Rectangle& s) {
                   const bool inside = p[0] >= s.lo[0] && p[0] <= s.hi[0] && p[1] >= s.lo[1] && p[1] <= s.hi[1];
                   if (!inside) return Point2{std::clamp(p[0], s.lo[0], s.hi[0]), std::clamp(p[1], s.lo[1], s.hi[1])};
                   const std::array<double, 4> gaps{p[0] - s.lo[0], s.hi[0] - p[0], p[1] - s.lo[1], s.hi[1] - p[1]};
                   const auto k = std::min_element(gaps.begin(), gaps.end()) - gaps.begin();
                   switch (k) {
                     case 0: return Point2{s.lo[0], p[1]};
                     case 1: return Point2{s.hi[0], p[1]};
                     case 2: return Point2{p[0], s.lo[1]};
                     default: return Point2{p[0], s.hi[1]};
                   }
                 },
                 [&](const Polygon& s) {
                   const auto& v = s.vertices;
                   Point2 best = v[0];
                   double best_d = std::numeric_limits<double>::infinity();
                   for (std::size_t i = 0; i < v.size(); ++i) {
                     const Point2 q = segment_closest_point(p, v[i], v[(i + 1) % v.size()]);
                     const double d = norm(p - q);
                     if (d < best_d) {
                       best_d = d;
                       best = q;
                     }
                   }
                   return best;
                 }},
      shape_);
}

Point2 Domain::distance_gradient(const Point2& p) const {
  const Point2 q = nearest_boundary_point(p);
  const Point2 d = p - q;
  const double r = norm(d);
  if (r == 0.0) return {0.0, 0.0};
  const double sign = contains(p) ? 1.0 : -1.0;
  return (sign / r) * d;
}

bool Domain::contains_closed_cube(const Point2& center, double side) const {
  const auto corners = square_corners(center, side);
  const Point2 lo = corners[0];
  const Point2 hi = corners[2];
  return std::visit(
      overloaded{[&](const Disk& s) {
                   return std::all_of(corners.begin(), corners.end(),
                                      [&](const Point2& c) { return norm(c - s.center) < s.radius; });
                 },
                 [&](const Annulus& s) {
                   const bool outer = std::all_of(corners.begin(), corners.end(),
                                                  [&](const Point2& c) { return norm(c - s.center) < s.r_outer; });
                   return outer && box_point_distance(lo, hi, s.center) > s.r_inner;
                 },
                 [&](const Rectangle& s) {
                   return lo[0] > s.lo[0] && lo[1] > s.lo[1] && hi[0] < s.hi[0] && hi[1] < s.hi[1];
                 },
                 [&](const Polygon& s) {
                   for (const auto& c : corners) {
                     if (!polygon_contains(s.vertices, c)) return false;
                   }
                   const auto& v = s.vertices;
                   for (std::size_t i = 0; i < v.size(); ++i) {
                     if (segment_meets_box(v[i], v[(i + 1) % v.size()], lo, hi)) return false;
                   }
                   return true;
                 }},
      shape_);
}

BoundingBox Domain::bounding_box() const {
  return std::visit(overloaded{[](const Disk& s) {
                                 return BoundingBox{{s.center[0] - s.radius, s.center[1] - s.radius},
                                                    {s.center[0] + s.radius, s.center[1] + s.radius}};
                               },
                               [](const Annulus& s) {
                                 return BoundingBox{{s.center[0] - s.r_outer, s.center[1] - s.r_outer},
                                                    {s.center[0] + s.r_outer, s.center[1] + s.r_outer}};
                               },
                               [](const Rectangle& s) { return BoundingBox{s.lo, s.hi}; },
                               [](const Polygon& s) {
                                 BoundingBox b{s.vertices[0], s.vertices[0]};
                                 for (const auto& v : s.vertices) {
                                   for (int a = 0; a < 2; ++a) {
                                     b.lo[a] = std::min(b.lo[a], v[a]);
                                     b.hi[a] = std::max(b.hi[a], v[a]);
                                   }
                                 }
                                 return b;
                               }},
                    shape_);
}

double Domain::diameter() const {
  return std::visit(overloaded{[](const Disk& s) { return 2.0 * s.radius; },
                               [](const Annulus& s) { return 2.0 * s.r_outer; },
                               [](const Rectangle& s) { return norm(s.hi - s.lo); },
                               [](const Polygon& s) {
                                 double best = 0.0;
                                 for (const auto& a : s.vertices) {
                                   for (const auto& b : s.vertices) best = std::max(best, norm(a - b));
                                 }
                                 return best;
                               }},
                    shape_);
}

double Domain::inradius() const {
  return std::visit(overloaded{[](const Disk& s) { return s.radius; },
                               [](const Annulus& s) { return 0.5 * (s.r_outer - s.r_inner); },
                               [](const Rectangle& s) { return 0.5 * std::min(s.hi[0] - s.lo[0], s.hi[1] - s.lo[1]); },
                               [this](const Polygon&) {
                                 const BoundingBox b = bounding_box();
                                 constexpr int kSamples = 256;
                                 double best = 0.0;
                                 for (int j = 0; j <= kSamples; ++j) {
                                   for (int i = 0; i <= kSamples; ++i) {
                                     const Point2 p{b.lo[0] + (b.hi[0] - b.lo[0]) * i / kSamples,
                                                    b.lo[1] + (b.hi[1] - b.lo[1]) * j / kSamples};
                                     if (contains(p)) best = std::max(best, distance(p));
                                   }
                                 }
                                 return best;
                               }},
                    shape_);
}

SmoothingProfile::SmoothingProfile(double transition_start) : t0_(transition_start) {
  if (!(t0_ > 0.0) || !std::isfinite(t0_)) throw std::invalid_argument("transition start must be positive");
}

SmoothingProfile SmoothingProfile::for_domain(const Domain& domain) {
  return SmoothingProfile(std::min(0.2, domain.inradius() / 4.0));
}

// On [t0, 3 t0], with tau = (t - t0) / (2 t0):
//   F = t0 + 2 t0 (tau - tau^3 + tau^4 / 2),  F' = 1 - 3 tau^2 + 2 tau^3.
// F' decreases from 1 to 0 with F'' = 0 at both ends.

double SmoothingProfile::value(double t) const {
  if (t <= t0_) return t;
  if (t >= 3.0 * t0_) return 2.0 * t0_;
  const double tau = (t - t0_) / (2.0 * t0_);
  const double tau3 = tau * tau * tau;
  return t0_ + 2.0 * t0_ * (tau - tau3 + 0.5 * tau3 * tau);
}

double SmoothingProfile::derivative(double t) const {
  if (t <= t0_) return 1.0;
  if (t >= 3.0 * t0_) return 0.0;
  const double tau = (t - t0_) / (2.0 * t0_);
  return 1.0 - 3.0 * tau * tau + 2.0 * tau * tau * tau;
}

double SmoothingProfile::second_derivative(double t) const {
  if (t <= t0_ || t >= 3.0 * t0_) return 0.0;
  const double tau = (t - t0_) / (2.0 * t0_);
  return 6.0 * tau * (tau - 1.0) / (2.0 * t0_);
}

double smoothed_distance(const Domain& domain, const SmoothingProfile& profile, const Point2& p) {
  if (!domain.contains(p)) throw DomainError("smoothed_distance: point is outside the domain");
  return profile.value(domain.distance(p));
}

}  // namespace renorm
