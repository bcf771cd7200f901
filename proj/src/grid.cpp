#include "renorm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "renorm/simd.hpp"

namespace renorm {

Grid::Grid(Domain domain, double h) : domain_(std::move(domain)), h_(h) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("grid spacing must be positive");
  const BoundingBox box = domain_.bounding_box();
  i0_ = static_cast<std::int64_t>(std::floor(box.lo[0] / h_)) - 1;
  j0_ = static_cast<std::int64_t>(std::floor(box.lo[1] / h_)) - 1;
  const auto i1 = static_cast<std::int64_t>(std::ceil(box.hi[0] / h_)) + 1;
  const auto j1 = static_cast<std::int64_t>(std::ceil(box.hi[1] / h_)) + 1;
  nx_ = static_cast<std::size_t>(i1 - i0_ + 1);
  ny_ = static_cast<std::size_t>(j1 - j0_ + 1);
  if (nx_ * ny_ > (std::size_t{1} << 28)) throw std::invalid_argument("grid is too large");

  kinds_.assign(size(), NodeKind::exterior);
  mask_.assign(size(), 0.0);
  delta_.assign(size(), 0.0);
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      const std::size_t k = index(i, j);
      const Point2 p = node(i, j);
      delta_[k] = domain_.distance(p);
      const bool ring = i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ny_;
      if (ring || !domain_.contains(p)) continue;
      if (delta_[k] < 0.5 * h_) {
        kinds_[k] = NodeKind::boundary_adjacent;
      } else {
        kinds_[k] = NodeKind::interior;
        mask_[k] = 1.0;
        ++interior_count_;
      }
    }
  }
}

ScalarField::ScalarField(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("ScalarField needs a grid");
  values_.assign(grid_->size(), 0.0);
}

ScalarField ScalarField::sample(std::shared_ptr<const Grid> grid, const std::function<double(const Point2&)>& f) {
  ScalarField out(std::move(grid));
  const Grid& g = out.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) out.values_[k] = f(g.node(k));
  }
  return out;
}

std::vector<double> ScalarField::interior_values() const {
  std::vector<double> out;
  out.reserve(grid_->interior_count());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (grid_->is_interior(k)) out.push_back(values_[k]);
  }
  return out;
}

void ScalarField::apply_dirichlet_mask() {
  const auto mask = grid_->mask();
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= mask[k];
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (other.grid_ != grid_) throw std::invalid_argument("fields live on different grids");
  kernels::active().axpy(1.0, other.values_.data(), values_.data(), values_.size());
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (other.grid_ != grid_) throw std::invalid_argument("fields live on different grids");
  kernels::active().axpy(-1.0, other.values_.data(), values_.data(), values_.size());
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double integrate(const ScalarField& f) {
  const Grid& g = f.grid();
  const double h2 = g.h() * g.h();
  return h2 * kernels::active().dot(f.values().data(), g.mask().data(), g.size());
}

double l2_norm(const ScalarField& f) {
  const Grid& g = f.grid();
  const auto v = f.values();
  // values are zero off the interior, so the plain dot product is the interior sum
  return g.h() * std::sqrt(kernels::active().dot(v.data(), v.data(), v.size()));
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) m = std::max(m, std::abs(f[k]));
  }
  return m;
}

ScalarField laplacian(const ScalarField& field) {
  const Grid& g = field.grid();
  ScalarField out(field.grid_ptr());
  kernels::active().neg_laplacian(field.values().data(), g.mask().data(), out.values().data(), g.nx(), g.ny(),
                                  1.0 / (g.h() * g.h()));
  out *= -1.0;
  return out;
}

namespace {

// Nearest boundary points of neighbouring stencil points jump across a ridge
// of delta; on smooth parts they move by O(h).
bool straddles_ridge(const Domain& domain, const Point2& p, double h) {
  const Point2 q = domain.nearest_boundary_point(p);
  const std::array<Point2, 4> nb{{{p[0] + h, p[1]}, {p[0] - h, p[1]}, {p[0], p[1] + h}, {p[0], p[1] - h}}};
  for (const auto& n : nb) {
    if (norm(domain.nearest_boundary_point(n) - q) > 4.0 * h) return true;
  }
  return false;
}

}  // namespace

DistanceLaplacian laplacian_of_d_fd(const Domain& domain, const SmoothingProfile& profile,
                                    std::shared_ptr<const Grid> grid) {
  DistanceLaplacian out{ScalarField(grid), false, {}};
  const Grid& g = *grid;
  const double h = g.h();
  const double inv_h2 = 1.0 / (h * h);
  const double active_band = 3.0 * profile.transition_start() + 2.0 * h;
  auto d_at = [&](const Point2& p) { return profile.value(domain.signed_distance(p)); };
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const Point2 p = g.node(k);
    const double c = d_at(p);
    const double nb = (d_at({p[0] + h, p[1]}) + d_at({p[0] - h, p[1]})) + (d_at({p[0], p[1] + h}) + d_at({p[0], p[1] - h}));
    out.values[k] = (nb - 4.0 * c) * inv_h2;
    if (g.boundary_distance()[k] < active_band && straddles_ridge(domain, p, h)) out.ridge_nodes.push_back(k);
  }
  return out;
}

DistanceLaplacian laplacian_of_d(const Domain& domain, const SmoothingProfile& profile,
                                 std::shared_ptr<const Grid> grid) {
  const bool radial = std::holds_alternative<Disk>(domain.shape()) || std::holds_alternative<Annulus>(domain.shape());
  if (!radial) return laplacian_of_d_fd(domain, profile, std::move(grid));

  DistanceLaplacian out{ScalarField(grid), true, {}};
  const Grid& g = *grid;
  const double h = g.h();
  Point2 center{};
  double r_in = 0.0;
  double r_out = 0.0;
  if (const auto* s = std::get_if<Disk>(&domain.shape())) {
    center = s->center;
    r_out = s->radius;
  } else {
    const auto& a = std::get<Annulus>(domain.shape());
    center = a.center;
    r_in = a.r_inner;
    r_out = a.r_outer;
  }
  const double mid = 0.5 * (r_in + r_out);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const Point2 p = g.node(k);
    const double delta = g.boundary_distance()[k];
    const double fp = profile.derivative(delta);
    const double fpp = profile.second_derivative(delta);
    const double r = norm(p - center);
    if (fp == 0.0 && fpp == 0.0) {
      out.values[k] = 0.0;
      continue;
    }
    // The distance is not smooth at the disk center or on the annulus midline.
    const bool ridge = (r_in == 0.0) ? r < h : std::abs(r - mid) < h;
    if (ridge) {
      out.ridge_nodes.push_back(k);
      const double c = profile.value(domain.signed_distance(p));
      auto d_at = [&](const Point2& q) { return profile.value(domain.signed_distance(q)); };
      const double nb = (d_at({p[0] + h, p[1]}) + d_at({p[0] - h, p[1]})) + (d_at({p[0], p[1] + h}) + d_at({p[0], p[1] - h}));
      out.values[k] = (nb - 4.0 * c) / (h * h);
      continue;
    }
    // Laplacian of the radial distance: -1/r toward the outer circle, +1/r toward the inner one.
    const bool outer = (r_in == 0.0) || r >= mid;
    const double lap_delta = outer ? -1.0 / r : 1.0 / r;
    out.values[k] = fpp + fp * lap_delta;
  }
  return out;
}

}  // namespace renorm
