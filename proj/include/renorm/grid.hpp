#pragma once

// Uniform Cartesian grids restricted to a domain, Dirichlet fields on them,
// and the 5-point Laplacian.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "renorm/geometry.hpp"

namespace renorm {

enum class NodeKind : std::uint8_t { exterior, boundary_adjacent, interior };

/// Nodes sit at integer multiples of h; the node box is the domain's bounding
/// box padded by one layer, so the outermost ring is always exterior.
///
/// A node inside the domain with delta < h/2 is boundary-adjacent and carries
/// the Dirichlet value 0; every other node inside is an unknown (interior).
class Grid {
 public:
  Grid(Domain domain, double h);

  const Domain& domain() const { return domain_; }
  double h() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

  Point2 node(std::size_t i, std::size_t j) const {
    return {static_cast<double>(i0_ + static_cast<std::int64_t>(i)) * h_,
            static_cast<double>(j0_ + static_cast<std::int64_t>(j)) * h_};
  }
  Point2 node(std::size_t k) const { return node(k % nx_, k / nx_); }

  NodeKind kind(std::size_t k) const { return kinds_[k]; }
  bool is_interior(std::size_t k) const { return kinds_[k] == NodeKind::interior; }
  std::span<const NodeKind> kinds() const { return kinds_; }
  /// 1 on interior nodes, 0 elsewhere.
  std::span<const double> mask() const { return mask_; }
  /// Exact boundary distance at every node.
  std::span<const double> boundary_distance() const { return delta_; }
  std::size_t interior_count() const { return interior_count_; }

 private:
  Domain domain_;
  double h_;
  std::int64_t i0_ = 0;
  std::int64_t j0_ = 0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<NodeKind> kinds_;
  std::vector<double> mask_;
  std::vector<double> delta_;
  std::size_t interior_count_ = 0;
};

/// Grid function with the Dirichlet convention: stored on every node, zero
/// off the interior set.
class ScalarField {
 public:
  explicit ScalarField(std::shared_ptr<const Grid> grid);

  /// Evaluates f at interior nodes.
  static ScalarField sample(std::shared_ptr<const Grid> grid, const std::function<double(const Point2&)>& f);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::vector<double> interior_values() const;

  /// Zeroes every non-interior node.
  void apply_dirichlet_mask();

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Midpoint quadrature sum f(node) h^2 over interior nodes.
double integrate(const ScalarField& f);

/// Discrete L2 norm (sum f^2 h^2)^(1/2) over interior nodes.
double l2_norm(const ScalarField& f);

/// sup |f| over interior nodes.
double max_abs(const ScalarField& f);

/// 5-point Laplacian with zero values off the interior set.
ScalarField laplacian(const ScalarField& field);

struct DistanceLaplacian {
  ScalarField values;
  bool analytic = false;
  /// Nodes where the stencil straddles a ridge of delta (nearest boundary
  /// point jumps); the value there is a finite-difference spike.
  std::vector<std::size_t> ridge_nodes;
};

/// Laplacian of d = F(delta) on interior nodes.
///
/// Disk and annulus use Delta d = F''(delta) + F'(delta) Delta delta with the
/// radial Delta delta; rectangles and polygons apply the 5-point stencil to d
/// evaluated at the stencil points, using F(signed distance) outside.
DistanceLaplacian laplacian_of_d(const Domain& domain, const SmoothingProfile& profile,
                                 std::shared_ptr<const Grid> grid);

/// Finite-difference path for any domain (used for cross-validation).
DistanceLaplacian laplacian_of_d_fd(const Domain& domain, const SmoothingProfile& profile,
                                    std::shared_ptr<const Grid> grid);

}  // namespace renorm
