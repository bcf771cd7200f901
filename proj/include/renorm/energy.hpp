#pragma once

// The renormalized energy
//
//   R[phi, v] = int |grad phi|^2 + 4 e^{2v} (e^{2 phi} - 1 - 2 phi) + 2 r[v] phi
//
// for the singular profile v = -ln(2d), with 4 e^{2v} = 1 / d^2 and
// r[v] = -Laplacian(v) + 4 e^{2v} = Laplacian(d) / d + (1 - |grad d|^2) / d^2.
//
// Discretization: the Dirichlet term is the sum of squared differences over
// all grid edges (so that its first variation is exactly the 5-point
// Laplacian); the other two terms use midpoint quadrature over interior nodes.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "renorm/grid.hpp"

namespace renorm {

/// Raised when e^{2 phi} would overflow; names the offending node.
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& what, std::size_t node) : std::runtime_error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// |phi| above this value is treated as divergence.
inline constexpr double kMaxExponentArgument = 175.0;

struct SingularPart {
  std::shared_ptr<const Grid> grid;
  ScalarField d;
  ScalarField v;
  ScalarField weight;       // 4 e^{2v} = 1 / d^2
  ScalarField residual;     // r[v]
  ScalarField laplacian_d;
  bool analytic_laplacian = false;
  std::vector<std::size_t> ridge_nodes;
};

/// Throws std::invalid_argument when the grid has no interior nodes.
SingularPart build_singular_part(const Domain& domain, const SmoothingProfile& profile,
                                 std::shared_ptr<const Grid> grid);

/// The singular part for v' = v + w: weight e^{2w} 4 e^{2v} and residual
/// r[v + w] = G(w), the discrete Liouville residual of u = v + w.
SingularPart singular_part_about(const SingularPart& sp, const ScalarField& w);

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double nonlinear = 0.0;
  double linear = 0.0;
  double total = 0.0;
};

/// e^x - 1 - x without cancellation for small |x|.
double exp_remainder(double x);

EnergyBreakdown energy(const ScalarField& phi, const SingularPart& sp);

/// R[phi + alpha s] - R[phi], evaluated termwise so that small differences
/// keep full relative accuracy.
double energy_difference(const ScalarField& phi, const ScalarField& step, double alpha, const SingularPart& sp);

/// G(phi) = -Laplacian(phi) + 4 e^{2v} (e^{2 phi} - 1) + r[v] on interior nodes.
/// The directional derivative of energy() at phi along psi is 2 <G, psi> h^2.
ScalarField energy_gradient(const ScalarField& phi, const SingularPart& sp);

/// Second variation: -Laplacian(psi) + 8 e^{2v} e^{2 phi} psi.
class HessianOperator {
 public:
  HessianOperator(const ScalarField& phi, const SingularPart& sp);

  const Grid& grid() const { return *grid_; }
  std::span<const double> diagonal_term() const { return diag_; }
  void apply(std::span<const double> in, std::span<double> out) const;
  ScalarField apply(const ScalarField& psi) const;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> diag_;
};

ScalarField hessian_apply(const ScalarField& phi, const SingularPart& sp, const ScalarField& psi);

/// <a, b> h^2 over interior nodes.
double inner(const ScalarField& a, const ScalarField& b);

/// Discrete Dirichlet seminorm (sum over edges of squared differences)^(1/2).
double gradient_norm(const ScalarField& phi);

struct EnergyGap {
  double lhs = 0.0;  // R[phi + w] - R[w]
  double rhs = 0.0;  // int |grad phi|^2 + 4 e^{2(v + w)} (e^{2 phi} - 1 - 2 phi)
};

EnergyGap energy_gap(const ScalarField& phi, const ScalarField& w, const SingularPart& sp);

}  // namespace renorm
