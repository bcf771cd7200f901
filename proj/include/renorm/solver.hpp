#pragma once

// Damped Newton minimization of the renormalized energy, and the checks that
// characterize its minimizer.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "renorm/energy.hpp"

namespace renorm {

enum class Preconditioner { none, diagonal };

struct SolverConfig {
  /// Convergence when ||G(w)|| h (discrete L2) drops to this value.
  double gradient_tolerance = 1e-8;
  int max_newton_iterations = 50;
  double sufficient_decrease = 1e-4;
  double backtracking_ratio = 0.5;
  double min_step = 1e-12;
  double cg_relative_tolerance = 1e-8;
  int cg_max_iterations = 20000;
  Preconditioner preconditioner = Preconditioner::none;
  /// Hardy constant used by the a priori bound check.
  double hardy_constant = 2.0;
  /// Oracle comparison region {d > oracle_min_distance} (disk only).
  double oracle_min_distance = 0.05;

  void validate() const;
};

class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for the Hessian, matrix-free.
/// Solves H x = b starting from the given x; residual norms are monotone in
/// the preconditioned energy norm.
CgResult conjugate_gradient(const HessianOperator& op, std::span<const double> rhs, std::span<double> x,
                            double relative_tolerance, int max_iterations, Preconditioner preconditioner);

struct GradientBoundCheck {
  double lhs = 0.0;  // ||grad w||_2
  double rhs = 0.0;  // 2 H ||Laplacian d||_2
  double hardy_constant = 0.0;
  bool pass = false;
  double margin() const { return rhs - lhs; }
};

struct OracleError {
  double sup = 0.0;
  double l2 = 0.0;
  double min_distance = 0.0;
  std::size_t nodes = 0;
};

struct SolveReport {
  ScalarField w;
  ScalarField u;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_history;      // R at every iterate, starting at w0
  std::vector<double> energy_decrements;   // accurate R[w_{k+1}] - R[w_k]
  std::vector<double> gradient_norms;      // ||G|| h at every iterate
  std::vector<double> step_lengths;
  std::vector<int> cg_iterations;
  double final_gradient_norm = 0.0;
  EnergyBreakdown final_energy;
  GradientBoundCheck gradient_bound;
  std::optional<OracleError> oracle;
};

/// ||G|| h over interior nodes.
double residual_norm(const ScalarField& g);

/// Minimizes R[., v] from the initial guess (zero when absent).
SolveReport minimize(const SingularPart& sp, const SolverConfig& config,
                     const std::optional<ScalarField>& initial_guess = std::nullopt);

/// Builds the singular part on the grid, minimizes, and fills the bound check
/// and (for disks) the comparison with the closed-form maximal solution.
SolveReport solve(const Domain& domain, const SmoothingProfile& profile, std::shared_ptr<const Grid> grid,
                  const SolverConfig& config);

/// The maximal solution of -Laplacian(u) + 4 e^{2u} = 0 on a disk:
/// u(x) = ln(R / (R^2 - |x - c|^2)).
double disk_maximal_solution(const Disk& disk, const Point2& x);

OracleError disk_oracle_error(const ScalarField& u, const Disk& disk, const SingularPart& sp, double min_distance);

GradientBoundCheck gradient_bound_check(const SolveReport& report, const SingularPart& sp, double hardy_constant);

struct MinimizerReport {
  int trials = 0;
  std::vector<double> amplitudes;
  double min_gap = 0.0;            // min of R[w + phi] - R[w]
  int negative_gaps = 0;           // gaps below -slack
  double slack = 0.0;
  double max_identity_discrepancy = 0.0;  // max |lhs - rhs| / |rhs| for the gap identity
  double zero_energy_gap = 0.0;    // R[0] - R[w] (phi = -w)
  /// Smallest gap per amplitude, in the order of `amplitudes`.
  std::vector<double> min_gap_by_amplitude;
  bool pass = false;
};

/// Random Dirichlet perturbations w + phi must not lower the energy, and the
/// two evaluations of R[w + phi] - R[w] must agree.
MinimizerReport verify_minimizer(const SolveReport& report, const SingularPart& sp, int trials,
                                 std::uint64_t seed = 20050801,
                                 std::vector<double> amplitudes = {1e-3, 1e-2, 1e-1});

/// Random smooth Dirichlet field: a few Gaussian bumps tapered by d, unit sup norm.
ScalarField random_perturbation(const SingularPart& sp, std::uint64_t seed);

}  // namespace renorm
