#include "renorm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "renorm/simd.hpp"
#include "rng.hpp"

namespace renorm {

using detail::unit_uniform;

void SolverConfig::validate() const {
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient tolerance must be positive");
  if (max_newton_iterations < 1) throw std::invalid_argument("need at least one Newton iteration");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
    throw std::invalid_argument("sufficient decrease constant must lie in (0, 1)");
  }
  if (!(backtracking_ratio > 0.0 && backtracking_ratio < 1.0)) {
    throw std::invalid_argument("backtracking ratio must lie in (0, 1)");
  }
  if (!(min_step > 0.0)) throw std::invalid_argument("minimal step must be positive");
  if (!(cg_relative_tolerance > 0.0)) throw std::invalid_argument("CG tolerance must be positive");
  if (cg_max_iterations < 1) throw std::invalid_argument("CG needs at least one iteration");
  if (!(hardy_constant > 0.0)) throw std::invalid_argument("Hardy constant must be positive");
}

CgResult conjugate_gradient(const HessianOperator& op, std::span<const double> rhs, std::span<double> x,
                            double relative_tolerance, int max_iterations, Preconditioner preconditioner) {
  const auto& kt = kernels::active();
  const Grid& g = op.grid();
  const std::size_t n = g.size();

  std::vector<double> inv_diag(n, 0.0);
  if (preconditioner == Preconditioner::diagonal) {
    const double stencil_diag = 4.0 / (g.h() * g.h());
    const auto diag = op.diagonal_term();
    for (std::size_t k = 0; k < n; ++k) {
      if (g.is_interior(k)) inv_diag[k] = 1.0 / (stencil_diag + diag[k]);
    }
  }
  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    if (preconditioner == Preconditioner::diagonal) {
      kt.multiply(inv_diag.data(), r.data(), z.data(), n);
    } else {
      z = r;
    }
  };

  CgResult result;
  const double b_norm = std::sqrt(kt.dot(rhs.data(), rhs.data(), n));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  op.apply(x, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
  precondition(r, z);
  p = z;
  double rz = kt.dot(r.data(), z.data(), n);
  double r_norm = std::sqrt(kt.dot(r.data(), r.data(), n));
  result.relative_residual = r_norm / b_norm;
  if (result.relative_residual <= relative_tolerance) {
    result.converged = true;
    return result;
  }

  for (int it = 1; it <= max_iterations; ++it) {
    op.apply(p, q);
    const double pq = kt.dot(p.data(), q.data(), n);
    if (!(pq > 0.0)) break;  // loss of positivity: return what we have
    const double alpha = rz / pq;
    kt.axpy(alpha, p.data(), x.data(), n);
    kt.axpy(-alpha, q.data(), r.data(), n);
    r_norm = std::sqrt(kt.dot(r.data(), r.data(), n));
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    if (result.relative_residual <= relative_tolerance) {
      result.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_new = kt.dot(r.data(), z.data(), n);
    const double beta = rz_new / rz;
    rz = rz_new;
    kt.xpay(z.data(), beta, p.data(), n);
  }
  return result;
}

double residual_norm(const ScalarField& g) { return l2_norm(g); }

SolveReport minimize(const SingularPart& sp, const SolverConfig& config,
                     const std::optional<ScalarField>& initial_guess) {
  config.validate();
  const Grid& g = *sp.grid;
  const double h2 = g.h() * g.h();

  ScalarField w(sp.grid);
  if (initial_guess) {
    if (initial_guess->grid_ptr() != sp.grid) throw std::invalid_argument("initial guess lives on another grid");
    w = *initial_guess;
    w.apply_dirichlet_mask();
  }

  SolveReport report{w, ScalarField(sp.grid), 0, false, {}, {}, {}, {}, {}, 0.0, {}, {}, std::nullopt};
  double current = energy(w, sp).total;
  for (int it = 0;; ++it) {
    const ScalarField grad = energy_gradient(w, sp);
    const double gn = residual_norm(grad);
    report.energy_history.push_back(current);
    report.gradient_norms.push_back(gn);
    if (gn <= config.gradient_tolerance) {
      report.converged = true;
      break;
    }
    if (it == config.max_newton_iterations) break;

    const HessianOperator hess(w, sp);
    ScalarField step(sp.grid);
    std::vector<double> rhs(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) rhs[k] = -grad[k];
    const CgResult cg = conjugate_gradient(hess, rhs, step.values(), config.cg_relative_tolerance,
                                           config.cg_max_iterations, config.preconditioner);
    report.cg_iterations.push_back(cg.iterations);

    double slope = 2.0 * inner(grad, step);
    if (!(slope < 0.0)) {
      // CG stalled badly: fall back to steepest descent.
      step = -1.0 * grad;
      slope = 2.0 * inner(grad, step);
    }

    double alpha = 1.0;
    double decrease = 0.0;
    for (;;) {
      bool accepted = false;
      try {
        decrease = energy_difference(w, step, alpha, sp);
        accepted = decrease < 0.0 && decrease <= config.sufficient_decrease * alpha * slope;
      } catch (const OverflowError&) {
        accepted = false;
      }
      if (accepted) break;
      alpha *= config.backtracking_ratio;
      if (alpha < config.min_step) {
        throw LineSearchError("line search failed at Newton iteration " + std::to_string(it) +
                              ": no sufficient decrease for step >= " + std::to_string(config.min_step) +
                              " (gradient norm " + std::to_string(gn) + ", slope " + std::to_string(slope) +
                              ", energy " + std::to_string(current) + ", h^2 " + std::to_string(h2) + ")");
      }
    }
    kernels::active().axpy(alpha, step.values().data(), w.values().data(), g.size());
    // accumulate the accurate decrement; recomputing the total would bury it in rounding
    current += decrease;
    report.energy_decrements.push_back(decrease);
    report.step_lengths.push_back(alpha);
    report.iterations = it + 1;
  }

  report.final_gradient_norm = report.gradient_norms.back();
  report.final_energy = energy(w, sp);
  report.w = w;
  ScalarField u(sp.grid);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) u[k] = sp.v[k] + w[k];
  }
  report.u = std::move(u);
  return report;
}

double disk_maximal_solution(const Disk& disk, const Point2& x) {
  const double rho = norm(x - disk.center);
  return std::log(disk.radius / (disk.radius * disk.radius - rho * rho));
}

OracleError disk_oracle_error(const ScalarField& u, const Disk& disk, const SingularPart& sp, double min_distance) {
  OracleError err;
  err.min_distance = min_distance;
  const Grid& g = *sp.grid;
  double sum2 = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k) || !(sp.d[k] > min_distance)) continue;
    const double e = std::abs(u[k] - disk_maximal_solution(disk, g.node(k)));
    err.sup = std::max(err.sup, e);
    sum2 += e * e;
    ++err.nodes;
  }
  err.l2 = g.h() * std::sqrt(sum2);
  return err;
}

GradientBoundCheck gradient_bound_check(const SolveReport& report, const SingularPart& sp, double hardy_constant) {
  GradientBoundCheck c;
  c.hardy_constant = hardy_constant;
  c.lhs = gradient_norm(report.w);
  c.rhs = 2.0 * hardy_constant * l2_norm(sp.laplacian_d);
  c.pass = c.lhs <= c.rhs;
  return c;
}

SolveReport solve(const Domain& domain, const SmoothingProfile& profile, std::shared_ptr<const Grid> grid,
                  const SolverConfig& config) {
  const SingularPart sp = build_singular_part(domain, profile, grid);
  SolveReport report = minimize(sp, config);
  report.gradient_bound = gradient_bound_check(report, sp, config.hardy_constant);
  if (const auto* disk = std::get_if<Disk>(&domain.shape())) {
    report.oracle = disk_oracle_error(report.u, *disk, sp, config.oracle_min_distance);
  }
  return report;
}

ScalarField random_perturbation(const SingularPart& sp, std::uint64_t seed) {
  const Grid& g = *sp.grid;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> interior;
  interior.reserve(g.interior_count());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) interior.push_back(k);
  }
  const double scale = g.domain().diameter();
  const double d_max = max_abs(sp.d);
  struct Bump {
    Point2 center;
    double width;
    double amplitude;
  };
  std::vector<Bump> bumps(4);
  for (auto& b : bumps) {
    b.center = g.node(interior[rng() % interior.size()]);
    b.width = scale * (0.05 + 0.25 * unit_uniform(rng));
    b.amplitude = 2.0 * unit_uniform(rng) - 1.0;
  }
  ScalarField phi(sp.grid);
  for (std::size_t k : interior) {
    const Point2 p = g.node(k);
    double s = 0.0;
    for (const auto& b : bumps) {
      const Point2 dp = p - b.center;
      s += b.amplitude * std::exp(-dot(dp, dp) / (b.width * b.width));
    }
    phi[k] = s * sp.d[k] / d_max;
  }
  const double m = max_abs(phi);
  if (m > 0.0) phi *= 1.0 / m;
  return phi;
}

MinimizerReport verify_minimizer(const SolveReport& report, const SingularPart& sp, int trials, std::uint64_t seed,
                                 std::vector<double> amplitudes) {
  MinimizerReport out;
  out.trials = trials;
  out.amplitudes = std::move(amplitudes);
  out.min_gap = std::numeric_limits<double>::infinity();
  out.min_gap_by_amplitude.assign(out.amplitudes.size(), std::numeric_limits<double>::infinity());
  const double base = energy(report.w, sp).total;
  const double gn = report.final_gradient_norm;
  bool identity_ok = true;
  for (int t = 0; t < trials; ++t) {
    const ScalarField shape = random_perturbation(sp, seed + static_cast<std::uint64_t>(t));
    for (std::size_t a = 0; a < out.amplitudes.size(); ++a) {
      const ScalarField phi = out.amplitudes[a] * shape;
      const EnergyGap gap = energy_gap(phi, report.w, sp);
      // first-order term left over from a nonzero gradient, plus rounding of the totals
      const double slack = 2.0 * gn * l2_norm(phi) + 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(base));
      out.slack = std::max(out.slack, slack);
      out.min_gap = std::min(out.min_gap, gap.lhs);
      out.min_gap_by_amplitude[a] = std::min(out.min_gap_by_amplitude[a], gap.lhs);
      if (gap.lhs < -slack) ++out.negative_gaps;
      const double disc = std::abs(gap.lhs - gap.rhs);
      if (gap.rhs > 0.0) out.max_identity_discrepancy = std::max(out.max_identity_discrepancy, disc / gap.rhs);
      if (disc > 1e-6 * std::abs(gap.rhs) + slack) identity_ok = false;
      if (gap.rhs < 0.0) identity_ok = false;
    }
  }
  out.zero_energy_gap = energy(ScalarField(sp.grid), sp).total - base;
  out.pass = out.negative_gaps == 0 && identity_ok && out.zero_energy_gap >= 0.0;
  return out;
}

}  // namespace renorm
