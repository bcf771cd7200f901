#include "renorm/energy.hpp"

#include <array>
#include <cmath>
#include <string>

#include "renorm/simd.hpp"

namespace renorm {

namespace {

void check_exponent(std::span<const double> phi, const Grid& g) {
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (g.is_interior(k) && !(std::abs(phi[k]) <= kMaxExponentArgument)) {
      const Point2 p = g.node(k);
      throw OverflowError("exponential overflow: |phi| = " + std::to_string(std::abs(phi[k])) + " at node " +
                              std::to_string(k) + " (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ")",
                          k);
    }
  }
}

void require_same_grid(const ScalarField& a, const SingularPart& sp) {
  if (a.grid_ptr() != sp.grid) throw std::invalid_argument("field and singular part live on different grids");
}

}  // namespace

SingularPart build_singular_part(const Domain& domain, const SmoothingProfile& profile,
                                 std::shared_ptr<const Grid> grid) {
  if (!grid || grid->interior_count() == 0) throw std::invalid_argument("grid has no interior nodes");
  DistanceLaplacian lap = laplacian_of_d(domain, profile, grid);
  SingularPart sp{grid,
                  ScalarField(grid),
                  ScalarField(grid),
                  ScalarField(grid),
                  ScalarField(grid),
                  std::move(lap.values),
                  lap.analytic,
                  std::move(lap.ridge_nodes)};
  const Grid& g = *grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double delta = g.boundary_distance()[k];
    const double d = profile.value(delta);
    const double slope = profile.derivative(delta);
    sp.d[k] = d;
    sp.v[k] = -std::log(2.0 * d);
    sp.weight[k] = 1.0 / (d * d);
    // -Laplacian(v) + 4 e^{2v} = Laplacian(d)/d + (1 - |grad d|^2)/d^2 with |grad d| = F'(delta);
    // the second term vanishes where d = delta.
    sp.residual[k] = sp.laplacian_d[k] / d + (1.0 - slope * slope) / (d * d);
  }
  return sp;
}

SingularPart singular_part_about(const SingularPart& sp, const ScalarField& w) {
  require_same_grid(w, sp);
  SingularPart out = sp;
  out.residual = energy_gradient(w, sp);
  const Grid& g = *sp.grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    out.v[k] = sp.v[k] + w[k];
    out.weight[k] = sp.weight[k] * std::exp(2.0 * w[k]);
  }
  return out;
}

double exp_remainder(double x) {
  if (std::abs(x) < 0.1) {
    // x^2 (1/2! + x/3! + ... + x^10/12!), Horner form
    static constexpr std::array<double, 13> kFactorial = {1.0,      1.0,       2.0,        6.0,        24.0,
                                                           120.0,    720.0,     5040.0,     40320.0,    362880.0,
                                                           3628800.0, 39916800.0, 479001600.0};
    double term = 1.0 / kFactorial[12];
    for (int n = 11; n >= 2; --n) term = 1.0 / kFactorial[n] + x * term;
    return x * x * term;
  }
  return std::expm1(x) - x;
}

EnergyBreakdown energy(const ScalarField& phi, const SingularPart& sp) {
  require_same_grid(phi, sp);
  const Grid& g = *sp.grid;
  check_exponent(phi.values(), g);
  const auto& kt = kernels::active();
  const double h2 = g.h() * g.h();
  std::vector<double> rem(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) rem[k] = exp_remainder(2.0 * phi[k]);
  }
  EnergyBreakdown e;
  e.dirichlet = kt.edge_product(phi.values().data(), phi.values().data(), g.nx(), g.ny());
  e.nonlinear = h2 * kt.dot(sp.weight.values().data(), rem.data(), g.size());
  e.linear = 2.0 * h2 * kt.dot(sp.residual.values().data(), phi.values().data(), g.size());
  e.total = e.dirichlet + e.nonlinear + e.linear;
  return e;
}

double energy_difference(const ScalarField& phi, const ScalarField& step, double alpha, const SingularPart& sp) {
  require_same_grid(phi, sp);
  require_same_grid(step, sp);
  const Grid& g = *sp.grid;
  check_exponent(phi.values(), g);
  const auto& kt = kernels::active();
  const double h2 = g.h() * g.h();
  const double* p = phi.values().data();
  const double* s = step.values().data();
  std::vector<double> term(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double a = 2.0 * alpha * s[k];
    if (!(std::abs(p[k] + alpha * s[k]) <= kMaxExponentArgument)) {
      throw OverflowError("exponential overflow along the search direction at node " + std::to_string(k), k);
    }
    // e^{2p} e^{a} - 1 - 2p - a - (e^{2p} - 1 - 2p) = expm1(2p) expm1(a) + rem(a)
    term[k] = std::expm1(2.0 * p[k]) * std::expm1(a) + exp_remainder(a);
  }
  const double dirichlet =
      2.0 * alpha * kt.edge_product(p, s, g.nx(), g.ny()) + alpha * alpha * kt.edge_product(s, s, g.nx(), g.ny());
  const double nonlinear = h2 * kt.dot(sp.weight.values().data(), term.data(), g.size());
  const double linear = 2.0 * alpha * h2 * kt.dot(sp.residual.values().data(), s, g.size());
  return dirichlet + nonlinear + linear;
}

ScalarField energy_gradient(const ScalarField& phi, const SingularPart& sp) {
  require_same_grid(phi, sp);
  const Grid& g = *sp.grid;
  check_exponent(phi.values(), g);
  std::vector<double> em1(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) em1[k] = std::expm1(2.0 * phi[k]);
  }
  ScalarField out(sp.grid);
  kernels::active().energy_gradient(phi.values().data(), em1.data(), sp.weight.values().data(),
                                    sp.residual.values().data(), g.mask().data(), out.values().data(), g.nx(),
                                    g.ny(), 1.0 / (g.h() * g.h()));
  return out;
}

HessianOperator::HessianOperator(const ScalarField& phi, const SingularPart& sp) : grid_(sp.grid) {
  require_same_grid(phi, sp);
  const Grid& g = *grid_;
  check_exponent(phi.values(), g);
  diag_.assign(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) diag_[k] = 2.0 * sp.weight[k] * std::exp(2.0 * phi[k]);
  }
}

void HessianOperator::apply(std::span<const double> in, std::span<double> out) const {
  const Grid& g = *grid_;
  kernels::active().helmholtz(in.data(), diag_.data(), g.mask().data(), out.data(), g.nx(), g.ny(),
                              1.0 / (g.h() * g.h()));
}

ScalarField HessianOperator::apply(const ScalarField& psi) const {
  if (psi.grid_ptr() != grid_) throw std::invalid_argument("field lives on a different grid");
  ScalarField out(grid_);
  apply(psi.values(), out.values());
  return out;
}

ScalarField hessian_apply(const ScalarField& phi, const SingularPart& sp, const ScalarField& psi) {
  return HessianOperator(phi, sp).apply(psi);
}

double inner(const ScalarField& a, const ScalarField& b) {
  const Grid& g = a.grid();
  if (b.grid_ptr() != a.grid_ptr()) throw std::invalid_argument("fields live on different grids");
  return g.h() * g.h() * kernels::active().dot(a.values().data(), b.values().data(), g.size());
}

double gradient_norm(const ScalarField& phi) {
  const Grid& g = phi.grid();
  const double* p = phi.values().data();
  return std::sqrt(kernels::active().edge_product(p, p, g.nx(), g.ny()));
}

EnergyGap energy_gap(const ScalarField& phi, const ScalarField& w, const SingularPart& sp) {
  require_same_grid(phi, sp);
  require_same_grid(w, sp);
  EnergyGap gap;
  gap.lhs = energy(phi + w, sp).total - energy(w, sp).total;

  const Grid& g = *sp.grid;
  check_exponent(phi.values(), g);
  double nonlinear = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    nonlinear += sp.weight[k] * std::exp(2.0 * w[k]) * exp_remainder(2.0 * phi[k]);
  }
  gap.rhs = gradient_norm(phi) * gradient_norm(phi) + g.h() * g.h() * nonlinear;
  return gap;
}

}  // namespace renorm
