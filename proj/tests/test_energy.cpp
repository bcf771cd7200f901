#include <doctest.h>

#include <cmath>
#include <random>

#include "renorm/energy.hpp"
#include "renorm/solver.hpp"
#include "support.hpp"

using namespace renorm;

namespace {

SingularPart disk_part(double h) {
  const Domain disk = Domain::unit_disk();
  return build_singular_part(disk, SmoothingProfile(0.2), testing::make_grid(disk, h));
}

// Sum over grid edges of (a_p - a_q)(b_p - b_q), written out directly.
double edge_sum(const ScalarField& a, const ScalarField& b) {
  const Grid& g = a.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (i + 1 < g.nx()) {
        const std::size_t e = g.index(i + 1, j);
        s += (a[k] - a[e]) * (b[k] - b[e]);
      }
      if (j + 1 < g.ny()) {
        const std::size_t n = g.index(i, j + 1);
        s += (a[k] - a[n]) * (b[k] - b[n]);
      }
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("renorm_energy") {

TEST_CASE("singular part identities") {
  const SingularPart sp = disk_part(1.0 / 64);
  const Grid& g = *sp.grid;
  const SmoothingProfile f(0.2);
  int identity_nodes = 0;
  int saturated_nodes = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) {
      REQUIRE(sp.v[k] == 0.0);
      continue;
    }
    const double d = sp.d[k];
    REQUIRE(d > 0.0);
    REQUIRE(sp.weight[k] * d * d == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(d * std::exp(sp.v[k]) == doctest::Approx(0.5).epsilon(1e-14));
    const double delta = g.boundary_distance()[k];
    const double slope = f.derivative(delta);
    // r d = Laplacian(d) + (1 - |grad d|^2) / d
    REQUIRE(sp.residual[k] * d == doctest::Approx(sp.laplacian_d[k] + (1.0 - slope * slope) / d).epsilon(1e-13));
    if (delta <= 0.2) {
      REQUIRE(sp.residual[k] * d == doctest::Approx(sp.laplacian_d[k]).epsilon(1e-13));
      ++identity_nodes;
    }
    if (delta >= 0.6) {
      REQUIRE(sp.laplacian_d[k] == 0.0);
      REQUIRE(sp.residual[k] == doctest::Approx(1.0 / (d * d)));
      ++saturated_nodes;
    }
  }
  CHECK(identity_nodes > 100);
  CHECK(saturated_nodes > 100);
}

TEST_CASE("disk values in the identity zone") {
  const SingularPart sp = disk_part(1.0 / 64);
  const Grid& g = *sp.grid;
  int checked = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double r = norm(g.node(k));
    const double delta = 1.0 - r;
    if (delta > 0.2) continue;
    REQUIRE(sp.v[k] == doctest::Approx(-std::log(2.0 * delta)).epsilon(1e-12));
    REQUIRE(sp.weight[k] == doctest::Approx(1.0 / (delta * delta)).epsilon(1e-12));
    REQUIRE(sp.residual[k] == doctest::Approx(-1.0 / (r * delta)).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 100);
  // the node at r = 0.9 of a grid of spacing 0.05
  const SingularPart coarse = disk_part(0.05);
  const Grid& cg = *coarse.grid;
  bool found = false;
  for (std::size_t k = 0; k < cg.size(); ++k) {
    const Point2 p = cg.node(k);
    if (std::abs(p[0] - 0.9) < 1e-12 && std::abs(p[1]) < 1e-12) {
      found = true;
      CHECK(coarse.v[k] == doctest::Approx(1.6094379124341003));
      CHECK(coarse.weight[k] == doctest::Approx(100.0));
      CHECK(coarse.residual[k] == doctest::Approx(-11.111111111111111));
    }
  }
  CHECK(found);
}

TEST_CASE("residual matches the stencil residual of v") {
  // -Laplacian(v) + 4 e^{2v} by the 5-point stencil differs from r by the
  // truncation error (h^2 / 12)(v_xxxx + v_yyyy). In the identity zone
  // v = -ln(2 delta) has fourth radial derivative 6 / delta^4, so the error is
  // about h^2 / (2 delta^4). Away from the joins of the smoothing profile it
  // is O(h^2); across them F''' jumps and it is O(h).
  const double t0 = 0.2;
  double prev_away = 0.0;
  double prev_join = 0.0;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const SingularPart sp = disk_part(h);
    const Grid& g = *sp.grid;
    const ScalarField lv = laplacian(sp.v);
    double away = 0.0;
    double join = 0.0;
    double scaled = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double delta = g.boundary_distance()[k];
      if (!g.is_interior(k) || delta < 0.05 || norm(g.node(k)) < 0.1) continue;
      const double err = std::abs(-lv[k] + sp.weight[k] - sp.residual[k]);
      if (std::abs(delta - t0) < 2.0 * h || std::abs(delta - 3.0 * t0) < 2.0 * h) {
        join = std::max(join, err);
      } else {
        away = std::max(away, err);
      }
      if (delta < t0 - 2.0 * h) scaled = std::max(scaled, err * std::pow(delta, 4) / (h * h));
    }
    CHECK(scaled < 0.6);
    if (prev_away > 0.0) {
      CHECK(prev_away / away > 3.0);
      CHECK(prev_join / join > 1.8);
    }
    prev_away = away;
    prev_join = join;
  }
}

TEST_CASE("r d stays bounded under refinement") {
  double a = 0.0;
  double b = 0.0;
  for (auto [h, out] : {std::pair<double, double*>{1.0 / 32, &a}, {1.0 / 128, &b}}) {
    const SingularPart sp = disk_part(h);
    for (std::size_t k = 0; k < sp.grid->size(); ++k) {
      if (sp.grid->is_interior(k)) *out = std::max(*out, std::abs(sp.residual[k] * sp.d[k]));
    }
  }
  CHECK(b < 1.5 * a);
  CHECK(b < 10.0);
}

TEST_CASE("energy of zero and the term split") {
  const SingularPart sp = disk_part(1.0 / 32);
  const EnergyBreakdown z = energy(ScalarField(sp.grid), sp);
  CHECK(z.total == 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ScalarField phi = testing::noise_field(sp.grid, seed, 0.5);
    const EnergyBreakdown e = energy(phi, sp);
    REQUIRE(e.nonlinear >= 0.0);
    REQUIRE(e.total == doctest::Approx(e.dirichlet + e.nonlinear + e.linear).epsilon(1e-14));
    REQUIRE(e.dirichlet == doctest::Approx(edge_sum(phi, phi)).epsilon(1e-12));
  }
}

TEST_CASE("exp remainder") {
  for (double x : {-3.0, -1e-3, -1e-9, 0.0, 1e-12, 1e-5, 0.1, 2.0}) {
    const long double ex = std::expm1l(static_cast<long double>(x)) - x;
    CHECK(exp_remainder(x) == doctest::Approx(static_cast<double>(ex)).epsilon(1e-14));
    CHECK(exp_remainder(x) >= 0.0);
  }
}

TEST_CASE("overflow names the node") {
  const SingularPart sp = disk_part(1.0 / 16);
  ScalarField phi(sp.grid);
  std::size_t node = 0;
  for (std::size_t k = 0; k < sp.grid->size(); ++k) {
    if (sp.grid->is_interior(k)) {
      node = k;
      break;
    }
  }
  phi[node] = 400.0;
  try {
    (void)energy(phi, sp);
    FAIL("no overflow error");
  } catch (const OverflowError& e) {
    CHECK(e.node() == node);
  }
  CHECK_THROWS_AS(energy_gradient(phi, sp), OverflowError);
}

TEST_CASE("gradient is the residual at zero") {
  const SingularPart sp = disk_part(1.0 / 32);
  const ScalarField g0 = energy_gradient(ScalarField(sp.grid), sp);
  for (std::size_t k = 0; k < sp.grid->size(); ++k) REQUIRE(g0[k] == doctest::Approx(sp.residual[k]));
}

TEST_CASE("gradient against central differences of the energy") {
  const SingularPart sp = disk_part(1.0 / 32);
  const double eps = 1e-5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ScalarField phi = testing::smooth_field(sp, seed, 0.5);
    const ScalarField psi = testing::smooth_field(sp, 1000 + seed);
    const double fd = (energy(phi + eps * psi, sp).total - energy(phi - eps * psi, sp).total) / (2.0 * eps);
    const double an = 2.0 * inner(energy_gradient(phi, sp), psi);
    REQUIRE(testing::relative_difference(fd, an) < 1e-6);
    // the accurate difference agrees as well
    const double fd2 = (energy_difference(phi, psi, eps, sp) - energy_difference(phi, psi, -eps, sp)) / (2.0 * eps);
    REQUIRE(testing::relative_difference(fd2, an) < 1e-8);
  }
}

TEST_CASE("energy difference matches the difference of totals") {
  const SingularPart sp = disk_part(1.0 / 32);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScalarField phi = testing::smooth_field(sp, seed, 0.3);
    const ScalarField s = testing::smooth_field(sp, 50 + seed, 0.3);
    const double direct = energy(phi + 0.7 * s, sp).total - energy(phi, sp).total;
    CHECK(energy_difference(phi, s, 0.7, sp) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("Hessian: finite differences, symmetry, positivity") {
  const SingularPart sp = disk_part(1.0 / 32);
  const ScalarField phi = testing::smooth_field(sp, 77, 0.5);
  const HessianOperator H(phi, sp);
  CHECK(max_abs(H.apply(ScalarField(sp.grid))) == 0.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ScalarField a = testing::noise_field(sp.grid, 2 * seed + 1);
    const ScalarField b = testing::noise_field(sp.grid, 2 * seed + 2);
    const double ab = inner(H.apply(a), b);
    const double ba = inner(a, H.apply(b));
    REQUIRE(std::abs(ab - ba) <= 1e-12 * (std::abs(ab) + inner(H.apply(a), a)));
    REQUIRE(inner(H.apply(a), a) > 0.0);
  }
  const ScalarField psi = testing::smooth_field(sp, 5);
  const double eps = 1e-5;
  const ScalarField fd = (1.0 / (2.0 * eps)) * (energy_gradient(phi + eps * psi, sp) - energy_gradient(phi - eps * psi, sp));
  const ScalarField hp = hessian_apply(phi, sp, psi);
  CHECK(max_abs(fd - hp) <= 1e-6 * max_abs(hp));
}

TEST_CASE("summation by parts") {
  const SingularPart sp = disk_part(1.0 / 32);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScalarField a = testing::noise_field(sp.grid, seed);
    const ScalarField b = testing::noise_field(sp.grid, seed + 100);
    const double lhs = -inner(laplacian(a), b);
    REQUIRE(lhs == doctest::Approx(edge_sum(a, b)).epsilon(1e-11));
    REQUIRE(gradient_norm(a) * gradient_norm(a) == doctest::Approx(edge_sum(a, a)).epsilon(1e-12));
  }
}

TEST_CASE("convexity along segments") {
  const SingularPart sp = disk_part(1.0 / 32);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const ScalarField a = testing::smooth_field(sp, seed, 2.0);
    const ScalarField b = testing::smooth_field(sp, seed + 500, 2.0);
    const double mid = energy(0.5 * (a + b), sp).total;
    REQUIRE(energy(a, sp).total + energy(b, sp).total >= 2.0 * mid - 1e-12 * std::abs(mid));
  }
}

TEST_CASE("nonlinear integrand is controlled by (phi / d)^2") {
  const SingularPart sp = disk_part(1.0 / 64);
  const ScalarField phi = testing::smooth_field(sp, 3, 1.5);
  for (std::size_t k = 0; k < sp.grid->size(); ++k) {
    if (!sp.grid->is_interior(k)) continue;
    const double integrand = sp.weight[k] * exp_remainder(2.0 * phi[k]);
    const double q = phi[k] / sp.d[k];
    REQUIRE(integrand <= 2.0 * q * q * std::exp(2.0 * std::abs(phi[k])) * (1.0 + 1e-12));
  }
}

TEST_CASE("energy gap") {
  const Domain disk = Domain::unit_disk();
  const auto g = testing::make_grid(disk, 1.0 / 32);
  const SingularPart sp = build_singular_part(disk, SmoothingProfile(0.2), g);
  const SolveReport rep = minimize(sp, SolverConfig{});
  REQUIRE(rep.converged);
  const EnergyGap zero = energy_gap(ScalarField(g), rep.w, sp);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  // relative to u = v + w the residual is the (vanishing) gradient
  const SingularPart about = singular_part_about(sp, rep.w);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScalarField phi = testing::smooth_field(sp, seed, 0.2);
    const EnergyGap gap = energy_gap(phi, rep.w, sp);
    REQUIRE(gap.rhs >= 0.0);
    const double slack = 2.0 * rep.final_gradient_norm * l2_norm(phi) + 1e-13 * std::abs(energy(rep.w, sp).total);
    REQUIRE(std::abs(gap.lhs - gap.rhs) <= 1e-6 * gap.rhs + slack);
    const double about_total = energy(phi, about).total;
    REQUIRE(std::abs(about_total - gap.rhs) <= 1e-10 * gap.rhs + slack);
  }
}

TEST_CASE("building on an empty grid is refused") {
  const Domain tiny = Domain::disk({0.0, 0.0}, 0.01);
  CHECK_THROWS_AS(build_singular_part(tiny, SmoothingProfile(0.002), testing::make_grid(tiny, 0.5)),
                  std::invalid_argument);
}

}  // TEST_SUITE
