// Acceptance suite: one line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "renorm/hardy.hpp"
#include "renorm/solver.hpp"
#include "renorm/whitney.hpp"
#include "support.hpp"

using namespace renorm;

namespace {

// Pinned tolerances.
constexpr double kOracleSupError = 5e-3;
constexpr double kOracleMinDistance = 0.05;
constexpr double kStencilRegion = 0.1;
constexpr double kStencilOrderRatio = 3.5;  // O(h^2) halving gives 4
constexpr double kSymbolicTolerance = 1e-12;
constexpr double kRuntimeLimitSeconds = 60.0;
constexpr double kGapFloor = -1e-8;
constexpr double kIdentityTolerance = 1e-6;
constexpr double kLShapeHardyFactor = 1.05;
constexpr std::size_t kWhitneySamples = 1000000;
constexpr int kWhitneyLevels = 10;
constexpr double kPartitionTolerance = 1e-12;
constexpr int kChainLevels = 8;
constexpr double kSeriesCertification = 1e-12;
constexpr double kDirectionalTolerance = 1e-6;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kConvergenceFactor = 1.5;
constexpr int kTrials = 100;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d  %-32s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

bool strictly_decreasing(const SolveReport& r) {
  for (std::size_t i = 1; i < r.energy_history.size(); ++i) {
    if (!(r.energy_history[i] < r.energy_history[i - 1])) return false;
  }
  for (double d : r.energy_decrements) {
    if (!(d < 0.0)) return false;
  }
  return true;
}

struct Run {
  SingularPart sp;
  SolveReport report;
  double seconds = 0.0;
};

Run run_solve(const Domain& domain, double h, double hardy = 2.0) {
  SolverConfig cfg;
  cfg.hardy_constant = hardy;
  cfg.oracle_min_distance = kOracleMinDistance;
  const auto start = std::chrono::steady_clock::now();
  const auto grid = testing::make_grid(domain, h);
  const SmoothingProfile profile = SmoothingProfile::for_domain(domain);
  SolveReport rep = solve(domain, profile, grid, cfg);
  const double secs = seconds_since(start);
  return {build_singular_part(domain, profile, grid), std::move(rep), secs};
}

// Max of |-Laplacian_h u* + 4 e^{2u*}| over nodes with d > region and a full interior stencil.
double oracle_stencil_residual(double h) {
  const Disk disk;
  const auto g = testing::make_grid(Domain::unit_disk(), h);
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < g->ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g->nx(); ++i) {
      const Point2 p = g->node(i, j);
      if (1.0 - norm(p) <= kStencilRegion) continue;
      const double u = disk_maximal_solution(disk, p);
      const double lap = (disk_maximal_solution(disk, {p[0] + h, p[1]}) + disk_maximal_solution(disk, {p[0] - h, p[1]}) +
                          disk_maximal_solution(disk, {p[0], p[1] + h}) + disk_maximal_solution(disk, {p[0], p[1] - h}) -
                          4.0 * u) /
                         (h * h);
      worst = std::max(worst, std::abs(-lap + 4.0 * std::exp(2.0 * u)));
    }
  }
  return worst;
}

// u* = -ln(1 - rho^2): u'' + u'/rho = (2 + 2 rho^2)/(1 - rho^2)^2 + 2/(1 - rho^2) = 4/(1 - rho^2)^2.
bool oracle_symbolic_check() {
  const Disk disk;
  for (int i = 0; i < 1000; ++i) {
    const double rho = 0.999 * i / 1000.0;
    const double t = 1.0 - rho * rho;
    const double u = -std::log(t);
    const double u_rr = (2.0 + 2.0 * rho * rho) / (t * t);
    const double u_r_over_rho = 2.0 / t;
    const double lap = u_rr + u_r_over_rho;
    if (std::abs(lap - 4.0 * std::exp(2.0 * u)) > kSymbolicTolerance * lap) return false;
    if (std::abs(disk_maximal_solution(disk, {rho, 0.0}) - u) > 1e-14 * (1.0 + std::abs(u))) return false;
  }
  return true;
}

}  // namespace

int main() {
  const Domain disk = Domain::unit_disk();
  const Domain square = Domain::unit_square();
  const Domain lshape = Domain::l_shape();
  std::vector<const SolveReport*> all_solves;

  // 1. disk oracle
  const bool symbolic = oracle_symbolic_check();
  const double s64 = oracle_stencil_residual(1.0 / 64);
  const double s128 = oracle_stencil_residual(1.0 / 128);
  const double s256 = oracle_stencil_residual(1.0 / 256);
  const bool oracle_ok = symbolic && s64 / s128 >= kStencilOrderRatio && s128 / s256 >= kStencilOrderRatio;
  const Run d256 = run_solve(disk, 1.0 / 256);
  all_solves.push_back(&d256.report);
  const double err256 = d256.report.oracle ? d256.report.oracle->sup : INFINITY;
  report(1, "disk oracle",
         oracle_ok && d256.report.converged && err256 < kOracleSupError && d256.seconds < kRuntimeLimitSeconds,
         fmt("oracle stencil residual %.3e/%.3e/%.3e, sup error %.3e (< %.0e) at h=1/256 in %.2f s (< %.0f s)", s64,
             s128, s256, err256, kOracleSupError, d256.seconds, kRuntimeLimitSeconds));

  // 2. variational characterization
  const Run d128 = run_solve(disk, 1.0 / 128);
  all_solves.push_back(&d128.report);
  const MinimizerReport m = verify_minimizer(d128.report, d128.sp, kTrials);
  report(2, "variational characterization",
         m.min_gap >= kGapFloor && m.max_identity_discrepancy < kIdentityTolerance && m.trials == kTrials &&
             m.amplitudes.size() == 3,
         fmt("%d trials x %zu amplitudes, min gap %.3e (>= %.0e), identity discrepancy %.3e (< %.0e)", m.trials,
             m.amplitudes.size(), m.min_gap, kGapFloor, m.max_identity_discrepancy, kIdentityTolerance));

  // 3. a priori bound
  const Run sq = run_solve(square, 1.0 / 128);
  all_solves.push_back(&sq.report);
  const double lshape_H = kLShapeHardyFactor * max_hardy_quotient(lshape, 1.0 / 128).max_quotient;
  const Run ls = run_solve(lshape, 1.0 / 128, lshape_H);
  all_solves.push_back(&ls.report);
  const auto& c_disk = d128.report.gradient_bound;
  const auto& c_sq = sq.report.gradient_bound;
  const auto& c_ls = ls.report.gradient_bound;
  report(3, "gradient bound",
         c_disk.pass && c_sq.pass && c_ls.pass && sq.report.converged && ls.report.converged,
         fmt("margins disk %.4f (H=2), square %.4f (H=2), lshape %.4f (H=%.4f)", c_disk.margin(), c_sq.margin(),
             c_ls.margin(), lshape_H));

  // 4. Whitney suite
  {
    bool ok = true;
    std::string detail;
    for (const Domain* d : {&disk, &square, &lshape}) {
      WhitneyParams p;
      p.eta = 2.0;
      p.eta_prime = 1.05;
      p.k_max = kWhitneyLevels;
      const auto decomp = decompose(*d, p);
      const PropertyReport r = verify_properties(decomp, BumpFunction(p.eta_prime), kWhitneySamples);
      const bool pass = r.pass() && r.samples == kWhitneySamples && r.coverage_misses == 0 &&
                        r.overlap_max <= decomp.constants().P && r.support_ratio_violations == 0 &&
                        r.support_ratio_min >= decomp.constants().lambda &&
                        r.support_ratio_max <= decomp.constants().mu && r.side_ratio_violations == 0 &&
                        r.partition_sum_error <= kPartitionTolerance;
      ok = ok && pass;
      detail += fmt("%s: %zu cubes, misses %zu, overlap %d/%d, partition err %.1e; ", std::string(d->kind()).c_str(),
                    r.cubes, r.coverage_misses, r.overlap_max, decomp.constants().P, r.partition_sum_error);
    }
    report(4, "whitney decomposition", ok, detail);
  }

  // 5. inequality suite, chain audit, growth of Sigma_q
  {
    const WhitneyParams p;
    const BumpFunction bump(p.eta_prime);
    const TheoreticalConstants tc = theoretical_constants(p, derive_constants(p, bump));
    const std::vector<double> qs{3.0, 4.0, 6.0, 10.0, 20.0};
    std::size_t cases = 0;
    std::size_t case_failures = 0;
    double worst_ratio = 0.0;
    std::size_t audits = 0;
    std::size_t step_violations = 0;
    for (const Domain* d : {&disk, &square, &lshape}) {
      for (const auto& ic : weighted_inequality_suite(*d, 1.0 / 128, tc, qs)) {
        ++cases;
        case_failures += ic.pass ? 0 : 1;
        worst_ratio = std::max(worst_ratio, ic.ratio);
      }
      WhitneyParams wp;
      wp.k_max = kChainLevels;
      const auto decomp = decompose(*d, wp);
      for (const auto& spec : compact_test_family(*d, decomp.truncation().eps_cut)) {
        for (const auto& r : chain_audit(TestFunction(spec, *d), decomp, bump, qs, 2.0)) {
          ++audits;
          step_violations += r.violations;
        }
      }
    }
    bool monotone = true;
    double prev = INFINITY;
    for (int q = 3; q <= 60; ++q) {
      const double n = sigma_q(tc, q, 2.0) / std::pow(q, 0.5 + 1.0 / q);
      if (n > prev * (1.0 + 1e-12)) monotone = false;
      prev = n;
    }
    report(5, "weighted inequality", case_failures == 0 && step_violations == 0 && audits > 0 && monotone,
           fmt("%zu cases, %zu failures, max lhs/rhs %.3e; %zu chain audits, %zu step violations; "
               "normalized Sigma_q nonincreasing on 3..60: %s",
               cases, case_failures, worst_ratio, audits, step_violations, monotone ? "yes" : "no"));
  }

  // 6. c2 series
  {
    const WhitneyParams p;
    const TheoreticalConstants tc = theoretical_constants(p, derive_constants(p, BumpFunction(p.eta_prime)));
    const double t = c1_threshold(tc);
    bool ok = true;
    std::string detail;
    for (double f : {0.5, 0.9, 0.999}) {
      const C2Result r = c2_constant(f * t, tc);
      ok = ok && r.diverges && r.c1_power <= r.threshold;
    }
    for (double f : {1.01, 1.5, 2.0, 4.0}) {
      const C2Result r = c2_constant(f * t, tc);
      ok = ok && !r.diverges && r.c1_power > r.threshold && r.certified && std::isfinite(r.value) &&
           r.tail_bound < kSeriesCertification * r.value;
      detail += fmt("c1=%.2fx: c2=%.6g (%ld terms); ", f, r.value, r.terms);
    }
    report(6, "c2 series", ok, "divergent below threshold; " + detail);
  }

  // 7. gradient and Hessian
  {
    const SingularPart sp = build_singular_part(disk, SmoothingProfile::for_domain(disk),
                                                testing::make_grid(disk, 1.0 / 64));
    const ScalarField phi = testing::smooth_field(sp, 7, 0.5);
    const ScalarField G = energy_gradient(phi, sp);
    const double eps = 1e-5;
    double worst_dir = 0.0;
    for (int s = 0; s < kTrials; ++s) {
      const ScalarField psi = testing::smooth_field(sp, 1000 + s);
      const double fd = (energy(phi + eps * psi, sp).total - energy(phi - eps * psi, sp).total) / (2.0 * eps);
      worst_dir = std::max(worst_dir, testing::relative_difference(fd, 2.0 * inner(G, psi)));
    }
    const HessianOperator H(phi, sp);
    double worst_sym = 0.0;
    double min_form = INFINITY;
    for (int s = 0; s < kTrials; ++s) {
      const ScalarField a = testing::noise_field(sp.grid, 2 * s + 1);
      const ScalarField b = testing::noise_field(sp.grid, 2 * s + 2);
      const double ab = inner(H.apply(a), b);
      const double ba = inner(a, H.apply(b));
      const double aa = inner(H.apply(a), a);
      worst_sym = std::max(worst_sym, std::abs(ab - ba) / (std::abs(ab) + aa));
      min_form = std::min(min_form, aa);
    }
    report(7, "derivative checks",
           worst_dir < kDirectionalTolerance && worst_sym < kSymmetryTolerance && min_form > 0.0,
           fmt("directional rel err %.2e (< %.0e), Hessian asymmetry %.2e (< %.0e), min form %.3e (> 0)", worst_dir,
               kDirectionalTolerance, worst_sym, kSymmetryTolerance, min_form));
  }

  // 8. grid convergence and monotone energy
  {
    const double err128 = d128.report.oracle ? d128.report.oracle->sup : INFINITY;
    bool monotone = true;
    for (const SolveReport* r : all_solves) monotone = monotone && strictly_decreasing(*r);
    const double factor = err128 / err256;
    report(8, "grid convergence", factor >= kConvergenceFactor && monotone,
           fmt("sup error %.3e -> %.3e, factor %.2f (>= %.1f); energy strictly decreasing in %zu solves: %s", err128,
               err256, factor, kConvergenceFactor, all_solves.size(), monotone ? "yes" : "no"));
  }

  std::printf("%s: %d of 8 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
