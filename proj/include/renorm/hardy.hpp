#pragma once

// Weighted Hardy-Trudinger inequalities: the exponential series Phi_N, the
// norms on both sides, the constants of the Whitney-based proof, the Hardy
// quotient, witness test functions, and an audit of every step of the proof
// chain on an actual partition of unity.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "renorm/grid.hpp"
#include "renorm/whitney.hpp"

namespace renorm {

/// Volume of the unit ball in R^N.
double unit_ball_volume(int N);

/// Raised when a series value would not fit in a double.
class SeriesOverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Raised when a constant is requested in a case without an explicit bound.
class UnsupportedConstantError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SeriesValue {
  double value = 0.0;
  int terms = 0;
  double tail_bound = 0.0;  // bound on the omitted terms
};

/// Phi_N(t) = sum_{k >= N-1} |t|^{k N'} / k!, N' = N / (N - 1), summed until the
/// ratio-test tail bound drops below 1e-16 of the partial sum. Throws
/// SeriesOverflowError when the value overflows and std::invalid_argument when
/// max_terms is too small to certify the tail.
SeriesValue phi_series(double t, int N, int max_terms = 1000000);
double phi_N(double t, int N, int max_terms = 1000000);

/// Central-difference gradient on interior nodes, one-sided toward the
/// interior neighbour where the other neighbour is not an unknown.
std::array<ScalarField, 2> field_gradient(const ScalarField& u);

/// (int |grad u|^p + |u|^p / delta^p)^(1/p), midpoint quadrature over interior nodes.
double m_norm(const ScalarField& u, double p);

/// (int |u|^q / delta^N)^(1/q).
double weighted_lhs(const ScalarField& u, double q, int N);

/// (int |grad u|^p / delta^(N-p) + |u|^p / delta^N)^(1/p).
double weighted_rhs(const ScalarField& u, double p, int N);

/// ||u / delta||_2 / ||grad u||_2; throws std::invalid_argument when the
/// gradient vanishes.
double hardy_quotient(const ScalarField& u);

/// int (e^{2u} - 1 - 2u) / delta^2.
double exponential_remainder_integral(const ScalarField& u);

/// int Phi_N(u / c1) / delta^N.
double phi_integral(const ScalarField& u, double c1, int N);

struct TheoreticalConstants {
  int N = 2;
  double N_prime = 2.0;
  double omega_N = 0.0;  // unit ball volume
  double lambda = 0.0;
  double mu = 0.0;
  double c3 = 0.0;
  double c6 = 0.0;
  int P = 0;
  double A = 0.0;  // {2P [1 + P (c3 mu)^N]^(1/N)}^(N')
  double H = 2.0;  // Hardy constant, configuration value
};

TheoreticalConstants theoretical_constants(const WhitneyParams& params, const DerivedConstants& derived,
                                           double hardy_constant = 2.0);

/// Upper bound (omega_N q)^(1 - 1/N + 1/q) on the embedding norm of
/// W^{1,N}_0(Q(1)) into L^q(Q(1)); requires q >= N.
double sobolev_bound(int N, double q);

/// Sigma_q = 2 P S_q lambda^(-N/q) [mu^(N-p) + P c3^p mu^N]^(1/p) with the
/// bound above for S_q. Only p = N is supported (UnsupportedConstantError
/// otherwise); q must satisfy q >= N and q > p.
double sigma_q(const TheoreticalConstants& c, double q, double p);

struct C2Result {
  bool diverges = false;
  double value = 0.0;
  double tail_bound = 0.0;
  long terms = 0;
  bool certified = false;  // tail_bound < 1e-12 value
  double threshold = 0.0;  // e omega_N N' A
  double c1_power = 0.0;   // c1^(N')
};

/// c2 = sum_{q >= N-1} lambda^(-N) N' omega_N (N' omega_N A / c1^N')^q q^q / (q-1)!.
/// Flags divergence iff c1^N' <= e omega_N N' A; otherwise sums in log space
/// until the ratio-test tail bound certifies 1e-12 relative accuracy.
C2Result c2_constant(double c1, const TheoreticalConstants& c, long max_terms = 10000000);

/// c1 with c1^N' equal to the convergence threshold.
double c1_threshold(const TheoreticalConstants& c);

// ---------------------------------------------------------------------------
// Test functions

enum class TestFamily { radial_bump, smoothed_tent, sine_mode, truncated_log };

std::string to_string(TestFamily f);

struct TestFunctionSpec {
  TestFamily family = TestFamily::radial_bump;
  double amplitude = 1.0;
  // radial bump: amplitude (1 - |x - c|^2 / R^2)_+^exponent, exponent >= 1
  Point2 center{0.0, 0.0};
  double radius = 0.5;
  double exponent = 2.0;
  // smoothed tent: amplitude F_w(delta - offset) for delta > offset, F_w the smoothing profile of width w
  double offset = 0.0;
  double width = 0.1;
  // sine mode on the bounding box, times min(1, delta / cutoff) when cutoff > 0
  int k1 = 1;
  int k2 = 1;
  double cutoff = 0.0;
  // truncated logarithm: amplitude clamp(ln(delta / eps), 0, levels)
  double eps = 0.05;
  double levels = 2.0;
};

/// A Lipschitz function vanishing on the boundary, with analytic value and gradient.
class TestFunction {
 public:
  /// Throws std::invalid_argument when the described function does not vanish on
  /// the boundary of this domain (bump ball leaving the domain, sine mode
  /// without cutoff on a non-rectangle, nonpositive widths).
  TestFunction(TestFunctionSpec spec, Domain domain);

  const TestFunctionSpec& spec() const { return spec_; }
  const Domain& domain() const { return domain_; }

  double value(const Point2& p) const;
  Point2 gradient(const Point2& p) const;

  /// The function vanishes where delta <= support_margin().
  double support_margin() const;

  /// Conservative: true only if the function is zero on the closed square.
  bool vanishes_on_square(const Point2& center, double side) const;

  ScalarField sample(std::shared_ptr<const Grid> grid) const;
  std::string describe() const;

 private:
  TestFunctionSpec spec_;
  Domain domain_;
  BoundingBox box_;
};

/// Bumps, tents, sine modes and truncated logarithms adapted to the domain.
std::vector<TestFunctionSpec> standard_test_family(const Domain& domain);

/// Members of the standard family supported in {delta > margin}.
std::vector<TestFunctionSpec> compact_test_family(const Domain& domain, double margin);

/// Largest Hardy quotient over the standard family and a sweep of tent widths
/// (widths below 2h are skipped as unresolved).
struct HardySearch {
  double max_quotient = 0.0;
  std::string argmax;
  std::size_t candidates = 0;
};
HardySearch max_hardy_quotient(const Domain& domain, double h);

// ---------------------------------------------------------------------------
// Inequality checks

struct InequalityCase {
  std::string theorem;
  std::string domain;
  std::string function;
  double q = 0.0;
  double lhs = 0.0;
  double rhs_bound = 0.0;
  double ratio = 0.0;  // lhs / rhs_bound
  bool pass = false;
};

/// Relative quadrature band applied to each side before comparing.
inline constexpr double kQuadratureTolerance = 0.01;

/// lhs (1 - tol) <= rhs (1 + tol).
bool within_band(double lhs, double rhs, double tol = kQuadratureTolerance);

/// weighted_lhs(u, q, 2) <= Sigma_q weighted_rhs(u, 2, 2) for every function of
/// the standard family and every q.
std::vector<InequalityCase> weighted_inequality_suite(const Domain& domain, double h, const TheoreticalConstants& c,
                                                      const std::vector<double>& qs);

struct ChainStep {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct ChainReport {
  double q = 0.0;
  double p = 0.0;
  std::string function;
  std::vector<ChainStep> steps;
  std::size_t violations = 0;
  std::size_t sobolev_cubes = 0;       // cubes checked in the scaled Sobolev step
  std::size_t sobolev_violations = 0;
  std::size_t tiles = 0;               // selected cubes integrated over
  std::size_t points = 0;              // quadrature points
  std::size_t neighbour_mismatches = 0;
  double sigma_support = 0.0;          // Sigma_q with support-side constants
  bool pass() const { return violations == 0; }
};

/// Evaluates every quantity of the localization proof for u on the partition
/// of unity of decomp, with composite Gauss-Legendre quadrature whose cells
/// are split at every core and support face, and checks each inequality of
/// the chain. Supports are the eta'-dilated cubes of side eta' s, so the
/// constants used are lambda / eta', mu / eta' and c3 eta'.
///
/// Requires p = N = 2, q > p and u supported in {delta > eps_cut}; throws
/// std::invalid_argument or UnsupportedConstantError otherwise.
std::vector<ChainReport> chain_audit(const TestFunction& u, const WhitneyDecomposition<2>& decomp,
                                     const BumpFunction& bump, const std::vector<double>& qs, double p,
                                     int gauss_points = 6);

ChainReport chain_audit(const TestFunction& u, const WhitneyDecomposition<2>& decomp, const BumpFunction& bump,
                        double q, double p, int gauss_points = 6);

struct ElementaryReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max lhs / rhs
};

/// sum_k b_k^r <= (sum_k b_k)^r for random nonnegative b and r in {1, 1.5, 2, 3}.
ElementaryReport check_power_sum(std::uint64_t seed, std::size_t trials);

/// Phi_N(f + g) <= Phi_N(2f) + Phi_N(2g) for random f, g.
ElementaryReport check_phi_split(int N, std::uint64_t seed, std::size_t trials);

}  // namespace renorm
