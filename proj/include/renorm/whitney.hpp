#pragma once

// Dyadic Whitney-type cube decomposition of a bounded open set, the smooth
// partition of unity subordinate to the dilated cubes, and numerical checks
// of their properties.
//
// Cubes are closed: Q(x, s) has center x and side s, and Q_sigma denotes
// Q(x, sigma s). A dyadic cube of level k and index m is
// [0, 2^-k]^N + m 2^-k. A cube Q with parent P is selected iff Q_eta lies in
// the domain and P_eta does not.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "renorm/geometry.hpp"

namespace renorm {

/// Bounded open set in R^N seen through the queries the decomposition needs.
template <std::size_t N>
struct Region {
  std::string name;
  Point<N> lo{};
  Point<N> hi{};
  double diameter = 0.0;
  std::function<bool(const Point<N>&)> contains;
  std::function<double(const Point<N>&)> distance;
  /// True iff the closed axis-aligned cube of the given center and side lies in the set.
  std::function<bool(const Point<N>&, double)> contains_closed_cube;
};

Region<2> region_from_domain(const Domain& domain);

/// Open Euclidean ball.
template <std::size_t N>
Region<N> ball_region(const Point<N>& center, double radius);

/// Open axis-aligned box.
template <std::size_t N>
Region<N> box_region(const Point<N>& lo, const Point<N>& hi);

struct WhitneyParams {
  double eta = 2.0;
  double eta_prime = 1.05;
  int dimension = 2;
  /// Root level; when absent, the largest k with 2^-k >= diameter.
  std::optional<int> k_min;
  int k_max = 14;

  /// Requires eta / sqrt(N) > eta' > 1 and k_min <= k_max; throws std::invalid_argument.
  void validate() const;
};

template <std::size_t N>
struct DyadicCube {
  int level = 0;
  std::array<std::int64_t, N> index{};

  double side() const;
  Point<N> center() const;
  DyadicCube parent() const;
  std::array<DyadicCube, (std::size_t{1} << N)> children() const;

  auto operator<=>(const DyadicCube&) const = default;
};

/// Smooth reference profile: a tensor product of a 1D bump equal to 1 on
/// [-1/2, 1/2], vanishing outside (-eta'/2, eta'/2), with exp(-1/t) transitions.
class BumpFunction {
 public:
  explicit BumpFunction(double eta_prime);

  double eta_prime() const { return eta_prime_; }

  double profile(double t) const;
  double profile_derivative(double t) const;

  template <std::size_t N>
  double value(const Point<N>& x) const;
  template <std::size_t N>
  Point<N> gradient(const Point<N>& x) const;

  /// max |grad phi| over R^N, by dense search refined near the steepest point.
  double max_gradient(int dimension) const;

 private:
  double eta_prime_;
  double band_;  // width of each transition interval
};

struct DerivedConstants {
  double lambda = 0.0;  // lower bound of delta / s on supports
  double mu = 0.0;      // upper bound of delta / s on supports
  double c3 = 0.0;      // gradient bound |grad phi_Q| <= c3 / s_Q
  double c6 = 0.0;      // side ratio bound for intersecting supports
  int P = 0;            // neighbours per cube (self included), by enumeration
  double bump_gradient = 0.0;  // max |grad| of the reference profile
  int J1 = 0;                  // largest |level difference| allowed by c6
};

/// lambda, mu and c6 in closed form; P by enumerating the dyadic cubes whose
/// eta'-dilations may meet that of a unit cube; c3 = G (1 + P c6) with G the
/// maximal gradient of the reference profile.
DerivedConstants derive_constants(const WhitneyParams& params, const BumpFunction& bump);

/// Neighbour bound P alone.
int enumerate_neighbour_bound(const WhitneyParams& params, double c6);

struct TruncationReport {
  int k_max = 0;
  /// Points with delta > eps_cut are covered; eps_cut = mu 2^-k_max.
  double eps_cut = 0.0;
  std::size_t truncated_cubes = 0;
  /// Total measure of the truncated level-k_max cubes; bounds the uncovered measure.
  double truncated_measure = 0.0;
};

class EmptyDecompositionError : public std::runtime_error {
 public:
  EmptyDecompositionError(const std::string& what, TruncationReport report)
      : std::runtime_error(what), report_(report) {}
  const TruncationReport& report() const { return report_; }

 private:
  TruncationReport report_;
};

/// Raised by partition queries at points no selected cube covers.
class PartialCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PartitionWeight {
  std::size_t cube = 0;  // position in WhitneyDecomposition::cubes()
  double weight = 0.0;
};

struct PartitionSample {
  std::size_t cube = 0;
  double value = 0.0;   // phi_Q
  double profile = 0.0; // phi((x - x_Q) / s_Q)
};

template <std::size_t N>
class WhitneyDecomposition {
 public:
  WhitneyDecomposition(Region<N> region, WhitneyParams params, DerivedConstants constants,
                       std::vector<DyadicCube<N>> cubes, TruncationReport truncation);

  const Region<N>& region() const { return region_; }
  const WhitneyParams& params() const { return params_; }
  const DerivedConstants& constants() const { return constants_; }
  /// Selected cubes sorted by (level, index).
  const std::vector<DyadicCube<N>>& cubes() const { return cubes_; }
  const TruncationReport& truncation() const { return truncation_; }
  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }

  std::optional<std::size_t> find(const DyadicCube<N>& cube) const;

  /// Selected cubes containing p (closed, undilated).
  std::vector<std::size_t> covering_cubes(const Point<N>& p) const;
  /// Selected cubes whose eta'-dilation contains p.
  std::vector<std::size_t> support_cubes(const Point<N>& p) const;
  /// Number of selected cubes whose eta'-dilation contains p.
  int overlap_count(const Point<N>& p) const;

  /// phi((p - x_Q) / s_Q) summed over selected cubes.
  double psi(const BumpFunction& bump, const Point<N>& p) const;

  /// phi_Q(p) for every cube whose dilation contains p; throws PartialCoverageError
  /// when no selected cube covers p.
  std::vector<PartitionWeight> partition_weights(const BumpFunction& bump, const Point<N>& p) const;

  /// phi_Q(p) for one cube, 0 where psi vanishes; no coverage requirement.
  double partition_value(const BumpFunction& bump, std::size_t cube, const Point<N>& p) const;

  /// phi_Q and grad phi_Q at p for the cubes listed (the candidates must contain
  /// every cube whose dilation holds p).
  void partition_with_gradient(const BumpFunction& bump, const std::vector<std::size_t>& candidates,
                               const Point<N>& p, std::vector<PartitionSample>& values,
                               std::vector<Point<N>>& gradients) const;

 private:
  struct KeyHash {
    std::size_t operator()(const DyadicCube<N>& c) const;
  };

  Region<N> region_;
  WhitneyParams params_;
  DerivedConstants constants_;
  std::vector<DyadicCube<N>> cubes_;
  TruncationReport truncation_;
  std::unordered_map<DyadicCube<N>, std::size_t, KeyHash> lookup_;
  int min_level_ = 0;
  int max_level_ = -1;
};

/// Builds the selected family by 2^N-ary subdivision from the roots. Throws
/// std::invalid_argument for invalid parameters or a dimension mismatch and
/// EmptyDecompositionError when nothing is selected above k_max.
template <std::size_t N>
WhitneyDecomposition<N> decompose(const Region<N>& region, const WhitneyParams& params);

WhitneyDecomposition<2> decompose(const Domain& domain, const WhitneyParams& params);

struct PropertyReport {
  std::size_t cubes = 0;
  std::size_t samples = 0;

  // deterministic, over every selected cube
  std::size_t selection_violations = 0;  // Q_eta in the set, parent's not
  std::size_t support_violations = 0;    // Q_eta' in the set
  std::size_t nesting_violations = 0;    // a selected strict ancestor
  std::size_t center_violations = 0;     // eta/2 < delta(x)/s <= (eta + 1/2) sqrt(N)
  double center_ratio_min = 0.0;
  double center_ratio_max = 0.0;
  std::size_t pairs = 0;                  // intersecting dilated pairs
  std::size_t side_ratio_violations = 0;  // s'/s < c6
  double side_ratio_max = 0.0;
  int neighbour_max = 0;                  // cubes meeting one dilated cube, self included
  std::size_t neighbour_violations = 0;   // neighbour count <= P

  // sampled over points with delta > eps_cut
  std::size_t coverage_misses = 0;
  int overlap_max = 0;
  std::size_t overlap_violations = 0;     // overlap <= P
  double support_ratio_min = 0.0;         // delta / s over (sample, support cube)
  double support_ratio_max = 0.0;
  std::size_t support_ratio_violations = 0;
  double partition_sum_error = 0.0;       // max |sum of weights - 1|
  std::size_t partition_violations = 0;   // error > 1e-12, weight outside [0, 1], or psi outside [1, P]
  std::size_t consequence_violations = 0; // sum phi^q <= 1 and (sum phi)^q <= P^q sum phi^q
  std::size_t gradient_samples = 0;
  double gradient_max = 0.0;              // max |grad phi_Q| s_Q, central differences
  std::size_t gradient_violations = 0;    // |grad phi_Q| s_Q <= c3

  bool pass() const;
};

/// Monte Carlo and exhaustive checks of the decomposition and partition of
/// unity. Failures are counted, never thrown.
template <std::size_t N>
PropertyReport verify_properties(const WhitneyDecomposition<N>& decomp, const BumpFunction& bump,
                                 std::size_t sample_count, std::uint64_t seed = 20050801);

}  // namespace renorm
