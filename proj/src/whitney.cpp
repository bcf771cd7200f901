#include "renorm/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rng.hpp"

namespace renorm {

namespace {

template <std::size_t N>
double chebyshev_distance(const Point<N>& a, const Point<N>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <std::size_t N>
double euclidean_norm(const Point<N>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double smoothstep_kernel(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// S(tau) = f(tau) / (f(tau) + f(1 - tau)) with f(t) = exp(-1/t).
double smoothstep(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  const double a = smoothstep_kernel(tau);
  const double b = smoothstep_kernel(1.0 - tau);
  return a / (a + b);
}

double smoothstep_derivative(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  const double a = smoothstep_kernel(tau);
  const double b = smoothstep_kernel(1.0 - tau);
  const double da = a / (tau * tau);
  const double db = b / ((1.0 - tau) * (1.0 - tau));
  const double sum = a + b;
  return (da * b + a * db) / (sum * sum);
}

// Number of level-j cells (side t = 2^j, unit cube at side 1) along one axis
// whose eta'-dilated intervals meet the dilated unit interval, maximized over
// the position of the unit interval inside a coarser cell.
int axis_count(int j, double eta_prime) {
  const double t = std::ldexp(1.0, j);
  const double reach = 0.5 * eta_prime * (1.0 + t);
  const std::int64_t offsets = j > 0 ? (std::int64_t{1} << j) : 1;
  int best = 0;
  for (std::int64_t o = 0; o < offsets; ++o) {
    // cells [n t - o, (n + 1) t - o]; unit interval [0, 1]
    const double lo = (0.5 + static_cast<double>(o) - reach) / t - 0.5;
    const double hi = (0.5 + static_cast<double>(o) + reach) / t - 0.5;
    const auto n0 = static_cast<std::int64_t>(std::ceil(lo));
    const auto n1 = static_cast<std::int64_t>(std::floor(hi));
    best = std::max(best, static_cast<int>(std::max<std::int64_t>(0, n1 - n0 + 1)));
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Regions

Region<2> region_from_domain(const Domain& domain) {
  Region<2> r;
  r.name = std::string(domain.kind());
  const BoundingBox box = domain.bounding_box();
  r.lo = box.lo;
  r.hi = box.hi;
  r.diameter = domain.diameter();
  r.contains = [domain](const Point2& p) { return domain.contains(p); };
  r.distance = [domain](const Point2& p) { return domain.distance(p); };
  r.contains_closed_cube = [domain](const Point2& c, double side) { return domain.contains_closed_cube(c, side); };
  return r;
}

template <std::size_t N>
Region<N> ball_region(const Point<N>& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Region<N> r;
  r.name = "ball";
  for (std::size_t i = 0; i < N; ++i) {
    r.lo[i] = center[i] - radius;
    r.hi[i] = center[i] + radius;
  }
  r.diameter = 2.0 * radius;
  auto offset = [center](const Point<N>& p) {
    Point<N> d;
    for (std::size_t i = 0; i < N; ++i) d[i] = p[i] - center[i];
    return euclidean_norm(d);
  };
  r.contains = [offset, radius](const Point<N>& p) { return offset(p) < radius; };
  r.distance = [offset, radius](const Point<N>& p) { return std::abs(radius - offset(p)); };
  r.contains_closed_cube = [center, radius](const Point<N>& c, double side) {
    Point<N> far;
    for (std::size_t i = 0; i < N; ++i) far[i] = std::abs(c[i] - center[i]) + 0.5 * side;
    return euclidean_norm(far) < radius;
  };
  return r;
}

template <std::size_t N>
Region<N> box_region(const Point<N>& lo, const Point<N>& hi) {
  for (std::size_t i = 0; i < N; ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box corners must satisfy lo < hi");
  }
  Region<N> r;
  r.name = "box";
  r.lo = lo;
  r.hi = hi;
  Point<N> ext;
  for (std::size_t i = 0; i < N; ++i) ext[i] = hi[i] - lo[i];
  r.diameter = euclidean_norm(ext);
  auto inside = [lo, hi](const Point<N>& p) {
    for (std::size_t i = 0; i < N; ++i) {
      if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
    }
    return true;
  };
  r.contains = inside;
  r.distance = [lo, hi, inside](const Point<N>& p) {
    if (inside(p)) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < N; ++i) m = std::min({m, p[i] - lo[i], hi[i] - p[i]});
      return m;
    }
    Point<N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
    const double e = euclidean_norm(out);
    if (e > 0.0) return e;
    // on the boundary
    return 0.0;
  };
  r.contains_closed_cube = [lo, hi](const Point<N>& c, double side) {
    for (std::size_t i = 0; i < N; ++i) {
      if (!(c[i] - 0.5 * side > lo[i] && c[i] + 0.5 * side < hi[i])) return false;
    }
    return true;
  };
  return r;
}

// ---------------------------------------------------------------------------
// Parameters and cubes

void WhitneyParams::validate() const {
  if (dimension < 2) throw std::invalid_argument("dimension must be at least 2");
  if (!(eta_prime > 1.0)) throw std::invalid_argument("eta' must exceed 1");
  if (!(eta / std::sqrt(static_cast<double>(dimension)) > eta_prime)) {
    throw std::invalid_argument("eta / sqrt(N) must exceed eta'");
  }
  if (k_min && *k_min > k_max) throw std::invalid_argument("k_min must not exceed k_max");
  if (k_max > 40) throw std::invalid_argument("k_max above 40 is not supported");
}

template <std::size_t N>
double DyadicCube<N>::side() const {
  return std::ldexp(1.0, -level);
}

template <std::size_t N>
Point<N> DyadicCube<N>::center() const {
  const double s = side();
  Point<N> x;
  for (std::size_t i = 0; i < N; ++i) x[i] = (static_cast<double>(index[i]) + 0.5) * s;
  return x;
}

template <std::size_t N>
DyadicCube<N> DyadicCube<N>::parent() const {
  DyadicCube p;
  p.level = level - 1;
  // floor division for negative indices
  for (std::size_t i = 0; i < N; ++i) p.index[i] = index[i] >> 1;
  return p;
}

template <std::size_t N>
std::array<DyadicCube<N>, (std::size_t{1} << N)> DyadicCube<N>::children() const {
  std::array<DyadicCube, (std::size_t{1} << N)> out;
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].level = level + 1;
    for (std::size_t i = 0; i < N; ++i) out[c].index[i] = 2 * index[i] + static_cast<std::int64_t>((c >> i) & 1U);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bump

BumpFunction::BumpFunction(double eta_prime) : eta_prime_(eta_prime), band_(0.5 * (eta_prime - 1.0)) {
  if (!(eta_prime > 1.0)) throw std::invalid_argument("eta' must exceed 1");
}

double BumpFunction::profile(double t) const {
  const double a = std::abs(t);
  if (a <= 0.5) return 1.0;
  if (a >= 0.5 * eta_prime_) return 0.0;
  return smoothstep((0.5 * eta_prime_ - a) / band_);
}

double BumpFunction::profile_derivative(double t) const {
  const double a = std::abs(t);
  if (a <= 0.5 || a >= 0.5 * eta_prime_) return 0.0;
  const double d = -smoothstep_derivative((0.5 * eta_prime_ - a) / band_) / band_;
  return t < 0.0 ? -d : d;
}

template <std::size_t N>
double BumpFunction::value(const Point<N>& x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < N && v != 0.0; ++i) v *= profile(x[i]);
  return v;
}

template <std::size_t N>
Point<N> BumpFunction::gradient(const Point<N>& x) const {
  Point<N> g{};
  std::array<double, N> p;
  for (std::size_t i = 0; i < N; ++i) p[i] = profile(x[i]);
  for (std::size_t i = 0; i < N; ++i) {
    double prod = profile_derivative(x[i]);
    for (std::size_t j = 0; j < N && prod != 0.0; ++j) {
      if (j != i) prod *= p[j];
    }
    g[i] = prod;
  }
  return g;
}

double BumpFunction::max_gradient(int dimension) const {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  // 1D steepest point, golden section on |g'| over the transition band
  const double a0 = 0.5;
  const double b0 = 0.5 * eta_prime_;
  auto slope = [this](double t) { return std::abs(profile_derivative(t)); };
  double a = a0;
  double b = b0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - gr * (b - a);
    const double d = a + gr * (b - a);
    if (slope(c) > slope(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  const double t_star = 0.5 * (a + b);

  // candidate (|g'|, g) pairs: core, a dense band sample and the steepest point
  const std::size_t per_axis = dimension == 1 ? 20001
                               : dimension == 2 ? 2001
                               : static_cast<std::size_t>(std::pow(2.0e7, 1.0 / dimension));
  std::vector<std::pair<double, double>> cand;
  cand.emplace_back(0.0, 1.0);
  for (std::size_t i = 0; i <= per_axis; ++i) {
    const double t = a0 + (b0 - a0) * static_cast<double>(i) / static_cast<double>(per_axis);
    cand.emplace_back(slope(t), profile(t));
  }
  cand.emplace_back(slope(t_star), profile(t_star));

  // max over tuples of sum_i a_i^2 prod_{j != i} b_j^2
  const std::size_t n = cand.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(dimension), 0);
  double best = 0.0;
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < dimension; ++i) {
      double term = cand[idx[i]].first * cand[idx[i]].first;
      for (int j = 0; j < dimension && term != 0.0; ++j) {
        if (j != i) term *= cand[idx[j]].second * cand[idx[j]].second;
      }
      sum += term;
    }
    best = std::max(best, sum);
    int pos = 0;
    while (pos < dimension && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == dimension) break;
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Constants

int enumerate_neighbour_bound(const WhitneyParams& params, double c6) {
  int total = 0;
  for (int j = -62; j <= 62; ++j) {
    if (!(std::ldexp(1.0, std::abs(j)) < c6)) continue;
    int product = 1;
    const int per_axis = axis_count(j, params.eta_prime);
    for (int i = 0; i < params.dimension; ++i) product *= per_axis;
    total += product;
  }
  return total;
}

DerivedConstants derive_constants(const WhitneyParams& params, const BumpFunction& bump) {
  params.validate();
  const double rn = std::sqrt(static_cast<double>(params.dimension));
  DerivedConstants c;
  c.lambda = 0.5 * (params.eta - params.eta_prime * rn);
  c.mu = (params.eta + 0.5 + 0.5 * params.eta_prime) * rn;
  c.c6 = (2.0 * params.eta + 1.0 + params.eta_prime) * rn / (params.eta - params.eta_prime * rn);
  c.P = enumerate_neighbour_bound(params, c.c6);
  c.J1 = 0;
  while (std::ldexp(1.0, c.J1 + 1) < c.c6) ++c.J1;
  c.bump_gradient = bump.max_gradient(params.dimension);
  // |grad phi_Q| <= G / s + sum over at most P cubes of G / s' with s' > s / c6
  c.c3 = c.bump_gradient * (1.0 + static_cast<double>(c.P) * c.c6);
  return c;
}

// ---------------------------------------------------------------------------
// Decomposition

template <std::size_t N>
std::size_t WhitneyDecomposition<N>::KeyHash::operator()(const DyadicCube<N>& c) const {
  std::uint64_t h = mix(static_cast<std::uint64_t>(c.level));
  for (std::size_t i = 0; i < N; ++i) h = mix(h ^ static_cast<std::uint64_t>(c.index[i]));
  return static_cast<std::size_t>(h);
}

template <std::size_t N>
WhitneyDecomposition<N>::WhitneyDecomposition(Region<N> region, WhitneyParams params, DerivedConstants constants,
                                               std::vector<DyadicCube<N>> cubes, TruncationReport truncation)
    : region_(std::move(region)),
      params_(params),
      constants_(constants),
      cubes_(std::move(cubes)),
      truncation_(truncation) {
  std::sort(cubes_.begin(), cubes_.end());
  lookup_.reserve(cubes_.size());
  for (std::size_t i = 0; i < cubes_.size(); ++i) lookup_.emplace(cubes_[i], i);
  if (!cubes_.empty()) {
    min_level_ = cubes_.front().level;
    max_level_ = cubes_.back().level;
  }
}

template <std::size_t N>
std::optional<std::size_t> WhitneyDecomposition<N>::find(const DyadicCube<N>& cube) const {
  const auto it = lookup_.find(cube);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

template <std::size_t N>
std::vector<std::size_t> WhitneyDecomposition<N>::covering_cubes(const Point<N>& p) const {
  std::vector<std::size_t> out;
  for (int k = min_level_; k <= max_level_; ++k) {
    const double inv = std::ldexp(1.0, k);
    std::array<std::int64_t, N> lo;
    std::array<std::int64_t, N> hi;
    for (std::size_t i = 0; i < N; ++i) {
      const double y = p[i] * inv;
      hi[i] = static_cast<std::int64_t>(std::floor(y));
      // a point on a cell face belongs to both closed cells
      lo[i] = (y == std::floor(y)) ? hi[i] - 1 : hi[i];
    }
    DyadicCube<N> q;
    q.level = k;
    q.index = lo;
    for (;;) {
      if (auto f = find(q)) out.push_back(*f);
      std::size_t pos = 0;
      while (pos < N && ++q.index[pos] > hi[pos]) {
        q.index[pos] = lo[pos];
        ++pos;
      }
      if (pos == N) break;
    }
  }
  return out;
}

template <std::size_t N>
std::vector<std::size_t> WhitneyDecomposition<N>::support_cubes(const Point<N>& p) const {
  std::vector<std::size_t> out;
  const double reach = 0.5 * params_.eta_prime;
  for (int k = min_level_; k <= max_level_; ++k) {
    const double inv = std::ldexp(1.0, k);
    const double s = std::ldexp(1.0, -k);
    std::array<std::int64_t, N> lo;
    std::array<std::int64_t, N> hi;
    bool empty = false;
    for (std::size_t i = 0; i < N; ++i) {
      const double y = p[i] * inv - 0.5;
      lo[i] = static_cast<std::int64_t>(std::ceil(y - reach));
      hi[i] = static_cast<std::int64_t>(std::floor(y + reach));
      if (hi[i] < lo[i]) empty = true;
    }
    if (empty) continue;
    DyadicCube<N> q;
    q.level = k;
    q.index = lo;
    for (;;) {
      if (auto f = find(q)) {
        if (chebyshev_distance(p, q.center()) <= reach * s) out.push_back(*f);
      }
      std::size_t pos = 0;
      while (pos < N && ++q.index[pos] > hi[pos]) {
        q.index[pos] = lo[pos];
        ++pos;
      }
      if (pos == N) break;
    }
  }
  return out;
}

template <std::size_t N>
int WhitneyDecomposition<N>::overlap_count(const Point<N>& p) const {
  return static_cast<int>(support_cubes(p).size());
}

namespace {

template <std::size_t N>
Point<N> local_coordinates(const Point<N>& p, const DyadicCube<N>& q) {
  const Point<N> x = q.center();
  const double s = q.side();
  Point<N> y;
  for (std::size_t i = 0; i < N; ++i) y[i] = (p[i] - x[i]) / s;
  return y;
}

}  // namespace

template <std::size_t N>
double WhitneyDecomposition<N>::psi(const BumpFunction& bump, const Point<N>& p) const {
  double sum = 0.0;
  for (std::size_t i : support_cubes(p)) sum += bump.value(local_coordinates(p, cubes_[i]));
  return sum;
}

template <std::size_t N>
std::vector<PartitionWeight> WhitneyDecomposition<N>::partition_weights(const BumpFunction& bump,
                                                                        const Point<N>& p) const {
  if (covering_cubes(p).empty()) {
    throw PartialCoverageError("point is not covered by the selected cubes (delta " +
                               std::to_string(region_.distance(p)) + ", eps_cut " +
                               std::to_string(truncation_.eps_cut) + ")");
  }
  const auto support = support_cubes(p);
  std::vector<PartitionWeight> out;
  out.reserve(support.size());
  double sum = 0.0;
  for (std::size_t i : support) {
    const double b = bump.value(local_coordinates(p, cubes_[i]));
    out.push_back({i, b});
    sum += b;
  }
  for (auto& w : out) w.weight /= sum;
  return out;
}

template <std::size_t N>
double WhitneyDecomposition<N>::partition_value(const BumpFunction& bump, std::size_t cube, const Point<N>& p) const {
  const double b = bump.value(local_coordinates(p, cubes_.at(cube)));
  if (b == 0.0) return 0.0;
  return b / psi(bump, p);
}

template <std::size_t N>
void WhitneyDecomposition<N>::partition_with_gradient(const BumpFunction& bump,
                                                      const std::vector<std::size_t>& candidates,
                                                      const Point<N>& p, std::vector<PartitionSample>& values,
                                                      std::vector<Point<N>>& gradients) const {
  values.clear();
  gradients.clear();
  double psi_value = 0.0;
  Point<N> psi_grad{};
  for (std::size_t i : candidates) {
    const Point<N> y = local_coordinates(p, cubes_[i]);
    const double b = bump.value(y);
    if (b == 0.0) continue;
    const double inv_s = 1.0 / cubes_[i].side();
    Point<N> g = bump.gradient(y);
    for (std::size_t a = 0; a < N; ++a) g[a] *= inv_s;
    values.push_back({i, b, b});
    gradients.push_back(g);
    psi_value += b;
    for (std::size_t a = 0; a < N; ++a) psi_grad[a] += g[a];
  }
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double b = values[n].profile;
    values[n].value = b / psi_value;
    for (std::size_t a = 0; a < N; ++a) {
      gradients[n][a] = gradients[n][a] / psi_value - b * psi_grad[a] / (psi_value * psi_value);
    }
  }
}

template <std::size_t N>
WhitneyDecomposition<N> decompose(const Region<N>& region, const WhitneyParams& params) {
  params.validate();
  if (params.dimension != static_cast<int>(N)) throw std::invalid_argument("parameter dimension does not match");
  if (!(region.diameter > 0.0) || !std::isfinite(region.diameter)) {
    throw std::invalid_argument("region must be bounded with positive diameter");
  }
  const BumpFunction bump(params.eta_prime);
  const DerivedConstants constants = derive_constants(params, bump);

  int k_min = 0;
  if (params.k_min) {
    k_min = *params.k_min;
    if (std::ldexp(1.0, -k_min) < region.diameter) {
      throw std::invalid_argument("root cubes must have side at least the diameter");
    }
  } else {
    k_min = static_cast<int>(std::floor(-std::log2(region.diameter)));
    while (std::ldexp(1.0, -k_min) < region.diameter) --k_min;
    while (std::ldexp(1.0, -(k_min + 1)) >= region.diameter) ++k_min;
  }
  if (k_min > params.k_max) throw std::invalid_argument("k_max is below the root level for this region");

  const double rn = std::sqrt(static_cast<double>(N));
  enum class Verdict { selected, outside, straddling };
  auto classify = [&](const DyadicCube<N>& q) {
    const double s = q.side();
    const Point<N> x = q.center();
    if (region.contains_closed_cube(x, params.eta * s)) return Verdict::selected;
    // the cube misses the set when its center is outside and farther than the half-diagonal
    if (!region.contains(x) && region.distance(x) > 0.5 * s * rn) return Verdict::outside;
    return Verdict::straddling;
  };

  TruncationReport trunc;
  trunc.k_max = params.k_max;
  trunc.eps_cut = constants.mu * std::ldexp(1.0, -params.k_max);
  std::vector<DyadicCube<N>> selected;
  std::vector<DyadicCube<N>> stack;

  {
    const double s = std::ldexp(1.0, -k_min);
    std::array<std::int64_t, N> lo;
    std::array<std::int64_t, N> hi;
    for (std::size_t i = 0; i < N; ++i) {
      lo[i] = static_cast<std::int64_t>(std::floor(region.lo[i] / s));
      hi[i] = std::max(lo[i], static_cast<std::int64_t>(std::ceil(region.hi[i] / s)) - 1);
    }
    DyadicCube<N> q;
    q.level = k_min;
    q.index = lo;
    for (;;) {
      switch (classify(q)) {
        case Verdict::selected:
          throw std::logic_error("a root cube satisfies the selection rule; its parent is not searched");
        case Verdict::outside:
          break;
        case Verdict::straddling:
          if (q.level == params.k_max) {
            ++trunc.truncated_cubes;
          } else {
            stack.push_back(q);
          }
          break;
      }
      std::size_t pos = 0;
      while (pos < N && ++q.index[pos] > hi[pos]) {
        q.index[pos] = lo[pos];
        ++pos;
      }
      if (pos == N) break;
    }
  }

  while (!stack.empty()) {
    const DyadicCube<N> q = stack.back();
    stack.pop_back();
    for (const auto& child : q.children()) {
      switch (classify(child)) {
        case Verdict::selected:
          selected.push_back(child);
          break;
        case Verdict::outside:
          break;
        case Verdict::straddling:
          if (child.level == params.k_max) {
            ++trunc.truncated_cubes;
          } else {
            stack.push_back(child);
          }
          break;
      }
    }
  }
  trunc.truncated_measure =
      static_cast<double>(trunc.truncated_cubes) * std::pow(std::ldexp(1.0, -params.k_max), static_cast<double>(N));

  if (selected.empty()) {
    throw EmptyDecompositionError("no cube is selected down to level " + std::to_string(params.k_max) +
                                      "; the region is thinner than the finest cubes",
                                  trunc);
  }
  WhitneyParams resolved = params;
  resolved.k_min = k_min;
  return WhitneyDecomposition<N>(region, resolved, constants, std::move(selected), trunc);
}

WhitneyDecomposition<2> decompose(const Domain& domain, const WhitneyParams& params) {
  return decompose<2>(region_from_domain(domain), params);
}

// ---------------------------------------------------------------------------
// Verification

bool PropertyReport::pass() const {
  return cubes > 0 && selection_violations == 0 && support_violations == 0 && nesting_violations == 0 &&
         center_violations == 0 && side_ratio_violations == 0 && neighbour_violations == 0 &&
         coverage_misses == 0 && overlap_violations == 0 && support_ratio_violations == 0 &&
         partition_violations == 0 && consequence_violations == 0 && gradient_violations == 0;
}

template <std::size_t N>
PropertyReport verify_properties(const WhitneyDecomposition<N>& decomp, const BumpFunction& bump,
                                 std::size_t sample_count, std::uint64_t seed) {
  const auto& region = decomp.region();
  const auto& params = decomp.params();
  const auto& c = decomp.constants();
  const auto& cubes = decomp.cubes();
  const double rn = std::sqrt(static_cast<double>(N));
  const double inf = std::numeric_limits<double>::infinity();

  PropertyReport rep;
  rep.cubes = cubes.size();
  rep.center_ratio_min = inf;
  rep.support_ratio_min = inf;

  // exhaustive checks over the selected family
  std::vector<int> neighbours(cubes.size(), 1);
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const auto& q = cubes[i];
    const double s = q.side();
    const Point<N> x = q.center();
    if (!region.contains_closed_cube(x, params.eta * s)) ++rep.selection_violations;
    const auto parent = q.parent();
    if (region.contains_closed_cube(parent.center(), params.eta * parent.side())) ++rep.selection_violations;
    if (!region.contains_closed_cube(x, params.eta_prime * s)) ++rep.support_violations;

    for (auto a = parent; a.level >= decomp.min_level(); a = a.parent()) {
      if (decomp.find(a)) ++rep.nesting_violations;
    }

    const double ratio = region.distance(x) / s;
    rep.center_ratio_min = std::min(rep.center_ratio_min, ratio);
    rep.center_ratio_max = std::max(rep.center_ratio_max, ratio);
    if (!(ratio > 0.5 * params.eta) || ratio > (params.eta + 0.5) * rn) ++rep.center_violations;

    // dilated neighbours at the same or coarser levels
    for (int k = q.level; k >= decomp.min_level(); --k) {
      const double s2 = std::ldexp(1.0, -k);
      const double reach = 0.5 * params.eta_prime * (s + s2);
      std::array<std::int64_t, N> lo;
      std::array<std::int64_t, N> hi;
      bool empty = false;
      for (std::size_t a = 0; a < N; ++a) {
        lo[a] = static_cast<std::int64_t>(std::ceil((x[a] - reach) / s2 - 0.5));
        hi[a] = static_cast<std::int64_t>(std::floor((x[a] + reach) / s2 - 0.5));
        if (hi[a] < lo[a]) empty = true;
      }
      if (empty) continue;
      DyadicCube<N> other;
      other.level = k;
      other.index = lo;
      for (;;) {
        if (auto j = decomp.find(other)) {
          if (*j != i && chebyshev_distance(x, other.center()) <= reach) {
            if (k < q.level || *j > i) {
              ++rep.pairs;
              ++neighbours[i];
              ++neighbours[*j];
              const double side_ratio = s2 / s;
              rep.side_ratio_max = std::max(rep.side_ratio_max, side_ratio);
              if (!(side_ratio < c.c6)) ++rep.side_ratio_violations;
            }
          }
        }
        std::size_t pos = 0;
        while (pos < N && ++other.index[pos] > hi[pos]) {
          other.index[pos] = lo[pos];
          ++pos;
        }
        if (pos == N) break;
      }
    }
  }
  for (int n : neighbours) {
    rep.neighbour_max = std::max(rep.neighbour_max, n);
    if (n > c.P) ++rep.neighbour_violations;
  }

  // Monte Carlo over {delta > eps_cut}
  std::mt19937_64 rng(seed);
  const double eps_cut = decomp.truncation().eps_cut;
  const std::size_t stride = std::max<std::size_t>(1, sample_count / 10000);
  const std::size_t max_attempts = 1000 * sample_count + 1000;
  const double P = static_cast<double>(c.P);
  std::size_t attempts = 0;
  std::vector<double> profiles;
  while (rep.samples < sample_count && attempts < max_attempts) {
    ++attempts;
    Point<N> p;
    for (std::size_t a = 0; a < N; ++a) {
      p[a] = region.lo[a] + (region.hi[a] - region.lo[a]) * detail::unit_uniform(rng);
    }
    if (!region.contains(p)) continue;
    const double delta = region.distance(p);
    if (!(delta > eps_cut)) continue;
    ++rep.samples;

    const auto support = decomp.support_cubes(p);
    // every cube containing p also holds p in its dilation
    const bool covered = std::any_of(support.begin(), support.end(), [&](std::size_t i) {
      return chebyshev_distance(p, cubes[i].center()) <= 0.5 * cubes[i].side();
    });
    if (!covered) ++rep.coverage_misses;

    const int overlap = static_cast<int>(support.size());
    rep.overlap_max = std::max(rep.overlap_max, overlap);
    if (overlap > c.P) ++rep.overlap_violations;

    profiles.clear();
    double psi = 0.0;
    for (std::size_t i : support) {
      const double s = cubes[i].side();
      const double ratio = delta / s;
      rep.support_ratio_min = std::min(rep.support_ratio_min, ratio);
      rep.support_ratio_max = std::max(rep.support_ratio_max, ratio);
      if (ratio < c.lambda || ratio > c.mu) ++rep.support_ratio_violations;
      const Point<N> x = cubes[i].center();
      Point<N> y;
      for (std::size_t a = 0; a < N; ++a) y[a] = (p[a] - x[a]) / s;
      const double b = bump.value(y);
      profiles.push_back(b);
      psi += b;
    }
    if (!covered) continue;

    double sum = 0.0;
    double sum2 = 0.0;
    double sum3 = 0.0;
    bool bad = psi < 1.0 || psi > P;
    for (double b : profiles) {
      const double w = b / psi;
      if (w < 0.0 || w > 1.0) bad = true;
      sum += w;
      sum2 += w * w;
      sum3 += w * w * w;
    }
    const double err = std::abs(sum - 1.0);
    rep.partition_sum_error = std::max(rep.partition_sum_error, err);
    if (err > 1e-12) bad = true;
    if (bad) ++rep.partition_violations;
    const double tol = 1e-12;
    if (sum2 > 1.0 + tol || sum3 > 1.0 + tol) ++rep.consequence_violations;
    if (sum * sum > P * P * sum2 * (1.0 + tol) || sum * sum * sum > P * P * P * sum3 * (1.0 + tol)) {
      ++rep.consequence_violations;
    }

    if (rep.samples % stride == 0) {
      for (std::size_t n = 0; n < support.size(); ++n) {
        if (profiles[n] == 0.0) continue;
        const std::size_t i = support[n];
        const double s = cubes[i].side();
        const double step = 1e-5 * s;
        double g2 = 0.0;
        for (std::size_t a = 0; a < N; ++a) {
          Point<N> fwd = p;
          Point<N> bwd = p;
          fwd[a] += step;
          bwd[a] -= step;
          const double d = (decomp.partition_value(bump, i, fwd) - decomp.partition_value(bump, i, bwd)) / (2.0 * step);
          g2 += d * d;
        }
        const double scaled = std::sqrt(g2) * s;
        ++rep.gradient_samples;
        rep.gradient_max = std::max(rep.gradient_max, scaled);
        if (scaled > c.c3) ++rep.gradient_violations;
      }
    }
  }
  if (rep.samples == 0) {
    rep.support_ratio_min = 0.0;
  }
  if (rep.cubes == 0) rep.center_ratio_min = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Instantiations

template struct DyadicCube<2>;
template struct DyadicCube<3>;
template class WhitneyDecomposition<2>;
template class WhitneyDecomposition<3>;
template Region<2> ball_region<2>(const Point<2>&, double);
template Region<3> ball_region<3>(const Point<3>&, double);
template Region<2> box_region<2>(const Point<2>&, const Point<2>&);
template Region<3> box_region<3>(const Point<3>&, const Point<3>&);
template double BumpFunction::value<2>(const Point<2>&) const;
template double BumpFunction::value<3>(const Point<3>&) const;
template Point<2> BumpFunction::gradient<2>(const Point<2>&) const;
template Point<3> BumpFunction::gradient<3>(const Point<3>&) const;
template WhitneyDecomposition<2> decompose<2>(const Region<2>&, const WhitneyParams&);
template WhitneyDecomposition<3> decompose<3>(const Region<3>&, const WhitneyParams&);
template PropertyReport verify_properties<2>(const WhitneyDecomposition<2>&, const BumpFunction&, std::size_t,
                                             std::uint64_t);
template PropertyReport verify_properties<3>(const WhitneyDecomposition<3>&, const BumpFunction&, std::size_t,
                                             std::uint64_t);

}  // namespace renorm
