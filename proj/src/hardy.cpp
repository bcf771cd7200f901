#include "renorm/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "rng.hpp"

namespace renorm {

namespace {

constexpr double kLogMax = 700.0;

double pow_abs(double x, double e) { return std::pow(std::abs(x), e); }

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1 || n > 32) throw std::invalid_argument("Gauss-Legendre order must lie in [1, 32]");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct Accumulated {
  double dirichlet = 0.0;  // sum |grad u|^p
  double zeroth = 0.0;     // sum |u|^p / delta^p
};

}  // namespace

double unit_ball_volume(int N) {
  if (N < 1) throw std::invalid_argument("dimension must be positive");
  const double half = 0.5 * N;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

// ---------------------------------------------------------------------------
// Phi_N

SeriesValue phi_series(double t, int N, int max_terms) {
  if (N < 2) throw std::invalid_argument("Phi_N needs N >= 2");
  if (!std::isfinite(t)) throw SeriesOverflowError("Phi_N of a non-finite argument");
  const double n_prime = static_cast<double>(N) / (N - 1);
  SeriesValue out;
  if (t == 0.0) return out;
  const double log_a = n_prime * std::log(std::abs(t));
  const double a = std::exp(log_a);
  // the largest term sits near k = a
  const double k_peak = std::max<double>(N - 1, std::floor(a));
  if (k_peak * log_a - std::lgamma(k_peak + 1.0) + std::log(k_peak + 2.0) > kLogMax) {
    throw SeriesOverflowError("Phi_N overflows at |t| = " + std::to_string(std::abs(t)));
  }
  double k = N - 1;
  double term = std::exp(k * log_a - std::lgamma(k + 1.0));
  double sum = 0.0;
  for (int n = 0; n < max_terms; ++n) {
    sum += term;
    const double next = term * a / (k + 1.0);
    const double ratio = a / (k + 2.0);  // bounds every later ratio
    if (ratio < 1.0) {
      const double tail = next / (1.0 - ratio);
      if (tail <= 1e-16 * sum) {
        out.value = sum;
        out.terms = n + 1;
        out.tail_bound = tail;
        return out;
      }
    }
    term = next;
    k += 1.0;
  }
  throw std::invalid_argument("Phi_N: " + std::to_string(max_terms) + " terms do not certify the tail");
}

double phi_N(double t, int N, int max_terms) { return phi_series(t, N, max_terms).value; }

// ---------------------------------------------------------------------------
// Grid quadrature

std::array<ScalarField, 2> field_gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  std::array<ScalarField, 2> out{ScalarField(u.grid_ptr()), ScalarField(u.grid_ptr())};
  const double h = g.h();
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.is_interior(k)) continue;
      const std::array<std::pair<std::size_t, std::size_t>, 2> nb{
          {{g.index(i - 1, j), g.index(i + 1, j)}, {g.index(i, j - 1), g.index(i, j + 1)}}};
      for (std::size_t a = 0; a < 2; ++a) {
        const auto [lo, hi] = nb[a];
        const bool lo_in = g.is_interior(lo);
        const bool hi_in = g.is_interior(hi);
        double d;
        if (lo_in == hi_in) {
          d = (u[hi] - u[lo]) / (2.0 * h);
        } else if (hi_in) {
          d = (u[hi] - u[k]) / h;
        } else {
          d = (u[k] - u[lo]) / h;
        }
        out[a][k] = d;
      }
    }
  }
  return out;
}

namespace {

// h^2 sum over interior nodes of |grad u|^p delta^a and |u|^p delta^b
Accumulated weighted_sums(const ScalarField& u, double p, double grad_weight_exp, double value_weight_exp) {
  const Grid& g = u.grid();
  const auto grad = field_gradient(u);
  const auto delta = g.boundary_distance();
  Accumulated acc;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double gn = std::hypot(grad[0][k], grad[1][k]);
    acc.dirichlet += std::pow(gn, p) * std::pow(delta[k], grad_weight_exp);
    acc.zeroth += pow_abs(u[k], p) * std::pow(delta[k], value_weight_exp);
  }
  const double h2 = g.h() * g.h();
  acc.dirichlet *= h2;
  acc.zeroth *= h2;
  return acc;
}

}  // namespace

double m_norm(const ScalarField& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("exponent p must be at least 1");
  const Accumulated a = weighted_sums(u, p, 0.0, -p);
  return std::pow(a.dirichlet + a.zeroth, 1.0 / p);
}

double weighted_lhs(const ScalarField& u, double q, int N) {
  if (!(q >= 1.0)) throw std::invalid_argument("exponent q must be at least 1");
  const Grid& g = u.grid();
  const auto delta = g.boundary_distance();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) s += pow_abs(u[k], q) / std::pow(delta[k], N);
  }
  return std::pow(g.h() * g.h() * s, 1.0 / q);
}

double weighted_rhs(const ScalarField& u, double p, int N) {
  if (!(p >= 1.0)) throw std::invalid_argument("exponent p must be at least 1");
  const Accumulated a = weighted_sums(u, p, p - N, -static_cast<double>(N));
  return std::pow(a.dirichlet + a.zeroth, 1.0 / p);
}

double hardy_quotient(const ScalarField& u) {
  const Accumulated a = weighted_sums(u, 2.0, 0.0, -2.0);
  if (!(a.dirichlet > 0.0)) throw std::invalid_argument("Hardy quotient of a function with zero gradient");
  return std::sqrt(a.zeroth / a.dirichlet);
}

double exponential_remainder_integral(const ScalarField& u) {
  const Grid& g = u.grid();
  const auto delta = g.boundary_distance();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const double x = 2.0 * u[k];
    s += (std::expm1(x) - x) / (delta[k] * delta[k]);
  }
  return g.h() * g.h() * s;
}

double phi_integral(const ScalarField& u, double c1, int N) {
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  const Grid& g = u.grid();
  const auto delta = g.boundary_distance();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_interior(k)) s += phi_N(u[k] / c1, N) / std::pow(delta[k], N);
  }
  return g.h() * g.h() * s;
}

// ---------------------------------------------------------------------------
// Constants

TheoreticalConstants theoretical_constants(const WhitneyParams& params, const DerivedConstants& derived,
                                           double hardy_constant) {
  params.validate();
  if (!(hardy_constant > 0.0)) throw std::invalid_argument("Hardy constant must be positive");
  TheoreticalConstants c;
  c.N = params.dimension;
  c.N_prime = static_cast<double>(c.N) / (c.N - 1);
  c.omega_N = unit_ball_volume(c.N);
  c.lambda = derived.lambda;
  c.mu = derived.mu;
  c.c3 = derived.c3;
  c.c6 = derived.c6;
  c.P = derived.P;
  c.H = hardy_constant;
  const double P = derived.P;
  c.A = std::pow(2.0 * P * std::pow(1.0 + P * std::pow(c.c3 * c.mu, c.N), 1.0 / c.N), c.N_prime);
  return c;
}

double sobolev_bound(int N, double q) {
  if (!(q >= N)) throw UnsupportedConstantError("the Sobolev bound needs q >= N");
  return std::pow(unit_ball_volume(N) * q, 1.0 - 1.0 / N + 1.0 / q);
}

double sigma_q(const TheoreticalConstants& c, double q, double p) {
  if (p != static_cast<double>(c.N)) {
    throw UnsupportedConstantError("no explicit Sobolev bound for p < N; only p = N is supported");
  }
  if (!(q > p)) throw std::invalid_argument("q must exceed p");
  const double S = sobolev_bound(c.N, q);
  const double P = c.P;
  return 2.0 * P * S * std::pow(c.lambda, -c.N / q) *
         std::pow(std::pow(c.mu, c.N - p) + P * std::pow(c.c3, p) * std::pow(c.mu, c.N), 1.0 / p);
}

double c1_threshold(const TheoreticalConstants& c) {
  return std::pow(std::numbers::e * c.omega_N * c.N_prime * c.A, 1.0 / c.N_prime);
}

C2Result c2_constant(double c1, const TheoreticalConstants& c, long max_terms) {
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  if (max_terms < 1) throw std::invalid_argument("need at least one term");
  C2Result r;
  r.threshold = std::numbers::e * c.omega_N * c.N_prime * c.A;
  r.c1_power = std::pow(c1, c.N_prime);
  if (r.c1_power <= r.threshold) {
    r.diverges = true;
    r.value = std::numeric_limits<double>::infinity();
    r.tail_bound = std::numeric_limits<double>::infinity();
    return r;
  }
  const double log_x = std::log(c.N_prime * c.omega_N * c.A) - c.N_prime * std::log(c1);
  const double log_prefactor = -c.N * std::log(c.lambda) + std::log(c.N_prime * c.omega_N);
  auto log_term = [&](double q) { return log_prefactor + q * log_x + q * std::log(q) - std::lgamma(q); };

  double sum = 0.0;
  double compensation = 0.0;
  const double q0 = c.N - 1;
  for (long n = 0; n < max_terms; ++n) {
    const double q = q0 + static_cast<double>(n);
    const double lt = log_term(q);
    if (lt > kLogMax) throw SeriesOverflowError("c2 series term overflows");
    const double t = std::exp(lt);
    // Neumaier summation
    const double s = sum + t;
    compensation += (std::abs(sum) >= std::abs(t)) ? (sum - s) + t : (t - s) + sum;
    sum = s;
    r.terms = n + 1;
    // later ratios are at most x (1 + 1/(q+1))^(q+2), decreasing toward x e
    const double log_rho = log_x + (q + 2.0) * std::log1p(1.0 / (q + 1.0));
    if (log_rho < 0.0) {
      const double tail = std::exp(log_term(q + 1.0)) / -std::expm1(log_rho);
      r.tail_bound = tail;
      if (tail < 1e-12 * (sum + compensation)) {
        r.certified = true;
        break;
      }
    } else {
      r.tail_bound = std::numeric_limits<double>::infinity();
    }
  }
  r.value = sum + compensation;
  return r;
}

// ---------------------------------------------------------------------------
// Test functions

std::string to_string(TestFamily f) {
  switch (f) {
    case TestFamily::radial_bump:
      return "radial_bump";
    case TestFamily::smoothed_tent:
      return "smoothed_tent";
    case TestFamily::sine_mode:
      return "sine_mode";
    case TestFamily::truncated_log:
      return "truncated_log";
  }
  return "unknown";
}

TestFunction::TestFunction(TestFunctionSpec spec, Domain domain)
    : spec_(spec), domain_(std::move(domain)), box_(domain_.bounding_box()) {
  switch (spec_.family) {
    case TestFamily::radial_bump:
      if (!(spec_.radius > 0.0) || !(spec_.exponent >= 1.0)) {
        throw std::invalid_argument("radial bump needs radius > 0 and exponent >= 1");
      }
      if (!domain_.contains(spec_.center) || !(domain_.distance(spec_.center) > spec_.radius)) {
        throw std::invalid_argument("radial bump support must lie inside the domain");
      }
      break;
    case TestFamily::smoothed_tent:
      if (!(spec_.width > 0.0) || !(spec_.offset >= 0.0)) {
        throw std::invalid_argument("tent needs width > 0 and offset >= 0");
      }
      break;
    case TestFamily::sine_mode:
      if (spec_.k1 < 1 || spec_.k2 < 1) throw std::invalid_argument("sine mode numbers must be positive");
      if (!(spec_.cutoff >= 0.0)) throw std::invalid_argument("cutoff must be nonnegative");
      if (spec_.cutoff == 0.0 && !std::holds_alternative<Rectangle>(domain_.shape())) {
        throw std::invalid_argument("sine mode needs a boundary cutoff off rectangles");
      }
      break;
    case TestFamily::truncated_log:
      if (!(spec_.eps > 0.0) || !(spec_.levels > 0.0)) throw std::invalid_argument("log needs eps > 0 and levels > 0");
      break;
  }
}

double TestFunction::value(const Point2& p) const {
  if (!domain_.contains(p)) return 0.0;
  const double a = spec_.amplitude;
  switch (spec_.family) {
    case TestFamily::radial_bump: {
      const Point2 d = p - spec_.center;
      const double t = 1.0 - dot(d, d) / (spec_.radius * spec_.radius);
      return t > 0.0 ? a * std::pow(t, spec_.exponent) : 0.0;
    }
    case TestFamily::smoothed_tent: {
      const double t = domain_.distance(p) - spec_.offset;
      return t > 0.0 ? a * SmoothingProfile(spec_.width).value(t) : 0.0;
    }
    case TestFamily::sine_mode: {
      const double xs = (p[0] - box_.lo[0]) / (box_.hi[0] - box_.lo[0]);
      const double ys = (p[1] - box_.lo[1]) / (box_.hi[1] - box_.lo[1]);
      double v = a * std::sin(spec_.k1 * std::numbers::pi * xs) * std::sin(spec_.k2 * std::numbers::pi * ys);
      if (spec_.cutoff > 0.0) v *= std::min(1.0, domain_.distance(p) / spec_.cutoff);
      return v;
    }
    case TestFamily::truncated_log: {
      const double l = std::log(domain_.distance(p) / spec_.eps);
      return a * std::clamp(l, 0.0, spec_.levels);
    }
  }
  return 0.0;
}

Point2 TestFunction::gradient(const Point2& p) const {
  if (!domain_.contains(p)) return {0.0, 0.0};
  const double a = spec_.amplitude;
  switch (spec_.family) {
    case TestFamily::radial_bump: {
      const Point2 d = p - spec_.center;
      const double r2 = spec_.radius * spec_.radius;
      const double t = 1.0 - dot(d, d) / r2;
      if (!(t > 0.0)) return {0.0, 0.0};
      const double f = a * spec_.exponent * std::pow(t, spec_.exponent - 1.0) * (-2.0 / r2);
      return f * d;
    }
    case TestFamily::smoothed_tent: {
      const double t = domain_.distance(p) - spec_.offset;
      if (!(t > 0.0)) return {0.0, 0.0};
      return (a * SmoothingProfile(spec_.width).derivative(t)) * domain_.distance_gradient(p);
    }
    case TestFamily::sine_mode: {
      const double wx = box_.hi[0] - box_.lo[0];
      const double wy = box_.hi[1] - box_.lo[1];
      const double ax = spec_.k1 * std::numbers::pi / wx;
      const double ay = spec_.k2 * std::numbers::pi / wy;
      const double sx = std::sin(ax * (p[0] - box_.lo[0]));
      const double sy = std::sin(ay * (p[1] - box_.lo[1]));
      const double cx = std::cos(ax * (p[0] - box_.lo[0]));
      const double cy = std::cos(ay * (p[1] - box_.lo[1]));
      Point2 g{a * ax * cx * sy, a * ay * sx * cy};
      if (spec_.cutoff > 0.0) {
        const double delta = domain_.distance(p);
        if (delta < spec_.cutoff) {
          const double c = delta / spec_.cutoff;
          g = c * g + ((a * sx * sy) / spec_.cutoff) * domain_.distance_gradient(p);
        }
      }
      return g;
    }
    case TestFamily::truncated_log: {
      const double delta = domain_.distance(p);
      const double l = std::log(delta / spec_.eps);
      if (!(l > 0.0) || !(l < spec_.levels)) return {0.0, 0.0};
      return (a / delta) * domain_.distance_gradient(p);
    }
  }
  return {0.0, 0.0};
}

double TestFunction::support_margin() const {
  switch (spec_.family) {
    case TestFamily::radial_bump:
      return domain_.distance(spec_.center) - spec_.radius;
    case TestFamily::smoothed_tent:
      return spec_.offset;
    case TestFamily::sine_mode:
      return 0.0;
    case TestFamily::truncated_log:
      return spec_.eps;
  }
  return 0.0;
}

bool TestFunction::vanishes_on_square(const Point2& center, double side) const {
  const double half = 0.5 * side;
  if (spec_.family == TestFamily::radial_bump) {
    const Point2 nearest{std::clamp(spec_.center[0], center[0] - half, center[0] + half),
                         std::clamp(spec_.center[1], center[1] - half, center[1] + half)};
    return norm(nearest - spec_.center) >= spec_.radius;
  }
  const double margin = support_margin();
  if (margin <= 0.0) return false;
  // delta is 1-Lipschitz
  return domain_.distance(center) + half * std::sqrt(2.0) <= margin;
}

ScalarField TestFunction::sample(std::shared_ptr<const Grid> grid) const {
  return ScalarField::sample(std::move(grid), [this](const Point2& p) { return value(p); });
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(spec_.family) << "(";
  switch (spec_.family) {
    case TestFamily::radial_bump:
      os << "center=[" << spec_.center[0] << "," << spec_.center[1] << "],radius=" << spec_.radius
         << ",exponent=" << spec_.exponent;
      break;
    case TestFamily::smoothed_tent:
      os << "offset=" << spec_.offset << ",width=" << spec_.width;
      break;
    case TestFamily::sine_mode:
      os << "k=[" << spec_.k1 << "," << spec_.k2 << "],cutoff=" << spec_.cutoff;
      break;
    case TestFamily::truncated_log:
      os << "eps=" << spec_.eps << ",levels=" << spec_.levels;
      break;
  }
  os << ")";
  return os.str();
}

namespace {

// A deepest point of the domain, its distance, and a second center halfway to the boundary.
std::pair<Point2, double> deep_point(const Domain& domain) {
  if (const auto* d = std::get_if<Disk>(&domain.shape())) return {d->center, d->radius};
  if (const auto* r = std::get_if<Rectangle>(&domain.shape())) {
    const Point2 c = 0.5 * (r->lo + r->hi);
    return {c, domain.distance(c)};
  }
  const BoundingBox box = domain.bounding_box();
  Point2 best = 0.5 * (box.lo + box.hi);
  double best_d = domain.contains(best) ? domain.distance(best) : 0.0;
  const int n = 128;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const Point2 p{box.lo[0] + (box.hi[0] - box.lo[0]) * i / n, box.lo[1] + (box.hi[1] - box.lo[1]) * j / n};
      if (!domain.contains(p)) continue;
      const double d = domain.distance(p);
      if (d > best_d) {
        best_d = d;
        best = p;
      }
    }
  }
  return {best, best_d};
}

}  // namespace

std::vector<TestFunctionSpec> standard_test_family(const Domain& domain) {
  const auto [center, depth] = deep_point(domain);
  const double t0 = SmoothingProfile::for_domain(domain).transition_start();
  const bool rectangle = std::holds_alternative<Rectangle>(domain.shape());
  std::vector<TestFunctionSpec> out;

  TestFunctionSpec s;
  s.family = TestFamily::radial_bump;
  s.center = center;
  s.radius = 0.8 * depth;
  s.exponent = 2.0;
  out.push_back(s);
  s.radius = 0.5 * depth;
  s.exponent = 1.0;
  out.push_back(s);

  s = {};
  s.family = TestFamily::smoothed_tent;
  s.width = t0;
  out.push_back(s);
  s.offset = 0.25 * t0;
  s.width = 0.5 * t0;
  out.push_back(s);

  s = {};
  s.family = TestFamily::sine_mode;
  s.cutoff = rectangle ? 0.0 : t0;
  out.push_back(s);
  s.k1 = 2;
  out.push_back(s);

  s = {};
  s.family = TestFamily::truncated_log;
  s.eps = 0.25 * t0;
  s.levels = 2.0;
  out.push_back(s);
  return out;
}

std::vector<TestFunctionSpec> compact_test_family(const Domain& domain, double margin) {
  std::vector<TestFunctionSpec> out;
  for (const auto& s : standard_test_family(domain)) {
    if (TestFunction(s, domain).support_margin() > margin) out.push_back(s);
  }
  return out;
}

HardySearch max_hardy_quotient(const Domain& domain, double h) {
  auto grid = std::make_shared<const Grid>(domain, h);
  std::vector<TestFunctionSpec> specs = standard_test_family(domain);
  const double depth = deep_point(domain).second;
  for (double frac : {0.02, 0.05, 0.1, 0.2, 0.35, 0.5}) {
    // a tent narrower than two cells is flat on every node
    if (frac * depth < 2.0 * h) continue;
    TestFunctionSpec s;
    s.family = TestFamily::smoothed_tent;
    s.width = frac * depth;
    specs.push_back(s);
  }
  for (double levels : {0.5, 1.0, 3.0}) {
    TestFunctionSpec s;
    s.family = TestFamily::truncated_log;
    s.eps = 4.0 * h;
    s.levels = levels;
    specs.push_back(s);
  }
  HardySearch best;
  for (const auto& s : specs) {
    const TestFunction f(s, domain);
    const ScalarField u = f.sample(grid);
    const double q = hardy_quotient(u);
    ++best.candidates;
    if (q > best.max_quotient) {
      best.max_quotient = q;
      best.argmax = f.describe();
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Inequalities

bool within_band(double lhs, double rhs, double tol) { return lhs * (1.0 - tol) <= rhs * (1.0 + tol); }

std::vector<InequalityCase> weighted_inequality_suite(const Domain& domain, double h, const TheoreticalConstants& c,
                                                      const std::vector<double>& qs) {
  auto grid = std::make_shared<const Grid>(domain, h);
  std::vector<InequalityCase> out;
  for (const auto& spec : standard_test_family(domain)) {
    const TestFunction f(spec, domain);
    const ScalarField u = f.sample(grid);
    const double rhs = weighted_rhs(u, 2.0, 2);
    for (double q : qs) {
      InequalityCase ic;
      ic.theorem = "weighted_lq_bound";
      ic.domain = std::string(domain.kind());
      ic.function = f.describe();
      ic.q = q;
      ic.lhs = weighted_lhs(u, q, 2);
      ic.rhs_bound = sigma_q(c, q, 2.0) * rhs;
      ic.ratio = ic.lhs / ic.rhs_bound;
      ic.pass = within_band(ic.lhs, ic.rhs_bound);
      out.push_back(ic);
    }
  }
  return out;
}

std::vector<ChainReport> chain_audit(const TestFunction& u, const WhitneyDecomposition<2>& decomp,
                                     const BumpFunction& bump, const std::vector<double>& qs, double p,
                                     int gauss_points) {
  constexpr int N = 2;
  if (p != N) throw UnsupportedConstantError("the audited chain needs p = N");
  for (double q : qs) {
    if (!(q > p)) throw std::invalid_argument("q must exceed p");
  }
  const double eps_cut = decomp.truncation().eps_cut;
  if (!(u.support_margin() > eps_cut)) {
    throw std::invalid_argument("test function must vanish where delta <= eps_cut");
  }
  const auto& dc = decomp.constants();
  const auto& cubes = decomp.cubes();
  const double ep = decomp.params().eta_prime;
  // constants for supports of side eta' s
  const double Lam = dc.lambda / ep;
  const double Mu = dc.mu / ep;
  const double C3 = dc.c3 * ep;
  const double P = dc.P;
  const std::size_t nq = qs.size();

  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(gauss_points, gx, gw);

  std::vector<std::vector<double>> A(nq, std::vector<double>(cubes.size(), 0.0));
  std::vector<std::vector<double>> B(nq, std::vector<double>(cubes.size(), 0.0));
  std::vector<double> C(cubes.size(), 0.0);
  std::vector<double> D(cubes.size(), 0.0);
  std::vector<double> E(cubes.size(), 0.0);
  std::vector<char> touched(cubes.size(), 0);
  std::vector<double> I(nq, 0.0);
  std::vector<double> I_split(nq, 0.0);
  double Rg = 0.0;
  double Ru = 0.0;
  double X = 0.0;
  std::size_t tiles = 0;
  std::size_t points = 0;
  std::size_t mismatches = 0;

  const int window = dc.J1 + 1;
  std::vector<std::size_t> nbrs;
  std::vector<PartitionSample> vals;
  std::vector<Point2> grads;
  std::array<std::vector<double>, 2> breaks;

  for (std::size_t t = 0; t < cubes.size(); ++t) {
    const auto& T = cubes[t];
    const double sT = T.side();
    const Point2 xT = T.center();
    if (u.vanishes_on_square(xT, sT)) continue;
    ++tiles;

    // cubes whose support meets T; side ratios below c6 bound the level window
    nbrs.clear();
    for (int k = std::max(decomp.min_level(), T.level - window); k <= std::min(decomp.max_level(), T.level + window);
         ++k) {
      const double s2 = std::ldexp(1.0, -k);
      const double reach = 0.5 * (sT + ep * s2);
      std::array<std::int64_t, 2> lo{};
      std::array<std::int64_t, 2> hi{};
      for (std::size_t a = 0; a < 2; ++a) {
        lo[a] = static_cast<std::int64_t>(std::ceil((xT[a] - reach) / s2 - 0.5));
        hi[a] = static_cast<std::int64_t>(std::floor((xT[a] + reach) / s2 - 0.5));
      }
      DyadicCube<2> c;
      c.level = k;
      for (c.index[1] = lo[1]; c.index[1] <= hi[1]; ++c.index[1]) {
        for (c.index[0] = lo[0]; c.index[0] <= hi[0]; ++c.index[0]) {
          if (auto f = decomp.find(c)) nbrs.push_back(*f);
        }
      }
    }

    for (std::size_t a = 0; a < 2; ++a) {
      auto& br = breaks[a];
      br.clear();
      const double lo = xT[a] - 0.5 * sT;
      const double hi = xT[a] + 0.5 * sT;
      br.push_back(lo);
      br.push_back(hi);
      for (std::size_t n : nbrs) {
        const double x = cubes[n].center()[a];
        const double s = cubes[n].side();
        for (double e : {x - 0.5 * s, x + 0.5 * s, x - 0.5 * ep * s, x + 0.5 * ep * s}) {
          if (e > lo && e < hi) br.push_back(e);
        }
      }
      std::sort(br.begin(), br.end());
      br.erase(std::unique(br.begin(), br.end()), br.end());
    }

    // the window must catch every support through T
    for (const Point2& probe : {xT, Point2{xT[0] - 0.49 * sT, xT[1] - 0.49 * sT}, Point2{xT[0] + 0.49 * sT, xT[1] - 0.49 * sT},
                                Point2{xT[0] - 0.49 * sT, xT[1] + 0.49 * sT}, Point2{xT[0] + 0.49 * sT, xT[1] + 0.49 * sT}}) {
      int local = 0;
      for (std::size_t n : nbrs) {
        Point2 y = probe - cubes[n].center();
        if (std::max(std::abs(y[0]), std::abs(y[1])) <= 0.5 * ep * cubes[n].side()) ++local;
      }
      if (local != decomp.overlap_count(probe)) ++mismatches;
    }

    for (std::size_t ix = 0; ix + 1 < breaks[0].size(); ++ix) {
      const double x0 = breaks[0][ix];
      const double lx = breaks[0][ix + 1] - x0;
      for (std::size_t iy = 0; iy + 1 < breaks[1].size(); ++iy) {
        const double y0 = breaks[1][iy];
        const double ly = breaks[1][iy + 1] - y0;
        for (std::size_t a = 0; a < gx.size(); ++a) {
          for (std::size_t b = 0; b < gx.size(); ++b) {
            const Point2 pt{x0 + lx * gx[a], y0 + ly * gx[b]};
            const double w = lx * ly * gw[a] * gw[b];
            const double uv = u.value(pt);
            const Point2 gu = u.gradient(pt);
            const double gnorm = norm(gu);
            if (uv == 0.0 && gnorm == 0.0) continue;
            ++points;
            const double delta = decomp.region().distance(pt);
            decomp.partition_with_gradient(bump, nbrs, pt, vals, grads);

            Rg += w * std::pow(gnorm, p) * std::pow(delta, p - N);
            Ru += w * pow_abs(uv, p) * std::pow(delta, -N);
            double sum_phi = 0.0;
            for (const auto& v : vals) sum_phi += v.value;
            for (std::size_t qi = 0; qi < nq; ++qi) {
              I[qi] += w * pow_abs(uv, qs[qi]) * std::pow(delta, -N);
              I_split[qi] += w * pow_abs(uv * sum_phi, qs[qi]) * std::pow(delta, -N);
            }
            for (std::size_t n = 0; n < vals.size(); ++n) {
              const std::size_t k = vals[n].cube;
              const double phi = vals[n].value;
              const double sigma = ep * cubes[k].side();
              touched[k] = 1;
              for (std::size_t qi = 0; qi < nq; ++qi) {
                const double m = pow_abs(uv * phi, qs[qi]);
                A[qi][k] += w * m * std::pow(delta, -N);
                B[qi][k] += w * m;
              }
              const Point2 g_prod = phi * gu + uv * grads[n];
              C[k] += w * std::pow(norm(g_prod), p);
              D[k] += w * std::pow(phi, p) * std::pow(gnorm, p);
              E[k] += w * pow_abs(uv, p) * std::pow(norm(grads[n]), p);
              X += w * pow_abs(uv, p) * std::pow(sigma, -N);
            }
          }
        }
      }
    }
  }

  std::vector<ChainReport> reports;
  for (std::size_t qi = 0; qi < nq; ++qi) {
    const double q = qs[qi];
    const double S = sobolev_bound(N, q);
    ChainReport rep;
    rep.q = q;
    rep.p = p;
    rep.function = u.describe();
    rep.tiles = tiles;
    rep.points = points;
    rep.neighbour_mismatches = mismatches;
    rep.sigma_support = 2.0 * P * S * std::pow(Lam, -N / q) *
                        std::pow(std::pow(Mu, N - p) + P * std::pow(C3, p) * std::pow(Mu, N), 1.0 / p);

    double sum_A = 0.0;
    double sum_B = 0.0;
    double sum_sob = 0.0;
    double sum_C = 0.0;
    double sum_DE = 0.0;
    double sum_D = 0.0;
    double sum_E = 0.0;
    double worst = -1.0;
    ChainStep sob{"scaled Sobolev on each support (worst cube)", 0.0, 0.0, true};
    for (std::size_t k = 0; k < cubes.size(); ++k) {
      if (!touched[k]) continue;
      const double sigma = ep * cubes[k].side();
      sum_A += A[qi][k];
      sum_B += std::pow(Lam * sigma, -N) * B[qi][k];
      sum_sob += std::pow(Lam, -N) * std::pow(sigma, q * (p - N) / p) * std::pow(C[k], q / p);
      sum_C += std::pow(sigma, p - N) * C[k];
      sum_D += std::pow(sigma, p - N) * D[k];
      sum_E += std::pow(sigma, p - N) * E[k];
      sum_DE += std::pow(sigma, p - N) * (D[k] + E[k]);
      const double lhs = std::pow(B[qi][k], 1.0 / q);
      const double rhs = S * std::pow(sigma, N / q + 1.0 - N / p) * std::pow(C[k], 1.0 / p);
      ++rep.sobolev_cubes;
      if (!within_band(lhs, rhs)) ++rep.sobolev_violations;
      const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > worst) {
        worst = ratio;
        sob.lhs = lhs;
        sob.rhs = rhs;
      }
    }
    sob.pass = rep.sobolev_violations == 0;

    const double K = 2.0 * P * S * std::pow(Lam, -N / q);
    const double R2 = std::pow(P, q) * sum_A;
    const double R3 = std::pow(P, q) * sum_B;
    const double R4 = std::pow(P * S, q) * sum_sob;
    const double R5 = std::pow(P * S * std::pow(Lam, -N / q), p) * sum_C;
    const double R6 = std::pow(K, p) * sum_DE;
    const double R7 = std::pow(K, p) * (std::pow(Mu, N - p) * Rg + P * std::pow(C3, p) * std::pow(Mu, N) * Ru);

    auto step = [&](std::string name, double lhs, double rhs) {
      rep.steps.push_back({std::move(name), lhs, rhs, within_band(lhs, rhs)});
    };
    {
      const double diff = std::abs(I[qi] - I_split[qi]);
      rep.steps.push_back({"partition of unity inside the integral", I[qi], I_split[qi],
                           diff <= 1e-10 * std::max(I[qi], I_split[qi])});
    }
    step("at most P nonzero terms", I_split[qi], R2);
    step("delta >= lambda s on supports", R2, R3);
    rep.steps.push_back(sob);
    step("sum of scaled Sobolev bounds", R3, R4);
    step("power sum inequality", std::pow(R4, p / q), R5);
    step("gradient split", R5, R6);
    step("cutoff times gradient term", sum_D, std::pow(Mu, N - p) * Rg);
    step("function times partition gradient term", sum_E, std::pow(C3, p) * X);
    step("bounded overlap", std::pow(C3, p) * X, P * std::pow(C3, p) * std::pow(Mu, N) * Ru);
    step("combined bound", R6, R7);
    step("weighted inequality", std::pow(I[qi], 1.0 / q), rep.sigma_support * std::pow(Rg + Ru, 1.0 / p));
    rep.steps.push_back({"support enumeration consistent", static_cast<double>(mismatches), 0.0, mismatches == 0});

    for (const auto& s : rep.steps) {
      if (!s.pass) ++rep.violations;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

ChainReport chain_audit(const TestFunction& u, const WhitneyDecomposition<2>& decomp, const BumpFunction& bump,
                        double q, double p, int gauss_points) {
  return chain_audit(u, decomp, bump, std::vector<double>{q}, p, gauss_points).front();
}

ElementaryReport check_power_sum(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  ElementaryReport rep;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 16;
    std::vector<double> b(n);
    for (auto& v : b) v = 10.0 * detail::unit_uniform(rng);
    for (double r : {1.0, 1.5, 2.0, 3.0}) {
      double lhs = 0.0;
      double sum = 0.0;
      for (double v : b) {
        lhs += std::pow(v, r);
        sum += v;
      }
      const double rhs = std::pow(sum, r);
      ++rep.trials;
      if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12)) ++rep.violations;
    }
  }
  return rep;
}

ElementaryReport check_phi_split(int N, std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  ElementaryReport rep;
  for (std::size_t t = 0; t < trials; ++t) {
    const double f = 4.0 * detail::unit_uniform(rng) - 2.0;
    const double g = 4.0 * detail::unit_uniform(rng) - 2.0;
    const double lhs = phi_N(f + g, N);
    const double rhs = phi_N(2.0 * f, N) + phi_N(2.0 * g, N);
    ++rep.trials;
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12)) ++rep.violations;
  }
  return rep;
}

}  // namespace renorm
