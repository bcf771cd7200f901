#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "renorm/whitney.hpp"
#include "support.hpp"

using namespace renorm;

namespace {

WhitneyParams params_k(int k_max) {
  WhitneyParams p;
  p.k_max = k_max;
  return p;
}

// Closed dilated intervals [c - a, c + a] and [e - b, e + b] meet.
bool intervals_meet(double c, double a, double e, double b) { return std::abs(c - e) <= a + b; }

}  // namespace

TEST_SUITE("whitney") {

TEST_CASE("parameter validation") {
  WhitneyParams p;
  CHECK_NOTHROW(p.validate());
  p.eta_prime = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.eta = 1.4;  // 1.4 / sqrt 2 < 1.05
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.k_min = 5;
  p.k_max = 4;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.dimension = 3;
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(decompose(Domain::unit_square(), p), std::invalid_argument);
}

TEST_CASE("dyadic cube arithmetic") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    DyadicCube<2> q;
    q.level = static_cast<int>(testing::uniform(rng, -3.0, 12.0));
    q.index = {static_cast<std::int64_t>(testing::uniform(rng, -500.0, 500.0)),
               static_cast<std::int64_t>(testing::uniform(rng, -500.0, 500.0))};
    const double s = q.side();
    CHECK(s == std::ldexp(1.0, -q.level));
    const DyadicCube<2> par = q.parent();
    CHECK(par.side() == 2.0 * s);
    // the parent contains the cube
    for (int i = 0; i < 2; ++i) {
      const double lo = static_cast<double>(q.index[i]) * s;
      const double plo = static_cast<double>(par.index[i]) * par.side();
      CHECK(plo <= lo);
      CHECK(lo + s <= plo + par.side());
    }
    const auto kids = q.children();
    const std::set<DyadicCube<2>> distinct(kids.begin(), kids.end());
    CHECK(distinct.size() == 4);
    double centroid[2] = {0.0, 0.0};
    for (const auto& k : kids) {
      CHECK(k.parent() == q);
      centroid[0] += 0.25 * k.center()[0];
      centroid[1] += 0.25 * k.center()[1];
    }
    CHECK(centroid[0] == doctest::Approx(q.center()[0]));
    CHECK(centroid[1] == doctest::Approx(q.center()[1]));
  }
}

TEST_CASE("derived constants for the default parameters") {
  const WhitneyParams p;
  const BumpFunction bump(p.eta_prime);
  const DerivedConstants c = derive_constants(p, bump);
  const double r2 = std::sqrt(2.0);
  CHECK(c.lambda == doctest::Approx((2.0 - 1.05 * r2) / 2.0));
  CHECK(c.lambda == doctest::Approx(0.2575).epsilon(1e-3));
  CHECK(c.mu == doctest::Approx(4.278).epsilon(1e-3));
  CHECK(c.c6 == doctest::Approx(16.611).epsilon(1e-3));
  CHECK(c.P == 501);
  CHECK(c.J1 == 4);
  CHECK(c.c3 == doctest::Approx(c.bump_gradient * (1.0 + 501.0 * c.c6)));
  // the steepest slope of the exp(-1/t) step over a band of width 0.025
  CHECK(c.bump_gradient == doctest::Approx(80.0).epsilon(1e-3));
  CHECK(c.c3 == doctest::Approx(6.659e5).epsilon(1e-3));
}

TEST_CASE("P bounds the neighbours of every placement") {
  // brute force: a unit cube at index m, all dyadic cubes of levels with
  // ratio below c6 whose dilations meet its dilation
  const WhitneyParams p;
  const DerivedConstants c = derive_constants(p, BumpFunction(p.eta_prime));
  const double ep = p.eta_prime;
  int worst = 0;
  for (std::int64_t m0 = 0; m0 < 16; ++m0) {
    for (std::int64_t m1 = 0; m1 < 16; m1 += 5) {
      const double cx = static_cast<double>(m0) + 0.5;
      const double cy = static_cast<double>(m1) + 0.5;
      int count = 0;
      for (int j = -4; j <= 4; ++j) {
        const double t = std::ldexp(1.0, j);
        if (!(t < c.c6 && 1.0 / t < c.c6)) continue;
        const auto lo_x = static_cast<std::int64_t>(std::floor((cx - 40.0) / t));
        const auto hi_x = static_cast<std::int64_t>(std::ceil((cx + 40.0) / t));
        const auto lo_y = static_cast<std::int64_t>(std::floor((cy - 40.0) / t));
        const auto hi_y = static_cast<std::int64_t>(std::ceil((cy + 40.0) / t));
        for (std::int64_t a = lo_x; a <= hi_x; ++a) {
          if (!intervals_meet(cx, 0.5 * ep, (static_cast<double>(a) + 0.5) * t, 0.5 * ep * t)) continue;
          for (std::int64_t b = lo_y; b <= hi_y; ++b) {
            if (intervals_meet(cy, 0.5 * ep, (static_cast<double>(b) + 0.5) * t, 0.5 * ep * t)) ++count;
          }
        }
      }
      worst = std::max(worst, count);
    }
  }
  CHECK(worst <= c.P);
  CHECK(worst >= 100);
  CHECK(enumerate_neighbour_bound(p, c.c6) == c.P);
}

TEST_CASE("bump function") {
  const BumpFunction b(1.05);
  CHECK(b.profile(0.0) == 1.0);
  CHECK(b.profile(0.5) == 1.0);
  CHECK(b.profile(0.525) == 0.0);
  CHECK(b.profile(-0.6) == 0.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const double t = testing::uniform(rng, -0.6, 0.6);
    CHECK(b.profile(t) == doctest::Approx(b.profile(-t)));
    CHECK(b.profile(t) >= 0.0);
    CHECK(b.profile(t) <= 1.0);
    const double e = 1e-7;
    const double fd = (b.profile(t + e) - b.profile(t - e)) / (2.0 * e);
    CHECK(b.profile_derivative(t) == doctest::Approx(fd).epsilon(1e-4).scale(1e-3));
    const Point<2> x{testing::uniform(rng, -0.55, 0.55), testing::uniform(rng, -0.55, 0.55)};
    const Point<2> g = b.gradient(x);
    const double gx = (b.value(Point<2>{x[0] + e, x[1]}) - b.value(Point<2>{x[0] - e, x[1]})) / (2.0 * e);
    const double gy = (b.value(Point<2>{x[0], x[1] + e}) - b.value(Point<2>{x[0], x[1] - e})) / (2.0 * e);
    CHECK(g[0] == doctest::Approx(gx).epsilon(1e-4).scale(1e-3));
    CHECK(g[1] == doctest::Approx(gy).epsilon(1e-4).scale(1e-3));
  }
  // max gradient against a fine scan of the 1D slope; the 2D maximum sits on an axis
  double scan = 0.0;
  for (int i = 0; i <= 200000; ++i) scan = std::max(scan, std::abs(b.profile_derivative(0.5 + 0.025 * i / 200000.0)));
  CHECK(b.max_gradient(1) == doctest::Approx(scan).epsilon(1e-6));
  CHECK(b.max_gradient(2) >= scan * (1.0 - 1e-9));
  CHECK(b.max_gradient(2) <= scan * std::sqrt(2.0));
}

TEST_CASE("decomposition is deterministic and sorted") {
  const auto a = decompose(Domain::unit_disk(), params_k(7));
  const auto b = decompose(Domain::unit_disk(), params_k(7));
  CHECK(a.cubes() == b.cubes());
  CHECK(std::is_sorted(a.cubes().begin(), a.cubes().end(),
                       [](const auto& x, const auto& y) { return std::tie(x.level, x.index) < std::tie(y.level, y.index); }));
  CHECK(a.min_level() <= a.max_level());
  CHECK(a.max_level() <= 7);
  for (std::size_t i = 0; i < a.cubes().size(); i += 37) CHECK(a.find(a.cubes()[i]) == i);
  CHECK(a.truncation().eps_cut == doctest::Approx(a.constants().mu * std::ldexp(1.0, -7)));
  CHECK(a.truncation().truncated_cubes > 0);
}

TEST_CASE("thin regions give an empty decomposition") {
  const Region<2> tiny = ball_region<2>(Point<2>{0.3, 0.3}, 0.01);
  try {
    (void)decompose<2>(tiny, params_k(7));
    FAIL("expected EmptyDecompositionError");
  } catch (const EmptyDecompositionError& e) {
    CHECK(e.report().k_max == 7);
    CHECK(e.report().truncated_cubes > 0);
  }
}

TEST_CASE("partition queries near the boundary") {
  const auto d = decompose(Domain::unit_square(), params_k(6));
  const BumpFunction bump(d.params().eta_prime);
  CHECK_THROWS_AS(d.partition_weights(bump, Point<2>{1e-4, 0.5}), PartialCoverageError);
  // cube centers lie in the core only
  for (std::size_t i = 0; i < d.cubes().size(); i += 11) {
    const Point<2> x = d.cubes()[i].center();
    REQUIRE(d.overlap_count(x) == 1);
    const auto w = d.partition_weights(bump, x);
    REQUIRE(w.size() == 1);
    CHECK(w[0].cube == i);
    CHECK(w[0].weight == 1.0);
  }
}

TEST_CASE("property verification on planar domains") {
  for (const Domain& domain : {Domain::unit_square(), Domain::unit_disk(), Domain::l_shape()}) {
    CAPTURE(domain.kind());
    const auto d = decompose(domain, params_k(8));
    const BumpFunction bump(d.params().eta_prime);
    const PropertyReport r = verify_properties(d, bump, 5000, 3);
    CHECK(r.cubes == d.cubes().size());
    CHECK(r.selection_violations == 0);
    CHECK(r.support_violations == 0);
    CHECK(r.nesting_violations == 0);
    CHECK(r.center_violations == 0);
    CHECK(r.side_ratio_violations == 0);
    CHECK(r.neighbour_violations == 0);
    CHECK(r.coverage_misses == 0);
    CHECK(r.overlap_violations == 0);
    CHECK(r.support_ratio_violations == 0);
    CHECK(r.partition_violations == 0);
    CHECK(r.consequence_violations == 0);
    CHECK(r.gradient_violations == 0);
    CHECK(r.partition_sum_error < 1e-12);
    CHECK(r.support_ratio_min >= d.constants().lambda);
    CHECK(r.support_ratio_max <= d.constants().mu);
    CHECK(r.side_ratio_max < d.constants().c6);
    CHECK(r.overlap_max >= 2);
    CHECK(r.pass());
  }
}

TEST_CASE("property verification on a 3D ball") {
  WhitneyParams p;
  p.dimension = 3;
  p.k_max = 5;
  const auto d = decompose<3>(ball_region<3>(Point<3>{0.0, 0.0, 0.0}, 1.0), p);
  const BumpFunction bump(p.eta_prime);
  const PropertyReport r = verify_properties(d, bump, 300, 9);
  CHECK(r.cubes > 0);
  CHECK(r.pass());
  CHECK(d.constants().lambda == doctest::Approx(0.5 * (2.0 - 1.05 * std::sqrt(3.0))));
}

TEST_CASE("region queries") {
  const Region<2> box = box_region<2>(Point<2>{0.0, 0.0}, Point<2>{2.0, 1.0});
  CHECK(box.contains(Point<2>{1.0, 0.5}));
  CHECK_FALSE(box.contains(Point<2>{2.0, 0.5}));
  CHECK(box.distance(Point<2>{1.0, 0.2}) == doctest::Approx(0.2));
  CHECK(box.distance(Point<2>{3.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(box.contains_closed_cube(Point<2>{1.0, 0.5}, 0.9));
  CHECK_FALSE(box.contains_closed_cube(Point<2>{1.0, 0.5}, 1.0));
  CHECK_THROWS_AS(ball_region<2>(Point<2>{0.0, 0.0}, 0.0), std::invalid_argument);
  const Region<2> l = region_from_domain(Domain::l_shape());
  CHECK(l.name == "polygon");
  CHECK_FALSE(l.contains(Point<2>{0.5, 0.5}));
  CHECK(l.contains(Point<2>{-0.5, 0.5}));
}

}  // TEST_SUITE
