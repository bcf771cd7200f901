#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "renorm/io.hpp"
#include "support.hpp"

using namespace renorm;
using io::json;

TEST_SUITE("io") {

TEST_CASE("domain descriptors round trip") {
  const Domain domains[] = {Domain::disk({0.5, -0.25}, 2.0), Domain::annulus({0.0, 0.0}, 0.5, 1.0),
                            Domain::rectangle({-1.0, 0.0}, {2.0, 0.5}), Domain::l_shape()};
  for (const Domain& d : domains) {
    const json j = io::to_json(d);
    const Domain back = io::domain_from_json(json::parse(j.dump()));
    CHECK(io::to_json(back) == j);
    CHECK(back.kind() == d.kind());
    CHECK(back.distance({0.1, 0.2}) == d.distance({0.1, 0.2}));
  }
  CHECK(io::domain_from_json(json{{"shape", "lshape"}}).kind() == "polygon");
}

TEST_CASE("malformed descriptors are rejected") {
  CHECK_THROWS_AS(io::domain_from_json(json::array()), std::invalid_argument);
  CHECK_THROWS_AS(io::domain_from_json(json{{"shape", "hexagon"}}), std::invalid_argument);
  CHECK_THROWS_AS(io::domain_from_json(json{{"shape", "disk"}, {"center", {0, 0}}}), std::invalid_argument);
  CHECK_THROWS_AS(io::domain_from_json(json{{"shape", "disk"}, {"center", {0}}, {"radius", 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::domain_from_json(json{{"shape", "disk"}, {"center", {0, 0}}, {"radius", -1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::domain_from_json(json{{"shape", "polygon"}, {"vertices", 3}}), std::invalid_argument);
  CHECK_THROWS_AS(io::load_domain("/nonexistent/domain.json"), std::invalid_argument);
}

TEST_CASE("field writers") {
  const Domain disk = Domain::unit_disk();
  const auto g = testing::make_grid(disk, 1.0 / 16);
  const ScalarField f = ScalarField::sample(g, [](const Point2& p) { return p[0] - 2.0 * p[1]; });
  std::ostringstream os;
  io::write_field_csv(os, f);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,value");
  // rows follow the non-exterior nodes in storage order
  std::size_t rows = 0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    if (g->kind(k) == NodeKind::exterior) continue;
    REQUIRE(std::getline(in, line));
    double x, y, v;
    char c1, c2;
    std::istringstream ls(line);
    ls >> x >> c1 >> y >> c2 >> v;
    CHECK(x == g->node(k)[0]);
    CHECK(y == g->node(k)[1]);
    CHECK(v == f[k]);
    if (g->is_interior(k)) REQUIRE(v == doctest::Approx(x - 2.0 * y));
    ++rows;
  }
  CHECK_FALSE(std::getline(in, line));
  CHECK(rows > 0);

  const json j = io::field_json(f);
  CHECK(j.at("values").size() == g->size());
  CHECK(j.at("mask").size() == g->size());
  CHECK(j.at("nx").get<std::size_t>() == g->nx());
  CHECK(j.at("h").get<double>() == 1.0 / 16);
}

TEST_CASE("svg output") {
  const Domain sq = Domain::unit_square();
  WhitneyParams p;
  p.k_max = 5;
  const auto d = decompose(sq, p);
  const std::string s = io::cubes_svg(d);
  CHECK(s.rfind("<svg", 0) == 0);
  std::size_t rects = 0;
  for (std::size_t pos = s.find("<rect"); pos != std::string::npos; pos = s.find("<rect", pos + 1)) ++rects;
  CHECK(rects >= d.cubes().size());
  const auto g = testing::make_grid(sq, 1.0 / 16);
  ScalarField f = ScalarField::sample(g, [](const Point2& p) { return p[0]; });
  f[g->index(8, 8)] = NAN;
  const std::string h = io::heatmap_svg(f);
  CHECK(h.find("</svg>") != std::string::npos);
}

TEST_CASE("serialization is deterministic and writes non-finite values as null") {
  EnergyBreakdown e;
  e.total = INFINITY;
  e.linear = NAN;
  const json j = io::to_json(e);
  CHECK(j.at("total").is_null());
  CHECK(j.at("linear").is_null());
  CHECK(io::dump(j) == io::dump(io::to_json(e)));
  // keys are sorted
  const std::string text = io::dump(j);
  CHECK(text.find("dirichlet") < text.find("linear"));
  CHECK(text.find("linear") < text.find("nonlinear"));
  CHECK(text.back() == '\n');

  const auto dir = std::filesystem::temp_directory_path() / "renorm_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_file(dir / "x.json", text);
  std::ifstream in(dir / "x.json");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == text);
  std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("report schemas") {
  const Domain disk = Domain::unit_disk();
  const auto g = testing::make_grid(disk, 1.0 / 16);
  const SolveReport r = solve(disk, SmoothingProfile::for_domain(disk), g, SolverConfig{});
  const json j = io::to_json(r);
  for (const char* key : {"iterations", "converged", "final_gradient_norm", "final_energy", "energy_history",
                          "corollary4", "oracle"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j.at("corollary4").contains("margin"));
  CHECK(j.at("energy_history").size() == r.energy_history.size());

  WhitneyParams p;
  p.k_max = 4;
  const auto d = decompose(Domain::unit_square(), p);
  const json w = io::to_json(d);
  CHECK(w.at("cube_count").get<std::size_t>() == d.cubes().size());
  CHECK(w.at("cubes").size() == d.cubes().size());
  CHECK(w.at("constants").at("P").get<int>() == 501);
}

}  // TEST_SUITE
