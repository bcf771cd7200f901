#include "renorm/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace renorm::io {

namespace {

Point2 point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(std::string(what) + " must be an array of two numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("domain field \"") + key + "\" must be a number");
  }
  return j.at(key).get<double>();
}

Point2 point_field(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("domain field \"") + key + "\" is missing");
  return point_from_json(j.at(key), key);
}

json point_json(const Point2& p) { return json::array({p[0], p[1]}); }

// Finite doubles pass through; everything else becomes null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// blue -> yellow, t in [0, 1]
std::string color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * t));
  const int g = static_cast<int>(std::lround(30 + 200 * t));
  const int b = static_cast<int>(std::lround(150 - 110 * t));
  std::ostringstream os;
  os << '#' << std::hex << std::setfill('0') << std::setw(2) << r << std::setw(2) << g << std::setw(2) << b;
  return os.str();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

Domain domain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.at("shape").is_string()) {
    throw std::invalid_argument("domain descriptor needs a string field \"shape\"");
  }
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "disk") return Domain::disk(point_field(j, "center"), number_field(j, "radius"));
  if (shape == "annulus") {
    return Domain::annulus(point_field(j, "center"), number_field(j, "r_inner"), number_field(j, "r_outer"));
  }
  if (shape == "rectangle" || shape == "square") return Domain::rectangle(point_field(j, "lo"), point_field(j, "hi"));
  if (shape == "polygon") {
    if (!j.contains("vertices") || !j.at("vertices").is_array()) {
      throw std::invalid_argument("polygon needs an array \"vertices\"");
    }
    std::vector<Point2> v;
    for (const auto& p : j.at("vertices")) v.push_back(point_from_json(p, "vertex"));
    return Domain::polygon(std::move(v));
  }
  if (shape == "lshape") return Domain::l_shape();
  throw std::invalid_argument("unknown shape \"" + shape + "\"");
}

json to_json(const Domain& domain) {
  json j;
  j["shape"] = std::string(domain.kind());
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disk>) {
          j["center"] = point_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<S, Annulus>) {
          j["center"] = point_json(s.center);
          j["r_inner"] = s.r_inner;
          j["r_outer"] = s.r_outer;
        } else if constexpr (std::is_same_v<S, Rectangle>) {
          j["lo"] = point_json(s.lo);
          j["hi"] = point_json(s.hi);
        } else {
          json v = json::array();
          for (const auto& p : s.vertices) v.push_back(point_json(p));
          j["vertices"] = v;
        }
      },
      domain.shape());
  return j;
}

Domain load_domain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open domain file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("domain file " + path.string() + ": " + e.what());
  }
  return domain_from_json(j);
}

json to_json(const EnergyBreakdown& e) {
  return {{"dirichlet", number(e.dirichlet)},
          {"nonlinear", number(e.nonlinear)},
          {"linear", number(e.linear)},
          {"total", number(e.total)}};
}

json to_json(const GradientBoundCheck& c) {
  return {{"lhs", number(c.lhs)},
          {"rhs", number(c.rhs)},
          {"hardy_constant", number(c.hardy_constant)},
          {"margin", number(c.rhs - c.lhs)},
          {"pass", c.pass}};
}

json to_json(const OracleError& e) {
  return {{"sup", number(e.sup)}, {"l2", number(e.l2)}, {"min_distance", e.min_distance}, {"nodes", e.nodes}};
}

json to_json(const SolveReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_gradient_norm"] = number(r.final_gradient_norm);
  j["final_energy"] = to_json(r.final_energy);
  json hist = json::array();
  for (double e : r.energy_history) hist.push_back(number(e));
  j["energy_history"] = hist;
  json dec = json::array();
  for (double e : r.energy_decrements) dec.push_back(number(e));
  j["energy_decrements"] = dec;
  json gn = json::array();
  for (double e : r.gradient_norms) gn.push_back(number(e));
  j["gradient_norms"] = gn;
  json st = json::array();
  for (double e : r.step_lengths) st.push_back(number(e));
  j["step_lengths"] = st;
  j["cg_iterations"] = r.cg_iterations;
  j["corollary4"] = to_json(r.gradient_bound);
  j["oracle"] = r.oracle ? to_json(*r.oracle) : json(nullptr);
  return j;
}

json to_json(const MinimizerReport& r) {
  json by = json::array();
  for (double g : r.min_gap_by_amplitude) by.push_back(number(g));
  return {{"trials", r.trials},
          {"amplitudes", r.amplitudes},
          {"min_gap", number(r.min_gap)},
          {"min_gap_by_amplitude", by},
          {"negative_gaps", r.negative_gaps},
          {"slack", number(r.slack)},
          {"max_identity_discrepancy", number(r.max_identity_discrepancy)},
          {"zero_energy_gap", number(r.zero_energy_gap)},
          {"pass", r.pass}};
}

json to_json(const WhitneyParams& p) {
  return {{"eta", p.eta},
          {"eta_prime", p.eta_prime},
          {"dimension", p.dimension},
          {"k_min", p.k_min ? json(*p.k_min) : json(nullptr)},
          {"k_max", p.k_max}};
}

json to_json(const DerivedConstants& c) {
  return {{"lambda", c.lambda}, {"mu", c.mu}, {"c3", c.c3}, {"c6", c.c6},
          {"P", c.P},           {"bump_gradient", c.bump_gradient}, {"J1", c.J1}};
}

json to_json(const TruncationReport& t) {
  return {{"k_max", t.k_max},
          {"eps_cut", t.eps_cut},
          {"truncated_cubes", t.truncated_cubes},
          {"truncated_measure", t.truncated_measure}};
}

json to_json(const PropertyReport& r) {
  return {{"cubes", r.cubes},
          {"samples", r.samples},
          {"selection_violations", r.selection_violations},
          {"support_violations", r.support_violations},
          {"nesting_violations", r.nesting_violations},
          {"center_violations", r.center_violations},
          {"center_ratio_min", number(r.center_ratio_min)},
          {"center_ratio_max", number(r.center_ratio_max)},
          {"pairs", r.pairs},
          {"side_ratio_violations", r.side_ratio_violations},
          {"side_ratio_max", number(r.side_ratio_max)},
          {"neighbour_max", r.neighbour_max},
          {"neighbour_violations", r.neighbour_violations},
          {"coverage_misses", r.coverage_misses},
          {"overlap_max", r.overlap_max},
          {"overlap_violations", r.overlap_violations},
          {"support_ratio_min", number(r.support_ratio_min)},
          {"support_ratio_max", number(r.support_ratio_max)},
          {"support_ratio_violations", r.support_ratio_violations},
          {"partition_sum_error", number(r.partition_sum_error)},
          {"partition_violations", r.partition_violations},
          {"consequence_violations", r.consequence_violations},
          {"gradient_samples", r.gradient_samples},
          {"gradient_max", number(r.gradient_max)},
          {"gradient_violations", r.gradient_violations},
          {"pass", r.pass()}};
}

json to_json(const WhitneyDecomposition<2>& d) {
  json cubes = json::array();
  for (const auto& c : d.cubes()) cubes.push_back({{"k", c.level}, {"m", {c.index[0], c.index[1]}}});
  return {{"region", d.region().name},
          {"params", to_json(d.params())},
          {"constants", to_json(d.constants())},
          {"truncation", to_json(d.truncation())},
          {"min_level", d.min_level()},
          {"max_level", d.max_level()},
          {"cube_count", d.cubes().size()},
          {"cubes", cubes}};
}

json to_json(const TheoreticalConstants& c) {
  return {{"N", c.N},         {"N_prime", c.N_prime}, {"omega_N", c.omega_N}, {"lambda", c.lambda},
          {"mu", c.mu},       {"c3", c.c3},           {"c6", c.c6},           {"P", c.P},
          {"A", number(c.A)}, {"H", c.H}};
}

json to_json(const C2Result& r) {
  return {{"diverges", r.diverges},   {"value", number(r.value)},         {"tail_bound", number(r.tail_bound)},
          {"terms", r.terms},         {"certified", r.certified},        {"threshold", number(r.threshold)},
          {"c1_power", number(r.c1_power)}};
}

json to_json(const InequalityCase& c) {
  return {{"theorem", c.theorem},
          {"domain", c.domain},
          {"function", c.function},
          {"q", c.q},
          {"lhs", number(c.lhs)},
          {"rhs_bound", number(c.rhs_bound)},
          {"ratio", number(c.ratio)},
          {"pass", c.pass}};
}

json to_json(const ChainReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"name", s.name}, {"lhs", number(s.lhs)}, {"rhs", number(s.rhs)}, {"pass", s.pass}});
  }
  return {{"q", r.q},
          {"p", r.p},
          {"function", r.function},
          {"steps", steps},
          {"violations", r.violations},
          {"sobolev_cubes", r.sobolev_cubes},
          {"sobolev_violations", r.sobolev_violations},
          {"tiles", r.tiles},
          {"points", r.points},
          {"neighbour_mismatches", r.neighbour_mismatches},
          {"sigma_support", number(r.sigma_support)},
          {"pass", r.pass()}};
}

json to_json(const HardySearch& h) {
  return {{"max_quotient", number(h.max_quotient)}, {"argmax", h.argmax}, {"candidates", h.candidates}};
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << "x,y,value\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.kind(k) == NodeKind::exterior) continue;
    const Point2 p = g.node(k);
    os << p[0] << ',' << p[1] << ',' << f[k] << '\n';
  }
}

json field_json(const ScalarField& f) {
  const Grid& g = f.grid();
  json values = json::array();
  json mask = json::array();
  for (std::size_t k = 0; k < g.size(); ++k) {
    values.push_back(number(f[k]));
    mask.push_back(g.is_interior(k) ? 1 : 0);
  }
  return {{"h", g.h()},
          {"nx", g.nx()},
          {"ny", g.ny()},
          {"origin", point_json(g.node(0))},
          {"values", values},
          {"mask", mask}};
}

std::string cubes_svg(const WhitneyDecomposition<2>& d, double pixels) {
  const auto& reg = d.region();
  const double w = reg.hi[0] - reg.lo[0];
  const double h = reg.hi[1] - reg.lo[1];
  const double scale = pixels / std::max(w, h);
  const int span = std::max(1, d.max_level() - d.min_level());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w * scale) << "\" height=\"" << fmt(h * scale)
     << "\">\n";
  for (const auto& c : d.cubes()) {
    const double s = c.side();
    const Point2 x = c.center();
    const double px = (x[0] - 0.5 * s - reg.lo[0]) * scale;
    const double py = (reg.hi[1] - x[1] - 0.5 * s) * scale;  // y axis up
    const double t = static_cast<double>(c.level - d.min_level()) / span;
    os << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\"" << fmt(s * scale) << "\" height=\""
       << fmt(s * scale) << "\" fill=\"" << color(t) << "\" stroke=\"black\" stroke-width=\"0.2\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(const ScalarField& f, double pixels) {
  const Grid& g = f.grid();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k) || !std::isfinite(f[k])) continue;
    lo = std::min(lo, f[k]);
    hi = std::max(hi, f[k]);
  }
  const double range = hi > lo ? hi - lo : 1.0;
  const double cell = pixels / static_cast<double>(std::max(g.nx(), g.ny()));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(cell * g.nx()) << "\" height=\""
     << fmt(cell * g.ny()) << "\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.is_interior(k) || !std::isfinite(f[k])) continue;
      os << "<rect x=\"" << fmt(cell * i) << "\" y=\"" << fmt(cell * (g.ny() - 1 - j)) << "\" width=\"" << fmt(cell)
         << "\" height=\"" << fmt(cell) << "\" fill=\"" << color((f[k] - lo) / range) << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace renorm::io
