// renorm: solve the boundary blow-up problem, build Whitney decompositions and
// check the weighted inequalities from the command line.
//
// Exit status: 0 when every enabled check passes, 2 when a check fails, 1 on
// any error (bad flags, unreadable config, numerical failure).

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "renorm/io.hpp"

namespace fs = std::filesystem;
using namespace renorm;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

struct Common {
  std::string domain = "disk";
  std::string report_dir;
  bool svg = false;
  bool csv = false;
  std::uint64_t seed = 20050801;
};

// "1/256" or a decimal.
double parse_h(const std::string& text) {
  const auto slash = text.find('/');
  std::size_t used = 0;
  double h = 0.0;
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument("");
      const std::string den_text = text.substr(slash + 1);
      const double den = std::stod(den_text, &used);
      if (used != den_text.size() || den == 0.0) throw std::invalid_argument("");
      h = num / den;
    } else {
      h = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse grid spacing \"" + text + "\"");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be positive");
  return h;
}

Domain resolve_domain(const std::string& name) {
  if (name == "disk") return Domain::unit_disk();
  if (name == "square") return Domain::unit_square();
  if (name == "annulus") return Domain::annulus({0.0, 0.0}, 0.5, 1.0);
  if (name == "lshape") return Domain::l_shape();
  if (fs::exists(name)) return io::load_domain(name);
  throw std::invalid_argument("unknown domain \"" + name + "\" (disk, square, annulus, lshape or a JSON file)");
}

// --report wins, then RENORM_OUTPUT_DIR, then ./renorm-out.
fs::path output_dir(const Common& c) {
  if (!c.report_dir.empty()) return c.report_dir;
  if (const char* env = std::getenv("RENORM_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "renorm-out";
}

void emit(const Common& c, const std::string& name, const json& report) {
  const fs::path path = output_dir(c) / (name + ".json");
  io::write_file(path, io::dump(report));
  std::cout << "report: " << path.string() << "\n";
}

std::vector<double> default_qs() { return {3.0, 4.0, 6.0, 10.0, 20.0}; }

// -Laplacian(u) + 4 e^{2u} at nodes whose whole stencil is interior, NaN elsewhere.
ScalarField liouville_residual(const ScalarField& u) {
  const Grid& g = u.grid();
  ScalarField r(u.grid_ptr());
  const double h2 = g.h() * g.h();
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      r[k] = std::nan("");
      if (!g.is_interior(k) || i == 0 || j == 0 || i + 1 == g.nx() || j + 1 == g.ny()) continue;
      const std::size_t w = g.index(i - 1, j), e = g.index(i + 1, j), s = g.index(i, j - 1), n = g.index(i, j + 1);
      if (!g.is_interior(w) || !g.is_interior(e) || !g.is_interior(s) || !g.is_interior(n)) continue;
      const double lap = (u[w] + u[e] + u[s] + u[n] - 4.0 * u[k]) / h2;
      r[k] = -lap + 4.0 * std::exp(2.0 * u[k]);
    }
  }
  return r;
}

struct SolveOptions {
  std::string h = "1/128";
  double H = 2.0;
  double t0 = 0.0;
  bool diagonal = false;
  int verify_trials = 0;
};

int run_solve(const Common& c, const SolveOptions& o) {
  const Domain domain = resolve_domain(c.domain);
  const SmoothingProfile profile = o.t0 > 0.0 ? SmoothingProfile(o.t0) : SmoothingProfile::for_domain(domain);
  auto grid = std::make_shared<const Grid>(domain, parse_h(o.h));
  SolverConfig cfg;
  cfg.hardy_constant = o.H;
  cfg.preconditioner = o.diagonal ? Preconditioner::diagonal : Preconditioner::none;
  const SingularPart sp = build_singular_part(domain, profile, grid);
  SolveReport rep = minimize(sp, cfg);
  rep.gradient_bound = gradient_bound_check(rep, sp, cfg.hardy_constant);
  if (const auto* disk = std::get_if<Disk>(&domain.shape())) {
    rep.oracle = disk_oracle_error(rep.u, *disk, sp, cfg.oracle_min_distance);
  }

  bool pass = rep.converged && rep.gradient_bound.pass;
  json j;
  j["command"] = "solve";
  j["domain"] = io::to_json(domain);
  j["h"] = grid->h();
  j["interior_nodes"] = grid->interior_count();
  j["profile"] = {{"transition_start", profile.transition_start()}, {"cap", profile.cap()}};
  j["analytic_laplacian"] = sp.analytic_laplacian;
  j["ridge_nodes"] = sp.ridge_nodes.size();
  j["report"] = io::to_json(rep);
  if (o.verify_trials > 0) {
    const MinimizerReport m = verify_minimizer(rep, sp, o.verify_trials, c.seed);
    j["minimizer"] = io::to_json(m);
    pass = pass && m.pass;
  }
  j["pass"] = pass;
  emit(c, "solve", j);

  const fs::path dir = output_dir(c);
  if (c.csv) {
    for (const auto& [name, field] : {std::pair<const char*, const ScalarField*>{"u", &rep.u}, {"w", &rep.w}, {"v", &sp.v}}) {
      std::ostringstream os;
      io::write_field_csv(os, *field);
      io::write_file(dir / (std::string("field_") + name + ".csv"), os.str());
    }
  }
  if (c.svg) {
    io::write_file(dir / "u.svg", io::heatmap_svg(rep.u));
    io::write_file(dir / "liouville_residual.svg", io::heatmap_svg(liouville_residual(rep.u)));
  }
  std::cout << "solve: iterations " << rep.iterations << ", |G| h " << rep.final_gradient_norm << ", gradient bound "
            << (rep.gradient_bound.pass ? "pass" : "FAIL") << " (" << rep.gradient_bound.lhs << " <= " << rep.gradient_bound.rhs
            << ")";
  if (rep.oracle) std::cout << ", oracle sup error " << rep.oracle->sup;
  std::cout << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

struct WhitneyOptions {
  double eta = 2.0;
  double eta_prime = 1.05;
  int k_max = 14;
  std::size_t samples = 100000;
};

WhitneyParams whitney_params(double eta, double eta_prime, int k_max, int N = 2) {
  WhitneyParams p;
  p.eta = eta;
  p.eta_prime = eta_prime;
  p.k_max = k_max;
  p.dimension = N;
  p.validate();
  return p;
}

int run_whitney(const Common& c, const WhitneyOptions& o) {
  const Domain domain = resolve_domain(c.domain);
  const WhitneyParams params = whitney_params(o.eta, o.eta_prime, o.k_max);
  const BumpFunction bump(params.eta_prime);
  const auto decomp = decompose(domain, params);
  const PropertyReport props = verify_properties(decomp, bump, o.samples, c.seed);
  json j = io::to_json(decomp);
  j["command"] = "whitney";
  j["domain"] = io::to_json(domain);
  j["properties"] = io::to_json(props);
  j["seed"] = c.seed;
  emit(c, "whitney", j);
  if (c.svg) io::write_file(output_dir(c) / "cubes.svg", io::cubes_svg(decomp));
  std::cout << "whitney: " << decomp.cubes().size() << " cubes, P " << decomp.constants().P << ", overlap max "
            << props.overlap_max << ", properties " << (props.pass() ? "pass" : "FAIL") << "\n";
  return props.pass() ? kExitOk : kExitCheckFailed;
}

struct InequalityOptions {
  std::string h = "1/128";
  double H = 2.0;
  std::vector<double> qs = default_qs();
  double eta = 2.0;
  double eta_prime = 1.05;
};

int run_inequality(const Common& c, const InequalityOptions& o) {
  const Domain domain = resolve_domain(c.domain);
  const double h = parse_h(o.h);
  const WhitneyParams params = whitney_params(o.eta, o.eta_prime, 14);
  const TheoreticalConstants tc = theoretical_constants(params, derive_constants(params, BumpFunction(o.eta_prime)), o.H);
  const auto cases = weighted_inequality_suite(domain, h, tc, o.qs);
  const HardySearch hardy = max_hardy_quotient(domain, h);

  bool pass = hardy.max_quotient <= o.H;
  json jc = json::array();
  for (const auto& ic : cases) {
    jc.push_back(io::to_json(ic));
    pass = pass && ic.pass;
  }
  // Sigma_q / q^(1/2 + 1/q) must not grow
  std::ostringstream csv;
  csv << "q,sigma_q,normalized\n";
  csv.precision(17);
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int q = 3; q <= 60; ++q) {
    const double s = sigma_q(tc, q, 2.0);
    const double n = s / std::pow(q, 0.5 + 1.0 / q);
    csv << q << ',' << s << ',' << n << '\n';
    if (n > prev * (1.0 + 1e-12)) monotone = false;
    prev = n;
  }
  pass = pass && monotone;

  json j;
  j["command"] = "verify-inequality";
  j["domain"] = io::to_json(domain);
  j["h"] = h;
  j["constants"] = io::to_json(tc);
  j["cases"] = jc;
  j["hardy"] = io::to_json(hardy);
  j["hardy"]["configured"] = o.H;
  j["hardy"]["pass"] = hardy.max_quotient <= o.H;
  j["sigma_growth_nonincreasing"] = monotone;
  j["pass"] = pass;
  emit(c, "inequality", j);
  io::write_file(output_dir(c) / "sigma_growth.csv", csv.str());
  std::cout << "verify-inequality: " << cases.size() << " cases, hardy quotient max " << hardy.max_quotient
            << " vs H " << o.H << ", " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

struct ConstantsOptions {
  int N = 2;
  double q = 4.0;
  double p = 0.0;  // 0 means p = N
  double c1 = 0.0;  // 0 means twice the convergence threshold
  double eta = 2.0;
  double eta_prime = 1.05;
  double H = 2.0;
};

int run_constants(const Common& c, const ConstantsOptions& o) {
  const WhitneyParams params = whitney_params(o.eta, o.eta_prime, 14, o.N);
  const DerivedConstants dc = derive_constants(params, BumpFunction(o.eta_prime));
  const TheoreticalConstants tc = theoretical_constants(params, dc, o.H);
  const double p = o.p > 0.0 ? o.p : static_cast<double>(o.N);
  const double sigma = sigma_q(tc, o.q, p);
  const double threshold = c1_threshold(tc);
  const double c1 = o.c1 > 0.0 ? o.c1 : 2.0 * threshold;
  const C2Result c2 = c2_constant(c1, tc);

  json j;
  j["command"] = "constants";
  j["params"] = io::to_json(params);
  j["derived"] = io::to_json(dc);
  j["theoretical"] = io::to_json(tc);
  j["q"] = o.q;
  j["p"] = p;
  j["sobolev_bound"] = sobolev_bound(o.N, o.q);
  j["sigma_q"] = sigma;
  j["c1"] = c1;
  j["c1_threshold"] = threshold;
  j["c2"] = io::to_json(c2);
  const bool pass = c2.diverges || c2.certified;
  j["pass"] = pass;
  emit(c, "constants", j);
  std::cout.precision(10);
  std::cout << "constants: P " << dc.P << ", c3 " << dc.c3 << ", c6 " << dc.c6 << ", A " << tc.A << ", Sigma_" << o.q
            << " " << sigma << ", c2(" << c1 << ") " << (c2.diverges ? std::string("diverges") : std::to_string(c2.value))
            << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

struct ChainOptions {
  std::vector<double> qs = default_qs();
  double p = 2.0;
  double eta = 2.0;
  double eta_prime = 1.05;
  int k_max = 14;
  int gauss = 6;
};

int run_chain(const Common& c, const ChainOptions& o) {
  const Domain domain = resolve_domain(c.domain);
  const WhitneyParams params = whitney_params(o.eta, o.eta_prime, o.k_max);
  const BumpFunction bump(params.eta_prime);
  const auto decomp = decompose(domain, params);
  bool pass = true;
  std::size_t violations = 0;
  json reports = json::array();
  for (const auto& spec : compact_test_family(domain, decomp.truncation().eps_cut)) {
    const TestFunction u(spec, domain);
    for (const auto& r : chain_audit(u, decomp, bump, o.qs, o.p, o.gauss)) {
      reports.push_back(io::to_json(r));
      violations += r.violations;
      pass = pass && r.pass();
    }
  }
  json j;
  j["command"] = "audit-chain";
  j["domain"] = io::to_json(domain);
  j["params"] = io::to_json(params);
  j["constants"] = io::to_json(decomp.constants());
  j["reports"] = reports;
  j["violations"] = violations;
  j["pass"] = pass;
  emit(c, "chain", j);
  std::cout << "audit-chain: " << reports.size() << " audits, " << violations << " violations\n";
  return pass ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* app, Common& c, bool with_domain = true) {
  if (with_domain) app->add_option("--domain", c.domain, "disk, square, annulus, lshape or a JSON descriptor file");
  app->add_option("--report", c.report_dir, "output directory (default $RENORM_OUTPUT_DIR or ./renorm-out)");
  app->add_flag("--svg", c.svg, "also write SVG renderings");
  app->add_flag("--csv", c.csv, "also write fields as CSV");
  app->add_option("--seed", c.seed, "seed for every random draw");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renormalized energy solver and Whitney / Hardy-Trudinger verification"};
  app.require_subcommand(1);
  // -h is taken by the grid spacing
  app.set_help_flag("--help", "print this help and exit");

  Common common;
  SolveOptions so;
  WhitneyOptions wo;
  InequalityOptions io_opts;
  ConstantsOptions co;
  ChainOptions ch;

  auto* solve = app.add_subcommand("solve", "minimize the renormalized energy on a grid");
  add_common(solve, common);
  solve->add_option("--h", so.h, "grid spacing, e.g. 1/256");
  solve->add_option("--H", so.H, "Hardy constant for the a priori gradient bound");
  solve->add_option("--t0", so.t0, "smoothing profile transition start (default min(0.2, inradius/4))");
  solve->add_flag("--diagonal", so.diagonal, "diagonal preconditioning in CG");
  solve->add_option("--verify-trials", so.verify_trials, "random perturbations for the minimizer check");

  auto* whitney = app.add_subcommand("whitney", "build and verify the Whitney decomposition");
  add_common(whitney, common);
  whitney->add_option("--eta", wo.eta);
  whitney->add_option("--eta-prime", wo.eta_prime);
  whitney->add_option("--k-max", wo.k_max);
  whitney->add_option("--samples", wo.samples, "Monte Carlo samples");

  auto* ineq = app.add_subcommand("verify-inequality", "check the weighted inequality and the Hardy constant");
  add_common(ineq, common);
  ineq->add_option("--h", io_opts.h, "grid spacing, e.g. 1/128");
  ineq->add_option("--H", io_opts.H, "configured Hardy constant");
  ineq->add_option("--q", io_opts.qs, "exponents q");
  ineq->add_option("--eta", io_opts.eta);
  ineq->add_option("--eta-prime", io_opts.eta_prime);

  auto* constants = app.add_subcommand("constants", "evaluate Sigma_q and c2");
  add_common(constants, common, false);
  constants->add_option("--N", co.N, "dimension");
  constants->add_option("--q", co.q);
  constants->add_option("--p", co.p, "(default N)");
  constants->add_option("--c1", co.c1, "(default twice the convergence threshold)");
  constants->add_option("--eta", co.eta);
  constants->add_option("--eta-prime", co.eta_prime);
  constants->add_option("--H", co.H);

  auto* chain = app.add_subcommand("audit-chain", "audit each step of the localization argument");
  add_common(chain, common);
  chain->add_option("--q", ch.qs, "exponents q");
  chain->add_option("--p", ch.p);
  chain->add_option("--eta", ch.eta);
  chain->add_option("--eta-prime", ch.eta_prime);
  chain->add_option("--k-max", ch.k_max);
  chain->add_option("--gauss", ch.gauss, "Gauss-Legendre points per axis and cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return run_solve(common, so);
    if (*whitney) return run_whitney(common, wo);
    if (*ineq) return run_inequality(common, io_opts);
    if (*constants) return run_constants(common, co);
    if (*chain) return run_chain(common, ch);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
