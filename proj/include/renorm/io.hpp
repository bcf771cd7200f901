#pragma once

// JSON, CSV and SVG serialization. Object keys are sorted and non-finite
// numbers are written as null, so equal inputs give byte-identical output.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "renorm/energy.hpp"
#include "renorm/geometry.hpp"
#include "renorm/grid.hpp"
#include "renorm/hardy.hpp"
#include "renorm/solver.hpp"
#include "renorm/whitney.hpp"

namespace renorm::io {

using json = nlohmann::json;

/// {"shape": "disk", "center": [x, y], "radius": r}
/// {"shape": "annulus", "center": [x, y], "r_inner": a, "r_outer": b}
/// {"shape": "rectangle", "lo": [x, y], "hi": [x, y]}
/// {"shape": "polygon", "vertices": [[x, y], ...]}
/// Throws std::invalid_argument on a malformed descriptor.
Domain domain_from_json(const json& j);
json to_json(const Domain& domain);
Domain load_domain(const std::filesystem::path& path);

json to_json(const EnergyBreakdown& e);
json to_json(const GradientBoundCheck& c);
json to_json(const OracleError& e);
/// Scalars and histories only; fields go through the CSV and field writers.
json to_json(const SolveReport& r);
json to_json(const MinimizerReport& r);

json to_json(const WhitneyParams& p);
json to_json(const DerivedConstants& c);
json to_json(const TruncationReport& t);
json to_json(const PropertyReport& r);
/// {"cubes": [{"k", "m"}...], "constants", "params", "truncation"}
json to_json(const WhitneyDecomposition<2>& d);

json to_json(const TheoreticalConstants& c);
json to_json(const C2Result& r);
json to_json(const InequalityCase& c);
json to_json(const ChainReport& r);
json to_json(const HardySearch& h);

/// Interior and boundary-adjacent nodes, one row "x,y,value" each.
void write_field_csv(std::ostream& os, const ScalarField& f);
/// {"h", "nx", "ny", "origin", "values", "mask"}; values and mask in row-major node order.
json field_json(const ScalarField& f);

/// Cube layout, one rectangle per selected cube, filled by level.
std::string cubes_svg(const WhitneyDecomposition<2>& d, double pixels = 800.0);
/// Grid field as a heatmap over interior nodes; exterior nodes left blank.
std::string heatmap_svg(const ScalarField& f, double pixels = 800.0);

std::string dump(const json& j);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace renorm::io
