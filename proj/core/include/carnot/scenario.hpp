#pragma once

#include "carnot/field.hpp"
#include "carnot/graph.hpp"
#include "carnot/group.hpp"
#include "carnot/intrinsic.hpp"
#include "carnot/lagrangian.hpp"
#include "carnot/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

// Catalog: constant (value), linear_x2 (slope, offset), abs_y_power (power,
// component), sqrt_burgers 2|y|^(1/2), signed_sqrt_burgers 2 sign(y)|y|^(1/2),
// levelset (a x2 + c y + q x2^2, H^1 only), csv (path).
struct FieldSource {
  std::string kind = "constant";
  double value = 0.0;
  double slope = 1.0;
  double offset = 0.0;
  double power = 0.25;
  int component = 1;
  double a = 1.0, c = 0.0, q = 0.0;
  std::string path;
};

// analytic: constant values per j = 2..m; csv: one path per j; extracted: w-bar
// of the built parameterization; oracle: closed form of the catalog entry.
struct DatumSource {
  std::string kind = "oracle";
  std::vector<double> values;
  std::vector<std::string> paths;
};

struct HarnessTolerances {
  double holder_min_rate = 0.125;
  double lipschitz_min_rate = 0.125;
  int refinement_levels = 3;
  double residual = 1e-3;
  int battery = 6;
  int quadrature_cells = 0;
  std::size_t max_exhaustive_pairs = 1000000;
  std::size_t random_pairs = 1000000;
};

struct Scenario {
  std::string name;
  std::string source_path;
  std::string canonical;  // normalized config text, hashed into the report
  std::uint64_t seed = 0;
  GroupSpec group;
  std::vector<int> j_list;
  Grid grid;
  FieldSource field;
  DatumSource datum;
  ParamOptions param;
  LagrangianTolerances lagrangian;
  HarnessTolerances tol;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");

ScalarField make_field(const Scenario& sc);
// Closed-form datum for catalog entries that have one.
std::optional<Datum> oracle_datum(const Scenario& sc, const ScalarField& field);
// params[k] is the parameterization for sc.j_list[k]; only used by "extracted".
Datum make_datum(const Scenario& sc, const ScalarField& field,
                 const std::vector<LagrangianParam>& params = {});

// Deterministic battery of test functions whose supports sit inside the box.
std::vector<TestFunction> test_battery(const Grid& grid, int count, std::uint64_t seed);

VerificationReport run_scenario(const Scenario& sc);

}  // namespace carnot
