#include "carnot/error.hpp"
#include "carnot/lagrangian.hpp"

#include "toml_util.hpp"

#include <filesystem>
#include <fstream>

namespace carnot {

namespace fs = std::filesystem;

void save_param(const GroupSpec& spec, const LagrangianParam& P, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  save_group_spec(spec, (root / "group.toml").string());

  const auto names = label_axis_names(spec, P.j);
  std::vector<double> inside(P.label_grid.size());
  for (std::size_t s = 0; s < P.chi.size(); ++s) {
    ScalarField full(P.label_grid, P.chi[s].values());
    save_field_csv(full, (root / ("chi_s" + std::to_string(s + 1) + ".csv")).string(), names, "chi");
  }
  if (!P.chi.empty())
    for (std::size_t f = 0; f < inside.size(); ++f) inside[f] = P.chi[0].valid(f) ? 1.0 : 0.0;
  save_field_csv(ScalarField(P.label_grid, std::move(inside)), (root / "domain.csv").string(), names, "inside");
  if (P.wbar.grid().size() > 0)
    save_field_csv(P.wbar, (root / "wbar.csv").string(), w_axis_names(spec), "wbar");

  const ParamMeta& M = P.meta;
  toml::table t;
  t.insert("j", M.j);
  t.insert("reference", M.reference);
  t.insert("theta_depth", M.theta_depth);
  toml::array eps, bounds, image_lo, image_hi, image_count;
  for (double e : M.eps_seq) eps.push_back(e);
  for (double b : M.bounds) detail::push_number(bounds, b);
  for (const Axis& a : P.image_grid.axes()) {
    image_lo.push_back(a.lo);
    image_hi.push_back(a.hi);
    image_count.push_back(a.count);
  }
  t.insert("eps_sequence", std::move(eps));
  t.insert("bounds", std::move(bounds));
  t.insert("step", M.step);
  t.insert("t_step", P.label_grid.axis(0).step());
  t.insert("t_refine", M.t_refine);
  t.insert("label_shrinkage", M.label_shrinkage);
  t.insert("curves", static_cast<std::int64_t>(M.curves));
  t.insert("max_cauchy_gap", M.max_cauchy_gap);
  t.insert("excluded_fraction", M.excluded_fraction);
  t.insert("cauchy_tol", M.cauchy_tol);
  t.insert("image_lo", std::move(image_lo));
  t.insert("image_hi", std::move(image_hi));
  t.insert("image_count", std::move(image_count));
  std::ofstream out(root / "meta.toml");
  if (!out) fail(ErrorCode::IoError, "cannot write meta.toml in " + dir);
  out << t << "\n";
}

LagrangianParam load_param(const std::string& dir, GroupSpec* spec_out) {
  const fs::path root(dir);
  const GroupSpec spec = load_group_spec((root / "group.toml").string());
  const toml::table t = detail::parse_toml_file((root / "meta.toml").string());

  LagrangianParam P;
  ParamMeta& M = P.meta;
  M.j = static_cast<int>(detail::get_double(t["j"], "j"));
  M.reference = static_cast<int>(detail::get_double(t["reference"], "reference"));
  M.theta_depth = static_cast<int>(detail::get_double(t["theta_depth"], "theta_depth"));
  M.eps_seq = detail::get_double_array(t["eps_sequence"], "eps_sequence");
  M.bounds = detail::get_double_array(t["bounds"], "bounds");
  M.step = detail::get_double(t["step"], "step");
  M.t_refine = static_cast<int>(detail::get_double(t["t_refine"], "t_refine"));
  M.label_shrinkage = detail::opt_double(t["label_shrinkage"]).value_or(0.0);
  M.curves = static_cast<std::size_t>(detail::opt_double(t["curves"]).value_or(0.0));
  M.max_cauchy_gap = detail::opt_double(t["max_cauchy_gap"]).value_or(0.0);
  M.excluded_fraction = detail::opt_double(t["excluded_fraction"]).value_or(0.0);
  M.cauchy_tol = detail::opt_double(t["cauchy_tol"]).value_or(1e-2);
  P.j = M.j;

  const auto lo = detail::get_double_array(t["image_lo"], "image_lo");
  const auto hi = detail::get_double_array(t["image_hi"], "image_hi");
  const auto count = detail::get_double_array(t["image_count"], "image_count");
  if (lo.size() != hi.size() || lo.size() != count.size()) fail(ErrorCode::ConfigError, "image grid arrays differ in length");
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < lo.size(); ++k) axes.push_back({lo[k], hi[k], static_cast<int>(count[k])});
  P.image_grid = Grid(axes);

  const ScalarField domain = load_field_csv((root / "domain.csv").string());
  P.label_grid = domain.grid();
  for (int s = 1; s <= spec.n(); ++s) {
    ScalarField chi = load_field_csv((root / ("chi_s" + std::to_string(s) + ".csv")).string());
    if (!(chi.grid() == P.label_grid)) fail(ErrorCode::IoError, "chi lattices differ");
    for (std::size_t f = 0; f < chi.grid().size(); ++f) chi.set_valid(f, domain.value(f) != 0.0);
    P.chi.push_back(std::move(chi));
  }
  if (M.reference != 0) {
    compute_curvature(spec, P, M.cauchy_tol);
    if (fs::exists(root / "wbar.csv")) P.wbar = load_field_csv((root / "wbar.csv").string());
  }
  if (spec_out) *spec_out = spec;
  return P;
}

}  // namespace carnot
