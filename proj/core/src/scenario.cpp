#include "carnot/scenario.hpp"

#include "carnot/error.hpp"

#include "toml_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

namespace carnot {

namespace fs = std::filesystem;

namespace {

void check_keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : t)
    if (!ok.count(std::string(k.str()))) fail(ErrorCode::ConfigError, "unknown key '" + std::string(k.str()) + "' in " + where);
}

const toml::table& sub_table(const toml::table& t, const char* key, const toml::table& empty) {
  if (!t.contains(key)) return empty;
  const toml::table* p = t[key].as_table();
  if (!p) fail(ErrorCode::ConfigError, std::string("[") + key + "] must be a table");
  return *p;
}

template <class T>
void read_opt(const toml::table& t, const char* key, T& out) {
  if (!t.contains(key)) return;
  if constexpr (std::is_same_v<T, std::string>) {
    auto v = t[key].value<std::string>();
    if (!v) fail(ErrorCode::ConfigError, std::string("key '") + key + "' must be a string");
    out = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    auto v = t[key].value<bool>();
    if (!v) fail(ErrorCode::ConfigError, std::string("key '") + key + "' must be a boolean");
    out = *v;
  } else {
    out = static_cast<T>(detail::get_double(t[key], key));
  }
}

std::vector<double> read_array_or_scalar(const toml::table& t, const char* key, std::size_t len) {
  if (t[key].is_array()) {
    auto v = detail::get_double_array(t[key], key);
    if (v.size() != len) fail(ErrorCode::ConfigError, std::string("key '") + key + "' needs " + std::to_string(len) + " entries");
    return v;
  }
  return std::vector<double>(len, detail::get_double(t[key], key));
}

std::string resolve(const std::string& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

void require_file(const std::string& p) {
  if (!fs::exists(p)) fail(ErrorCode::ConfigError, "referenced file does not exist: " + p);
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

LevelSet catalog_levelset(const FieldSource& fs_) {
  const double a = fs_.a, c = fs_.c, q = fs_.q;
  LevelSet ls;
  ls.f = [=](const Point& p) {
    const double x2 = p.coords()[1], y = p.coords()[2];
    return p.coords()[0] - (a * x2 + c * y + q * x2 * x2);
  };
  ls.grad = [=](const Point& p) {
    const double x2 = p.coords()[1];
    Vec g(3);
    g << 1.0, -(a + 2.0 * q * x2), -c;
    return g;
  };
  return ls;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
  return os.str();
}

double min_rate(const RefinementStudy& st) {
  if (st.rate.empty()) return 0.0;
  return *std::min_element(st.rate.begin(), st.rate.end());
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  const toml::table root = detail::parse_toml_text(text, "scenario");
  check_keys(root, "scenario", {"name", "seed", "j", "group", "domain", "field", "datum", "resolution", "tolerances"});
  const toml::table empty;
  Scenario sc;
  read_opt(root, "name", sc.name);
  if (root.contains("seed")) {
    const auto v = root["seed"].value<std::int64_t>();
    if (!v || *v < 0) fail(ErrorCode::ConfigError, "seed must be a non-negative integer");
    sc.seed = static_cast<std::uint64_t>(*v);
  }

  if (!root.contains("group")) fail(ErrorCode::ConfigError, "missing [group]");
  toml::table gt = sub_table(root, "group", empty);
  bool opposite = false;
  if (gt.contains("opposite")) {
    read_opt(gt, "opposite", opposite);
    gt.erase("opposite");
  }
  sc.group = detail::group_from_table(gt);
  if (opposite) sc.group = opposite_group(sc.group);
  const int m = sc.group.m(), n = sc.group.n();
  const std::size_t d = static_cast<std::size_t>(m - 1 + n);

  if (root.contains("j")) {
    for (double v : detail::get_double_array(root["j"], "j")) sc.j_list.push_back(static_cast<int>(v));
  } else {
    sc.j_list.push_back(2);
  }
  for (int j : sc.j_list)
    if (j < 2 || j > m) fail(ErrorCode::ConfigError, "j_list entries must lie in 2..m");
  if (sc.j_list.empty()) fail(ErrorCode::ConfigError, "j_list is empty");

  const toml::table& dt = sub_table(root, "domain", empty);
  check_keys(dt, "[domain]", {"lo", "hi", "count"});
  std::vector<double> lo(d, 0.0), hi(d, 1.0), count(d, 41.0);
  if (dt.contains("lo")) lo = read_array_or_scalar(dt, "lo", d);
  if (dt.contains("hi")) hi = read_array_or_scalar(dt, "hi", d);
  if (dt.contains("count")) count = read_array_or_scalar(dt, "count", d);
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < d; ++k) {
    if (!(hi[k] > lo[k])) fail(ErrorCode::ConfigError, "domain needs lo < hi on every axis");
    if (count[k] < 2 || count[k] != std::floor(count[k])) fail(ErrorCode::ConfigError, "domain counts must be integers >= 2");
    axes.push_back({lo[k], hi[k], static_cast<int>(count[k])});
  }
  sc.grid = Grid(axes);

  const toml::table& ft = sub_table(root, "field", empty);
  check_keys(ft, "[field]", {"kind", "value", "slope", "offset", "power", "component", "a", "c", "q", "path"});
  read_opt(ft, "kind", sc.field.kind);
  read_opt(ft, "value", sc.field.value);
  read_opt(ft, "slope", sc.field.slope);
  read_opt(ft, "offset", sc.field.offset);
  read_opt(ft, "power", sc.field.power);
  read_opt(ft, "component", sc.field.component);
  read_opt(ft, "a", sc.field.a);
  read_opt(ft, "c", sc.field.c);
  read_opt(ft, "q", sc.field.q);
  read_opt(ft, "path", sc.field.path);
  static const std::set<std::string> kinds{"constant", "linear_x2", "abs_y_power", "sqrt_burgers",
                                           "signed_sqrt_burgers", "levelset", "csv"};
  if (!kinds.count(sc.field.kind)) fail(ErrorCode::ConfigError, "unknown field kind '" + sc.field.kind + "'");
  if (sc.field.component < 1 || sc.field.component > n) fail(ErrorCode::ConfigError, "field component out of range");
  if (sc.field.kind == "levelset" && (m != 2 || n != 1)) fail(ErrorCode::ConfigError, "levelset fields need H^1");
  if (sc.field.kind == "csv") {
    if (sc.field.path.empty()) fail(ErrorCode::ConfigError, "csv field needs a path");
    sc.field.path = resolve(base_dir, sc.field.path);
    require_file(sc.field.path);
  }

  const toml::table& wt = sub_table(root, "datum", empty);
  check_keys(wt, "[datum]", {"kind", "values", "paths"});
  read_opt(wt, "kind", sc.datum.kind);
  if (wt.contains("values")) sc.datum.values = detail::get_double_array(wt["values"], "values");
  if (const toml::array* ps = wt["paths"].as_array()) {
    for (const auto& el : *ps) {
      auto s = el.value<std::string>();
      if (!s) fail(ErrorCode::ConfigError, "datum paths must be strings");
      sc.datum.paths.push_back(resolve(base_dir, *s));
      require_file(sc.datum.paths.back());
    }
  }
  static const std::set<std::string> dkinds{"analytic", "csv", "extracted", "oracle"};
  if (!dkinds.count(sc.datum.kind)) fail(ErrorCode::ConfigError, "unknown datum kind '" + sc.datum.kind + "'");
  if (sc.datum.kind == "analytic" && static_cast<int>(sc.datum.values.size()) != m - 1)
    fail(ErrorCode::ConfigError, "analytic datum needs m-1 values");
  if (sc.datum.kind == "csv" && static_cast<int>(sc.datum.paths.size()) != m - 1)
    fail(ErrorCode::ConfigError, "csv datum needs m-1 paths");

  const toml::table& rt = sub_table(root, "resolution", empty);
  check_keys(rt, "[resolution]", {"step", "t_refine", "label_count", "seed_count", "seed_times", "theta_depth",
                                  "eps_sequence", "gap_tol", "quadrature_cells", "battery", "refinement_levels",
                                  "random_pairs", "max_exhaustive_pairs", "ls2_points"});
  read_opt(rt, "step", sc.param.step);
  read_opt(rt, "t_refine", sc.param.t_refine);
  read_opt(rt, "label_count", sc.param.label_count);
  read_opt(rt, "seed_count", sc.param.seed_count);
  read_opt(rt, "seed_times", sc.param.seed_times);
  read_opt(rt, "theta_depth", sc.param.theta_depth);
  if (rt.contains("eps_sequence")) sc.param.eps_seq = detail::get_double_array(rt["eps_sequence"], "eps_sequence");
  read_opt(rt, "gap_tol", sc.param.gap_tol);
  read_opt(rt, "quadrature_cells", sc.tol.quadrature_cells);
  read_opt(rt, "battery", sc.tol.battery);
  read_opt(rt, "refinement_levels", sc.tol.refinement_levels);
  read_opt(rt, "random_pairs", sc.tol.random_pairs);
  read_opt(rt, "max_exhaustive_pairs", sc.tol.max_exhaustive_pairs);
  read_opt(rt, "ls2_points", sc.lagrangian.ls2_points);
  if (!(sc.param.step > 0.0) || sc.param.t_refine < 1 || sc.param.theta_depth < 1 || sc.tol.battery < 1 ||
      sc.tol.refinement_levels < 2 || sc.param.eps_seq.empty())
    fail(ErrorCode::ConfigError, "resolutions must be positive");

  const toml::table& tt = sub_table(root, "tolerances", empty);
  check_keys(tt, "[tolerances]", {"residual", "ls1", "ls2", "ls2_stability", "ls3", "max_excluded", "holder_min_rate",
                                  "lipschitz_min_rate", "crossing", "cauchy"});
  read_opt(tt, "residual", sc.tol.residual);
  read_opt(tt, "ls1", sc.lagrangian.ls1);
  read_opt(tt, "ls2", sc.lagrangian.ls2);
  read_opt(tt, "ls2_stability", sc.lagrangian.ls2_stability);
  read_opt(tt, "ls3", sc.lagrangian.ls3);
  read_opt(tt, "max_excluded", sc.lagrangian.max_excluded);
  read_opt(tt, "holder_min_rate", sc.tol.holder_min_rate);
  read_opt(tt, "lipschitz_min_rate", sc.tol.lipschitz_min_rate);
  read_opt(tt, "crossing", sc.param.crossing_tol);
  read_opt(tt, "cauchy", sc.param.cauchy_tol);

  std::ostringstream canon;
  canon << root;
  sc.canonical = canon.str();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  const toml::table probe = detail::parse_toml_file(path);
  std::ostringstream text;
  text << probe;
  const fs::path p(path);
  Scenario sc = parse_scenario(text.str(), p.parent_path().empty() ? "." : p.parent_path().string());
  sc.source_path = path;
  if (sc.name.empty()) sc.name = p.stem().string();
  return sc;
}

ScalarField make_field(const Scenario& sc) {
  const FieldSource& f = sc.field;
  const int mw = sc.group.m() - 1;
  const int ys = mw + f.component - 1;
  if (f.kind == "csv") {
    ScalarField field = load_field_csv(f.path);
    if (field.dim() != sc.grid.dim()) fail(ErrorCode::DimensionMismatch, "csv field dimension");
    return field;
  }
  if (f.kind == "levelset")
    return levelset_field(opposite_group(sc.group), catalog_levelset(f), sc.grid);
  if (f.kind == "sqrt_burgers")
    return ScalarField::exact(sc.grid, [ys](const Vec& a) { return 2.0 * std::sqrt(std::abs(a[ys])); });
  if (f.kind == "signed_sqrt_burgers")
    return ScalarField::exact(sc.grid, [ys](const Vec& a) { return 2.0 * sgn(a[ys]) * std::sqrt(std::abs(a[ys])); });
  return ScalarField::sample(sc.grid, [&](const Vec& a) {
    if (f.kind == "constant") return f.value;
    if (f.kind == "linear_x2") return f.slope * a[0] + f.offset;
    return std::pow(std::abs(a[ys]), f.power);
  });
}

std::optional<Datum> oracle_datum(const Scenario& sc, const ScalarField& field) {
  const GroupSpec& G = sc.group;
  const int m = G.m();
  const Grid& g = sc.grid;
  const std::string& k = sc.field.kind;
  if (k == "constant") return constant_datum(G, g, std::vector<double>(static_cast<std::size_t>(m - 1), 0.0));
  if (k == "linear_x2") {
    std::vector<double> v(static_cast<std::size_t>(m - 1), 0.0);
    v[0] = sc.field.slope;
    return constant_datum(G, g, v);
  }
  if (k == "levelset") {
    const GroupSpec opp = opposite_group(G);
    const LevelSet ls = catalog_levelset(sc.field);
    std::vector<double> w(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
      const WPoint a = WPoint::from_coords(m, g.node(f));
      w[f] = gradient_from_levelset(opp, ls, a, field.value(f))[0];
    }
    return Datum({ScalarField(g, std::move(w), Interp::PiecewiseConstant)});
  }
  if ((k == "sqrt_burgers" || k == "signed_sqrt_burgers") && m == 2 && G.n() == 1) {
    const double b = G.b(1, 2, 1);
    std::vector<double> w(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) w[f] = 2.0 * b * sgn(g.node(f)[1]);
    return Datum({ScalarField(g, std::move(w), Interp::PiecewiseConstant)});
  }
  return std::nullopt;
}

Datum make_datum(const Scenario& sc, const ScalarField& field, const std::vector<LagrangianParam>& params) {
  const int m = sc.group.m();
  const DatumSource& d = sc.datum;
  if (d.kind == "analytic") return constant_datum(sc.group, sc.grid, d.values);
  if (d.kind == "csv") {
    std::vector<ScalarField> w;
    for (const auto& p : d.paths) w.push_back(load_field_csv(p));
    return Datum(std::move(w));
  }
  if (d.kind == "extracted") {
    std::vector<ScalarField> w(static_cast<std::size_t>(m - 1),
                               ScalarField(sc.grid, std::vector<double>(sc.grid.size(), 0.0), Interp::PiecewiseConstant));
    for (std::size_t k = 0; k < params.size() && k < sc.j_list.size(); ++k)
      w[static_cast<std::size_t>(sc.j_list[k] - 2)] = params[k].wbar;
    return Datum(std::move(w));
  }
  auto o = oracle_datum(sc, field);
  if (!o) fail(ErrorCode::ConfigError, "field kind '" + sc.field.kind + "' has no closed-form datum");
  return *o;
}

std::vector<TestFunction> test_battery(const Grid& grid, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TestFunction> out;
  const int d = grid.dim();
  for (int k = 0; k < count; ++k) {
    Vec c(d), r(d);
    for (int a = 0; a < d; ++a) {
      const Axis& ax = grid.axis(a);
      const double len = ax.hi - ax.lo;
      r[a] = len * (0.15 + 0.2 * unit(rng));
      c[a] = ax.lo + r[a] + (len - 2.0 * r[a]) * unit(rng);
    }
    out.emplace_back(c, r);
  }
  return out;
}

VerificationReport run_scenario(const Scenario& sc) {
  using clock = std::chrono::steady_clock;
  VerificationReport rep;
  rep.provenance.scenario = sc.name;
  rep.provenance.spec_hash = fnv1a_hex(sc.canonical);
  rep.provenance.seed = sc.seed;
  rep.provenance.version = library_version();

  auto failed = [](std::string name, const std::exception& e) {
    CheckRecord r;
    r.name = std::move(name);
    r.measured = std::numeric_limits<double>::quiet_NaN();
    r.tolerance = std::numeric_limits<double>::quiet_NaN();
    r.detail = e.what();
    return r;
  };
  auto skipped = [](std::string name, std::string why) {
    return CheckRecord{std::move(name), false, std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(), {}, "not run: " + std::move(why), 0.0};
  };
  auto skip_ls = [&](VerificationReport& r, int j, const std::string& why) {
    for (int q = 1; q <= 3; ++q)
      r.add(skipped("lagrangian.ls" + std::to_string(q) + ".j" + std::to_string(j), why));
  };
  auto elapsed = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };
  std::ostringstream res;
  for (int k = 0; k < sc.grid.dim(); ++k) res << (k ? "x" : "") << sc.grid.axis(k).count;
  const std::string grid_text = res.str();

  ScalarField field;
  try {
    field = make_field(sc);
  } catch (const std::exception& e) {
    rep.add(failed("setup.field", e));
    rep.verdict = "setup_failed";
    return rep;
  }

  PairSampling sampling;
  sampling.seed = sc.seed;
  sampling.max_exhaustive = sc.tol.max_exhaustive_pairs;
  sampling.random_pairs = sc.tol.random_pairs;

  bool gate = false, c1 = false, c2 = true, c3 = true;
  {
    const auto t0 = clock::now();
    try {
      const RefinementStudy st = refine_vertical_holder(sc.group, field, sampling, sc.tol.refinement_levels,
                                                        sc.tol.holder_min_rate);
      CheckRecord r{"hypothesis.vertical_holder", !st.diverging, min_rate(st), sc.tol.holder_min_rate, grid_text,
                    (st.diverging ? "diverging; estimates " : "estimates ") + join(st.estimate), 0.0};
      gate = r.pass;
      r.runtime_s = elapsed(t0);
      rep.add(r);
    } catch (const std::exception& e) {
      rep.add(failed("hypothesis.vertical_holder", e));
    }
  }
  {
    const auto t0 = clock::now();
    try {
      const RefinementStudy st = refine_lipschitz(sc.group, field, sampling, sc.tol.refinement_levels,
                                                  sc.tol.lipschitz_min_rate);
      CheckRecord r{"condition1.lipschitz", !st.diverging, min_rate(st), sc.tol.lipschitz_min_rate, grid_text,
                    (st.diverging ? "diverging; estimates " : "estimates ") + join(st.estimate), 0.0};
      c1 = r.pass;
      r.runtime_s = elapsed(t0);
      rep.add(r);
    } catch (const std::exception& e) {
      rep.add(failed("condition1.lipschitz", e));
    }
  }

  std::vector<LagrangianParam> params(sc.j_list.size());
  std::vector<std::string> build_error(sc.j_list.size());
  std::vector<double> build_time(sc.j_list.size(), 0.0);
  for (std::size_t k = 0; k < sc.j_list.size(); ++k) {
    const auto t0 = clock::now();
    try {
      params[k] = build_full_param(sc.group, field, sc.j_list[k], sc.param);
    } catch (const Error& e) {
      build_error[k] = e.what();
    }
    build_time[k] = elapsed(t0);
  }

  std::optional<Datum> datum;
  {
    const auto t0 = clock::now();
    try {
      datum = make_datum(sc, field, params);
    } catch (const std::exception& e) {
      CheckRecord r = failed("setup.datum", e);
      r.runtime_s = elapsed(t0);
      rep.add(r);
      c2 = c3 = false;
    }
  }

  const auto battery = test_battery(sc.grid, sc.tol.battery, sc.seed);
  QuadratureOptions qo;
  qo.cells_per_axis = sc.tol.quadrature_cells;
  for (int j : sc.j_list) {
    const auto t0 = clock::now();
    const std::string name = "condition2.residual.j" + std::to_string(j);
    if (!datum) {
      rep.add(skipped(name, "no datum"));
      continue;
    }
    try {
      double worst = 0.0;
      for (const auto& z : battery)
        worst = std::max(worst, std::abs(distributional_residual(sc.group, field, *datum, z, j, qo)) / z.integral());
      CheckRecord r{name, worst <= sc.tol.residual, worst, sc.tol.residual, grid_text,
                    "battery " + std::to_string(battery.size()), 0.0};
      r.runtime_s = elapsed(t0);
      c2 = c2 && r.pass;
      rep.add(r);
    } catch (const std::exception& e) {
      rep.add(failed(name, e));
      c2 = false;
    }
  }

  for (std::size_t k = 0; k < sc.j_list.size(); ++k) {
    const int j = sc.j_list[k];
    const std::string name = "condition3.build.j" + std::to_string(j);
    if (!build_error[k].empty()) {
      CheckRecord r{name, false, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                    grid_text, build_error[k], build_time[k]};
      rep.add(r);
      skip_ls(rep, j, "no parameterization");
      c3 = false;
      continue;
    }
    const auto t0 = clock::now();
    const ParamDiagnostics dg = diagnose_param(sc.group, field, params[k]);
    const double limit = 10.0 * params[k].meta.step;
    CheckRecord r{name, dg.monotone_violations == 0 && dg.surjective && dg.consistency_gap <= limit,
                  dg.consistency_gap, limit, grid_text, {}, 0.0};
    std::ostringstream det;
    det << "curves " << params[k].meta.curves << "; monotone violations " << dg.monotone_violations
        << "; surjective " << (dg.surjective ? "yes" : "no") << "; excluded " << params[k].meta.excluded_fraction;
    r.detail = det.str();
    r.runtime_s = build_time[k] + elapsed(t0);
    c3 = c3 && r.pass;
    rep.add(r);
    if (!datum) {
      skip_ls(rep, j, "no datum");
      continue;
    }
    const VerificationReport ls = verify_lagrangian(sc.group, field, params[k], *datum, sc.lagrangian);
    c3 = c3 && ls.all_pass();
    rep.append(ls);
  }

  if (!gate) rep.verdict = "hypothesis_failed";
  else if (c1 && c2 && c3) rep.verdict = "all_hold";
  else if (!c1 && !c2 && !c3) rep.verdict = "all_fail";
  else if (c1 && !c2 && !c3) rep.verdict = "datum_mismatch";
  else rep.verdict = "counterexample";
  return rep;
}

}  // namespace carnot
