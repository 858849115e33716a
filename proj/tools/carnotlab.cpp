#include "carnot/characteristics.hpp"
#include "carnot/error.hpp"
#include "carnot/group.hpp"
#include "carnot/lagrangian.hpp"
#include "carnot/report.hpp"
#include "carnot/scenario.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace carnot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty())
    if (const char* env = std::getenv("CARNOTLAB_OUT")) dir = env;
  if (dir.empty()) dir = "carnotlab_out";
  fs::create_directories(dir);
  return dir;
}

int group_check(const std::string& path, int samples, std::uint64_t seed, const std::string& out) {
  VerificationReport rep;
  rep.provenance.scenario = fs::path(path).filename().string();
  rep.provenance.seed = seed;
  rep.provenance.version = library_version();
  try {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    rep.provenance.spec_hash = fnv1a_hex(text);
    const GroupSpec spec = parse_group_spec(text);
    rep.add({"group.validate", true, 0.0, 0.0, "m=" + std::to_string(spec.m()) + " n=" + std::to_string(spec.n()),
             "eps " + num(spec.eps()) + "; setting " + (spec.setting_ok() ? "ok" : "violated"), 0.0});
    for (const auto& a : check_axioms(spec, samples, seed))
      rep.add({"group." + a.name, a.pass, a.max_error, a.tolerance, std::to_string(samples) + " samples", {}, 0.0});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError || e.code() == ErrorCode::ConfigError) {
      std::cerr << "carnotlab: " << e.what() << "\n";
      return kExitUsage;
    }
    rep.add({"group.validate", false, 0.0, 0.0, {}, e.what(), 0.0});
  }
  rep.verdict = rep.all_pass() ? "valid" : "invalid";
  std::cout << summary_table(rep);
  save_report(rep, (fs::path(out) / "group_check.json").string());
  return rep.all_pass() ? kExitOk : kExitCheck;
}

struct TraceArgs {
  std::string scenario;
  std::vector<double> init, xhat;
  int j = 0;
  double t0 = 0.0, t1 = 0.0, t_bar = 0.0, step = 1e-3;
  bool has_t0 = false, has_t1 = false, has_tbar = false;
  std::string flavor = "plain";
  std::string output;
};

int char_trace(const TraceArgs& a, const std::string& out) {
  const Scenario sc = load_scenario(a.scenario);
  const ScalarField field = make_field(sc);
  const GroupSpec& G = sc.group;
  const int j = a.j ? a.j : sc.j_list.front();
  if (static_cast<int>(a.init.size()) != G.n()) fail(ErrorCode::ConfigError, "--init needs n values");
  Vec xhat(G.m() - 2);
  if (a.xhat.empty()) {
    int h = 0;
    for (int l = 2; l <= G.m(); ++l)
      if (l != j) {
        const Axis& ax = sc.grid.axis(l - 2);
        xhat[h++] = 0.5 * (ax.lo + ax.hi);
      }
  } else {
    if (static_cast<int>(a.xhat.size()) != G.m() - 2) fail(ErrorCode::ConfigError, "--xhat needs m-2 values");
    for (std::size_t k = 0; k < a.xhat.size(); ++k) xhat[static_cast<Eigen::Index>(k)] = a.xhat[k];
  }
  const Axis& tax = sc.grid.axis(j - 2);
  const Interval iv{a.has_t0 ? a.t0 : tax.lo, a.has_t1 ? a.t1 : tax.hi};
  const Vec y0 = Eigen::Map<const Vec>(a.init.data(), static_cast<Eigen::Index>(a.init.size()));

  Characteristic c;
  if (a.flavor == "plain") {
    c = integrate(G, field, j, xhat, y0, iv, a.step);
  } else {
    ThroughPoint p{a.has_tbar ? a.t_bar : iv.t0, xhat, y0};
    if (a.flavor == "mfmb") {
      c = min_forward_max_backward(G, field, j, p, iv, a.step, default_eps_sequence(), sc.param.gap_tol);
    } else {
      MinMaxPair mm = min_max_through(G, field, j, p, iv, a.step, default_eps_sequence(), sc.param.gap_tol);
      if (a.flavor == "minimal") c = mm.minimal;
      else if (a.flavor == "maximal") c = mm.maximal;
      else fail(ErrorCode::ConfigError, "unknown flavor " + a.flavor);
    }
  }
  const std::string path = a.output.empty() ? (fs::path(out) / (sc.name + "_char.csv")).string() : a.output;
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path);
  os << "t";
  for (int s = 1; s <= G.n(); ++s) os << ",y" << s;
  os << "\n";
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    os << num(c.t[k]);
    for (int s = 0; s < G.n(); ++s) os << "," << num(c.gamma(s, static_cast<Eigen::Index>(k)));
    os << "\n";
  }
  std::cout << "flavor " << to_string(c.flavor) << ", " << c.t.size() << " samples"
            << (c.truncated ? ", truncated at the boundary" : "") << ", gap " << c.cauchy_gap << "\n"
            << "wrote " << path << "\n";
  return kExitOk;
}

int lagrangian_build(const std::string& scenario, int only_j, const std::string& out) {
  const Scenario sc = load_scenario(scenario);
  const ScalarField field = make_field(sc);
  bool ok = true;
  for (int j : sc.j_list) {
    if (only_j && j != only_j) continue;
    const LagrangianParam P = build_full_param(sc.group, field, j, sc.param);
    const ParamDiagnostics d = diagnose_param(sc.group, field, P);
    const std::string dir = (fs::path(out) / (sc.name + "_param_j" + std::to_string(j))).string();
    save_param(sc.group, P, dir);
    const bool pass = d.monotone_violations == 0 && d.surjective && d.consistency_gap <= 10.0 * P.meta.step;
    ok = ok && pass;
    std::cout << "j=" << j << ": curves " << P.meta.curves << ", monotone violations " << d.monotone_violations
              << ", surjective " << (d.surjective ? "yes" : "no") << ", consistency gap " << d.consistency_gap
              << ", excluded " << P.meta.excluded_fraction << (pass ? "  pass" : "  FAIL") << "\n"
              << "wrote " << dir << "\n";
  }
  return ok ? kExitOk : kExitCheck;
}

int verify(const std::string& scenario, const std::string& report_path, const std::string& out) {
  const Scenario sc = load_scenario(scenario);
  const VerificationReport rep = run_scenario(sc);
  const std::string path = report_path.empty() ? (fs::path(out) / (sc.name + "_report.json")).string() : report_path;
  save_report(rep, path);
  std::cout << summary_table(rep) << "payload hash " << payload_hash(rep) << "\nwrote " << path << "\n";
  return rep.all_pass() ? kExitOk : kExitCheck;
}

int mollify(const std::string& dir, const std::vector<double>& eps_list, const std::string& out) {
  GroupSpec spec;
  const LagrangianParam P = load_param(dir, &spec);
  const auto names = w_axis_names(spec);
  bool ok = true;
  for (double eps : eps_list) {
    const ScalarField chi = mollify_chi(P, eps);
    const int ax = P.label_grid.dim() - spec.n() + P.meta.reference - 1;
    std::size_t bad = 0;
    const Grid& L = P.label_grid;
    for (std::size_t f = 0; f < L.size(); ++f) {
      const std::vector<int> idx = L.unflat(f);
      const int k = idx[static_cast<std::size_t>(ax)];
      if (k == 0 || k == L.axis(ax).count - 1) continue;
      if (!(chi.value(f + L.stride(ax)) - chi.value(f - L.stride(ax)) > 0.0)) ++bad;
    }
    const MollifiedFields mf = mollified_phi_and_w(spec, P, eps);
    double wmax = 0.0;
    for (std::size_t f = 0; f < mf.w.grid().size(); ++f)
      if (mf.w.valid(f)) wmax = std::max(wmax, std::abs(mf.w.value(f)));
    const std::string tag = "eps" + num(eps);
    save_field_csv(mf.phi, (fs::path(out) / ("phi_" + tag + ".csv")).string(), names, "phi_eps");
    save_field_csv(mf.w, (fs::path(out) / ("w_" + tag + ".csv")).string(), names, "w_eps");
    const bool pass = bad == 0 && wmax <= mf.w_bound * (1.0 + 1e-12);
    ok = ok && pass;
    std::cout << tag << ": nonincreasing interior points " << bad << ", max |w_eps| " << wmax << " (bound "
              << mf.w_bound << ")" << (pass ? "  pass" : "  FAIL") << "\n";
  }
  return ok ? kExitOk : kExitCheck;
}

int plotdata(const std::string& report, const std::string& output, const std::string& out) {
  const VerificationReport rep = load_report(report);
  const std::string path =
      output.empty() ? (fs::path(out) / (fs::path(report).stem().string() + "_checks.csv")).string() : output;
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path);
  os << "index,name,pass,measured,tolerance,runtime_s\n";
  std::size_t k = 0;
  for (const auto& c : rep.checks())
    os << k++ << "," << c.name << "," << (c.pass ? 1 : 0) << "," << num(c.measured) << "," << num(c.tolerance) << ","
       << num(c.runtime_s) << "\n";
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for intrinsic Lipschitz graphs in step-2 Carnot groups", "carnotlab"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);
  std::string out_flag;
  app.add_option("--out", out_flag, "Output directory (default: $CARNOTLAB_OUT or ./carnotlab_out)");

  auto* group = app.add_subcommand("group", "Group specifications");
  group->require_subcommand(1);
  auto* gcheck = group->add_subcommand("check", "Validate a group file and run the axiom checks");
  std::string spec_path;
  int samples = 10000;
  std::uint64_t seed = 1;
  gcheck->add_option("spec", spec_path, "Group TOML file")->required();
  gcheck->add_option("--samples", samples, "Random samples per axiom")->check(CLI::PositiveNumber);
  gcheck->add_option("--seed", seed, "Sampler seed");

  auto* chr = app.add_subcommand("char", "Characteristics");
  chr->require_subcommand(1);
  auto* trace = chr->add_subcommand("trace", "Integrate one characteristic and write it as CSV");
  TraceArgs ta;
  trace->add_option("scenario", ta.scenario, "Scenario TOML file")->required();
  trace->add_option("--init", ta.init, "Vertical initial values y_1..y_n")->required()->delimiter(',');
  trace->add_option("--xhat", ta.xhat, "Frozen horizontal coordinates")->delimiter(',');
  trace->add_option("--j", ta.j, "Derivative index");
  auto* o_t0 = trace->add_option("--t0", ta.t0, "Interval start");
  auto* o_t1 = trace->add_option("--t1", ta.t1, "Interval end");
  auto* o_tb = trace->add_option("--tbar", ta.t_bar, "Time of the initial value for extremal flavors");
  trace->add_option("--step", ta.step, "RK4 step")->check(CLI::PositiveNumber);
  trace->add_option("--flavor", ta.flavor, "plain, minimal, maximal or mfmb")
      ->check(CLI::IsMember({"plain", "minimal", "maximal", "mfmb"}));
  trace->add_option("-o,--output", ta.output, "CSV path");

  auto* lag = app.add_subcommand("lagrangian", "Lagrangian parameterizations");
  lag->require_subcommand(1);
  auto* build = lag->add_subcommand("build", "Build and save a full parameterization");
  std::string scenario_path;
  int only_j = 0;
  build->add_option("scenario", scenario_path, "Scenario TOML file")->required();
  build->add_option("--j", only_j, "Restrict to one derivative index");

  auto* ver = app.add_subcommand("verify", "Run a scenario and write its report");
  std::string report_path;
  ver->add_option("scenario", scenario_path, "Scenario TOML file")->required();
  ver->add_option("--report", report_path, "Report JSON path");

  auto* mol = app.add_subcommand("mollify", "Mollify a saved parameterization");
  std::string param_dir;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  mol->add_option("param", param_dir, "Parameterization directory")->required();
  mol->add_option("--eps", eps_list, "Kernel widths")->delimiter(',');

  auto* plot = app.add_subcommand("plotdata", "Turn a report into CSV series");
  std::string plot_out;
  plot->add_option("report", report_path, "Report JSON")->required();
  plot->add_option("-o,--output", plot_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }
  ta.has_t0 = o_t0->count() > 0;
  ta.has_t1 = o_t1->count() > 0;
  ta.has_tbar = o_tb->count() > 0;

  try {
    const std::string out = out_dir(out_flag);
    if (gcheck->parsed()) return group_check(spec_path, samples, seed, out);
    if (trace->parsed()) return char_trace(ta, out);
    if (build->parsed()) return lagrangian_build(scenario_path, only_j, out);
    if (ver->parsed()) return verify(scenario_path, report_path, out);
    if (mol->parsed()) return mollify(param_dir, eps_list, out);
    if (plot->parsed()) return plotdata(report_path, plot_out, out);
  } catch (const Error& e) {
    std::cerr << "carnotlab: " << e.what() << "\n";
    return (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError) ? kExitUsage : kExitCheck;
  } catch (const std::exception& e) {
    std::cerr << "carnotlab: " << e.what() << "\n";
    return kExitCheck;
  }
  std::cerr << app.help();
  return kExitUsage;
}
