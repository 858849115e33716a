// Acceptance suite: one line per criterion, nonzero exit when any criterion fails.
#include "carnot/characteristics.hpp"
#include "carnot/intrinsic.hpp"
#include "carnot/lagrangian.hpp"
#include "carnot/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace carnot;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string scenario_path(const std::string& name) { return std::string(CARNOT_SCENARIO_DIR) + "/" + name + ".toml"; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double sup_dist(const ScalarField& f, double c) {
  double e = 0.0;
  for (std::size_t k = 0; k < f.grid().size(); ++k)
    if (f.valid(k)) e = std::max(e, std::abs(f.value(k) - c));
  return e;
}

Outcome group_algebra() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat B = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int k = i + 1; k < 4; ++k) B(i, k) = u(rng), B(k, i) = -B(i, k);
  const std::vector<std::pair<std::string, GroupSpec>> groups{{"H1", heisenberg(1)},
                                                              {"H2", heisenberg(2)},
                                                              {"corank1", corank1(B)},
                                                              {"free2(3)", free2(3)},
                                                              {"complexified", complexified_heisenberg()}};
  bool ok = true;
  double worst = 0.0;
  std::string where;
  for (const auto& [name, g] : groups) {
    for (const AxiomCheck& a : check_axioms(g, 10000, 99, 1e-12)) {
      ok = ok && a.pass;
      if (a.max_error >= worst) worst = a.max_error, where = name + " " + a.name;
    }
  }
  return {ok, "max error " + fmt(worst) + " (" + where + "), tolerance 1e-12"};
}

Outcome structure_flows() {
  const double h = 1e-3;
  bool ok = true;
  double worst = 0.0;
  for (const GroupSpec& g : {free2(3), complexified_heisenberg()})
    for (int j = 1; j <= g.m(); ++j)
      for (int l = 1; l <= g.m(); ++l) {
        const Point p = flow_commutator(g, j, l, h);
        const double e = std::max((p.y() - h * h * structure_constants(g, j, l)).lpNorm<Eigen::Infinity>(),
                                  p.x().lpNorm<Eigen::Infinity>());
        worst = std::max(worst, e);
        ok = ok && e <= 10.0 * h * h * h;
      }
  return {ok, "max deviation " + fmt(worst) + ", tolerance " + fmt(10.0 * h * h * h)};
}

Outcome setting_detector() {
  bool ok = true;
  std::string detail;
  for (int m = 2; m <= 4; ++m) {
    const bool s = free2(m).setting_ok();
    ok = ok && s;
    detail += "free2(" + std::to_string(m) + ") " + (s ? "ok" : "violated") + "; ";
  }
  const bool cx = complexified_heisenberg().setting_ok();
  ok = ok && cx;
  detail += std::string("complexified ") + (cx ? "ok" : "violated") + "; ";
  Mat b1 = Mat::Zero(3, 3), b2 = Mat::Zero(3, 3);
  b1(1, 0) = 1.0, b1(0, 1) = -1.0;
  b2(1, 0) = 1.0, b2(0, 1) = -1.0, b2(2, 1) = 1.0, b2(1, 2) = -1.0;
  const bool crafted = validate_spec(3, 2, {b1, b2}, 1.0).setting_ok();
  ok = ok && !crafted;
  detail += std::string("shared coupling ") + (crafted ? "ok" : "violated");
  return {ok, detail};
}

Outcome closed_form_characteristic() {
  const GroupSpec g = heisenberg(1);
  const double b = g.b(1, 2, 1);
  const ScalarField f =
      ScalarField::sample(Grid({Axis{0.0, 1.0, 41}, Axis{-1.0, 1.0, 81}}), [](const Vec& a) { return a[0]; });
  const Characteristic c = integrate(g, f, 2, Vec(0), Vec::Zero(1), {0.0, 1.0}, 1e-3);
  double err = 0.0;
  for (std::size_t k = 0; k < c.t.size(); ++k)
    err = std::max(err, std::abs(c.gamma(0, static_cast<Eigen::Index>(k)) - 0.5 * b * c.t[k] * c.t[k]));
  return {err <= 1e-10 && !c.truncated && c.t.size() == 1001, "max error " + fmt(err) + ", tolerance 1e-10"};
}

Outcome funnel() {
  const Scenario sc = load_scenario(scenario_path("h1_sqrt_burgers"));
  const ScalarField f = make_field(sc);
  const ThroughPoint p{0.0, Vec(0), Vec::Zero(1)};
  const MinMaxPair mm = min_max_through(sc.group, f, 2, p, {0.0, 1.0}, 1e-3, default_eps_sequence(), 1e-3);
  double emin = 0.0, emax = 0.0;
  for (std::size_t k = 0; k < mm.minimal.t.size(); ++k) {
    const double t = mm.minimal.t[k];
    emin = std::max(emin, std::abs(mm.minimal.gamma(0, static_cast<Eigen::Index>(k))));
    emax = std::max(emax, std::abs(mm.maximal.gamma(0, static_cast<Eigen::Index>(k)) - t * t));
  }
  return {emin <= 1e-3 && emax <= 1e-2, "minimal off 0 by " + fmt(emin) + " (tol 1e-3), maximal off t^2 by " +
                                            fmt(emax) + " (tol 1e-2), Cauchy gap " + fmt(mm.gap)};
}

Outcome lagrangian_construction() {
  const Scenario sc = load_scenario(scenario_path("h1_linear"));
  const ScalarField f = make_field(sc);
  const LagrangianParam P = build_full_param(sc.group, f, 2, sc.param);
  const ParamDiagnostics d = diagnose_param(sc.group, f, P);
  const double bound = label_bound(free2(4), 2, free2_index(4, 2, 1));
  const bool ok = d.monotone_violations == 0 && d.surjective && d.consistency_gap <= 10.0 * P.meta.step && bound == 6.0;
  return {ok, "monotone violations " + std::to_string(d.monotone_violations) + ", surjective " +
                  (d.surjective ? "yes" : "no") + ", consistency gap " + fmt(d.consistency_gap) + " (tol " +
                  fmt(10.0 * P.meta.step) + "), label bound " + fmt(bound)};
}

Outcome theta_map() {
  const double zero = theta([](double) { return 0.0; }, 20);
  const double one = theta([](double) { return 1.0; }, 20);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-2.0, 2.0), gap(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 2 + static_cast<int>(rng() % 16);
    std::vector<double> u(static_cast<std::size_t>(K)), a(u.size()), b(u.size());
    for (int k = 0; k < K; ++k) u[static_cast<std::size_t>(k)] = static_cast<double>(k) / (K - 1);
    for (std::size_t k = 0; k < u.size(); ++k) a[k] = val(rng), b[k] = a[k] + gap(rng);
    if (theta(u, a) > theta(u, b)) ++violations;
  }
  const bool ok = zero == 0.0 && one == 2.0 - std::ldexp(1.0, -19) && violations == 0;
  std::ostringstream os;
  os.precision(17);
  os << "theta(0) = " << zero << ", theta(1) = " << one << ", order violations " << violations << " of 1000";
  return {ok, os.str()};
}

Outcome pde_ode_consistency() {
  const GroupSpec g = heisenberg(1);
  const Grid unit({Axis{0.0, 1.0, 41}, Axis{0.0, 1.0, 41}});
  const ScalarField phi = ScalarField::sample(unit, [](const Vec& a) { return a[0]; });
  const Datum w = constant_datum(g, unit, {1.0});
  Vec c(2), r(2);
  c << 0.5, 0.5;
  r << 0.125, 0.125;
  const TestFunction z(c, r);
  std::vector<double> res;
  for (int N : {32, 64, 128, 256}) {
    QuadratureOptions q;
    q.cells_per_axis = N;
    res.push_back(std::abs(distributional_residual(g, phi, w, z, 2, q)));
  }
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < res.size(); ++k) order = std::min(order, std::log2(res[k - 1] / res[k]));

  const Grid fine({Axis{0.0, 1.0, 51}, Axis{0.0, 1.0, 51}});
  const ScalarField phi2 = ScalarField::sample(fine, [](const Vec& a) { return a[0]; });
  ParamOptions o;
  o.t_refine = 2;
  LagrangianParam P = build_full_param(g, phi2, 2, o);
  const double tstep = P.label_grid.axis(0).step();
  const double werr = sup_dist(extract_wbar(g, phi2, P), 1.0);
  const bool ok = res.back() <= 1e-6 && order >= 1.9 && werr <= 1e-2 && std::abs(tstep - 1e-2) < 1e-12;
  return {ok, "|R| at 256^2 " + fmt(res.back()) + " (tol 1e-6), order " + fmt(order) + " (min 1.9), |wbar - 1| " +
                  fmt(werr) + " at t-step " + fmt(tstep) + " (tol 1e-2)"};
}

bool check(const VerificationReport& r, const std::string& name) {
  const CheckRecord* c = r.find(name);
  return c != nullptr && c->pass;
}

VerificationReport& linear_report() {
  static VerificationReport r = run_scenario(load_scenario(scenario_path("h1_linear")));
  return r;
}

Outcome verdicts() {
  const VerificationReport& a = linear_report();
  const VerificationReport b = run_scenario(load_scenario(scenario_path("h1_wrong_datum")));
  const VerificationReport c = run_scenario(load_scenario(scenario_path("h1_quarter_holder")));
  const bool la = check(a, "condition1.lipschitz") && check(a, "condition2.residual.j2") && a.all_pass();
  const bool lb = check(b, "condition1.lipschitz") && !check(b, "condition2.residual.j2") &&
                  !(check(b, "condition3.build.j2") && check(b, "lagrangian.ls1.j2") &&
                    check(b, "lagrangian.ls2.j2") && check(b, "lagrangian.ls3.j2"));
  const CheckRecord* gate = c.find("hypothesis.vertical_holder");
  const bool lc = gate != nullptr && !gate->pass && gate->detail.find("diverging") != std::string::npos;
  const bool ok = la && lb && lc && a.verdict == "all_hold" && b.verdict == "datum_mismatch" &&
                  c.verdict == "hypothesis_failed";
  return {ok, "h1_linear " + a.verdict + ", h1_wrong_datum " + b.verdict + ", h1_quarter_holder " + c.verdict};
}

Outcome mollification() {
  const Scenario sc = load_scenario(scenario_path("h1_linear"));
  const ScalarField f = make_field(sc);
  LagrangianParam P = build_full_param(sc.group, f, 2, sc.param);
  extract_wbar(sc.group, f, P);
  const int ax = P.label_grid.dim() - 1;
  const Grid& L = P.label_grid;
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  std::size_t nonincreasing = 0;
  double worst_ratio = 0.0;
  std::string dists;
  for (double eps : {0.2, 0.1, 0.05}) {
    const MollifiedFields m = mollified_phi_and_w(sc.group, f, P, eps);
    const double d = lattice_l1(m.phi, f);
    decreasing = decreasing && d < prev;
    prev = d;
    dists += (dists.empty() ? "" : " > ") + fmt(d);
    const ScalarField chi = mollify_chi(P, eps);
    for (std::size_t k = 0; k < L.size(); ++k) {
      const auto idx = L.unflat(k);
      const int i = idx[static_cast<std::size_t>(ax)];
      if (i == 0 || i == L.axis(ax).count - 1) continue;
      if (!(chi.value(k + L.stride(ax)) - chi.value(k - L.stride(ax)) > 0.0)) ++nonincreasing;
    }
    for (std::size_t k = 0; k < m.w.grid().size(); ++k)
      if (!std::isnan(m.w.value(k))) worst_ratio = std::max(worst_ratio, std::abs(m.w.value(k)) / m.w_bound);
  }
  const bool ok = decreasing && nonincreasing == 0 && worst_ratio <= 1.0;
  return {ok, "L1 distances " + dists + ", nonincreasing interior points " + std::to_string(nonincreasing) +
                  ", max |w_eps| / bound " + fmt(worst_ratio)};
}

Outcome determinism() {
  const VerificationReport& a = linear_report();
  const VerificationReport b = run_scenario(load_scenario(scenario_path("h1_linear")));
  const std::string ha = payload_hash(a), hb = payload_hash(b);
  return {ha == hb && report_payload_json(a) == report_payload_json(b), "payload hashes " + ha + " and " + hb};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"group algebra", group_algebra},
      {"structure constants via flows", structure_flows},
      {"setting detector", setting_detector},
      {"closed-form characteristic", closed_form_characteristic},
      {"funnel extremality", funnel},
      {"Lagrangian construction", lagrangian_construction},
      {"theta map", theta_map},
      {"PDE/ODE consistency", pde_ode_consistency},
      {"equivalence verdicts", verdicts},
      {"mollification", mollification},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s %s: %s [%.2f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
