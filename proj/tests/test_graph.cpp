#include "carnot/graph.hpp"

#include "test_support.hpp"

#include <cmath>
#include <random>

namespace carnot {
namespace {

using testing::pt;
using testing::vec;

ScalarField h1_field(const std::function<double(const Vec&)>& fn, int count = 21, double ylo = 0.0,
                     double yhi = 1.0) {
  return ScalarField::sample(Grid({Axis{0.0, 1.0, count}, Axis{ylo, yhi, count}}), fn);
}

TEST(ProjectCanonical, HeisenbergDecomposition) {
  const GroupSpec g = heisenberg(1);
  const Point p = pt(g, {1, 1, 0.5});
  const Splitting sp = project_canonical(g, p);
  EXPECT_EQ(sp.v, 1.0);
  // i(a).(1,0,0) = (1, 1, y_a - 1/2), so y_a = 1.
  EXPECT_EQ(sp.a.coords(), vec({1.0, 1.0}));
  EXPECT_EQ(multiply(g, embed(g, sp.a), v_element(g, sp.v)).coords(), p.coords());
}

TEST(ProjectCanonical, PointsOfWAndV) {
  const GroupSpec g = complexified_heisenberg();
  const Point w = pt(g, {0, 0.3, -1, 2, 0.5, -0.25});
  const Splitting sw = project_canonical(g, w);
  EXPECT_EQ(sw.v, 0.0);
  EXPECT_EQ(embed(g, sw.a).coords(), w.coords());
  const Splitting sv = project_canonical(g, v_element(g, -1.5));
  EXPECT_EQ(sv.v, -1.5);
  EXPECT_EQ(sv.a.coords(), Vec::Zero(5));
}

TEST(ProjectCanonical, UniqueDecompositionOnRandomPoints) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const GroupSpec& g : {heisenberg(2), free2(3), complexified_heisenberg()}) {
    for (int i = 0; i < 1000; ++i) {
      Point p(g.m(), g.n());
      for (int k = 0; k < g.dim(); ++k) p.coords()[k] = u(rng);
      const Splitting sp = project_canonical(g, p);
      const Point back = multiply(g, embed(g, sp.a), v_element(g, sp.v));
      EXPECT_LE(testing::max_abs_diff(back.coords(), p.coords()), 1e-12);
    }
  }
}

TEST(GraphPoint, IdentityGraphAndLinearField) {
  const GroupSpec g = heisenberg(1);
  const ScalarField zero = h1_field([](const Vec&) { return 0.0; });
  const WPoint a(vec({0.5}), vec({0.25}));
  EXPECT_EQ(graph_point(g, zero, a).coords(), embed(g, a).coords());
  const ScalarField x2 = h1_field([](const Vec& a) { return a[0]; });
  const WPoint b(vec({1.0}), vec({0.0}));
  EXPECT_EQ(graph_point(g, x2, b).coords(), multiply(g, embed(g, b), v_element(g, 1.0)).coords());
  EXPECT_CODE(graph_point(g, x2, WPoint(vec({2.0}), vec({0.0}))), ErrorCode::OutOfDomain);
}

TEST(ShiftQuantity, HandValues) {
  const GroupSpec g = heisenberg(1);
  const ScalarField zero = h1_field([](const Vec&) { return 0.0; });
  EXPECT_DOUBLE_EQ(shift_quantity(g, zero, WPoint(vec({0}), vec({0})), WPoint(vec({1}), vec({1}))), 1.0);
  const WPoint a(vec({0.4}), vec({0.7}));
  EXPECT_EQ(shift_quantity(g, zero, a, a), 0.0);
  for (double c : {0.0, 0.3, 0.9}) {
    const ScalarField cst = h1_field([c](const Vec&) { return c; });
    EXPECT_DOUBLE_EQ(shift_quantity(g, cst, WPoint(vec({0}), vec({0})), WPoint(vec({0}), vec({1}))), 1.0);
  }
}

TEST(EstimateLipschitz, ConstantAndLinear) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(estimate_lipschitz(g, h1_field([](const Vec&) { return 0.7; })).value, 0.0);
  const PairEstimate e = estimate_lipschitz(g, h1_field([](const Vec& a) { return a[0]; }));
  EXPECT_TRUE(e.exhaustive);
  EXPECT_GE(e.value, 1.0);
  EXPECT_LE(e.value, 1.0 + 1e-12);
}

TEST(EstimateLipschitz, RandomSubsamplingIsSeeded) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return std::sin(3 * a[0]) + a[1]; }, 41);
  PairSampling s;
  s.max_exhaustive = 1000;
  s.random_pairs = 5000;
  s.seed = 3;
  const PairEstimate a = estimate_lipschitz(g, f, s), b = estimate_lipschitz(g, f, s);
  EXPECT_FALSE(a.exhaustive);
  EXPECT_EQ(a.pairs, 5000u);
  EXPECT_EQ(a.value, b.value);
  EXPECT_LE(a.value, estimate_lipschitz(g, f).value);
}

TEST(EstimateLipschitz, QuarterPowerDiverges) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return std::pow(std::abs(a[1]), 0.25); }, 41, -0.5, 0.5);
  const RefinementStudy st = refine_lipschitz(g, f);
  EXPECT_TRUE(st.diverging);
  ASSERT_EQ(st.estimate.size(), 3u);
  EXPECT_LT(st.estimate[0], st.estimate[2]);
}

TEST(EstimateLipschitz, InvariantUnderVerticalTranslationOfTheBox) {
  const GroupSpec g = heisenberg(1);
  auto fn = [](double x2, double y) { return 0.5 * x2 * x2 + 0.2 * std::sin(4 * y); };
  const ScalarField a = ScalarField::sample(Grid({Axis{0, 1, 15}, Axis{0, 1, 15}}),
                                            [&](const Vec& p) { return fn(p[0], p[1]); });
  const ScalarField b = ScalarField::sample(Grid({Axis{0, 1, 15}, Axis{3.25, 4.25, 15}}),
                                            [&](const Vec& p) { return fn(p[0], p[1] - 3.25); });
  EXPECT_NEAR(estimate_lipschitz(g, a).value, estimate_lipschitz(g, b).value, 1e-9);
}

TEST(VerticalHolder, IndependentOfY) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(estimate_vertical_holder(g, h1_field([](const Vec& a) { return a[0] * a[0]; })).value, 0.0);
}

TEST(VerticalHolder, SquareRootGivesOne) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return std::sqrt(std::abs(a[1])); }, 201, -1.0, 1.0);
  EXPECT_NEAR(estimate_vertical_holder(g, f).value, 1.0, 0.05);
  EXPECT_FALSE(refine_vertical_holder(g, f).diverging);
}

TEST(VerticalHolder, QuarterPowerDiverges) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return std::pow(std::abs(a[1]), 0.25); }, 81, -0.5, 0.5);
  const RefinementStudy st = refine_vertical_holder(g, f);
  EXPECT_TRUE(st.diverging);
  for (double r : st.rate) EXPECT_NEAR(r, 0.25, 1e-9);
}

TEST(SplitConstant, BoundsBracketTheGraphDistance) {
  for (const GroupSpec& g : {heisenberg(1), opposite_group(heisenberg(1))}) {
    const ScalarField f = h1_field([](const Vec& a) { return 0.5 * a[0] + 0.25 * std::sin(2 * a[1]); }, 13);
    const SplitBounds sb = estimate_split_constant(g, f);
    const double CL = estimate_lipschitz(g, f).value;
    EXPECT_GT(sb.c0, 0.0);
    EXPECT_LE(sb.c0, sb.upper);
    EXPECT_LE(sb.upper, 1.0 + CL + 1e-12);
    EXPECT_EQ(sb.pairs, 169u * 168u);
  }
}

TEST(TranslateGraph, IdentityTranslation) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return a[0] * a[1]; }, 11);
  const ScalarField t = translate_graph(g, f, identity(g));
  EXPECT_TRUE(t.grid() == f.grid());
  for (std::size_t i = 0; i < f.grid().size(); ++i) EXPECT_NEAR(t.value(i), f.value(i), 1e-14);
}

TEST(TranslateGraph, ZeroGraphTranslatedAlongV) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec&) { return 0.0; }, 11);
  const ScalarField t = translate_graph(g, f, v_element(g, 0.4));
  std::size_t seen = 0;
  for (std::size_t i = 0; i < t.grid().size(); ++i)
    if (t.valid(i)) {
      EXPECT_NEAR(t.value(i), 0.4, 1e-14);
      ++seen;
    }
  EXPECT_GT(seen, t.grid().size() / 2);
}

TEST(TranslateGraph, GraphOfTranslateIsTranslatedGraph) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return a[0]; }, 21);
  const Point q = pt(g, {0.3, -0.2, 0.15});
  const ScalarField t = translate_graph(g, f, q);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const WPoint a = WPoint::from_coords(2, f.grid().node(i));
    const Point img = multiply(g, q, graph_point(g, f, a));
    const Splitting sp = project_canonical(g, img);
    const auto v = t.try_eval(sp.a.coords());
    if (!v) continue;
    EXPECT_LE((graph_point(g, t, sp.a).coords() - img.coords()).lpNorm<Eigen::Infinity>(), 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, f.grid().size() / 2);
}

TEST(TranslateGraph, RoundTrip) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1_field([](const Vec& a) { return 0.3 * a[0] + 0.1; }, 21);
  const Point q = pt(g, {0.2, 0.1, -0.3});
  const ScalarField back = translate_graph(g, translate_graph(g, f, q), inverse(g, q));
  std::size_t checked = 0;
  for (std::size_t i = 0; i < back.grid().size(); ++i) {
    if (!back.valid(i)) continue;
    const auto v = f.try_eval(back.grid().node(i));
    if (!v) continue;
    EXPECT_NEAR(back.value(i), *v, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

}  // namespace
}  // namespace carnot
