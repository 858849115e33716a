#include "carnot/intrinsic.hpp"

#include "test_support.hpp"

#include <cmath>
#include <random>

namespace carnot {
namespace {

using testing::vec;

const Grid kUnit({Axis{0.0, 1.0, 41}, Axis{0.0, 1.0, 41}});

ScalarField h1(const std::function<double(const Vec&)>& fn, const Grid& g = kUnit) { return ScalarField::sample(g, fn); }

TestFunction centered(double r) { return TestFunction(vec({0.5, 0.5}), vec({r, r})); }

TEST(DphiCoefficients, HeisenbergBurgersStructure) {
  const GroupSpec g = heisenberg(1);
  for (double c : {-1.5, 0.0, 0.25, 2.0}) {
    const Vec k = dphi_coefficients(g, 2, vec({0.3, -0.1}), c);
    EXPECT_EQ(k[0], 1.0);
    EXPECT_EQ(k[1], -c);
    EXPECT_LE(std::abs(k[1] - g.b(1, 2, 1) * c), 1e-14);
  }
}

TEST(DphiCoefficients, ComplexifiedThirdDirection) {
  const GroupSpec g = complexified_heisenberg();
  const Vec k = dphi_coefficients(g, 3, vec({0.0, 0.7, 2.0, 0.1, 0.2}), 0.9);
  EXPECT_EQ(k, vec({0, 1, 0, 1, 0}));
}

TEST(DphiCoefficients, VanishesAtOrigin) {
  const GroupSpec g = free2(3);
  for (int j = 2; j <= 3; ++j) {
    const Vec k = dphi_coefficients(g, j, Vec::Zero(5), 0.0);
    Vec e = Vec::Zero(5);
    e[j - 2] = 1.0;
    EXPECT_EQ(k, e);
  }
  EXPECT_CODE(dphi_coefficients(g, 1, Vec::Zero(5), 0.0), ErrorCode::IndexOutOfRange);
  EXPECT_CODE(dphi_coefficients(g, 4, Vec::Zero(5), 0.0), ErrorCode::IndexOutOfRange);
}

TEST(ApplyDphi, ClosedForms) {
  const GroupSpec g = heisenberg(1);
  const ScalarField zero = apply_dphi(g, h1([](const Vec&) { return 0.4; }), 2);
  const ScalarField one = apply_dphi(g, h1([](const Vec& a) { return a[0]; }), 2);
  const ScalarField by = apply_dphi(g, h1([](const Vec& a) { return a[1]; }), 2);
  std::size_t interior = 0;
  for (std::size_t f = 0; f < kUnit.size(); ++f) {
    if (!one.valid(f)) continue;
    ++interior;
    EXPECT_EQ(zero.value(f), 0.0);
    EXPECT_NEAR(one.value(f), 1.0, 1e-12);
    const double y = kUnit.node(f)[1];
    EXPECT_NEAR(by.value(f), g.b(1, 2, 1) * y, 1e-12);
  }
  EXPECT_EQ(interior, 39u * 39u);
}

TEST(ApplyDphi, CoarseGridRejected) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f = h1([](const Vec&) { return 0.0; }, Grid({Axis{0, 1, 2}, Axis{0, 1, 5}}));
  EXPECT_CODE(apply_dphi(g, f, 2), ErrorCode::GridTooCoarse);
}

TEST(TestFunctionProfile, ValuesAndIntegral) {
  const TestFunction z(vec({0.5, 0.5}), vec({0.25, 0.5}));
  EXPECT_EQ(z(vec({0.5, 0.5})), 1.0);
  EXPECT_EQ(z(vec({0.75, 0.5})), 0.0);
  EXPECT_EQ(z.gradient(vec({0.5, 0.5})), vec({0, 0}));
  EXPECT_DOUBLE_EQ(z.integral(), 0.25 * 0.5 * 256.0 / 225.0);
  const Vec a = vec({0.61, 0.33});
  const double h = 1e-6;
  EXPECT_NEAR(z.gradient(a)[0], (z(a + vec({h, 0})) - z(a - vec({h, 0}))) / (2 * h), 1e-7);
  EXPECT_NEAR(z.gradient(a)[1], (z(a + vec({0, h})) - z(a - vec({0, h}))) / (2 * h), 1e-7);
  EXPECT_CODE(TestFunction(vec({0.5}), vec({0.0})), ErrorCode::BadParams);
}

TEST(Residual, ConstantFieldZeroDatum) {
  const GroupSpec g = heisenberg(1);
  const Datum w = constant_datum(g, kUnit, {0.0});
  const double R = distributional_residual(g, h1([](const Vec&) { return 0.6; }), w, centered(0.3), 2);
  EXPECT_LE(std::abs(R), 1e-12);
}

TEST(Residual, LinearFieldWithMatchingDatum) {
  const GroupSpec g = heisenberg(1);
  const Datum w = constant_datum(g, kUnit, {1.0});
  QuadratureOptions q;
  q.cells_per_axis = 256;
  const double R = distributional_residual(g, h1([](const Vec& a) { return a[0]; }), w, centered(0.125), 2, q);
  EXPECT_LE(std::abs(R), 1e-6);
}

TEST(Residual, WrongDatumGivesMinusIntegral) {
  const GroupSpec g = heisenberg(1);
  const Datum w = constant_datum(g, kUnit, {0.0});
  const TestFunction z = centered(0.3);
  QuadratureOptions q;
  q.cells_per_axis = 1024;
  const double R = distributional_residual(g, h1([](const Vec& a) { return a[0]; }), w, z, 2, q);
  EXPECT_NEAR(R, -z.integral(), 1e-5 * z.integral());
}

TEST(Residual, LeadingQuadratureErrorIsSecondOrder) {
  const GroupSpec g = heisenberg(1);
  const Datum w = constant_datum(g, kUnit, {1.0});
  const ScalarField phi = h1([](const Vec& a) { return a[0]; });
  const TestFunction z(vec({0.45, 0.55}), vec({0.3, 0.2}));
  std::vector<double> err;
  for (int N : {32, 64, 128, 256}) {
    QuadratureOptions q;
    q.cells_per_axis = N;
    err.push_back(std::abs(distributional_residual(g, phi, w, z, 2, q)));
  }
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.9);
}

TEST(Residual, NonlinearTermOnYDependentSolution) {
  // phi = y / (1 - x2) solves the H^1 equation with w = 0.
  const GroupSpec g = heisenberg(1);
  const Grid grid({Axis{0.0, 0.5, 51}, Axis{-1.0, 1.0, 81}});
  const ScalarField phi = ScalarField::exact(grid, [](const Vec& a) { return a[1] / (1.0 - a[0]); });
  const Datum w = constant_datum(g, grid, {0.0});
  const TestFunction z(vec({0.25, 0.1}), vec({0.2, 0.6}));
  EXPECT_LE(std::abs(distributional_residual(g, phi, w, z, 2)), 1e-6 * z.integral());
  const ScalarField off = ScalarField::exact(grid, [](const Vec& a) { return 1.1 * a[1] / (1.0 - a[0]); });
  EXPECT_GT(std::abs(distributional_residual(g, off, w, z, 2)), 1e-3 * z.integral());
}

TEST(Residual, LinearInTestFunctionAndDatum) {
  const GroupSpec g = heisenberg(1);
  const ScalarField phi = h1([](const Vec& a) { return std::sin(2 * a[0]) + 0.3 * a[1]; });
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const Datum w1 = Datum({h1([](const Vec& a) { return a[0] - a[1]; })});
  const Datum w2 = Datum({h1([](const Vec& a) { return a[0] * a[1]; })});
  const double al = u(rng), be = u(rng);
  const Datum mix = Datum({h1([&](const Vec& a) { return al * (a[0] - a[1]) + be * a[0] * a[1]; })});
  QuadratureOptions q;
  q.cells_per_axis = 64;
  const TestFunction z = centered(0.2);
  const double R0 = distributional_residual(g, phi, constant_datum(g, kUnit, {0.0}), z, 2, q);
  const double R1 = distributional_residual(g, phi, w1, z, 2, q) - R0;
  const double R2 = distributional_residual(g, phi, w2, z, 2, q) - R0;
  EXPECT_NEAR(distributional_residual(g, phi, mix, z, 2, q) - R0, al * R1 + be * R2, 1e-10);

}

TEST(Residual, SupportMustFit) {
  const GroupSpec g = heisenberg(1);
  const Datum w = constant_datum(g, kUnit, {0.0});
  EXPECT_CODE(distributional_residual(g, h1([](const Vec&) { return 0.0; }), w,
                                      TestFunction(vec({0.1, 0.5}), vec({0.2, 0.2})), 2),
              ErrorCode::SupportNotContained);
}

LevelSet affine_levelset(double a, double c) {
  return {[=](const Point& p) { return p.x()[0] - a * p.x()[1] - c * p.y()[0]; },
          [=](const Point&) { return vec({1.0, -a, -c}); }};
}

TEST(Levelset, ConstantGraph) {
  const GroupSpec g = heisenberg(1);
  const LevelSet ls{[](const Point& p) { return p.x()[0] - 0.3; }, [](const Point&) { return vec({1, 0, 0}); }};
  const WPoint a(vec({0.2}), vec({0.9}));
  EXPECT_EQ(gradient_from_levelset(g, ls, a), vec({0.0}));
  EXPECT_NEAR(solve_levelset_phi(g, ls, a), 0.3, 1e-14);
}

TEST(Levelset, LinearGraphGradient) {
  const GroupSpec g = heisenberg(1);
  const LevelSet ls = affine_levelset(1.0, 0.0);
  for (double x2 : {0.0, 0.4, 1.0}) EXPECT_NEAR(gradient_from_levelset(g, ls, WPoint(vec({x2}), vec({0.1})))[0], 1.0, 1e-14);
}

TEST(Levelset, VanishingNormalComponent) {
  const GroupSpec g = heisenberg(1);
  const LevelSet ls{[](const Point& p) { return p.x()[1]; }, [](const Point&) { return vec({0, 1, 0}); }};
  EXPECT_CODE(gradient_from_levelset(g, ls, WPoint(vec({0.5}), vec({0.0})), 0.0), ErrorCode::VanishingX1f);
  EXPECT_CODE(solve_levelset_phi(g, ls, WPoint(vec({0.5}), vec({0.0}))), ErrorCode::VanishingX1f);
}

TEST(Levelset, AgreesWithFiniteDifferenceDerivative) {
  // The level-set formula lives on the group with opposite bracket.
  const GroupSpec g = heisenberg(1);
  const GroupSpec opp = opposite_group(g);
  const std::vector<LevelSet> cases{
      affine_levelset(0.5, 1.0),
      {[](const Point& p) { return p.x()[0] - 0.3 * p.x()[1] * p.x()[1] - 0.2 * p.y()[0]; },
       [](const Point& p) { return vec({1.0, -0.6 * p.x()[1], -0.2}); }},
      {[](const Point& p) { return p.x()[0] - std::sin(p.x()[1]) - 0.1 * p.y()[0] * p.y()[0]; },
       [](const Point& p) { return vec({1.0, -std::cos(p.x()[1]), -0.2 * p.y()[0]}); }}};
  const Grid grid({Axis{0.0, 1.0, 21}, Axis{0.0, 1.0, 21}});
  const double h = 0.05;
  for (const LevelSet& ls : cases) {
    const ScalarField phi = levelset_field(opp, ls, grid);
    const ScalarField fd = apply_dphi(g, phi, 2);
    double worst = 0.0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
      if (!fd.valid(f)) continue;
      const WPoint a = WPoint::from_coords(2, grid.node(f));
      worst = std::max(worst, std::abs(fd.value(f) - gradient_from_levelset(opp, ls, a, phi.value(f))[0]));
    }
    EXPECT_LE(worst, 5 * h * h);
  }
}

}  // namespace
}  // namespace carnot
