#include "carnot/group.hpp"

#include "test_support.hpp"

#include <cmath>
#include <filesystem>
#include <random>

namespace carnot {
namespace {

using testing::pt;
using testing::vec;

Mat skew2(double v) {
  Mat B(2, 2);
  B << 0, v, -v, 0;
  return B;
}

Mat random_skew(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = u(rng);
  return A - A.transpose();
}

std::vector<GroupSpec> builtins() {
  return {heisenberg(1), heisenberg(2), corank1(random_skew(4, 11)), free2(3), complexified_heisenberg()};
}

TEST(ValidateSpec, HeisenbergMatrixIsAccepted) {
  const GroupSpec g = validate_spec(2, 1, {skew2(1.0)}, 1.0);
  EXPECT_EQ(g.m(), 2);
  EXPECT_EQ(g.n(), 1);
  EXPECT_TRUE(g.setting_ok());
}

TEST(ValidateSpec, RejectsNonSkew) {
  Mat B(2, 2);
  B << 0, 1, 1, 0;
  EXPECT_CODE(validate_spec(2, 1, {B}, 1.0), ErrorCode::NotSkewSymmetric);
}

TEST(ValidateSpec, RejectsDependentFamily) {
  EXPECT_CODE(validate_spec(3, 2, {free2(3).B()[0], 2.0 * free2(3).B()[0]}, 1.0), ErrorCode::LinearlyDependent);
}

TEST(ValidateSpec, RejectsDimensions) {
  EXPECT_CODE(validate_spec(1, 1, {Mat::Zero(1, 1)}, 1.0), ErrorCode::DimensionOutOfRange);
  EXPECT_CODE(validate_spec(2, 2, {skew2(1), skew2(2)}, 1.0), ErrorCode::DimensionOutOfRange);
  EXPECT_CODE(validate_spec(2, 1, {skew2(1)}, 0.0), ErrorCode::DimensionOutOfRange);
  EXPECT_CODE(validate_spec(2, 1, {skew2(1)}, 1.5), ErrorCode::DimensionOutOfRange);
  EXPECT_CODE(validate_spec(3, 1, {skew2(1)}, 1.0), ErrorCode::DimensionOutOfRange);
}

TEST(ValidateSpec, SharedFirstColumnCouplingViolatesSetting) {
  Mat B1 = Mat::Zero(4, 4), B2 = Mat::Zero(4, 4);
  B1(1, 0) = 1, B1(0, 1) = -1;
  B2(1, 0) = 1, B2(0, 1) = -1, B2(2, 3) = 1, B2(3, 2) = -1;
  const GroupSpec g = validate_spec(4, 2, {B1, B2}, 1.0);
  EXPECT_FALSE(g.setting_ok());
  EXPECT_DOUBLE_EQ(g.b(1, 2, 1) * g.b(2, 2, 1), 1.0);
}

TEST(Builtins, HeisenbergOne) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(g.m(), 2);
  EXPECT_EQ(g.n(), 1);
  EXPECT_EQ(g.b(1, 1, 2), 1.0);
  EXPECT_EQ(g.b(1, 2, 1), -1.0);
  EXPECT_EQ(g.eps(), 1.0);
}

TEST(Builtins, HeisenbergTwoBlocks) {
  const GroupSpec g = heisenberg(2);
  EXPECT_EQ(g.m(), 4);
  EXPECT_EQ(g.b(1, 1, 3), 1.0);
  EXPECT_EQ(g.b(1, 2, 4), 1.0);
  EXPECT_EQ(g.b(1, 1, 2), 0.0);
}

TEST(Builtins, FreeStepTwo) {
  const GroupSpec g = free2(3);
  EXPECT_EQ(g.m() + g.n(), 6);
  EXPECT_TRUE(g.setting_ok());
  for (int l = 2; l <= 3; ++l)
    for (int s = 1; s < l; ++s) {
      const Vec c = structure_constants(g, l, s);
      const int idx = free2_index(3, l, s);
      for (int r = 1; r <= g.n(); ++r) EXPECT_EQ(c[r - 1], r == idx ? 1.0 : 0.0);
    }
}

TEST(Builtins, FreeIndexRejectsBadPairs) { EXPECT_CODE(free2_index(3, 2, 2), ErrorCode::IndexOutOfRange); }

TEST(Builtins, ComplexifiedHeisenbergFirstRow) {
  const GroupSpec g = complexified_heisenberg();
  EXPECT_EQ(g.m(), 4);
  EXPECT_EQ(g.n(), 2);
  const Vec row = g.B()[0].row(0).transpose();
  EXPECT_EQ(row, vec({0, -1, 0, 0}));
  EXPECT_TRUE(g.setting_ok());
}

TEST(Builtins, BadParameters) {
  EXPECT_CODE(heisenberg(0), ErrorCode::BadParams);
  EXPECT_CODE(free2(1), ErrorCode::BadParams);
}

TEST(Setting, FreeGroupsAndComplexified) {
  for (int m = 2; m <= 4; ++m) EXPECT_TRUE(free2(m).setting_ok()) << m;
  EXPECT_TRUE(complexified_heisenberg().setting_ok());
}

TEST(Multiply, HeisenbergHandValue) {
  const GroupSpec g = heisenberg(1);
  const Point r = multiply(g, pt(g, {1, 0, 0}), pt(g, {0, 1, 0}));
  EXPECT_EQ(r.coords(), vec({1, 1, 0.5}));
}

TEST(Multiply, DimensionMismatch) {
  const GroupSpec g = heisenberg(1);
  EXPECT_CODE(multiply(g, pt(g, {1, 0, 0}), Point(3, 3)), ErrorCode::DimensionMismatch);
}

TEST(Inverse, Values) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(inverse(g, pt(g, {1, 2, 3})).coords(), vec({-1, -2, -3}));
  EXPECT_EQ(inverse(g, identity(g)).coords(), vec({0, 0, 0}));
  const Point p = pt(g, {0.3, -0.7, 1.1});
  EXPECT_EQ(inverse(g, inverse(g, p)).coords(), p.coords());
}

TEST(Dilate, Values) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(dilate(g, 2.0, pt(g, {1, 1, 0.5})).coords(), vec({2, 2, 2}));
  const Point p = pt(g, {1, 0, 1});
  EXPECT_EQ(dilate(g, 1.0, p).coords(), p.coords());
  const Point a = dilate(g, 3.0, dilate(g, 0.5, p));
  const Vec expected = vec({1.5, 0.0, 2.25});
  EXPECT_LE(testing::max_abs_diff(a.coords(), expected), 1e-15);
  EXPECT_CODE(dilate(g, 0.0, p), ErrorCode::NonpositiveLambda);
  EXPECT_CODE(dilate(g, -1.0, p), ErrorCode::NonpositiveLambda);
}

TEST(Hnorm, Values) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(hnorm(g, pt(g, {3, 0, 4})), 3.0);
  EXPECT_EQ(hnorm(g, identity(g)), 0.0);
  EXPECT_DOUBLE_EQ(hnorm(g, dilate(g, 2.0, pt(g, {1, 0, 1}))), 2.0);
  EXPECT_EQ(hnorm(g.with_eps(0.5), pt(g, {0, 0, 4})), 1.0);
}

TEST(Frame, HeisenbergCoefficient) {
  const GroupSpec g = heisenberg(1);
  const Mat F = frame_at(g, pt(g, {0, 1, 0}));
  EXPECT_DOUBLE_EQ(F(0, 2), -0.5 * g.b(1, 1, 2) * 1.0);
  EXPECT_DOUBLE_EQ(F(0, 2), -0.5);
}

TEST(Frame, OriginAndVerticalFields) {
  for (const GroupSpec& g : builtins()) {
    EXPECT_EQ(frame_at(g, identity(g)), Mat::Identity(g.dim(), g.dim()));
    const Mat F = frame_at(g, Point::from_coords(g.m(), Vec::LinSpaced(g.dim(), -1.0, 2.0)));
    EXPECT_EQ(F.bottomRows(g.n()), Mat::Identity(g.dim(), g.dim()).bottomRows(g.n()));
  }
}

TEST(StructureConstants, Values) {
  EXPECT_EQ(structure_constants(heisenberg(1), 1, 2), vec({1}));
  const GroupSpec f = free2(3);
  const Vec c = structure_constants(f, 2, 1);
  EXPECT_EQ(c[free2_index(3, 2, 1) - 1], 1.0);
  for (const GroupSpec& g : builtins())
    for (int j = 1; j <= g.m(); ++j) EXPECT_EQ(structure_constants(g, j, j), Vec::Zero(g.n()));
  EXPECT_CODE(structure_constants(f, 0, 1), ErrorCode::IndexOutOfRange);
  EXPECT_CODE(structure_constants(f, 1, 4), ErrorCode::IndexOutOfRange);
}

TEST(ChangeCoordinates, Scaling) {
  const GroupSpec g = heisenberg(1);
  const GroupSpec h = change_coordinates(g, 2.0 * Mat::Identity(2, 2), Mat::Identity(1, 1));
  EXPECT_LE((h.B()[0] - g.B()[0] / 4.0).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(ChangeCoordinates, IdentityAndSwap) {
  const GroupSpec g = heisenberg(1);
  EXPECT_EQ(change_coordinates(g, Mat::Identity(2, 2), Mat::Identity(1, 1)).B()[0], g.B()[0]);
  Mat P(2, 2);
  P << 0, 1, 1, 0;
  EXPECT_EQ(change_coordinates(g, P, Mat::Identity(1, 1)).B()[0], Mat(-g.B()[0]));
}

TEST(ChangeCoordinates, SingularRejected) {
  const GroupSpec g = heisenberg(1);
  EXPECT_CODE(change_coordinates(g, Mat::Zero(2, 2), Mat::Identity(1, 1)), ErrorCode::SingularMatrix);
}

TEST(ChangeCoordinates, RoundTrip) {
  const GroupSpec g = complexified_heisenberg();
  Mat M1 = Mat::Identity(4, 4) + 0.3 * random_skew(4, 3);
  Mat M2(2, 2);
  M2 << 2, 1, 0, 1;
  const GroupSpec back = change_coordinates(change_coordinates(g, M1, M2), M1.inverse(), M2.inverse());
  for (int s = 0; s < 2; ++s) EXPECT_LE((back.B()[s] - g.B()[s]).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(OppositeGroup, NegatesStructure) {
  const GroupSpec g = heisenberg(1);
  const GroupSpec o = opposite_group(g);
  EXPECT_EQ(o.b(1, 1, 2), -1.0);
  const Point p = pt(g, {1, 0, 0}), q = pt(g, {0, 1, 0});
  EXPECT_EQ(multiply(o, p, q).coords(), multiply(g, q, p).coords());
}

TEST(Axioms, AllBuiltins) {
  for (const GroupSpec& g : builtins()) {
    for (const AxiomCheck& c : check_axioms(g, 10000, 2024)) {
      EXPECT_TRUE(c.pass) << c.name << " " << c.max_error;
      EXPECT_LE(c.max_error, 1e-12) << c.name;
    }
  }
}

TEST(Axioms, TriangleInequalityWithCalibratedEps) {
  for (const GroupSpec& g : builtins()) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
      Point p(g.m(), g.n()), q(g.m(), g.n());
      for (int k = 0; k < g.dim(); ++k) p.coords()[k] = u(rng), q.coords()[k] = u(rng);
      ASSERT_LE(hnorm(g, multiply(g, p, q)), (hnorm(g, p) + hnorm(g, q)) * (1.0 + 1e-12));
    }
  }
}

TEST(Axioms, CalibrationHalvesWhenNeeded) {
  Mat B(2, 2);
  B << 0, 50, -50, 0;
  const GroupSpec g = corank1(B);
  EXPECT_LT(g.eps(), 1.0);
  EXPECT_EQ(std::exp2(std::round(std::log2(g.eps()))), g.eps());
}

TEST(FlowCommutator, MatchesStructureConstants) {
  const double h = 1e-3;
  for (const GroupSpec& g : {free2(3), complexified_heisenberg(), heisenberg(2)}) {
    for (int j = 1; j <= g.m(); ++j)
      for (int l = 1; l <= g.m(); ++l) {
        const Point p = flow_commutator(g, j, l, h);
        EXPECT_LE(testing::max_abs_diff(p.y(), h * h * structure_constants(g, j, l)), 10 * h * h * h);
        EXPECT_LE(p.x().lpNorm<Eigen::Infinity>(), 1e-15);
      }
  }
}

TEST(GroupIo, RoundTripAndParse) {
  const GroupSpec g = complexified_heisenberg();
  const auto path = (std::filesystem::temp_directory_path() / "carnot_group_roundtrip.toml").string();
  save_group_spec(g, path);
  const GroupSpec back = load_group_spec(path);
  EXPECT_EQ(back.m(), g.m());
  EXPECT_EQ(back.n(), g.n());
  EXPECT_EQ(back.eps(), g.eps());
  for (int s = 0; s < g.n(); ++s) EXPECT_EQ(back.B()[s], g.B()[s]);

  const GroupSpec f = parse_group_spec("kind = \"free2\"\nm = 3\n");
  EXPECT_EQ(f.n(), 3);
  EXPECT_CODE(parse_group_spec("kind = \"explicit\"\nm = 2\nn = 1\nB = [[0.0, 1.0, 1.0, 0.0]]\n"),
              ErrorCode::NotSkewSymmetric);
  EXPECT_CODE(parse_group_spec("kind = \"bogus\"\n"), ErrorCode::ConfigError);
  EXPECT_CODE(load_group_spec("/nonexistent/group.toml"), ErrorCode::IoError);
}

}  // namespace
}  // namespace carnot
