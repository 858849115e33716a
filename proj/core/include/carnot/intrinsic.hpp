#pragma once

#include "carnot/field.hpp"
#include "carnot/graph.hpp"
#include "carnot/group.hpp"

#include <functional>
#include <vector>

namespace carnot {

// Coefficients of D^phi_j on (d/dx_2..d/dx_m, d/dy_1..d/dy_n).
Vec dphi_coefficients(const GroupSpec& spec, int j, const Vec& a, double phi_a);

// Centered differences; nodes next to the boundary on a needed axis are invalid.
ScalarField apply_dphi(const GroupSpec& spec, const ScalarField& field, int j);

// Product of per-axis bumps (1 - u^2)^2, u = (a - center) / radius.
class TestFunction {
 public:
  TestFunction(Vec center, Vec radii);

  const Vec& center() const noexcept { return center_; }
  const Vec& radii() const noexcept { return radii_; }
  int dim() const noexcept { return static_cast<int>(center_.size()); }

  double operator()(const Vec& a) const;
  Vec gradient(const Vec& a) const;
  double integral() const;

 private:
  Vec center_;
  Vec radii_;
};

class Datum {
 public:
  Datum() = default;
  // w[0] is w_2, ..., w[m-2] is w_m; fields are read piecewise-constant.
  explicit Datum(std::vector<ScalarField> w);

  const ScalarField& w(int j) const { return w_.at(static_cast<std::size_t>(j - 2)); }
  std::size_t size() const noexcept { return w_.size(); }
  double bound() const noexcept { return bound_; }

 private:
  std::vector<ScalarField> w_;
  double bound_ = 0.0;
};

Datum constant_datum(const GroupSpec& spec, const Grid& grid, const std::vector<double>& values);

struct QuadratureOptions {
  int cells_per_axis = 0;  // 0 picks a size from the dimension
};

// int phi (X_j zeta + 1/2 phi sum_s b^(s)_{j1} Y_s zeta) + int w_j zeta, midpoint rule on
// the support of zeta.
double distributional_residual(const GroupSpec& spec, const ScalarField& field, const Datum& datum,
                               const TestFunction& zeta, int j, const QuadratureOptions& opts = {});

// f is given with its Euclidean gradient over all m + n coordinates.
struct LevelSet {
  std::function<double(const Point&)> f;
  std::function<Vec(const Point&)> grad;
};

// Root of v -> f(i(a) . (v, 0, ..., 0)).
double solve_levelset_phi(const GroupSpec& spec, const LevelSet& ls, const WPoint& a,
                          double guess = 0.0);

// -(X_2 f / X_1 f, ..., X_m f / X_1 f) at the graph point i(a) . phi(a).
Vec gradient_from_levelset(const GroupSpec& spec, const LevelSet& ls, const WPoint& a);
Vec gradient_from_levelset(const GroupSpec& spec, const LevelSet& ls, const WPoint& a,
                           double phi_a);

ScalarField levelset_field(const GroupSpec& spec, const LevelSet& ls, const Grid& grid);

}  // namespace carnot
