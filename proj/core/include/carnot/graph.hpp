#pragma once

#include "carnot/field.hpp"
#include "carnot/group.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace carnot {

// Element of W = {x_1 = 0}, stored as (x_2..x_m, y_1..y_n).
class WPoint {
 public:
  WPoint() = default;
  WPoint(const Vec& xw, const Vec& y);
  static WPoint from_coords(int m, Vec a);

  int m() const noexcept { return m_; }
  auto xw() const { return a_.head(m_ - 1); }
  auto y() const { return a_.tail(a_.size() - (m_ - 1)); }
  const Vec& coords() const noexcept { return a_; }

 private:
  Vec a_;
  int m_ = 0;
};

Point embed(const GroupSpec& spec, const WPoint& a);
Point v_element(const GroupSpec& spec, double v);

struct Splitting {
  WPoint a;
  double v = 0.0;
};

// p = i(a) . (v, 0, ..., 0)
Splitting project_canonical(const GroupSpec& spec, const Point& p);

Point graph_point(const GroupSpec& spec, const ScalarField& field, const WPoint& a);
double shift_quantity(const GroupSpec& spec, const ScalarField& field, const WPoint& a,
                      const WPoint& b);

struct PairSampling {
  std::size_t max_exhaustive = 1000000;
  std::size_t random_pairs = 1000000;
  std::uint64_t seed = 0;
  int stride = 1;
};

struct PairEstimate {
  double value = 0.0;
  std::size_t pairs = 0;
  bool exhaustive = true;
};

inline constexpr double kDegenerateShift = 1e-12;

PairEstimate estimate_lipschitz(const GroupSpec& spec, const ScalarField& field,
                                const PairSampling& sampling = {});
PairEstimate estimate_vertical_holder(const GroupSpec& spec, const ScalarField& field,
                                      const PairSampling& sampling = {});

struct RefinementStudy {
  std::vector<double> spacing;
  std::vector<double> estimate;
  std::vector<double> rate;  // log2 growth per halving
  bool diverging = false;
};

// Re-runs an estimator on nested sub-lattices (strides 2^(levels-1) .. 1).
// Divergence means every observed growth rate is at least min_rate.
RefinementStudy refine_lipschitz(const GroupSpec& spec, const ScalarField& field,
                                 const PairSampling& sampling = {}, int levels = 3,
                                 double min_rate = 0.125);
RefinementStudy refine_vertical_holder(const GroupSpec& spec, const ScalarField& field,
                                       const PairSampling& sampling = {}, int levels = 3,
                                       double min_rate = 0.125);

struct SplitBounds {
  double c0 = 0.0;     // min of d(Phi(a),Phi(b)) / shift
  double upper = 0.0;  // max of the same ratio
  std::size_t pairs = 0;
};

SplitBounds estimate_split_constant(const GroupSpec& spec, const ScalarField& field,
                                    const PairSampling& sampling = {});

ScalarField translate_graph(const GroupSpec& spec, const ScalarField& field, const Point& q);

}  // namespace carnot
