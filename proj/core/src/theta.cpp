#include "carnot/error.hpp"
#include "carnot/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carnot {

Characteristic min_forward_max_backward(const GroupSpec& spec, const ScalarField& field, int j,
                                        const ThroughPoint& point, Interval interval, double step,
                                        const std::vector<double>& eps_seq, double gap_tol) {
  MinMaxPair mm = min_max_through(spec, field, j, point, interval, step, eps_seq, gap_tol);
  Characteristic c = std::move(mm.minimal);
  for (std::size_t k = 0; k < c.t.size(); ++k)
    if (c.t[k] < point.t_bar) c.gamma.col(static_cast<Eigen::Index>(k)) = mm.maximal.gamma.col(static_cast<Eigen::Index>(k));
  c.flavor = Flavor::MinForwardMaxBackward;
  c.cauchy_gap = mm.gap;
  return c;
}

std::vector<double> rational_sequence(int count) {
  struct Frac {
    long long p, q;
  };
  std::vector<double> out;
  if (count <= 0) return out;
  std::vector<Frac> row{{0, 1}, {1, 1}};
  out.push_back(0.0);
  if (count > 1) out.push_back(1.0);
  while (static_cast<int>(out.size()) < count) {
    std::vector<Frac> next;
    next.reserve(2 * row.size());
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      next.push_back(row[k]);
      const Frac mid{row[k].p + row[k + 1].p, row[k].q + row[k + 1].q};
      next.push_back(mid);
      if (static_cast<int>(out.size()) < count) out.push_back(static_cast<double>(mid.p) / static_cast<double>(mid.q));
    }
    next.push_back(row.back());
    row = std::move(next);
  }
  return out;
}

double theta(const std::function<double(double)>& curve, int L) {
  if (L < 1) fail(ErrorCode::BadParams, "truncation depth must be at least 1");
  const auto r = rational_sequence(L);
  double acc = 0.0;
  for (int l = 0; l < L; ++l) acc += std::ldexp(curve(r[static_cast<std::size_t>(l)]), -l);
  return acc;
}

double theta(const std::vector<double>& u, const std::vector<double>& values, int L) {
  if (u.size() < 2 || u.size() != values.size())
    fail(ErrorCode::CurveNotOnUnitInterval, "curve needs at least two matching samples");
  if (u.front() > 1e-12 || u.back() < 1.0 - 1e-12)
    fail(ErrorCode::CurveNotOnUnitInterval, "samples do not span [0,1]");
  for (std::size_t k = 1; k < u.size(); ++k)
    if (!(u[k] > u[k - 1])) fail(ErrorCode::CurveNotOnUnitInterval, "sample parameters must increase");
  return theta(
      [&](double r) {
        auto it = std::upper_bound(u.begin(), u.end(), r);
        if (it == u.begin()) return values.front();
        if (it == u.end()) return values.back();
        const std::size_t k = static_cast<std::size_t>(it - u.begin());
        const double w = (r - u[k - 1]) / (u[k] - u[k - 1]);
        return w == 0.0 ? values[k - 1] : (1.0 - w) * values[k - 1] + w * values[k];
      },
      L);
}

double label_bound(const GroupSpec& spec, int j, int s) {
  if (j < 2 || j > spec.m()) fail(ErrorCode::IndexOutOfRange, "derivative index must be in 2..m");
  if (s < 1 || s > spec.n()) fail(ErrorCode::IndexOutOfRange, "vertical index must be in 1..n");
  double bmax = 0.0;
  for (int r = 1; r <= spec.n(); ++r)
    for (int l = 1; l <= spec.m(); ++l) bmax = std::max(bmax, std::abs(spec.b(r, j, l)));
  const bool coupled = spec.b(s, j, 1) != 0.0;
  return (spec.m() - 1) * bmax + (coupled ? 3.0 : 1.0);
}

}  // namespace carnot
