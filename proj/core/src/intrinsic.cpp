#include "carnot/intrinsic.hpp"

#include "carnot/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

void require_j(const GroupSpec& spec, int j) {
  if (j < 2 || j > spec.m()) fail(ErrorCode::IndexOutOfRange, "derivative index must be in 2..m");
}

// 1/2 sum_{l>=2} x_l b^(s)_{jl} for each s, from a point of W.
Vec line_terms(const GroupSpec& spec, int j, const Vec& a) {
  Vec out(spec.n());
  for (int s = 1; s <= spec.n(); ++s) {
    double acc = 0.0;
    for (int l = 2; l <= spec.m(); ++l) acc += a[l - 2] * spec.b(s, j, l);
    out[s - 1] = 0.5 * acc;
  }
  return out;
}

}  // namespace

Vec dphi_coefficients(const GroupSpec& spec, int j, const Vec& a, double phi_a) {
  require_j(spec, j);
  const int mw = spec.m() - 1;
  Vec c = Vec::Zero(mw + spec.n());
  c[j - 2] = 1.0;
  const Vec line = line_terms(spec, j, a);
  for (int s = 1; s <= spec.n(); ++s) c[mw + s - 1] = phi_a * spec.b(s, j, 1) + line[s - 1];
  return c;
}

ScalarField apply_dphi(const GroupSpec& spec, const ScalarField& field, int j) {
  require_j(spec, j);
  const Grid& g = field.grid();
  const int mw = spec.m() - 1;
  if (g.dim() != mw + spec.n()) fail(ErrorCode::DimensionMismatch, "field is not over W");

  std::vector<int> needed{j - 2};
  for (int s = 1; s <= spec.n(); ++s) {
    bool coupled = false;
    for (int l = 1; l <= spec.m(); ++l) coupled = coupled || spec.b(s, j, l) != 0.0;
    if (coupled) needed.push_back(mw + s - 1);
  }
  for (int k : needed)
    if (g.axis(k).count < 3) fail(ErrorCode::GridTooCoarse, "needed axis has fewer than 3 points");

  std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
  std::array<int, Grid::kMaxDim> idx{};
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unflat(f, idx.data());
    bool ok = field.valid(f);
    for (int k : needed) {
      const int i = idx[static_cast<std::size_t>(k)];
      ok = ok && i > 0 && i < g.axis(k).count - 1 && field.valid(f - g.stride(k)) &&
           field.valid(f + g.stride(k));
    }
    if (!ok) continue;
    const Vec a = g.node(f);
    const Vec c = dphi_coefficients(spec, j, a, field.value(f));
    double acc = 0.0;
    for (int k : needed) {
      if (c[k] == 0.0) continue;
      const double d = (field.value(f + g.stride(k)) - field.value(f - g.stride(k))) / (2.0 * g.axis(k).step());
      acc += c[k] * d;
    }
    out[f] = acc;
  }
  return ScalarField(g, std::move(out), Interp::Multilinear);
}

TestFunction::TestFunction(Vec center, Vec radii) : center_(std::move(center)), radii_(std::move(radii)) {
  if (center_.size() != radii_.size()) fail(ErrorCode::DimensionMismatch, "center and radii differ in length");
  for (Eigen::Index k = 0; k < radii_.size(); ++k)
    if (!(radii_[k] > 0.0)) fail(ErrorCode::BadParams, "radii must be positive");
}

double TestFunction::operator()(const Vec& a) const {
  double v = 1.0;
  for (Eigen::Index k = 0; k < center_.size(); ++k) {
    const double u = (a[k] - center_[k]) / radii_[k];
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    v *= q * q;
  }
  return v;
}

Vec TestFunction::gradient(const Vec& a) const {
  const Eigen::Index d = center_.size();
  Vec prof(d), dprof(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double u = (a[k] - center_[k]) / radii_[k];
    if (std::abs(u) >= 1.0) return Vec::Zero(d);
    const double q = 1.0 - u * u;
    prof[k] = q * q;
    dprof[k] = -4.0 * u * q / radii_[k];
  }
  Vec g(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double v = dprof[k];
    for (Eigen::Index l = 0; l < d; ++l)
      if (l != k) v *= prof[l];
    g[k] = v;
  }
  return g;
}

double TestFunction::integral() const {
  double v = 1.0;
  for (Eigen::Index k = 0; k < radii_.size(); ++k) v *= radii_[k] * 16.0 / 15.0;
  return v;
}

Datum::Datum(std::vector<ScalarField> w) {
  for (auto& f : w) {
    bound_ = std::max(bound_, f.max_abs());
    w_.push_back(f.with_interp(Interp::PiecewiseConstant));
  }
}

Datum constant_datum(const GroupSpec& spec, const Grid& grid, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != spec.m() - 1)
    fail(ErrorCode::DimensionMismatch, "datum needs m-1 components");
  std::vector<ScalarField> w;
  for (double v : values) w.push_back(ScalarField(grid, std::vector<double>(grid.size(), v), Interp::PiecewiseConstant));
  return Datum(std::move(w));
}

double distributional_residual(const GroupSpec& spec, const ScalarField& field, const Datum& datum,
                               const TestFunction& zeta, int j, const QuadratureOptions& opts) {
  require_j(spec, j);
  const Grid& g = field.grid();
  const int d = g.dim();
  const int mw = spec.m() - 1;
  if (zeta.dim() != d) fail(ErrorCode::DimensionMismatch, "test function dimension");
  for (int k = 0; k < d; ++k) {
    const double lo = zeta.center()[k] - zeta.radii()[k];
    const double hi = zeta.center()[k] + zeta.radii()[k];
    if (lo < g.axis(k).lo - 1e-12 || hi > g.axis(k).hi + 1e-12)
      fail(ErrorCode::SupportNotContained, "axis " + std::to_string(k));
  }
  const ScalarField& w = datum.w(j);

  int N = opts.cells_per_axis;
  if (N <= 0) N = std::clamp(static_cast<int>(std::pow(4194304.0, 1.0 / d)), 16, 256);

  Vec h(d), lo(d);
  double cell = 1.0;
  for (int k = 0; k < d; ++k) {
    h[k] = 2.0 * zeta.radii()[k] / N;
    lo[k] = zeta.center()[k] - zeta.radii()[k];
    cell *= h[k];
  }
  Vec b1(spec.n());
  for (int s = 1; s <= spec.n(); ++s) b1[s - 1] = spec.b(s, j, 1);

  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(N);
  std::array<int, Grid::kMaxDim> idx{};
  Vec a(d);
  long double acc = 0.0L;
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t r = f;
    for (int k = d - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(r % static_cast<std::size_t>(N));
      r /= static_cast<std::size_t>(N);
    }
    for (int k = 0; k < d; ++k) a[k] = lo[k] + (idx[static_cast<std::size_t>(k)] + 0.5) * h[k];
    const Vec grad = zeta.gradient(a);
    const double z = zeta(a);
    const double phi = field(a);
    const Vec line = line_terms(spec, j, a);
    double xj = grad[j - 2];
    double yterm = 0.0;
    for (int s = 0; s < spec.n(); ++s) {
      xj += line[s] * grad[mw + s];
      yterm += b1[s] * grad[mw + s];
    }
    acc += static_cast<long double>(phi * (xj + 0.5 * phi * yterm) + w(a) * z);
  }
  return static_cast<double>(acc) * cell;
}

double solve_levelset_phi(const GroupSpec& spec, const LevelSet& ls, const WPoint& a, double guess) {
  const Point base = embed(spec, a);
  auto g = [&](double v) { return ls.f(multiply(spec, base, v_element(spec, v))); };
  double lo = guess - 1.0, hi = guess + 1.0;
  double glo = g(lo), ghi = g(hi);
  for (int it = 0; it < 60 && glo * ghi > 0.0; ++it) {
    const double w = hi - lo;
    lo -= w;
    hi += w;
    glo = g(lo);
    ghi = g(hi);
  }
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo * ghi > 0.0) fail(ErrorCode::VanishingX1f, "no sign change along the V direction");
  boost::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
  return 0.5 * (r.first + r.second);
}

Vec gradient_from_levelset(const GroupSpec& spec, const LevelSet& ls, const WPoint& a, double phi_a) {
  const Point p = multiply(spec, embed(spec, a), v_element(spec, phi_a));
  const Vec Xf = frame_at(spec, p).topRows(spec.m()) * ls.grad(p);
  if (std::abs(Xf[0]) < 1e-14) fail(ErrorCode::VanishingX1f);
  Vec out(spec.m() - 1);
  for (int j = 2; j <= spec.m(); ++j) out[j - 2] = -Xf[j - 1] / Xf[0];
  return out;
}

Vec gradient_from_levelset(const GroupSpec& spec, const LevelSet& ls, const WPoint& a) {
  return gradient_from_levelset(spec, ls, a, solve_levelset_phi(spec, ls, a));
}

ScalarField levelset_field(const GroupSpec& spec, const LevelSet& ls, const Grid& grid) {
  return ScalarField::sample(grid, [&](const Vec& a) {
    return solve_levelset_phi(spec, ls, WPoint::from_coords(spec.m(), a));
  });
}

}  // namespace carnot
