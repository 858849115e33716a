#include "carnot/error.hpp"
#include "carnot/lagrangian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

int label_y_axis(const LagrangianParam& P, int s) {
  return P.label_grid.dim() - static_cast<int>(P.chi.size()) + s - 1;
}

// Piecewise-linear profile over a uniform axis, constant outside it.
double profile_at(const double* v, std::size_t stride, const Axis& a, double x) {
  if (x <= a.lo) return v[0];
  if (x >= a.hi) return v[static_cast<std::size_t>(a.count - 1) * stride];
  const double pos = (x - a.lo) / a.step();
  const int k = std::min(a.count - 2, static_cast<int>(pos));
  const double w = pos - k;
  return (1.0 - w) * v[static_cast<std::size_t>(k) * stride] + w * v[static_cast<std::size_t>(k + 1) * stride];
}

}  // namespace

double mollifier(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double q = 1.0 - u * u;
  return 315.0 / 256.0 * q * q * q * q;
}

ScalarField mollify_chi(const LagrangianParam& P, double eps) {
  const int ref = P.meta.reference;
  if (ref == 0) fail(ErrorCode::NoReferenceComponent, "every b^(s)_{j1} vanishes");
  if (!(eps > 0.0)) fail(ErrorCode::BadParams, "eps must be positive");
  const Grid& L = P.label_grid;
  const int ax = label_y_axis(P, ref);
  const Axis& la = L.axis(ax);
  if (eps >= 0.5 * (la.hi - la.lo)) fail(ErrorCode::KernelTooWide, "kernel wider than half the label interval");
  const ScalarField& chi = P.chi[static_cast<std::size_t>(ref - 1)];
  const std::size_t st = L.stride(ax);
  const int K = la.count;
  const double dl = la.step();
  const double base = std::min(0.0, *std::min_element(chi.values().begin(), chi.values().end()));
  const double origin = std::min(0.0, la.lo);

  std::vector<double> out(L.size());
  std::array<int, Grid::kMaxDim> idx{};
  std::vector<double> cuts;
  for (std::size_t f = 0; f < L.size(); ++f) {
    L.unflat(f, idx.data());
    if (idx[static_cast<std::size_t>(ax)] != 0) continue;
    const double* v = chi.values().data() + f;
    for (int i = 0; i < K; ++i) {
      const double lam = la.at(i);
      const double a = lam - eps, b = lam + eps;
      cuts.clear();
      cuts.push_back(a);
      const int k0 = std::max(0, static_cast<int>(std::ceil((a - la.lo) / dl)));
      const int k1 = std::min(K - 1, static_cast<int>(std::floor((b - la.lo) / dl)));
      for (int k = k0; k <= k1; ++k) {
        const double x = la.at(k);
        if (x > a && x < b) cuts.push_back(x);
      }
      cuts.push_back(b);
      double acc = 0.0;
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        const double half = 0.5 * (cuts[c + 1] - cuts[c]);
        for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
          const double x = mid + half * kGaussNodes[g];
          acc += kGaussWeights[g] * half * (profile_at(v, st, la, x) - base) * mollifier((lam - x) / eps);
        }
      }
      out[f + static_cast<std::size_t>(i) * st] = base + (1.0 + eps * (lam - origin)) * acc / eps;
    }
  }
  return ScalarField(L, std::move(out));
}

MollifiedFields mollified_phi_and_w(const GroupSpec& spec, const ScalarField& field, const LagrangianParam& P,
                                    double eps) {
  if (!(field.grid() == P.image_grid)) fail(ErrorCode::DimensionMismatch, "field grid differs from the image lattice");
  return mollified_phi_and_w(spec, P, eps);
}

MollifiedFields mollified_phi_and_w(const GroupSpec& spec, const LagrangianParam& P, double eps) {
  const int ref = P.meta.reference;
  const int j = P.j;
  const int m = spec.m(), n = spec.n();
  if (static_cast<int>(P.chi.size()) != n) fail(ErrorCode::DimensionMismatch, "parameterization does not match the group");
  const ScalarField chi_e = mollify_chi(P, eps);
  const Grid& L = P.label_grid;
  const Grid& G = P.image_grid;
  const int ax = label_y_axis(P, ref);
  const Axis& la = L.axis(ax);
  const Axis& tl = L.axis(0);
  const int N = tl.count;
  const int K = la.count;
  const int r = P.meta.t_refine;
  const double h = tl.step();
  const double b = spec.b(ref, j, 1);
  const int gy = m - 1 + ref - 1;
  const Axis& ya = G.axis(gy);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> phi(G.size(), nan), w(G.size(), nan), lab(G.size(), nan);

  std::array<int, Grid::kMaxDim> gi{};
  std::array<std::vector<double>, 3> prof;
  for (auto& p : prof) p.resize(static_cast<std::size_t>(K));
  Vec coord(L.dim());

  for (std::size_t f0 = 0; f0 < G.size(); ++f0) {
    G.unflat(f0, gi.data());
    if (gi[static_cast<std::size_t>(gy)] != 0) continue;
    const Vec a0 = G.node(f0);
    const int it = gi[static_cast<std::size_t>(j - 2)] * r;
    Vec xhat(m - 2);
    {
      int q = 0;
      for (int l = 2; l <= m; ++l)
        if (l != j) xhat[q++] = a0[l - 2];
    }
    std::array<int, 3> ts{it - 1, it, it + 1};
    int kind = 0;
    if (it == 0) ts = {0, 1, 2}, kind = 1;
    if (it == N - 1) ts = {N - 3, N - 2, N - 1}, kind = 2;

    bool usable = true;
    for (int c = 0; c < 3 && usable; ++c) {
      coord[0] = tl.at(ts[static_cast<std::size_t>(c)]);
      for (int k = 0; k < m - 2; ++k) coord[1 + k] = xhat[k];
      for (int s = 1; s <= n; ++s) {
        if (s == ref) continue;
        const double y = a0[m - 1 + s - 1];
        coord[label_y_axis(P, s)] = y - (tl.at(it) - tl.lo) * line_slope(spec, j, s, 0.0, xhat);
      }
      for (int k = 0; k < K && usable; ++k) {
        coord[ax] = la.at(k);
        const auto v = chi_e.try_eval(coord);
        usable = v.has_value();
        if (usable) prof[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = *v;
      }
    }
    if (!usable) continue;
    const std::vector<double>& mid = prof[static_cast<std::size_t>(kind == 0 ? 1 : kind == 1 ? 0 : 2)];
    const double line = line_slope(spec, j, ref, 0.0, xhat);

    for (int q = 0; q < ya.count; ++q) {
      const double y = ya.at(q);
      if (y < mid.front() || y > mid.back()) continue;
      const auto it_up = std::upper_bound(mid.begin(), mid.end(), y);
      std::size_t k1 = static_cast<std::size_t>(it_up - mid.begin());
      if (k1 >= mid.size()) k1 = mid.size() - 1;
      if (k1 == 0) k1 = 1;
      const std::size_t k0 = k1 - 1;
      const double span = mid[k1] - mid[k0];
      if (!(span > 1e-12)) fail(ErrorCode::InversionFailure, "monotonicity margin below 1e-12");
      const double wgt = (y - mid[k0]) / span;
      auto at = [&](int c) {
        const auto& p = prof[static_cast<std::size_t>(c)];
        return (1.0 - wgt) * p[k0] + wgt * p[k1];
      };
      const double p0 = at(0), p1 = at(1), p2 = at(2);
      double d1 = 0.0;
      if (kind == 0) d1 = (p2 - p0) / (2.0 * h);
      else if (kind == 1) d1 = (-3.0 * p0 + 4.0 * p1 - p2) / (2.0 * h);
      else d1 = (p0 - 4.0 * p1 + 3.0 * p2) / (2.0 * h);
      const double d2 = (p0 - 2.0 * p1 + p2) / (h * h);
      gi[static_cast<std::size_t>(gy)] = q;
      const std::size_t f = G.flat(gi.data());
      phi[f] = (d1 - line) / b;
      w[f] = d2 / b;
      lab[f] = la.at(static_cast<int>(k0)) + wgt * la.step();
    }
    gi[static_cast<std::size_t>(gy)] = 0;
  }

  MollifiedFields out;
  out.phi = ScalarField(G, std::move(phi));
  out.w = ScalarField(G, std::move(w));
  out.label = ScalarField(G, std::move(lab));
  out.w_bound = (1.0 + eps * (la.hi - std::min(0.0, la.lo))) * P.meta.wbar_sup;
  return out;
}

}  // namespace carnot
