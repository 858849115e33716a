#include "carnot/lagrangian.hpp"

#include "carnot/error.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace carnot {

namespace {

void require_j(const GroupSpec& spec, int j) {
  if (j < 2 || j > spec.m()) fail(ErrorCode::IndexOutOfRange, "derivative index must be in 2..m");
}

int y_axis(const GroupSpec& spec, int s) { return spec.m() - 1 + s - 1; }

// Raw second difference of v at i with spacing k, one-sided near the ends.
double second_diff(const double* v, std::size_t stride, int i, int k, int N) {
  auto at = [&](int q) { return v[static_cast<std::size_t>(q) * stride]; };
  if (i - k >= 0 && i + k <= N - 1) return at(i - k) - 2.0 * at(i) + at(i + k);
  if (i + 2 * k <= N - 1) return at(i) - 2.0 * at(i + k) + at(i + 2 * k);
  return at(i - 2 * k) - 2.0 * at(i - k) + at(i);
}

struct Family {
  std::vector<double> theta;   // strictly increasing
  std::vector<double> values;  // curve k at label t node i: values[k * tcount + i]
};

Vec fibre_xhat(const GroupSpec& spec, const Grid& label, const int* idx) {
  Vec xhat(spec.m() - 2);
  for (int k = 0; k < spec.m() - 2; ++k) xhat[k] = label.axis(1 + k).at(idx[1 + k]);
  return xhat;
}

std::string lattice_text(const Grid& g) {
  std::ostringstream os;
  for (int k = 0; k < g.dim(); ++k) os << (k ? "x" : "") << g.axis(k).count;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::string> label_axis_names(const GroupSpec& spec, int j) {
  std::vector<std::string> names{"t"};
  for (int l = 2; l <= spec.m(); ++l)
    if (l != j) names.push_back("x" + std::to_string(l));
  for (int s = 1; s <= spec.n(); ++s) names.push_back("y" + std::to_string(s));
  return names;
}

LagrangianParam build_full_param(const GroupSpec& spec, const ScalarField& field, int j,
                                 const ParamOptions& opt) {
  require_j(spec, j);
  const Grid& g = field.grid();
  const int m = spec.m(), n = spec.n();
  if (g.dim() != m - 1 + n) fail(ErrorCode::DimensionMismatch, "field is not over W");
  if (!spec.setting_ok() && n != 1) fail(ErrorCode::SettingViolated, "more than one coupled component");
  if (!(opt.step > 0.0) || opt.t_refine < 1 || opt.theta_depth < 1)
    fail(ErrorCode::BadParams, "step, t_refine and theta_depth must be positive");

  const int ref = reference_component(spec, j);
  const Axis tx = g.axis(j - 2);
  const Axis tl{tx.lo, tx.hi, (tx.count - 1) * opt.t_refine + 1};
  const int N = tl.count;
  const double T = tx.hi - tx.lo;
  const double hint = tl.step() / std::ceil(tl.step() / opt.step - 1e-9);

  // x-hat axes are the field's; label axes for lines keep every line inside the box.
  std::vector<Axis> axes{tl};
  for (int l = 2; l <= m; ++l)
    if (l != j) axes.push_back(g.axis(l - 2));
  std::vector<Axis> xhat_axes(axes.begin() + 1, axes.end());

  std::vector<double> smin(static_cast<std::size_t>(n), 0.0), smax(static_cast<std::size_t>(n), 0.0);
  {
    const std::size_t corners = std::size_t{1} << xhat_axes.size();
    for (std::size_t c = 0; c < corners; ++c) {
      Vec xhat(static_cast<Eigen::Index>(xhat_axes.size()));
      for (std::size_t k = 0; k < xhat_axes.size(); ++k)
        xhat[static_cast<Eigen::Index>(k)] = (c >> k) & 1U ? xhat_axes[k].hi : xhat_axes[k].lo;
      for (int s = 1; s <= n; ++s) {
        const double v = line_slope(spec, j, s, 0.0, xhat);
        auto& lo = smin[static_cast<std::size_t>(s - 1)];
        auto& hi = smax[static_cast<std::size_t>(s - 1)];
        if (c == 0) lo = hi = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }

  ParamMeta meta;
  meta.j = j;
  meta.reference = ref;
  meta.theta_depth = opt.theta_depth;
  meta.eps_seq = opt.eps_seq;
  meta.step = hint;
  meta.t_refine = opt.t_refine;
  meta.cauchy_tol = opt.cauchy_tol;
  for (int s = 1; s <= n; ++s) meta.bounds.push_back(label_bound(spec, j, s));

  std::vector<Axis> y_label(static_cast<std::size_t>(n));
  for (int s = 1; s <= n; ++s) {
    if (s == ref) continue;
    const Axis& ya = g.axis(y_axis(spec, s));
    const double lo = ya.lo - std::min(0.0, smin[static_cast<std::size_t>(s - 1)] * T);
    const double hi = ya.hi - std::max(0.0, smax[static_cast<std::size_t>(s - 1)] * T);
    if (!(hi > lo)) fail(ErrorCode::BadParams, "label interval for y" + std::to_string(s) + " is empty");
    meta.label_shrinkage = std::max(meta.label_shrinkage, 1.0 - (hi - lo) / (ya.hi - ya.lo));
    y_label[static_cast<std::size_t>(s - 1)] = Axis{lo, hi, 2 * (ya.count - 1) + 1};
  }

  // Fibres: x-hat nodes times line-label nodes.
  std::vector<Axis> fib_axes = xhat_axes;
  for (int s = 1; s <= n; ++s)
    if (s != ref) fib_axes.push_back(y_label[static_cast<std::size_t>(s - 1)]);
  std::size_t fibres = 1;
  for (const Axis& a : fib_axes) fibres *= static_cast<std::size_t>(a.count);

  auto fibre_point = [&](std::size_t fid, Vec& xhat, Vec& labels) {
    std::vector<int> idx(fib_axes.size());
    for (std::size_t k = fib_axes.size(); k-- > 0;) {
      idx[k] = static_cast<int>(fid % static_cast<std::size_t>(fib_axes[k].count));
      fid /= static_cast<std::size_t>(fib_axes[k].count);
    }
    xhat.resize(m - 2);
    for (int k = 0; k < m - 2; ++k) xhat[k] = fib_axes[static_cast<std::size_t>(k)].at(idx[static_cast<std::size_t>(k)]);
    labels = Vec::Zero(n);
    std::size_t q = static_cast<std::size_t>(m - 2);
    for (int s = 1; s <= n; ++s)
      if (s != ref) labels[s - 1] = fib_axes[q].at(idx[q]), ++q;
  };

  std::vector<Family> families(ref == 0 ? 0 : fibres);
  double lam_lo = std::numeric_limits<double>::infinity();
  double lam_hi = -lam_lo;
  double ext_range = 0.0;
  if (ref != 0) {
    const Axis& yr = g.axis(y_axis(spec, ref));
    const double bref = spec.b(ref, j, 1);
    for (std::size_t fid = 0; fid < fibres; ++fid) {
      Vec xhat, labels;
      fibre_point(fid, xhat, labels);
      const double M = std::abs(bref) * field.max_abs() + std::abs(line_slope(spec, j, ref, 0.0, xhat));
      const double elo = yr.lo - M * T, ehi = yr.hi + M * T;
      ext_range = std::max(ext_range, ehi - elo);
      const int seeds = opt.seed_count > 0
                            ? opt.seed_count
                            : static_cast<int>(std::ceil((ehi - elo) / (yr.step() / 4.0))) + 1;
      const Axis seed_axis{elo, ehi, std::max(2, seeds)};
      const int columns = std::max(1, opt.seed_times);

      std::vector<double> th;
      std::vector<std::vector<double>> curves;
      std::vector<double> u;
      for (int c = 0; c < columns; ++c) {
        const int it = static_cast<int>(std::lround(static_cast<double>(c) * (N - 1) / columns));
        const double tbar = tl.at(it);
        for (int q = 0; q < seed_axis.count; ++q) {
          ThroughPoint p;
          p.t_bar = tbar;
          p.xhat = xhat;
          p.y_bar = labels;
          for (int s = 1; s <= n; ++s)
            if (s != ref) p.y_bar[s - 1] = vertical_line(spec, j, s, xhat, labels[s - 1], tbar, tl.lo);
          p.y_bar[ref - 1] = seed_axis.at(q);
          const Characteristic ch = min_forward_max_backward(spec, field, j, p, {tl.lo, tl.hi}, hint,
                                                             opt.eps_seq, opt.gap_tol);
          meta.max_cauchy_gap = std::max(meta.max_cauchy_gap, ch.cauchy_gap);
          const auto row = ch.gamma.row(ref - 1);
          std::vector<double> z(ch.t.size());
          u.resize(ch.t.size());
          for (std::size_t k = 0; k < ch.t.size(); ++k) {
            z[k] = row[static_cast<Eigen::Index>(k)];
            u[k] = (ch.t[k] - tl.lo) / T;
          }
          u.front() = 0.0;
          u.back() = 1.0;
          th.push_back(theta(u, z, opt.theta_depth));
          std::vector<double> at_nodes(static_cast<std::size_t>(N));
          for (int i = 0; i < N; ++i) {
            const double pos = (tl.at(i) - tl.lo) / hint;
            const std::size_t k = std::min(z.size() - 1, static_cast<std::size_t>(std::lround(pos)));
            at_nodes[static_cast<std::size_t>(i)] = z[k];
          }
          curves.push_back(std::move(at_nodes));
        }
      }

      std::vector<std::size_t> order(th.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return th[a] < th[b]; });
      Family fam;
      for (std::size_t k : order) {
        if (!fam.theta.empty() && th[k] <= fam.theta.back() + 1e-12 * std::max(1.0, std::abs(th[k]))) continue;
        if (!fam.theta.empty()) {
          const double* prev = fam.values.data() + fam.values.size() - static_cast<std::size_t>(N);
          for (int i = 0; i < N; ++i)
            if (prev[i] - curves[k][static_cast<std::size_t>(i)] > opt.crossing_tol)
              fail(ErrorCode::NonMonotoneFamily, "curves cross at t = " + std::to_string(tl.at(i)));
        }
        fam.theta.push_back(th[k]);
        fam.values.insert(fam.values.end(), curves[k].begin(), curves[k].end());
      }
      if (fam.theta.size() < 2) fail(ErrorCode::NonMonotoneFamily, "family collapsed to a single curve");
      meta.curves += fam.theta.size();
      lam_lo = std::min(lam_lo, fam.theta.front());
      lam_hi = std::max(lam_hi, fam.theta.back());
      families[fid] = std::move(fam);
    }
  }

  for (int s = 1; s <= n; ++s) {
    if (s != ref) {
      axes.push_back(y_label[static_cast<std::size_t>(s - 1)]);
      continue;
    }
    const Axis& yr = g.axis(y_axis(spec, ref));
    const int auto_count = std::max(2 * (yr.count - 1) + 1, static_cast<int>(std::ceil(4.0 * ext_range / yr.step())) + 1);
    axes.push_back(Axis{lam_lo, lam_hi, opt.label_count > 0 ? opt.label_count : auto_count});
  }

  LagrangianParam P;
  P.j = j;
  P.label_grid = Grid(axes);
  P.image_grid = g;
  const Grid& L = P.label_grid;
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(n), std::vector<double>(L.size()));
  std::vector<double> inside(L.size(), 1.0);

  std::vector<double> t_samples(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) t_samples[static_cast<std::size_t>(i)] = tl.at(i);

  const std::size_t tstride = L.stride(0);
  std::array<int, Grid::kMaxDim> idx{};
  std::vector<double> ref_col(static_cast<std::size_t>(N));
  for (std::size_t col = 0; col < tstride; ++col) {
    L.unflat(col, idx.data());
    const Vec xhat = fibre_xhat(spec, L, idx.data());
    Vec labels(n);
    for (int s = 1; s <= n; ++s) labels[s - 1] = L.axis(y_axis(spec, s)).at(idx[static_cast<std::size_t>(y_axis(spec, s))]);
    bool in_family = true;
    if (ref != 0) {
      std::size_t fid = 0;
      for (int k = 0; k < m - 2; ++k) fid = fid * static_cast<std::size_t>(L.axis(1 + k).count) + static_cast<std::size_t>(idx[static_cast<std::size_t>(1 + k)]);
      for (int s = 1; s <= n; ++s)
        if (s != ref) {
          const int a = y_axis(spec, s);
          fid = fid * static_cast<std::size_t>(L.axis(a).count) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        }
      const Family& fam = families[fid];
      const double lam = labels[ref - 1];
      const std::size_t K = fam.theta.size();
      std::size_t k0 = 0, k1 = 0;
      double w = 0.0;
      if (lam <= fam.theta.front()) {
        in_family = lam >= fam.theta.front() - 1e-12;
      } else if (lam >= fam.theta.back()) {
        k0 = k1 = K - 1;
        in_family = lam <= fam.theta.back() + 1e-12;
      } else {
        k1 = static_cast<std::size_t>(std::upper_bound(fam.theta.begin(), fam.theta.end(), lam) - fam.theta.begin());
        k0 = k1 - 1;
        w = (lam - fam.theta[k0]) / (fam.theta[k1] - fam.theta[k0]);
      }
      for (int i = 0; i < N; ++i) {
        const double a = fam.values[k0 * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)];
        const double b = fam.values[k1 * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)];
        ref_col[static_cast<std::size_t>(i)] = w == 0.0 ? a : (1.0 - w) * a + w * b;
      }
      Vec init = labels;
      init[ref - 1] = ref_col[0];
      const Mat others = reduce_vertical(spec, j, ref_col, init, xhat, t_samples, tl.lo);
      for (int i = 0; i < N; ++i) {
        const std::size_t f = col + static_cast<std::size_t>(i) * tstride;
        vals[static_cast<std::size_t>(ref - 1)][f] = ref_col[static_cast<std::size_t>(i)];
        int row = 0;
        for (int s = 1; s <= n; ++s)
          if (s != ref) vals[static_cast<std::size_t>(s - 1)][f] = others(row++, i);
      }
    } else {
      for (int i = 0; i < N; ++i) {
        const std::size_t f = col + static_cast<std::size_t>(i) * tstride;
        for (int s = 1; s <= n; ++s)
          vals[static_cast<std::size_t>(s - 1)][f] = vertical_line(spec, j, s, xhat, labels[s - 1], tl.at(i), tl.lo);
      }
    }
    for (int i = 0; i < N; ++i) {
      const std::size_t f = col + static_cast<std::size_t>(i) * tstride;
      Vec y(n);
      for (int s = 0; s < n; ++s) y[s] = vals[static_cast<std::size_t>(s)][f];
      inside[f] = in_family && g.contains(w_coords(spec, j, tl.at(i), xhat, y), 1e-9) ? 1.0 : 0.0;
    }
  }

  for (int s = 0; s < n; ++s) {
    ScalarField chi(L, std::move(vals[static_cast<std::size_t>(s)]));
    for (std::size_t f = 0; f < L.size(); ++f) chi.set_valid(f, inside[f] != 0.0);
    P.chi.push_back(std::move(chi));
  }
  P.meta = meta;
  if (ref != 0) {
    compute_curvature(spec, P, opt.cauchy_tol);
    extract_wbar(spec, field, P);
  }
  return P;
}

void compute_curvature(const GroupSpec& spec, LagrangianParam& P, double cauchy_tol) {
  const int ref = P.meta.reference;
  if (ref == 0) fail(ErrorCode::NoReferenceComponent, "every b^(s)_{j1} vanishes");
  const Grid& L = P.label_grid;
  const int N = L.axis(0).count;
  if (N < 5) fail(ErrorCode::GridTooCoarse, "label t-axis needs at least 5 points");
  const double h = L.axis(0).step();
  const double b = spec.b(ref, P.j, 1);
  const ScalarField& chi = P.chi[static_cast<std::size_t>(ref - 1)];
  const std::size_t ts = L.stride(0);
  std::vector<double> out(L.size());
  std::vector<std::uint8_t> ok(L.size());
  double sup = 0.0;
  for (std::size_t col = 0; col < ts; ++col) {
    const double* v = chi.values().data() + col;
    for (int i = 0; i < N; ++i) {
      const std::size_t f = col + static_cast<std::size_t>(i) * ts;
      const double d1 = second_diff(v, ts, i, 1, N) / (h * h) / b;
      const double d2 = second_diff(v, ts, i, 2, N) / (4.0 * h * h) / b;
      out[f] = d1;
      ok[f] = chi.valid(f) && std::abs(d1 - d2) <= cauchy_tol;
      sup = std::max(sup, std::abs(d1));
    }
  }
  P.curvature = ScalarField(L, std::move(out));
  for (std::size_t f = 0; f < L.size(); ++f) P.curvature.set_valid(f, ok[f] != 0);
  P.meta.wbar_sup = sup;
  P.meta.cauchy_tol = cauchy_tol;
}

ScalarField extract_wbar(const GroupSpec& spec, const ScalarField& field, LagrangianParam& P) {
  const int ref = P.meta.reference;
  if (ref == 0) fail(ErrorCode::NoReferenceComponent, "every b^(s)_{j1} vanishes");
  if (!(field.grid() == P.image_grid)) fail(ErrorCode::DimensionMismatch, "field grid differs from the image lattice");
  if (P.curvature.grid().size() != P.label_grid.size()) compute_curvature(spec, P, P.meta.cauchy_tol);
  const Grid& L = P.label_grid;
  const Grid& G = P.image_grid;
  const int m = spec.m(), n = spec.n();
  const int r = P.meta.t_refine;
  std::vector<double> vals(G.size(), 0.0);
  std::vector<std::uint8_t> set(G.size(), 0), ok(G.size(), 0);
  std::array<int, Grid::kMaxDim> li{}, gi{};
  for (std::size_t f = 0; f < L.size(); ++f) {
    if (!P.chi[static_cast<std::size_t>(ref - 1)].valid(f)) continue;
    L.unflat(f, li.data());
    if (li[0] % r != 0) continue;
    gi[static_cast<std::size_t>(P.j - 2)] = li[0] / r;
    int h = 1;
    for (int l = 2; l <= m; ++l)
      if (l != P.j) gi[static_cast<std::size_t>(l - 2)] = li[static_cast<std::size_t>(h++)];
    bool hit = true;
    for (int s = 1; s <= n && hit; ++s) {
      const Axis& a = G.axis(y_axis(spec, s));
      const double y = P.chi[static_cast<std::size_t>(s - 1)].value(f);
      const long q = std::lround((y - a.lo) / a.step());
      hit = q >= 0 && q < a.count;
      gi[static_cast<std::size_t>(y_axis(spec, s))] = static_cast<int>(q);
    }
    if (!hit) continue;
    const std::size_t g = G.flat(gi.data());
    if (set[g]) continue;
    set[g] = 1;
    vals[g] = P.curvature.value(f);
    ok[g] = P.curvature.valid(f);
  }
  ScalarField w(G, std::move(vals), Interp::PiecewiseConstant);
  std::size_t excluded = 0;
  for (std::size_t g = 0; g < G.size(); ++g) {
    w.set_valid(g, ok[g] != 0);
    excluded += ok[g] ? 0 : 1;
  }
  P.meta.excluded_fraction = static_cast<double>(excluded) / static_cast<double>(G.size());
  P.wbar = w;
  return w;
}

ParamDiagnostics diagnose_param(const GroupSpec& spec, const ScalarField& field, const LagrangianParam& P) {
  const Grid& L = P.label_grid;
  const Grid& G = P.image_grid;
  const int n = spec.n();
  const int N = L.axis(0).count;
  const double h = L.axis(0).step();
  ParamDiagnostics d;
  d.surjective = true;
  std::array<int, Grid::kMaxDim> idx{};
  for (std::size_t f = 0; f < L.size(); ++f) {
    L.unflat(f, idx.data());
    const Vec xhat = fibre_xhat(spec, L, idx.data());
    const double t = L.axis(0).at(idx[0]);
    for (int s = 1; s <= n; ++s) {
      const int a = y_axis(spec, s);
      const int k = idx[static_cast<std::size_t>(a)];
      const ScalarField& chi = P.chi[static_cast<std::size_t>(s - 1)];
      if (k > 0 && chi.value(f) < chi.value(f - L.stride(a)) - 1e-12) ++d.monotone_violations;
      if (k == 0) {
        const Axis& ya = G.axis(y_axis(spec, s));
        const double lo = chi.value(f);
        const double hi = chi.value(f + static_cast<std::size_t>(L.axis(a).count - 1) * L.stride(a));
        if (lo > ya.lo + ya.step() || hi < ya.hi - ya.step()) d.surjective = false;
      }
    }
    if (idx[0] == 0 || idx[0] == N - 1 || !P.chi[0].valid(f)) continue;
    Vec y(n);
    for (int s = 0; s < n; ++s) y[s] = P.chi[static_cast<std::size_t>(s)].value(f);
    const auto phi = field.try_eval(w_coords(spec, P.j, t, xhat, y));
    if (!phi) continue;
    for (int s = 1; s <= n; ++s) {
      const ScalarField& chi = P.chi[static_cast<std::size_t>(s - 1)];
      const double dt = (chi.value(f + L.stride(0)) - chi.value(f - L.stride(0))) / (2.0 * h);
      const double r = spec.b(s, P.j, 1) * *phi + line_slope(spec, P.j, s, t, xhat);
      d.consistency_gap = std::max(d.consistency_gap, std::abs(dt - r));
    }
  }
  return d;
}

VerificationReport verify_lagrangian(const GroupSpec& spec, const ScalarField& field, const LagrangianParam& P,
                                     const Datum& datum, const LagrangianTolerances& tol) {
  VerificationReport rep;
  const int j = P.j;
  const std::string sfx = ".j" + std::to_string(j);
  const int n = spec.n();
  const Grid& L = P.label_grid;
  const Grid& G = P.image_grid;
  const bool has_ref = P.meta.reference != 0 && P.curvature.grid().size() == L.size();

  // LS1
  {
    const auto t0 = std::chrono::steady_clock::now();
    CheckRecord rec{"lagrangian.ls1" + sfx, false, 0.0, tol.ls1, "label " + lattice_text(L), {}, 0.0};
    if (!has_ref) {
      rec.detail = "no coupled component";
    } else {
      const int N = L.axis(0).count;
      const double h = L.axis(0).step();
      const std::size_t ts = L.stride(0);
      const std::size_t stride = std::max<std::size_t>(1, ts / 4096);
      std::array<int, Grid::kMaxDim> idx{};
      long double acc = 0.0L;
      std::size_t count = 0;
      for (std::size_t col = 0; col < ts; col += stride) {
        L.unflat(col, idx.data());
        const Vec xhat = fibre_xhat(spec, L, idx.data());
        std::vector<double> g(static_cast<std::size_t>(N), std::numeric_limits<double>::quiet_NaN());
        for (int i = 0; i < N; ++i) {
          const std::size_t f = col + static_cast<std::size_t>(i) * ts;
          Vec y(n);
          for (int s = 0; s < n; ++s) y[s] = P.chi[static_cast<std::size_t>(s)].value(f);
          if (auto v = field.try_eval(w_coords(spec, j, L.axis(0).at(i), xhat, y))) g[static_cast<std::size_t>(i)] = *v;
        }
        for (int i = 1; i + 1 < N; ++i) {
          const std::size_t f = col + static_cast<std::size_t>(i) * ts;
          const double a = g[static_cast<std::size_t>(i - 1)], b = g[static_cast<std::size_t>(i + 1)];
          if (!P.curvature.valid(f) || std::isnan(a) || std::isnan(b)) continue;
          acc += std::abs((b - a) / (2.0 * h) - P.curvature.value(f));
          ++count;
        }
      }
      rec.measured = count ? static_cast<double>(acc / static_cast<long double>(count)) : std::numeric_limits<double>::quiet_NaN();
      rec.pass = count > 0 && rec.measured <= tol.ls1;
      rec.detail = "samples " + std::to_string(count);
    }
    rec.runtime_s = seconds_since(t0);
    rep.add(rec);
  }

  // LS2
  {
    const auto t0 = std::chrono::steady_clock::now();
    CheckRecord rec{"lagrangian.ls2" + sfx, false, 0.0, tol.ls2, "image " + lattice_text(G), {}, 0.0};
    const Axis& tax = G.axis(j - 2);
    const double delta = 2.0 * tax.step();
    std::vector<std::size_t> base;
    std::array<int, Grid::kMaxDim> idx{};
    for (std::size_t f = 0; f < G.size(); ++f) {
      if (P.wbar.grid().size() != G.size() || !P.wbar.valid(f)) continue;
      G.unflat(f, idx.data());
      bool interior = true;
      for (int k = 0; k < G.dim(); ++k) interior = interior && idx[static_cast<std::size_t>(k)] > 0 && idx[static_cast<std::size_t>(k)] < G.axis(k).count - 1;
      const double t = tax.at(idx[static_cast<std::size_t>(j - 2)]);
      if (interior && t - delta >= tax.lo && t + delta <= tax.hi) base.push_back(f);
    }
    const std::size_t stride = std::max<std::size_t>(1, base.size() / static_cast<std::size_t>(std::max(1, tol.ls2_points)));
    std::size_t tried = 0, stable = 0;
    double worst = 0.0;
    for (std::size_t q = 0; q < base.size(); q += stride) {
      const std::size_t f = base[q];
      const Vec a = G.node(f);
      const double t = a[j - 2];
      Vec xhat(spec.m() - 2);
      int h = 0;
      for (int l = 2; l <= spec.m(); ++l)
        if (l != j) xhat[h++] = a[l - 2];
      const Vec y0 = a.tail(n);
      ++tried;
      try {
        const Characteristic fw = integrate(spec, field, j, xhat, y0, {t, t + delta}, delta / 16.0);
        const Characteristic bw = integrate(spec, field, j, xhat, y0, {t, t - delta}, delta / 16.0);
        if (fw.truncated || bw.truncated || fw.t.size() < 17 || bw.t.size() < 17) continue;
        auto phi_at = [&](const Characteristic& c, int k) {
          return field.try_eval(w_coords(spec, j, c.t[static_cast<std::size_t>(k)], xhat, c.gamma.col(k)));
        };
        const auto p16 = phi_at(fw, 16), m16 = phi_at(bw, 16), p8 = phi_at(fw, 8), m8 = phi_at(bw, 8);
        if (!p16 || !m16 || !p8 || !m8) continue;
        const double d_full = (*p16 - *m16) / (2.0 * delta);
        const double d_half = (*p8 - *m8) / delta;
        if (std::abs(d_full - d_half) > tol.ls2_stability) continue;
        ++stable;
        worst = std::max(worst, std::abs(d_half - P.wbar.value(f)));
      } catch (const Error&) {
        continue;
      }
    }
    rec.measured = stable ? worst : std::numeric_limits<double>::quiet_NaN();
    rec.pass = stable > 0 && worst <= tol.ls2;
    std::ostringstream os;
    os << "coverage " << stable << "/" << tried;
    rec.detail = os.str();
    rec.runtime_s = seconds_since(t0);
    rep.add(rec);
  }

  // LS3
  {
    const auto t0 = std::chrono::steady_clock::now();
    const double vol = G.volume();
    CheckRecord rec{"lagrangian.ls3" + sfx, false, 0.0, tol.ls3 * vol, "image " + lattice_text(G), {}, 0.0};
    if (!has_ref || P.wbar.grid().size() != G.size()) {
      rec.detail = "no coupled component";
    } else {
      const ScalarField& w = datum.w(j);
      long double acc = 0.0L;
      std::size_t count = 0;
      for (std::size_t f = 0; f < G.size(); ++f) {
        if (!P.wbar.valid(f)) continue;
        const auto v = w.try_eval(G.node(f));
        if (!v) continue;
        acc += std::abs(P.wbar.value(f) - *v);
        ++count;
      }
      const double excluded = 1.0 - static_cast<double>(count) / static_cast<double>(G.size());
      rec.measured = count ? static_cast<double>(acc / static_cast<long double>(count)) * vol
                           : std::numeric_limits<double>::quiet_NaN();
      rec.pass = count > 0 && rec.measured <= rec.tolerance && excluded <= tol.max_excluded;
      std::ostringstream os;
      os << "excluded " << excluded;
      rec.detail = os.str();
    }
    rec.runtime_s = seconds_since(t0);
    rep.add(rec);
  }
  return rep;
}

double lattice_l1(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) fail(ErrorCode::DimensionMismatch, "fields live on different lattices");
  long double acc = 0.0L;
  std::size_t count = 0;
  for (std::size_t f = 0; f < a.grid().size(); ++f) {
    if (!a.valid(f) || !b.valid(f)) continue;
    acc += std::abs(a.value(f) - b.value(f));
    ++count;
  }
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(acc / static_cast<long double>(count)) * a.grid().volume();
}

}  // namespace carnot
