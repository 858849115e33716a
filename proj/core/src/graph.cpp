#include "carnot/graph.hpp"

#include "carnot/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace carnot {

WPoint::WPoint(const Vec& xw, const Vec& y) : a_(xw.size() + y.size()), m_(static_cast<int>(xw.size()) + 1) {
  a_.head(xw.size()) = xw;
  a_.tail(y.size()) = y;
}

WPoint WPoint::from_coords(int m, Vec a) {
  WPoint w;
  w.a_ = std::move(a);
  w.m_ = m;
  return w;
}

Point embed(const GroupSpec& spec, const WPoint& a) {
  if (a.coords().size() != spec.dim() - 1) fail(ErrorCode::DimensionMismatch, "WPoint has wrong length");
  Point p(spec.m(), spec.n());
  p.coords().tail(spec.dim() - 1) = a.coords();
  return p;
}

Point v_element(const GroupSpec& spec, double v) {
  Point p(spec.m(), spec.n());
  p.coords()[0] = v;
  return p;
}

Splitting project_canonical(const GroupSpec& spec, const Point& p) {
  // i(a).(v e1) = (v, xw, y_a - v/2 * sum_k b_{1k} x_k)
  const double v = p.x()[0];
  Vec y = p.y();
  for (int s = 0; s < spec.n(); ++s) y[s] += 0.5 * v * spec.B()[s].row(0).dot(p.x());
  return {WPoint(p.x().tail(spec.m() - 1), y), v};
}

Point graph_point(const GroupSpec& spec, const ScalarField& field, const WPoint& a) {
  return multiply(spec, embed(spec, a), v_element(spec, field(a.coords())));
}

double shift_quantity(const GroupSpec& spec, const ScalarField& field, const WPoint& a,
                      const WPoint& b) {
  const Point va = v_element(spec, field(a.coords()));
  field(b.coords());
  const Point g = multiply(spec, inverse(spec, embed(spec, a)), embed(spec, b));
  return hnorm(spec, multiply(spec, multiply(spec, inverse(spec, va), g), va));
}

namespace {

// Lattice nodes cached in the form the pair kernels need.
struct NodeCache {
  int mw = 0;  // m - 1
  int n = 0;
  std::vector<std::size_t> flat;
  Mat xw;    // (m-1) x N
  Mat y;     // n x N
  Mat Bxw;   // n*(m-1) x N : rows s*(m-1)+k hold (B^(s)_{ww} xw)_k
  Vec phi;
  Mat col1;  // n x (m-1): b^(s)_{k1}, k >= 2
};

NodeCache build_cache(const GroupSpec& spec, const ScalarField& field, int stride) {
  const Grid& g = field.grid();
  NodeCache c;
  c.mw = spec.m() - 1;
  c.n = spec.n();
  std::array<int, Grid::kMaxDim> idx{};
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!field.valid(f)) continue;
    g.unflat(f, idx.data());
    bool keep = true;
    for (int k = 0; k < g.dim() && keep; ++k) keep = idx[static_cast<std::size_t>(k)] % stride == 0;
    if (keep) c.flat.push_back(f);
  }
  const Eigen::Index N = static_cast<Eigen::Index>(c.flat.size());
  c.xw.resize(c.mw, N);
  c.y.resize(c.n, N);
  c.Bxw.resize(c.n * c.mw, N);
  c.phi.resize(N);
  c.col1.resize(c.n, c.mw);
  for (int s = 0; s < c.n; ++s)
    for (int k = 0; k < c.mw; ++k) c.col1(s, k) = spec.B()[s](k + 1, 0);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec a = g.node(c.flat[static_cast<std::size_t>(i)]);
    c.xw.col(i) = a.head(c.mw);
    c.y.col(i) = a.tail(c.n);
    c.phi[i] = field.value(c.flat[static_cast<std::size_t>(i)]);
    for (int s = 0; s < c.n; ++s)
      c.Bxw.block(s * c.mw, i, c.mw, 1) = spec.B()[s].bottomRightCorner(c.mw, c.mw) * c.xw.col(i);
  }
  return c;
}

// Closed form of phi(a)^-1 i(a)^-1 i(b) phi(a); agrees with shift_quantity.
double fast_shift(const GroupSpec& spec, const NodeCache& c, Eigen::Index ia, Eigen::Index ib) {
  double hx2 = 0.0;
  for (int k = 0; k < c.mw; ++k) {
    const double d = c.xw(k, ib) - c.xw(k, ia);
    hx2 += d * d;
  }
  double vy2 = 0.0;
  const double phi_a = c.phi[ia];
  for (int s = 0; s < c.n; ++s) {
    double v = c.y(s, ib) - c.y(s, ia);
    double bil = 0.0, lin = 0.0;
    for (int k = 0; k < c.mw; ++k) {
      bil += c.xw(k, ib) * c.Bxw(s * c.mw + k, ia);
      lin += c.col1(s, k) * (c.xw(k, ib) - c.xw(k, ia));
    }
    v += 0.5 * bil + phi_a * lin;
    vy2 += v * v;
  }
  return std::max(std::sqrt(hx2), spec.eps() * std::sqrt(std::sqrt(vy2)));
}

template <class Visit>
PairEstimate for_each_pair(std::size_t N, const PairSampling& sampling, Visit&& visit) {
  PairEstimate est;
  if (N < 2) return est;
  const std::size_t ordered = N * (N - 1);
  if (ordered <= sampling.max_exhaustive) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (i != j) visit(i, j);
    est.pairs = ordered;
    est.exhaustive = true;
  } else {
    std::mt19937_64 rng(sampling.seed);
    std::uniform_int_distribution<std::size_t> pick(0, N - 1);
    for (std::size_t r = 0; r < sampling.random_pairs; ++r) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (j == i) j = (j + 1) % N;
      visit(i, j);
    }
    est.pairs = sampling.random_pairs;
    est.exhaustive = false;
  }
  return est;
}

RefinementStudy refine(const ScalarField& field, int levels, double min_rate,
                       const std::function<PairEstimate(int)>& run) {
  RefinementStudy st;
  double base = 0.0;
  for (const Axis& ax : field.grid().axes()) base = std::max(base, ax.step());
  for (int l = levels - 1; l >= 0; --l) {
    const int stride = 1 << l;
    st.spacing.push_back(base * stride);
    st.estimate.push_back(run(stride).value);
  }
  bool all = st.estimate.size() >= 2;
  for (std::size_t k = 1; k < st.estimate.size(); ++k) {
    const double prev = st.estimate[k - 1];
    const double cur = st.estimate[k];
    const double r = (prev > 0.0 && cur > 0.0) ? std::log2(cur / prev) : 0.0;
    st.rate.push_back(r);
    if (!(r >= min_rate)) all = false;
  }
  st.diverging = all;
  return st;
}

}  // namespace

PairEstimate estimate_lipschitz(const GroupSpec& spec, const ScalarField& field,
                                const PairSampling& sampling) {
  const NodeCache c = build_cache(spec, field, std::max(1, sampling.stride));
  double sup = 0.0;
  PairEstimate est = for_each_pair(c.flat.size(), sampling, [&](std::size_t i, std::size_t j) {
    const auto ia = static_cast<Eigen::Index>(i);
    const auto ib = static_cast<Eigen::Index>(j);
    const double num = std::abs(c.phi[ib] - c.phi[ia]);
    const double den = fast_shift(spec, c, ia, ib);
    if (den < kDegenerateShift) {
      if (num > 1e-9) fail(ErrorCode::DegeneratePair, "zero shift with nonzero increment");
      return;
    }
    sup = std::max(sup, num / den);
  });
  est.value = sup;
  return est;
}

PairEstimate estimate_vertical_holder(const GroupSpec& spec, const ScalarField& field,
                                      const PairSampling& sampling) {
  const NodeCache c = build_cache(spec, field, std::max(1, sampling.stride));
  // Group nodes sharing x_w into fibres.
  std::vector<std::vector<Eigen::Index>> fibres;
  {
    std::vector<std::pair<std::vector<double>, Eigen::Index>> keyed;
    for (Eigen::Index i = 0; i < c.xw.cols(); ++i) {
      std::vector<double> key(c.xw.col(i).data(), c.xw.col(i).data() + c.mw);
      keyed.emplace_back(std::move(key), i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k == 0 || keyed[k].first != keyed[k - 1].first) fibres.emplace_back();
      fibres.back().push_back(keyed[k].second);
    }
  }
  auto ratio = [&](Eigen::Index a, Eigen::Index b) {
    const double dy = (c.y.col(b) - c.y.col(a)).norm();
    if (dy <= 0.0) return 0.0;
    return std::abs(c.phi[b] - c.phi[a]) / std::sqrt(dy);
  };

  std::size_t total = 0;
  for (const auto& f : fibres) total += f.size() * (f.size() - 1) / 2;
  PairEstimate est;
  double sup = 0.0;
  if (total <= sampling.max_exhaustive) {
    for (const auto& f : fibres)
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j) sup = std::max(sup, ratio(f[i], f[j]));
    est.pairs = total;
    est.exhaustive = true;
  } else {
    std::mt19937_64 rng(sampling.seed);
    std::uniform_int_distribution<std::size_t> pick_f(0, fibres.size() - 1);
    for (std::size_t r = 0; r < sampling.random_pairs; ++r) {
      const auto& f = fibres[pick_f(rng)];
      if (f.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> pick(0, f.size() - 1);
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (j == i) j = (j + 1) % f.size();
      sup = std::max(sup, ratio(f[i], f[j]));
    }
    est.pairs = sampling.random_pairs;
    est.exhaustive = false;
  }
  est.value = sup;
  return est;
}

RefinementStudy refine_lipschitz(const GroupSpec& spec, const ScalarField& field,
                                 const PairSampling& sampling, int levels, double min_rate) {
  return refine(field, levels, min_rate, [&](int stride) {
    PairSampling s = sampling;
    s.stride = stride;
    return estimate_lipschitz(spec, field, s);
  });
}

RefinementStudy refine_vertical_holder(const GroupSpec& spec, const ScalarField& field,
                                       const PairSampling& sampling, int levels, double min_rate) {
  return refine(field, levels, min_rate, [&](int stride) {
    PairSampling s = sampling;
    s.stride = stride;
    return estimate_vertical_holder(spec, field, s);
  });
}

SplitBounds estimate_split_constant(const GroupSpec& spec, const ScalarField& field,
                                    const PairSampling& sampling) {
  const NodeCache c = build_cache(spec, field, std::max(1, sampling.stride));
  const Grid& g = field.grid();
  std::vector<Point> graph;
  graph.reserve(c.flat.size());
  for (std::size_t f : c.flat)
    graph.push_back(graph_point(spec, field, WPoint::from_coords(spec.m(), g.node(f))));
  SplitBounds out;
  out.c0 = std::numeric_limits<double>::infinity();
  PairEstimate est = for_each_pair(c.flat.size(), sampling, [&](std::size_t i, std::size_t j) {
    const double sh = fast_shift(spec, c, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (sh < kDegenerateShift) return;
    const double d = distance(spec, graph[i], graph[j]);
    out.c0 = std::min(out.c0, d / sh);
    out.upper = std::max(out.upper, d / sh);
  });
  out.pairs = est.pairs;
  return out;
}

ScalarField translate_graph(const GroupSpec& spec, const ScalarField& field, const Point& q) {
  const Grid& g = field.grid();
  const int d = g.dim();
  Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(d, -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!field.valid(f)) continue;
    const WPoint a = WPoint::from_coords(spec.m(), g.node(f));
    const Point img = multiply(spec, q, graph_point(spec, field, a));
    const Vec w = project_canonical(spec, img).a.coords();
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  if (!std::isfinite(lo.sum())) fail(ErrorCode::EmptyTranslatedDomain, "field has no valid nodes");

  std::vector<Axis> axes;
  for (int k = 0; k < d; ++k) {
    double a = lo[k], b = hi[k];
    if (!(b > a)) {
      a -= 0.5 * g.axis(k).step();
      b += 0.5 * g.axis(k).step();
    }
    axes.push_back({a, b, g.axis(k).count});
  }
  Grid out_grid(axes);

  const Point qinv = inverse(spec, q);
  std::vector<double> vals(out_grid.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t valid = 0;
  for (std::size_t f = 0; f < out_grid.size(); ++f) {
    const WPoint a = WPoint::from_coords(spec.m(), out_grid.node(f));
    const Splitting sp = project_canonical(spec, multiply(spec, qinv, embed(spec, a)));
    if (auto phi = field.try_eval(sp.a.coords())) {
      vals[f] = *phi - sp.v;
      ++valid;
    }
  }
  if (valid == 0) fail(ErrorCode::EmptyTranslatedDomain);
  return ScalarField(out_grid, std::move(vals), field.interp());
}

}  // namespace carnot
