#include "carnot/characteristics.hpp"

#include "carnot/error.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

const char* to_string(Flavor f) noexcept {
  switch (f) {
    case Flavor::Plain: return "plain";
    case Flavor::Minimal: return "minimal";
    case Flavor::Maximal: return "maximal";
    case Flavor::MinForwardMaxBackward: return "min_forward_max_backward";
  }
  return "plain";
}

Vec w_coords(const GroupSpec& spec, int j, double t, const Vec& xhat, const Vec& y) {
  const int mw = spec.m() - 1;
  Vec a(mw + spec.n());
  int h = 0;
  for (int l = 2; l <= spec.m(); ++l) a[l - 2] = (l == j) ? t : xhat[h++];
  a.tail(spec.n()) = y;
  return a;
}

int reference_component(const GroupSpec& spec, int j) {
  if (j < 2 || j > spec.m()) fail(ErrorCode::IndexOutOfRange, "derivative index must be in 2..m");
  for (int s = 1; s <= spec.n(); ++s)
    if (spec.b(s, j, 1) != 0.0) return s;
  return 0;
}

double line_slope(const GroupSpec& spec, int j, int s, double t, const Vec& xhat) {
  double acc = 0.0;
  int h = 0;
  for (int l = 2; l <= spec.m(); ++l) acc += spec.b(s, j, l) * ((l == j) ? t : xhat[h++]);
  return 0.5 * acc;
}

double rhs(const GroupSpec& spec, const ScalarField& field, int j, int s, double t, const Vec& xhat,
           const Vec& gamma_t) {
  const double phi = field(w_coords(spec, j, t, xhat, gamma_t));
  return spec.b(s, j, 1) * phi + line_slope(spec, j, s, t, xhat);
}

namespace {

struct StepPlan {
  int count = 0;
  double h = 0.0;
};

StepPlan plan(double t0, double t1, double step) {
  if (!(step > 0.0)) fail(ErrorCode::BadParams, "step must be positive");
  const double len = std::abs(t1 - t0);
  if (len == 0.0) return {0, 0.0};
  const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
  return {n, (t1 - t0) / n};
}

struct Rk4Step {
  double y = 0.0;
  bool stiff = false;  // h times the slope seen by the midpoint stages exceeds 2
};

template <class F>
Rk4Step rk4_step(const F& f, double t, double y, double h) {
  const double k1 = f(t, y);
  const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = f(t + h, y + h * k3);
  const double dy = 0.5 * h * (k2 - k1);
  const bool stiff = dy != 0.0 && std::abs(h * (k3 - k2)) > 2.0 * std::abs(dy);
  return {y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), stiff};
}

constexpr double kSplitTol = 1e-10;
constexpr int kMaxSplit = 8;

// One step of size h, halved recursively while it is stiff or a step and two
// half steps disagree.
template <class F>
double rk4_split(const F& f, double t, double y, double h, int depth) {
  const Rk4Step full = rk4_step(f, t, y, h);
  const Rk4Step mid = rk4_step(f, t, y, 0.5 * h);
  const Rk4Step two = rk4_step(f, t + 0.5 * h, mid.y, 0.5 * h);
  if (depth >= kMaxSplit ||
      (!full.stiff && std::abs(full.y - two.y) <= kSplitTol * std::max(1.0, std::abs(two.y))))
    return two.y;
  const double left = rk4_split(f, t, y, 0.5 * h, depth + 1);
  return rk4_split(f, t + 0.5 * h, left, 0.5 * h, depth + 1);
}

template <class F>
std::vector<double> rk4_scalar(const F& f, double t0, double z0, const StepPlan& p) {
  std::vector<double> z(static_cast<std::size_t>(p.count) + 1);
  z[0] = z0;
  double y = z0;
  for (int i = 0; i < p.count; ++i) {
    y = rk4_split(f, t0 + i * p.h, y, p.h, 0);
    z[static_cast<std::size_t>(i) + 1] = y;
  }
  return z;
}

}  // namespace

Characteristic integrate(const GroupSpec& spec, const ScalarField& field, int j, const Vec& xhat,
                         const Vec& y0, Interval interval, double step) {
  if (j < 2 || j > spec.m()) fail(ErrorCode::IndexOutOfRange, "derivative index must be in 2..m");
  const int n = spec.n();
  const Grid& g = field.grid();
  if (!g.contains(w_coords(spec, j, interval.t0, xhat, y0)))
    fail(ErrorCode::OutOfDomain, "initial point outside the field box");

  const StepPlan p = plan(interval.t0, interval.t1, step);
  Vec b1(n), slope(n);
  for (int s = 1; s <= n; ++s) {
    b1[s - 1] = spec.b(s, j, 1);
    slope[s - 1] = line_slope(spec, j, s, 0.0, xhat);
  }
  auto f = [&](double t, const Vec& y) -> Vec {
    const double phi = field.at_clamped(w_coords(spec, j, t, xhat, y));
    return b1 * phi + slope;
  };

  Characteristic c;
  c.j = j;
  c.xhat = xhat;
  c.flavor = Flavor::Plain;
  std::vector<Vec> states{y0};
  c.t.push_back(interval.t0);
  Vec y = y0;
  const double h = p.h;
  for (int i = 0; i < p.count; ++i) {
    const double t = interval.t0 + i * h;
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = f(t + h, y + h * k3);
    const Vec next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tn = interval.t0 + (i + 1) * h;
    if (!g.contains(w_coords(spec, j, tn, xhat, next), 1e-12)) {
      if (i == 0) fail(ErrorCode::ImmediateExit, "trajectory leaves the domain on the first step");
      c.truncated = true;
      break;
    }
    y = next;
    for (int s = 0; s < n; ++s) {
      const Axis& ax = g.axis(spec.m() - 1 + s);
      y[s] = std::clamp(y[s], ax.lo, ax.hi);
    }
    states.push_back(y);
    c.t.push_back(tn);
  }

  c.gamma.resize(n, static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) c.gamma.col(static_cast<Eigen::Index>(k)) = states[k];
  for (int s = 0; s < n; ++s) {
    if (b1[s] != 0.0) continue;
    for (std::size_t k = 0; k < c.t.size(); ++k)
      c.gamma(s, static_cast<Eigen::Index>(k)) = y0[s] + (c.t[k] - interval.t0) * slope[s];
  }
  return c;
}

double vertical_line(const GroupSpec& spec, int j, int s, const Vec& xhat, double y_init, double t,
                     double t_init) {
  return y_init + (t - t_init) * line_slope(spec, j, s, 0.0, xhat);
}

Mat reduce_vertical(const GroupSpec& spec, int j, const std::vector<double>& gamma_ref,
                    const Vec& init_y, const Vec& xhat, const std::vector<double>& t_samples,
                    double t_init) {
  const int ref = reference_component(spec, j);
  if (ref == 0) fail(ErrorCode::NoReferenceComponent, "every b^(s)_{j1} vanishes");
  if (gamma_ref.size() != t_samples.size()) fail(ErrorCode::DimensionMismatch, "samples differ in length");
  const int n = spec.n();
  const double bref = spec.b(ref, j, 1);
  const double lref = line_slope(spec, j, ref, 0.0, xhat);
  Mat out(n - 1, static_cast<Eigen::Index>(t_samples.size()));
  int row = 0;
  for (int s = 1; s <= n; ++s) {
    if (s == ref) continue;
    const double alpha = spec.b(s, j, 1) / bref;
    const double ls = line_slope(spec, j, s, 0.0, xhat);
    for (std::size_t k = 0; k < t_samples.size(); ++k) {
      const double dt = t_samples[k] - t_init;
      out(row, static_cast<Eigen::Index>(k)) =
          alpha * gamma_ref[k] + dt * (ls - alpha * lref) + (init_y[s - 1] - alpha * init_y[ref - 1]);
    }
    ++row;
  }
  return out;
}

ReducedEquation::ReducedEquation(const GroupSpec& spec, const ScalarField& field, int j, Vec xhat,
                                 Vec y_bar, double t_bar)
    : spec_(&spec), field_(&field), j_(j), ref_(reference_component(spec, j)), xhat_(std::move(xhat)),
      y_bar_(std::move(y_bar)), t_bar_(t_bar) {
  if (ref_ == 0) fail(ErrorCode::NoReferenceComponent, "every b^(s)_{j1} vanishes");
  const int n = spec.n();
  b_ref_ = spec.b(ref_, j, 1);
  const double lref = line_slope(spec, j, ref_, 0.0, xhat_);
  line_ref_ = lref;
  alpha_.resize(n);
  offset_slope_.resize(n);
  for (int s = 1; s <= n; ++s) {
    alpha_[s - 1] = spec.b(s, j, 1) / b_ref_;
    offset_slope_[s - 1] = line_slope(spec, j, s, 0.0, xhat_) - alpha_[s - 1] * lref;
  }
  scratch_ = w_coords(spec, j, t_bar, xhat_, y_bar_);
}

Vec ReducedEquation::components(double t, double z) const {
  const int n = spec_->n();
  Vec y(n);
  const double zbar = y_bar_[ref_ - 1];
  for (int s = 0; s < n; ++s)
    y[s] = alpha_[s] * z + (t - t_bar_) * offset_slope_[s] + (y_bar_[s] - alpha_[s] * zbar);
  y[ref_ - 1] = z;
  return y;
}

double ReducedEquation::operator()(double t, double z) const {
  const int mw = spec_->m() - 1;
  const int n = spec_->n();
  scratch_[j_ - 2] = t;
  const double zbar = y_bar_[ref_ - 1];
  for (int s = 0; s < n; ++s)
    scratch_[mw + s] = alpha_[s] * z + (t - t_bar_) * offset_slope_[s] + (y_bar_[s] - alpha_[s] * zbar);
  scratch_[mw + ref_ - 1] = z;
  return b_ref_ * field_->at_clamped(scratch_) + line_ref_;
}

std::vector<double> default_eps_sequence() {
  std::vector<double> seq;
  for (int k = 3; k <= 12; ++k) seq.push_back(std::ldexp(1.0, -k));
  return seq;
}

namespace {

// Samples of the scalar branch over [t_a, t_b], glued at t_bar.
struct Branch {
  std::vector<double> t;
  std::vector<double> z;
};

Branch solve_branch(const ReducedEquation& F, double t_bar, double z_bar, Interval iv, double step,
                    double fwd_shift, double bwd_shift) {
  const StepPlan back = plan(t_bar, iv.t0, step);
  const StepPlan fwd = plan(t_bar, iv.t1, step);
  const auto zb = rk4_scalar([&](double t, double z) { return F(t, z) + bwd_shift; }, t_bar, z_bar, back);
  const auto zf = rk4_scalar([&](double t, double z) { return F(t, z) + fwd_shift; }, t_bar, z_bar, fwd);
  Branch b;
  for (int i = back.count; i >= 1; --i) {
    b.t.push_back(t_bar + i * back.h);
    b.z.push_back(zb[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i <= fwd.count; ++i) {
    b.t.push_back(t_bar + i * fwd.h);
    b.z.push_back(zf[static_cast<std::size_t>(i)]);
  }
  return b;
}

std::vector<double> richardson(const std::vector<double>& coarse, double e0,
                               const std::vector<double>& fine, double e1) {
  std::vector<double> out(fine.size());
  for (std::size_t k = 0; k < fine.size(); ++k) out[k] = (e0 * fine[k] - e1 * coarse[k]) / (e0 - e1);
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

MinMaxPair min_max_through(const GroupSpec& spec, const ScalarField& field, int j,
                           const ThroughPoint& point, Interval interval, double step,
                           const std::vector<double>& eps_seq, double gap_tol) {
  if (!(interval.t0 <= point.t_bar && point.t_bar <= interval.t1))
    fail(ErrorCode::OutOfDomain, "t_bar outside the interval");
  const int ref = reference_component(spec, j);
  MinMaxPair out;
  if (ref == 0) {
    Characteristic c;
    c.j = j;
    c.xhat = point.xhat;
    const StepPlan back = plan(point.t_bar, interval.t0, step);
    const StepPlan ahead = plan(point.t_bar, interval.t1, step);
    for (int i = back.count; i >= 1; --i) c.t.push_back(point.t_bar + i * back.h);
    for (int i = 0; i <= ahead.count; ++i) c.t.push_back(point.t_bar + i * ahead.h);
    c.gamma.resize(spec.n(), static_cast<Eigen::Index>(c.t.size()));
    for (int s = 1; s <= spec.n(); ++s)
      for (std::size_t k = 0; k < c.t.size(); ++k)
        c.gamma(s - 1, static_cast<Eigen::Index>(k)) =
            vertical_line(spec, j, s, point.xhat, point.y_bar[s - 1], c.t[k], point.t_bar);
    out.minimal = c;
    out.maximal = c;
    out.minimal.flavor = Flavor::Minimal;
    out.maximal.flavor = Flavor::Maximal;
    return out;
  }
  if (eps_seq.empty()) fail(ErrorCode::BadParams, "empty eps sequence");
  for (std::size_t k = 1; k < eps_seq.size(); ++k)
    if (!(eps_seq[k] < eps_seq[k - 1]) || !(eps_seq[k] > 0.0))
      fail(ErrorCode::BadParams, "eps sequence must be positive and decreasing");

  const ReducedEquation F(spec, field, j, point.xhat, point.y_bar, point.t_bar);
  const double z_bar = point.y_bar[ref - 1];

  std::vector<std::vector<double>> lo, hi;
  std::vector<double> t;
  for (double e : eps_seq) {
    Branch bl = solve_branch(F, point.t_bar, z_bar, interval, step, -e, +e);
    Branch bh = solve_branch(F, point.t_bar, z_bar, interval, step, +e, -e);
    t = bl.t;
    lo.push_back(std::move(bl.z));
    hi.push_back(std::move(bh.z));
  }

  std::vector<double> zmin = lo.back(), zmax = hi.back();
  double gap = 0.0;
  const std::size_t K = eps_seq.size();
  if (K >= 2) {
    std::vector<std::vector<double>> rl, rh;
    for (std::size_t k = 1; k < K; ++k) {
      rl.push_back(richardson(lo[k - 1], eps_seq[k - 1], lo[k], eps_seq[k]));
      rh.push_back(richardson(hi[k - 1], eps_seq[k - 1], hi[k], eps_seq[k]));
    }
    zmin = rl.back();
    zmax = rh.back();
    if (rl.size() >= 2) {
      gap = std::max(sup_diff(rl[rl.size() - 1], rl[rl.size() - 2]),
                     sup_diff(rh[rh.size() - 1], rh[rh.size() - 2]));
    } else {
      gap = std::max(sup_diff(lo[K - 1], lo[K - 2]), sup_diff(hi[K - 1], hi[K - 2]));
    }
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double a = std::min(zmin[k], zmax[k]);
    const double b = std::max(zmin[k], zmax[k]);
    zmin[k] = a;
    zmax[k] = b;
  }
  if (gap > gap_tol) fail(ErrorCode::NonConvergent, "Cauchy gap " + std::to_string(gap));

  auto build = [&](const std::vector<double>& z, Flavor fl) {
    Characteristic c;
    c.j = j;
    c.xhat = point.xhat;
    c.t = t;
    c.flavor = fl;
    c.cauchy_gap = gap;
    c.gamma.resize(spec.n(), static_cast<Eigen::Index>(t.size()));
    for (std::size_t k = 0; k < t.size(); ++k) c.gamma.col(static_cast<Eigen::Index>(k)) = F.components(t[k], z[k]);
    return c;
  };
  out.minimal = build(zmin, Flavor::Minimal);
  out.maximal = build(zmax, Flavor::Maximal);
  out.gap = gap;
  return out;
}

}  // namespace carnot
