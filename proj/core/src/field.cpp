#include "carnot/field.hpp"

#include "carnot/error.hpp"
#include "toml_util.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace carnot {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || static_cast<int>(axes_.size()) > kMaxDim)
    fail(ErrorCode::DimensionOutOfRange, "grid dimension must be in 1..16");
  for (const Axis& ax : axes_) {
    if (ax.count < 2) fail(ErrorCode::GridTooCoarse, "every axis needs at least 2 points");
    if (!(ax.hi > ax.lo)) fail(ErrorCode::BadParams, "axis needs hi > lo");
  }
  strides_.assign(axes_.size(), 1);
  for (int k = dim() - 2; k >= 0; --k)
    strides_[static_cast<std::size_t>(k)] =
        strides_[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(axes_[static_cast<std::size_t>(k) + 1].count);
  size_ = strides_[0] * static_cast<std::size_t>(axes_[0].count);
}

std::size_t Grid::flat(const int* idx) const noexcept {
  std::size_t f = 0;
  for (int k = 0; k < dim(); ++k) f += strides_[static_cast<std::size_t>(k)] * static_cast<std::size_t>(idx[k]);
  return f;
}

void Grid::unflat(std::size_t f, int* idx) const noexcept {
  for (int k = 0; k < dim(); ++k) {
    const std::size_t s = strides_[static_cast<std::size_t>(k)];
    idx[k] = static_cast<int>(f / s);
    f %= s;
  }
}

std::vector<int> Grid::unflat(std::size_t f) const {
  std::vector<int> idx(axes_.size());
  unflat(f, idx.data());
  return idx;
}

Vec Grid::node(std::size_t f) const {
  std::array<int, kMaxDim> idx{};
  unflat(f, idx.data());
  Vec a(dim());
  for (int k = 0; k < dim(); ++k) a[k] = axes_[static_cast<std::size_t>(k)].at(idx[static_cast<std::size_t>(k)]);
  return a;
}

bool Grid::contains(const Vec& a, double tol) const {
  if (a.size() != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    const Axis& ax = axes_[static_cast<std::size_t>(k)];
    const double pad = tol * std::max(1.0, ax.hi - ax.lo);
    if (!(a[k] >= ax.lo - pad && a[k] <= ax.hi + pad)) return false;
  }
  return true;
}

Vec Grid::clamp(const Vec& a) const {
  Vec out = a;
  for (int k = 0; k < dim(); ++k) {
    const Axis& ax = axes_[static_cast<std::size_t>(k)];
    out[k] = std::min(std::max(out[k], ax.lo), ax.hi);
  }
  return out;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (const Axis& ax : axes_) v *= ax.step();
  return v;
}

double Grid::volume() const {
  double v = 1.0;
  for (const Axis& ax : axes_) v *= ax.hi - ax.lo;
  return v;
}

bool Grid::operator==(const Grid& o) const {
  if (o.dim() != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    const Axis& a = axes_[static_cast<std::size_t>(k)];
    const Axis& b = o.axes_[static_cast<std::size_t>(k)];
    if (a.count != b.count || a.lo != b.lo || a.hi != b.hi) return false;
  }
  return true;
}

ScalarField::ScalarField(Grid grid, std::vector<double> values, Interp interp)
    : grid_(std::move(grid)), values_(std::move(values)), interp_(interp) {
  if (interp_ == Interp::Exact) fail(ErrorCode::BadParams, "use ScalarField::exact for closed-form fields");
  if (values_.size() != grid_.size())
    fail(ErrorCode::DimensionMismatch, "value count does not match the lattice");
  valid_.assign(values_.size(), 1);
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) {
      values_[i] = 0.0;
      valid_[i] = 0;
    }
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(const Vec&)>& f,
                                Interp interp) {
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid.node(i));
  return ScalarField(grid, std::move(vals), interp);
}

ScalarField ScalarField::exact(const Grid& grid, std::function<double(const Vec&)> f) {
  ScalarField out = sample(grid, f);
  out.exact_ = std::make_shared<const std::function<double(const Vec&)>>(std::move(f));
  out.interp_ = Interp::Exact;
  return out;
}

std::size_t ScalarField::valid_count() const {
  std::size_t c = 0;
  for (auto v : valid_) c += v;
  return c;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (valid_[i]) m = std::max(m, std::abs(values_[i]));
  return m;
}

ScalarField ScalarField::with_interp(Interp interp) const {
  if (interp == Interp::Exact && !exact_) fail(ErrorCode::BadParams, "field has no closed form");
  ScalarField out = *this;
  out.interp_ = interp;
  return out;
}

std::optional<double> ScalarField::eval_inside(const Vec& a) const {
  if (interp_ == Interp::Exact) return (*exact_)(a);
  const int d = grid_.dim();
  std::array<int, Grid::kMaxDim> base{};
  std::array<double, Grid::kMaxDim> frac{};
  for (int k = 0; k < d; ++k) {
    const Axis& ax = grid_.axis(k);
    double u = (a[k] - ax.lo) / ax.step();
    const double r = std::round(u);
    if (std::abs(u - r) <= 1e-12 * std::max(1.0, std::abs(r))) u = r;
    int i = static_cast<int>(std::floor(u));
    i = std::min(std::max(i, 0), ax.count - 2);
    double t = u - i;
    t = std::min(std::max(t, 0.0), 1.0);
    base[static_cast<std::size_t>(k)] = i;
    frac[static_cast<std::size_t>(k)] = t;
  }

  if (interp_ == Interp::PiecewiseConstant) {
    std::array<int, Grid::kMaxDim> idx{};
    for (int k = 0; k < d; ++k)
      idx[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)] + (frac[static_cast<std::size_t>(k)] >= 0.5 ? 1 : 0);
    const std::size_t f = grid_.flat(idx.data());
    if (!valid_[f]) return std::nullopt;
    return values_[f];
  }

  std::size_t origin = 0;
  for (int k = 0; k < d; ++k) origin += grid_.stride(k) * static_cast<std::size_t>(base[static_cast<std::size_t>(k)]);
  double acc = 0.0;
  const unsigned corners = 1u << d;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t f = origin;
    for (int k = 0; k < d; ++k) {
      const double t = frac[static_cast<std::size_t>(k)];
      if (c & (1u << k)) {
        w *= t;
        f += grid_.stride(k);
      } else {
        w *= 1.0 - t;
      }
    }
    if (w == 0.0) continue;
    if (!valid_[f]) return std::nullopt;
    acc += w * values_[f];
  }
  return acc;
}

std::optional<double> ScalarField::try_eval(const Vec& a) const {
  if (!grid_.contains(a)) return std::nullopt;
  return eval_inside(a);
}

double ScalarField::operator()(const Vec& a) const {
  if (!grid_.contains(a)) fail(ErrorCode::OutOfDomain, "point outside the field box");
  auto v = eval_inside(a);
  if (!v) fail(ErrorCode::OutOfDomain, "point touches an invalid lattice node");
  return *v;
}

double ScalarField::at_clamped(const Vec& a) const {
  auto v = eval_inside(grid_.clamp(a));
  if (!v) fail(ErrorCode::OutOfDomain, "point touches an invalid lattice node");
  return *v;
}

std::vector<std::string> w_axis_names(const GroupSpec& spec) {
  std::vector<std::string> names;
  for (int j = 2; j <= spec.m(); ++j) names.push_back("x" + std::to_string(j));
  for (int s = 1; s <= spec.n(); ++s) names.push_back("y" + std::to_string(s));
  return names;
}

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void save_field_csv(const ScalarField& field, const std::string& path,
                    const std::vector<std::string>& axis_names, const std::string& value_name) {
  const Grid& g = field.grid();
  if (static_cast<int>(axis_names.size()) != g.dim())
    fail(ErrorCode::DimensionMismatch, "axis name count does not match grid dimension");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  for (const auto& n : axis_names) out << n << ",";
  out << value_name << "\n";
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Vec a = g.node(f);
    for (int k = 0; k < g.dim(); ++k) out << fmt(a[k]) << ",";
    out << (field.valid(f) ? fmt(field.value(f)) : std::string("nan")) << "\n";
  }

  toml::table meta;
  toml::array names, lo, hi, count;
  for (int k = 0; k < g.dim(); ++k) {
    names.push_back(axis_names[static_cast<std::size_t>(k)]);
    lo.push_back(g.axis(k).lo);
    hi.push_back(g.axis(k).hi);
    count.push_back(g.axis(k).count);
  }
  meta.insert("axes", std::move(names));
  meta.insert("lo", std::move(lo));
  meta.insert("hi", std::move(hi));
  meta.insert("count", std::move(count));
  meta.insert("value", value_name);
  meta.insert("interp", field.interp() == Interp::PiecewiseConstant ? "piecewise_constant" : "multilinear");
  meta.insert("order", "row-major, last axis fastest");
  std::ofstream side(path + ".grid.toml");
  if (!side) fail(ErrorCode::IoError, "cannot write " + path + ".grid.toml");
  side << meta << "\n";
}

ScalarField load_field_csv(const std::string& path) {
  const toml::table meta = detail::parse_toml_file(path + ".grid.toml");
  const auto lo = detail::get_double_array(meta["lo"], "lo");
  const auto hi = detail::get_double_array(meta["hi"], "hi");
  const auto count = detail::get_double_array(meta["count"], "count");
  if (lo.size() != hi.size() || lo.size() != count.size())
    fail(ErrorCode::ConfigError, "grid sidecar arrays differ in length");
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < lo.size(); ++k) axes.push_back({lo[k], hi[k], static_cast<int>(count[k])});
  Grid grid(axes);
  const Interp interp = meta["interp"].value_or<std::string>("multilinear") == "piecewise_constant"
                            ? Interp::PiecewiseConstant
                            : Interp::Multilinear;

  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> vals;
  vals.reserve(grid.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    double v = 0.0;
    const Vec expect = row < grid.size() ? grid.node(row) : Vec();
    while (std::getline(ss, cell, ',')) {
      double x = std::numeric_limits<double>::quiet_NaN();
      if (cell != "nan") {
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
        if (res.ec != std::errc()) fail(ErrorCode::IoError, path + ": bad number '" + cell + "'");
      }
      if (col < grid.dim()) {
        if (row < grid.size() && std::abs(x - expect[col]) > 1e-9 * std::max(1.0, std::abs(expect[col])))
          fail(ErrorCode::IoError, path + ": row " + std::to_string(row + 1) + " is off the lattice");
      } else {
        v = x;
      }
      ++col;
    }
    if (col != grid.dim() + 1) fail(ErrorCode::IoError, path + ": wrong column count");
    vals.push_back(v);
    ++row;
  }
  if (vals.size() != grid.size()) fail(ErrorCode::IoError, path + ": row count does not match grid");
  return ScalarField(grid, std::move(vals), interp);
}

}  // namespace carnot
