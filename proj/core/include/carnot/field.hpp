#pragma once

#include "carnot/group.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  double step() const noexcept { return (hi - lo) / (count - 1); }
  double at(int i) const noexcept { return i == count - 1 ? hi : lo + i * step(); }
};

// Rectangular lattice; flat indices are row-major with the last axis fastest.
class Grid {
 public:
  static constexpr int kMaxDim = 16;

  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  std::size_t size() const noexcept { return size_; }
  const Axis& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t stride(int k) const { return strides_[static_cast<std::size_t>(k)]; }

  std::size_t flat(const int* idx) const noexcept;
  std::size_t flat(const std::vector<int>& idx) const noexcept { return flat(idx.data()); }
  void unflat(std::size_t f, int* idx) const noexcept;
  std::vector<int> unflat(std::size_t f) const;
  Vec node(std::size_t f) const;

  bool contains(const Vec& a, double tol = 1e-12) const;
  Vec clamp(const Vec& a) const;
  double cell_volume() const;
  double volume() const;

  bool operator==(const Grid& o) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

// Exact evaluates a closed-form function off the lattice; lattice values are its samples.
enum class Interp { Multilinear, PiecewiseConstant, Exact };

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Grid grid, std::vector<double> values, Interp interp = Interp::Multilinear);

  static ScalarField sample(const Grid& grid, const std::function<double(const Vec&)>& f,
                            Interp interp = Interp::Multilinear);
  static ScalarField exact(const Grid& grid, std::function<double(const Vec&)> f);

  const Grid& grid() const noexcept { return grid_; }
  Interp interp() const noexcept { return interp_; }
  int dim() const noexcept { return grid_.dim(); }

  const std::vector<double>& values() const noexcept { return values_; }
  double value(std::size_t f) const { return values_[f]; }
  void set_value(std::size_t f, double v) { values_[f] = v; }

  bool valid(std::size_t f) const { return valid_[f] != 0; }
  void set_valid(std::size_t f, bool ok) { valid_[f] = ok ? 1 : 0; }
  std::size_t valid_count() const;
  bool all_valid() const { return valid_count() == values_.size(); }

  // Throws OutOfDomain outside the box or when an invalid node carries weight.
  double operator()(const Vec& a) const;
  std::optional<double> try_eval(const Vec& a) const;
  // Constant extension of the field outside its box.
  double at_clamped(const Vec& a) const;

  double max_abs() const;
  ScalarField with_interp(Interp interp) const;

 private:
  std::optional<double> eval_inside(const Vec& a) const;

  Grid grid_;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
  Interp interp_ = Interp::Multilinear;
  std::shared_ptr<const std::function<double(const Vec&)>> exact_;
};

// Axis labels x2..xm, y1..yn for fields over W.
std::vector<std::string> w_axis_names(const GroupSpec& spec);

// CSV with header "<axis names>,<value_name>", invalid nodes written as nan;
// the grid goes to a sidecar file path + ".grid.toml".
void save_field_csv(const ScalarField& field, const std::string& path,
                    const std::vector<std::string>& axis_names,
                    const std::string& value_name = "phi");
ScalarField load_field_csv(const std::string& path);

}  // namespace carnot
