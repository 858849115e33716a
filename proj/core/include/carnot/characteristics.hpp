#pragma once

#include "carnot/field.hpp"
#include "carnot/group.hpp"

#include <vector>

namespace carnot {

enum class Flavor { Plain, Minimal, Maximal, MinForwardMaxBackward };

const char* to_string(Flavor f) noexcept;

// xhat lists x_l for l in {2..m} \ {j}, increasing l. The curve parameter t is x_j.
struct Characteristic {
  int j = 2;
  Vec xhat;
  std::vector<double> t;
  Mat gamma;  // n x samples
  Flavor flavor = Flavor::Plain;
  bool truncated = false;
  double cauchy_gap = 0.0;
};

// Point of W with x_j = t.
Vec w_coords(const GroupSpec& spec, int j, double t, const Vec& xhat, const Vec& y);

// First s with b^(s)_{j1} != 0, or 0 when every component is a line.
int reference_component(const GroupSpec& spec, int j);

// 1/2 sum_{l>=2} b^(s)_{jl} x_l with x_j = t.
double line_slope(const GroupSpec& spec, int j, int s, double t, const Vec& xhat);

double rhs(const GroupSpec& spec, const ScalarField& field, int j, int s, double t,
           const Vec& xhat, const Vec& gamma_t);

struct Interval {
  double t0 = 0.0;
  double t1 = 1.0;
};

Characteristic integrate(const GroupSpec& spec, const ScalarField& field, int j, const Vec& xhat,
                         const Vec& y0, Interval interval, double step);

// Rows for every s != s*, in increasing s; gamma_ref holds the s* component.
Mat reduce_vertical(const GroupSpec& spec, int j, const std::vector<double>& gamma_ref,
                    const Vec& init_y, const Vec& xhat, const std::vector<double>& t_samples,
                    double t_init = 0.0);

// Closed form for an uncoupled component.
double vertical_line(const GroupSpec& spec, int j, int s, const Vec& xhat, double y_init,
                     double t, double t_init = 0.0);

// dz/dt = b^(s*)_{j1} phi(t, xhat, Y(t,z)) + line, with the other components
// recovered from z by the reduction and phi extended constantly outside its box.
class ReducedEquation {
 public:
  ReducedEquation(const GroupSpec& spec, const ScalarField& field, int j, Vec xhat, Vec y_bar,
                  double t_bar);

  int reference() const noexcept { return ref_; }
  double operator()(double t, double z) const;
  Vec components(double t, double z) const;

 private:
  const GroupSpec* spec_;
  const ScalarField* field_;
  int j_;
  int ref_;
  Vec xhat_;
  Vec y_bar_;
  double t_bar_;
  double b_ref_;
  double line_ref_;
  Vec alpha_;
  Vec offset_slope_;
  mutable Vec scratch_;
};

std::vector<double> default_eps_sequence();

struct MinMaxPair {
  Characteristic minimal;
  Characteristic maximal;
  double gap = 0.0;
};

struct ThroughPoint {
  double t_bar = 0.0;
  Vec xhat;
  Vec y_bar;
};

MinMaxPair min_max_through(const GroupSpec& spec, const ScalarField& field, int j,
                           const ThroughPoint& point, Interval interval, double step,
                           const std::vector<double>& eps_seq = default_eps_sequence(),
                           double gap_tol = 1e-4);

}  // namespace carnot
