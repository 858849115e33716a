#pragma once

#include "carnot/characteristics.hpp"
#include "carnot/field.hpp"
#include "carnot/group.hpp"
#include "carnot/intrinsic.hpp"
#include "carnot/report.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

// Minimal solution for t >= t_bar, maximal for t < t_bar.
Characteristic min_forward_max_backward(const GroupSpec& spec, const ScalarField& field, int j,
                                        const ThroughPoint& point, Interval interval, double step,
                                        const std::vector<double>& eps_seq = default_eps_sequence(),
                                        double gap_tol = 1e-4);

// Stern-Brocot breadth-first order of Q in [0,1]: 0, 1, 1/2, 1/3, 2/3, 1/4, ...
std::vector<double> rational_sequence(int count);

inline constexpr int kThetaDepth = 24;

double theta(const std::function<double(double)>& curve, int L = kThetaDepth);
// Piecewise-linear curve through (u[k], values[k]); u must span [0,1].
double theta(const std::vector<double>& u, const std::vector<double>& values, int L = kThetaDepth);

// (m-1) B_max + 3 for the coupled component, (m-1) B_max + 1 otherwise.
double label_bound(const GroupSpec& spec, int j, int s);

struct ParamOptions {
  double step = 1e-3;
  int t_refine = 2;      // label t-lattice is the field x_j axis refined this many times
  int label_count = 0;   // 0 picks a count from the image resolution
  int seed_count = 0;    // 0 picks a count from the image resolution
  int seed_times = 1;    // seed columns t_bar spread over the t-axis, first one at its start
  int theta_depth = kThetaDepth;
  std::vector<double> eps_seq = {0x1p-10, 0x1p-11, 0x1p-12};
  double gap_tol = 1e-4;
  double crossing_tol = 1e-6;
  double cauchy_tol = 1e-2;
};

struct ParamMeta {
  int j = 2;
  int reference = 0;
  int theta_depth = kThetaDepth;
  std::vector<double> eps_seq;
  double step = 0.0;
  int t_refine = 1;
  std::vector<double> bounds;   // label_bound per component
  double label_shrinkage = 0.0; // lost fraction of uncoupled label intervals
  std::size_t curves = 0;
  double max_cauchy_gap = 0.0;
  double wbar_sup = 0.0;
  double excluded_fraction = 0.0;
  double cauchy_tol = 1e-2;
};

// Label lattice axes: t (= x_j), then x_l for l != j, then y_1..y_n. The
// y_{s*} axis carries theta labels; the others carry values at the first t.
struct LagrangianParam {
  int j = 2;
  Grid label_grid;
  Grid image_grid;
  std::vector<ScalarField> chi;  // valid where the label lies in the domain
  ScalarField curvature;         // D_t^2 chi_{s*} / b on the label lattice
  ScalarField wbar;              // on the image lattice
  ParamMeta meta;
};

std::vector<std::string> label_axis_names(const GroupSpec& spec, int j);

LagrangianParam build_full_param(const GroupSpec& spec, const ScalarField& field, int j,
                                 const ParamOptions& options = {});

// Second differences of chi_{s*} with Cauchy flags; fills param.curvature and meta.wbar_sup.
void compute_curvature(const GroupSpec& spec, LagrangianParam& param, double cauchy_tol = 1e-2);

ScalarField extract_wbar(const GroupSpec& spec, const ScalarField& field, LagrangianParam& param);

struct ParamDiagnostics {
  std::size_t monotone_violations = 0;
  bool surjective = false;
  double consistency_gap = 0.0;
};

ParamDiagnostics diagnose_param(const GroupSpec& spec, const ScalarField& field,
                                const LagrangianParam& param);

struct LagrangianTolerances {
  double ls1 = 1e-2;
  double ls2 = 1e-2;
  double ls2_stability = 1e-2;
  double ls3 = 1e-2;
  double max_excluded = 0.02;
  int ls2_points = 200;
};

VerificationReport verify_lagrangian(const GroupSpec& spec, const ScalarField& field,
                                     const LagrangianParam& param, const Datum& datum,
                                     const LagrangianTolerances& tol = {});

double mollifier(double u);

// (1 + eps y) (chi_{s*}(t, .) * rho_eps)(y) on the label lattice. Labels and values
// are first translated to be nonnegative when they are not already.
ScalarField mollify_chi(const LagrangianParam& param, double eps);

struct MollifiedFields {
  ScalarField phi;
  ScalarField w;
  ScalarField label;  // inverted label at each image node
  double w_bound = 0.0;
};

MollifiedFields mollified_phi_and_w(const GroupSpec& spec, const LagrangianParam& param, double eps);
MollifiedFields mollified_phi_and_w(const GroupSpec& spec, const ScalarField& field,
                                    const LagrangianParam& param, double eps);

// Mean of |a - b| over nodes valid in both, times the box volume.
double lattice_l1(const ScalarField& a, const ScalarField& b);

void save_param(const GroupSpec& spec, const LagrangianParam& param, const std::string& dir);
LagrangianParam load_param(const std::string& dir, GroupSpec* spec = nullptr);

}  // namespace carnot
