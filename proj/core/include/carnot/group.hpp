#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Step-2 Carnot group in exponential coordinates. Index arguments named
// j, l, s are 1-based, matching the labels x_1..x_m and y_1..y_n.
class GroupSpec {
 public:
  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  int dim() const noexcept { return m_ + n_; }
  double eps() const noexcept { return eps_; }
  bool setting_ok() const noexcept { return setting_ok_; }

  const std::vector<Mat>& B() const noexcept { return B_; }
  double b(int s, int j, int l) const { return B_[s - 1](j - 1, l - 1); }

  GroupSpec with_eps(double eps) const;

 private:
  friend GroupSpec validate_spec(int, int, const std::vector<Mat>&, double);

  int m_ = 0;
  int n_ = 0;
  double eps_ = 1.0;
  bool setting_ok_ = false;
  std::vector<Mat> B_;
};

class Point {
 public:
  Point() = default;
  Point(int m, int n) : c_(Vec::Zero(m + n)), m_(m) {}
  Point(const Vec& x, const Vec& y);
  static Point from_coords(int m, Vec coords);

  int m() const noexcept { return m_; }
  int n() const noexcept { return static_cast<int>(c_.size()) - m_; }

  auto x() { return c_.head(m_); }
  auto x() const { return c_.head(m_); }
  auto y() { return c_.tail(c_.size() - m_); }
  auto y() const { return c_.tail(c_.size() - m_); }

  const Vec& coords() const noexcept { return c_; }
  Vec& coords() noexcept { return c_; }

 private:
  Vec c_;
  int m_ = 0;
};

GroupSpec validate_spec(int m, int n, const std::vector<Mat>& B, double eps);

enum class BuiltinKind { Heisenberg, Corank1, Free2, ComplexifiedHeisenberg };

struct BuiltinParams {
  int k = 1;      // Heisenberg order
  int m = 2;      // free2 rank
  Mat B;          // corank1 matrix
};

GroupSpec make_builtin(BuiltinKind kind, const BuiltinParams& params = {});
GroupSpec heisenberg(int k);
GroupSpec corank1(const Mat& B);
GroupSpec free2(int m);
GroupSpec complexified_heisenberg();

// Index of y_{ls} (1 <= s < l <= m) inside free2(m), 1-based.
int free2_index(int m, int l, int s);

double calibrate_eps(const GroupSpec& spec, std::uint64_t seed = 0x5eedULL,
                     int pairs = 100000);

Point identity(const GroupSpec& spec);
Point multiply(const GroupSpec& spec, const Point& p, const Point& q);
Point inverse(const GroupSpec& spec, const Point& p);
Point dilate(const GroupSpec& spec, double lambda, const Point& p);
double hnorm(const GroupSpec& spec, const Point& p);
double distance(const GroupSpec& spec, const Point& p, const Point& q);

// <Bx, x'>_s = (B^(s) x) . x'
Vec bilinear(const GroupSpec& spec, const Eigen::Ref<const Vec>& x,
             const Eigen::Ref<const Vec>& xp);

// Row r holds the coefficients of X_1..X_m, Y_1..Y_n on d/dx, d/dy.
Mat frame_at(const GroupSpec& spec, const Point& p);
Vec structure_constants(const GroupSpec& spec, int j, int l);

GroupSpec change_coordinates(const GroupSpec& spec, const Mat& M1, const Mat& M2);

// Same group with y -> -y, i.e. every B^(s) negated.
GroupSpec opposite_group(const GroupSpec& spec);

// Composition of the Euler flows of X_j, X_l, -X_j, -X_l from the origin.
Point flow_commutator(const GroupSpec& spec, int j, int l, double h);

struct AxiomCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<AxiomCheck> check_axioms(const GroupSpec& spec, int samples,
                                     std::uint64_t seed, double tol = 1e-12);

GroupSpec load_group_spec(const std::string& path);
GroupSpec parse_group_spec(const std::string& text);
void save_group_spec(const GroupSpec& spec, const std::string& path);
std::string format_group_spec(const GroupSpec& spec);

}  // namespace carnot
