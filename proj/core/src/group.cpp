#include "carnot/group.hpp"

#include "carnot/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace carnot {

namespace {

constexpr double kMatrixTol = 1e-10;

void require_point(const GroupSpec& spec, const Point& p) {
  if (p.m() != spec.m() || p.n() != spec.n()) {
    std::ostringstream os;
    os << "point has (m,n)=(" << p.m() << "," << p.n() << "), spec has (" << spec.m()
       << "," << spec.n() << ")";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

Point random_point(const GroupSpec& spec, std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  Point p(spec.m(), spec.n());
  for (Eigen::Index i = 0; i < p.coords().size(); ++i) p.coords()[i] = u(rng);
  return p;
}

}  // namespace

Point::Point(const Vec& x, const Vec& y) : c_(x.size() + y.size()), m_(static_cast<int>(x.size())) {
  c_.head(x.size()) = x;
  c_.tail(y.size()) = y;
}

Point Point::from_coords(int m, Vec coords) {
  Point p;
  p.c_ = std::move(coords);
  p.m_ = m;
  return p;
}

GroupSpec GroupSpec::with_eps(double eps) const {
  if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorCode::DimensionOutOfRange, "eps must lie in (0,1]");
  GroupSpec out = *this;
  out.eps_ = eps;
  return out;
}

GroupSpec validate_spec(int m, int n, const std::vector<Mat>& B, double eps) {
  if (m < 2) fail(ErrorCode::DimensionOutOfRange, "m must be at least 2");
  if (n < 1 || n > m * (m - 1) / 2)
    fail(ErrorCode::DimensionOutOfRange, "n must satisfy 1 <= n <= m(m-1)/2");
  if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorCode::DimensionOutOfRange, "eps must lie in (0,1]");
  if (static_cast<int>(B.size()) != n)
    fail(ErrorCode::DimensionOutOfRange, "expected " + std::to_string(n) + " matrices");

  for (int s = 0; s < n; ++s) {
    if (B[s].rows() != m || B[s].cols() != m)
      fail(ErrorCode::DimensionOutOfRange, "matrix " + std::to_string(s + 1) + " is not m x m");
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double v = B[s](i, j);
        if (!std::isfinite(v) || std::abs(v + B[s](j, i)) > kMatrixTol) {
          std::ostringstream os;
          os << "(s,i,j)=(" << s + 1 << "," << i + 1 << "," << j + 1 << ")";
          fail(ErrorCode::NotSkewSymmetric, os.str());
        }
      }
    }
  }

  Mat stack(n, m * m);
  for (int s = 0; s < n; ++s) stack.row(s) = Eigen::Map<const Eigen::RowVectorXd>(B[s].data(), m * m);
  Eigen::JacobiSVD<Mat> svd(stack);
  if (svd.singularValues().minCoeff() <= kMatrixTol) fail(ErrorCode::LinearlyDependent);

  GroupSpec spec;
  spec.m_ = m;
  spec.n_ = n;
  spec.eps_ = eps;
  spec.B_ = B;
  for (auto& Bs : spec.B_) Bs = 0.5 * (Bs - Bs.transpose());

  bool ok = true;
  if (n > 1) {
    for (int j = 0; j < m && ok; ++j)
      for (int s = 0; s < n && ok; ++s)
        for (int k = 0; k < n && ok; ++k)
          if (s != k && std::abs(spec.B_[s](j, 0)) > kMatrixTol &&
              std::abs(spec.B_[k](j, 0)) > kMatrixTol)
            ok = false;
  }
  spec.setting_ok_ = ok;
  return spec;
}

GroupSpec make_builtin(BuiltinKind kind, const BuiltinParams& params) {
  GroupSpec raw;
  switch (kind) {
    case BuiltinKind::Heisenberg: {
      if (params.k < 1) fail(ErrorCode::BadParams, "heisenberg needs k >= 1");
      const int k = params.k;
      Mat B = Mat::Zero(2 * k, 2 * k);
      B.topRightCorner(k, k) = Mat::Identity(k, k);
      B.bottomLeftCorner(k, k) = -Mat::Identity(k, k);
      raw = validate_spec(2 * k, 1, {B}, 1.0);
      break;
    }
    case BuiltinKind::Corank1: {
      if (params.B.rows() < 2 || params.B.rows() != params.B.cols())
        fail(ErrorCode::BadParams, "corank1 needs a square matrix of size >= 2");
      raw = validate_spec(static_cast<int>(params.B.rows()), 1, {params.B}, 1.0);
      break;
    }
    case BuiltinKind::Free2: {
      const int m = params.m;
      if (m < 2) fail(ErrorCode::BadParams, "free2 needs m >= 2");
      std::vector<Mat> Bs;
      for (int l = 2; l <= m; ++l) {
        for (int s = 1; s < l; ++s) {
          Mat B = Mat::Zero(m, m);
          B(l - 1, s - 1) = 1.0;
          B(s - 1, l - 1) = -1.0;
          Bs.push_back(B);
        }
      }
      raw = validate_spec(m, m * (m - 1) / 2, Bs, 1.0);
      break;
    }
    case BuiltinKind::ComplexifiedHeisenberg: {
      Mat B1(4, 4), B2(4, 4);
      B1 << 0, -1, 0, 0,
            1, 0, 0, 0,
            0, 0, 0, 1,
            0, 0, -1, 0;
      B2 << 0, 0, 0, -1,
            0, 0, 1, 0,
            0, -1, 0, 0,
            1, 0, 0, 0;
      raw = validate_spec(4, 2, {B1, B2}, 1.0);
      break;
    }
  }
  return raw.with_eps(calibrate_eps(raw));
}

GroupSpec heisenberg(int k) {
  BuiltinParams p;
  p.k = k;
  return make_builtin(BuiltinKind::Heisenberg, p);
}

GroupSpec corank1(const Mat& B) {
  BuiltinParams p;
  p.B = B;
  return make_builtin(BuiltinKind::Corank1, p);
}

GroupSpec free2(int m) {
  BuiltinParams p;
  p.m = m;
  return make_builtin(BuiltinKind::Free2, p);
}

GroupSpec complexified_heisenberg() { return make_builtin(BuiltinKind::ComplexifiedHeisenberg); }

int free2_index(int m, int l, int s) {
  if (!(1 <= s && s < l && l <= m)) fail(ErrorCode::IndexOutOfRange, "need 1 <= s < l <= m");
  return (l - 1) * (l - 2) / 2 + s;
}

double calibrate_eps(const GroupSpec& spec, std::uint64_t seed, int pairs) {
  double eps = 1.0;
  for (int halvings = 0; halvings <= 20; ++halvings) {
    const GroupSpec trial = spec.with_eps(eps);
    std::mt19937_64 rng(seed);
    bool ok = true;
    for (int i = 0; i < pairs && ok; ++i) {
      const Point p = random_point(trial, rng, 2.0);
      const Point q = random_point(trial, rng, 2.0);
      const double lhs = hnorm(trial, multiply(trial, p, q));
      const double rhs = hnorm(trial, p) + hnorm(trial, q);
      if (lhs > rhs * (1.0 + 1e-12)) ok = false;
    }
    if (ok) return eps;
    if (halvings < 20) eps *= 0.5;
  }
  return eps;
}

Point identity(const GroupSpec& spec) { return Point(spec.m(), spec.n()); }

Vec bilinear(const GroupSpec& spec, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& xp) {
  Vec out(spec.n());
  for (int s = 0; s < spec.n(); ++s) out[s] = xp.dot(spec.B()[s] * x);
  return out;
}

Point multiply(const GroupSpec& spec, const Point& p, const Point& q) {
  require_point(spec, p);
  require_point(spec, q);
  Point r(spec.m(), spec.n());
  r.x() = p.x() + q.x();
  r.y() = p.y() + q.y() - 0.5 * bilinear(spec, p.x(), q.x());
  return r;
}

Point inverse(const GroupSpec& spec, const Point& p) {
  require_point(spec, p);
  return Point::from_coords(spec.m(), -p.coords());
}

Point dilate(const GroupSpec& spec, double lambda, const Point& p) {
  require_point(spec, p);
  if (!(lambda > 0.0)) fail(ErrorCode::NonpositiveLambda);
  Point r = p;
  r.x() *= lambda;
  r.y() *= lambda * lambda;
  return r;
}

double hnorm(const GroupSpec& spec, const Point& p) {
  require_point(spec, p);
  return std::max(p.x().norm(), spec.eps() * std::sqrt(p.y().norm()));
}

double distance(const GroupSpec& spec, const Point& p, const Point& q) {
  return hnorm(spec, multiply(spec, inverse(spec, p), q));
}

Mat frame_at(const GroupSpec& spec, const Point& p) {
  require_point(spec, p);
  const int m = spec.m();
  const int n = spec.n();
  Mat F = Mat::Identity(m + n, m + n);
  for (int s = 0; s < n; ++s) {
    const Vec Bx = spec.B()[s] * p.x();
    for (int j = 0; j < m; ++j) F(j, m + s) = -0.5 * Bx[j];
  }
  return F;
}

Vec structure_constants(const GroupSpec& spec, int j, int l) {
  if (j < 1 || j > spec.m() || l < 1 || l > spec.m())
    fail(ErrorCode::IndexOutOfRange, "need 1 <= j,l <= m");
  Vec out(spec.n());
  for (int s = 1; s <= spec.n(); ++s) out[s - 1] = spec.b(s, j, l);
  return out;
}

GroupSpec change_coordinates(const GroupSpec& spec, const Mat& M1, const Mat& M2) {
  const int m = spec.m();
  const int n = spec.n();
  if (M1.rows() != m || M1.cols() != m || M2.rows() != n || M2.cols() != n)
    fail(ErrorCode::DimensionMismatch, "M1 must be m x m and M2 n x n");
  Eigen::FullPivLU<Mat> lu1(M1), lu2(M2);
  lu1.setThreshold(1e-12);
  lu2.setThreshold(1e-12);
  if (!lu1.isInvertible() || !lu2.isInvertible()) fail(ErrorCode::SingularMatrix);
  const Mat M1inv = lu1.inverse();
  std::vector<Mat> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    Mat acc = Mat::Zero(m, m);
    for (int k = 0; k < n; ++k) acc += M2(s, k) * spec.B()[k];
    out.push_back(M1inv.transpose() * acc * M1inv);
  }
  return validate_spec(m, n, out, spec.eps());
}

GroupSpec opposite_group(const GroupSpec& spec) {
  return change_coordinates(spec, Mat::Identity(spec.m(), spec.m()), -Mat::Identity(spec.n(), spec.n()));
}

Point flow_commutator(const GroupSpec& spec, int j, int l, double h) {
  if (j < 1 || j > spec.m() || l < 1 || l > spec.m())
    fail(ErrorCode::IndexOutOfRange, "need 1 <= j,l <= m");
  Point p = identity(spec);
  auto euler = [&](int k, double step) {
    const Mat F = frame_at(spec, p);
    p.coords() += step * F.row(k - 1).transpose();
  };
  euler(j, h);
  euler(l, h);
  euler(j, -h);
  euler(l, -h);
  return p;
}

std::vector<AxiomCheck> check_axioms(const GroupSpec& spec, int samples, std::uint64_t seed,
                                     double tol) {
  std::mt19937_64 rng(seed);
  double assoc = 0, ident = 0, inv = 0, homog = 0, leftinv = 0, dil = 0;
  const Point e = identity(spec);
  for (int i = 0; i < samples; ++i) {
    const Point p = random_point(spec, rng, 1.0);
    const Point q = random_point(spec, rng, 1.0);
    const Point r = random_point(spec, rng, 1.0);
    const Point g = random_point(spec, rng, 1.0);
    const double lambda = std::exp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));

    const Point lhs = multiply(spec, multiply(spec, p, q), r);
    const Point rhs = multiply(spec, p, multiply(spec, q, r));
    assoc = std::max(assoc, (lhs.coords() - rhs.coords()).lpNorm<Eigen::Infinity>());

    ident = std::max(ident, (multiply(spec, p, e).coords() - p.coords()).lpNorm<Eigen::Infinity>());
    ident = std::max(ident, (multiply(spec, e, p).coords() - p.coords()).lpNorm<Eigen::Infinity>());
    inv = std::max(inv, multiply(spec, p, inverse(spec, p)).coords().lpNorm<Eigen::Infinity>());
    inv = std::max(inv, multiply(spec, inverse(spec, p), p).coords().lpNorm<Eigen::Infinity>());

    const double np = hnorm(spec, p);
    if (np > 0) homog = std::max(homog, std::abs(hnorm(spec, dilate(spec, lambda, p)) - lambda * np) / (lambda * np));

    const double d = distance(spec, p, q);
    leftinv = std::max(leftinv, std::abs(distance(spec, multiply(spec, g, p), multiply(spec, g, q)) - d));
    if (d > 0)
      dil = std::max(dil, std::abs(distance(spec, dilate(spec, lambda, p), dilate(spec, lambda, q)) - lambda * d) / (lambda * d));
  }
  auto mk = [tol](std::string name, double err) { return AxiomCheck{std::move(name), err, tol, err <= tol}; };
  return {mk("associativity", assoc), mk("identity", ident),         mk("inverse", inv),
          mk("norm_homogeneity", homog), mk("left_invariance", leftinv), mk("dilation_compatibility", dil)};
}

}  // namespace carnot
