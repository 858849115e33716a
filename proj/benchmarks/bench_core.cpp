#include "carnot/characteristics.hpp"
#include "carnot/intrinsic.hpp"
#include "carnot/lagrangian.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

using namespace carnot;

void BM_Multiply(benchmark::State& state) {
  const GroupSpec g = free2(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Vec a(g.dim()), b(g.dim());
  for (int k = 0; k < g.dim(); ++k) a[k] = n(rng), b[k] = n(rng);
  Point p = Point::from_coords(g.m(), a);
  const Point q = Point::from_coords(g.m(), b);
  for (auto _ : state) {
    p = multiply(g, p, q);
    benchmark::DoNotOptimize(p.coords().data());
  }
}
BENCHMARK(BM_Multiply)->Arg(2)->Arg(3)->Arg(4);

void BM_Interpolate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::vector<Axis> axes(static_cast<std::size_t>(d), Axis{0.0, 1.0, d <= 2 ? 257 : 17});
  const ScalarField f = ScalarField::sample(Grid(axes), [](const Vec& a) { return a.sum(); });
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> pts(1024, Vec(d));
  for (auto& p : pts)
    for (int k = 0; k < d; ++k) p[k] = u(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(f(pts[i++ & 1023]));
}
BENCHMARK(BM_Interpolate)->Arg(2)->Arg(5);

void BM_Integrate(benchmark::State& state) {
  const GroupSpec g = heisenberg(1);
  const ScalarField f =
      ScalarField::sample(Grid({Axis{0.0, 1.0, 41}, Axis{-1.0, 1.0, 81}}), [](const Vec& a) { return a[0]; });
  Vec y0 = Vec::Zero(1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(g, f, 2, Vec(0), y0, {0.0, 1.0}, 1e-3));
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMicrosecond);

void BM_MinMaxFunnel(benchmark::State& state) {
  const GroupSpec g = opposite_group(heisenberg(1));
  const ScalarField f = ScalarField::exact(Grid({Axis{0.0, 1.0, 41}, Axis{-0.5, 1.5, 81}}),
                                           [](const Vec& a) { return 2.0 * std::sqrt(std::abs(a[1])); });
  const ThroughPoint p{0.0, Vec(0), Vec::Zero(1)};
  for (auto _ : state)
    benchmark::DoNotOptimize(min_max_through(g, f, 2, p, {0.0, 1.0}, 1e-3, default_eps_sequence(), 1e-3));
}
BENCHMARK(BM_MinMaxFunnel)->Unit(benchmark::kMillisecond);

void BM_Residual(benchmark::State& state) {
  const GroupSpec g = heisenberg(1);
  const Grid grid({Axis{0.0, 1.0, 41}, Axis{0.0, 1.0, 41}});
  const ScalarField phi = ScalarField::sample(grid, [](const Vec& a) { return a[0]; });
  const Datum w = constant_datum(g, grid, {1.0});
  Vec c(2), r(2);
  c << 0.5, 0.5;
  r << 0.125, 0.125;
  const TestFunction z(c, r);
  QuadratureOptions q;
  q.cells_per_axis = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(distributional_residual(g, phi, w, z, 2, q));
}
BENCHMARK(BM_Residual)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BuildFullParam(benchmark::State& state) {
  const GroupSpec g = heisenberg(1);
  const int n = static_cast<int>(state.range(0));
  const ScalarField phi = ScalarField::sample(Grid({Axis{0.0, 1.0, n}, Axis{0.0, 1.0, n}}), [](const Vec& a) { return a[0]; });
  ParamOptions o;
  o.t_refine = 1;
  for (auto _ : state) benchmark::DoNotOptimize(build_full_param(g, phi, 2, o));
}
BENCHMARK(BM_BuildFullParam)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
