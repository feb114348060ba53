#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "metastab/damping.hpp"
#include "metastab/geodesic.hpp"
#include "metastab/layer_profile.hpp"
#include "metastab/solver.hpp"

using namespace metastab;

namespace {

State layered_state(const Grid1D& g, double eps, double tau) {
  State s;
  s.eps = eps;
  s.tau = tau;
  s.u = Field(g.size(), 1);
  s.w = Field(g.size(), 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    s.u(i, 0) = -std::tanh((x - 0.35) / (std::sqrt(2.0) * eps)) * std::tanh((x - 0.65) / (std::sqrt(2.0) * eps));
  }
  return s;
}

}  // namespace

static void BM_Laplacian(benchmark::State& st) {
  const Grid1D g(0.0, 1.0, static_cast<std::size_t>(st.range(0)));
  const State s = layered_state(g, 0.05, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian_neumann(g, s.u));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Laplacian)->Arg(400)->Arg(1600)->Arg(6400);

static void BM_StepIdentity(benchmark::State& st) {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, static_cast<std::size_t>(st.range(0)));
  State s = layered_state(g, 0.05, 1.0);
  const double dt = cfl_time_step(g, s.eps, s.tau);
  const DampingSpec G = DampingSpec::identity(1);
  for (auto _ : st) benchmark::DoNotOptimize(step(s, g, dt, q, G));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_StepIdentity)->Arg(400)->Arg(1600);

static void BM_StepRelaxation(benchmark::State& st) {
  const auto q = std::make_shared<const PotentialSpec>(PotentialSpec::quartic());
  const Grid1D g(0.0, 1.0, static_cast<std::size_t>(st.range(0)));
  State s = layered_state(g, 0.06, 0.1);
  const double dt = cfl_time_step(g, s.eps, s.tau);
  const DampingSpec G = relaxation_preset(q, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(step(s, g, dt, *q, G));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_StepRelaxation)->Arg(400)->Arg(1600);

static void BM_OptimalPath(benchmark::State& st) {
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  PathOptions opt;
  opt.nodes = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(optimal_path(p, 0, 2, opt));
}
BENCHMARK(BM_OptimalPath)->Arg(65)->Arg(257)->Unit(benchmark::kMillisecond);

static void BM_ProfileOde(benchmark::State& st) {
  const auto q = PotentialSpec::quartic();
  const auto path = PathPolyline::segment({-1.0}, {1.0}, 2, -1.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_profile_ode(q, path));
}
BENCHMARK(BM_ProfileOde)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
