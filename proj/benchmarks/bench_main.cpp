#include <benchmark/benchmark.h>

#include <random>

#include "psafem/adaptive.hpp"

using namespace psafem;

namespace {

Mesh mesh_with_cells(const std::string& geometry, long min_cells) {
  Mesh m = preset_mesh(geometry);
  while (m.num_cells() < min_cells) m = uniform_refine(m);
  return m;
}

void bm_assemble_system(benchmark::State& state) {
  Mesh m = mesh_with_cells("lshape2d", state.range(0));
  RtTensorSpace rt(m);
  P0VectorSpace p0(m);
  MaterialParams mat = material(1.0, 0.35);
  for (auto _ : state) {
    SaddleSystem sys = assemble_system(rt, p0, mat);
    benchmark::DoNotOptimize(sys.A);
  }
  state.SetItemsProcessed(state.iterations() * m.num_cells());
}
BENCHMARK(bm_assemble_system)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_estimate(benchmark::State& state) {
  Mesh m = mesh_with_cells("lshape2d", state.range(0));
  RtTensorSpace rt(m);
  ThetaOperator theta(m);
  MaterialParams mat = material(1.0, 0.35);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd rho(rt.num_dofs()), u(m.dim * m.num_cells());
  for (int i = 0; i < rho.size(); ++i) rho[i] = gauss(rng);
  for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
  for (auto _ : state) {
    EstimatorField f = estimate(m, rt, rho, u, mat, theta, false);
    benchmark::DoNotOptimize(f.global_sq);
  }
  state.SetItemsProcessed(state.iterations() * m.num_cells());
}
BENCHMARK(bm_estimate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_refine(benchmark::State& state) {
  Mesh m = mesh_with_cells("lshape2d", state.range(0));
  MarkSet marks;
  for (int t = 0; t < m.num_cells(); t += 4) marks.marked.push_back(t);
  for (auto _ : state) {
    Mesh r = refine(m, marks);
    benchmark::DoNotOptimize(r.num_cells());
  }
  state.SetItemsProcessed(state.iterations() * m.num_cells());
}
BENCHMARK(bm_refine)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_solve_eigs(benchmark::State& state) {
  Mesh m = mesh_with_cells("lshape2d", state.range(0));
  RtTensorSpace rt(m);
  P0VectorSpace p0(m);
  SaddleSystem sys = assemble_system(rt, p0, material(1.0, 0.35));
  for (auto _ : state) {
    MixedSolution sol = solve_eigs(sys, 3);
    benchmark::DoNotOptimize(sol.kappas[0]);
  }
}
BENCHMARK(bm_solve_eigs)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void bm_theta_apply(benchmark::State& state) {
  Mesh m = mesh_with_cells("lshape2d", state.range(0));
  P0VectorSpace p0(m);
  ThetaOperator theta(m);
  Eigen::VectorXd u = Eigen::VectorXd::Random(p0.num_dofs());
  for (auto _ : state) {
    Eigen::VectorXd v = theta.apply(u);
    benchmark::DoNotOptimize(v.sum());
  }
}
BENCHMARK(bm_theta_apply)->Arg(10000)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
