#include <random>

#include <benchmark/benchmark.h>

#include "sedg/assembly.hpp"
#include "sedg/experiment.hpp"
#include "sedg/grid.hpp"
#include "sedg/precond.hpp"

using namespace sedg;

namespace {

Mesh adaptation(int p) {
  ExperimentConfig c;
  c.p = p;
  return build_scenario(c).mesh;
}

Eigen::VectorXd random_vector(Eigen::Index n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

void BM_LglRule(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_lgl_rule(p));
}
BENCHMARK(BM_LglRule)->Arg(8)->Arg(32)->Arg(128);

void BM_DyadicFamily(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_nested_family(p, Interval(-1, 1), 1.2));
}
BENCHMARK(BM_DyadicFamily)->Arg(16)->Arg(64);

void BM_DgNiAssembly(benchmark::State& state) {
  const Mesh mesh = adaptation(static_cast<int>(state.range(0)));
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_dg_ni(mesh, dg, 3.0));
  state.counters["dofs"] = dg.num_dofs();
}
BENCHMARK(BM_DgNiAssembly)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_StageOneApply(benchmark::State& state) {
  StackOptions opt;
  opt.inner = StageOneInner::kDirect;
  const PreconditionerStack st = compose_two_stage(adaptation(static_cast<int>(state.range(0))), opt);
  const Eigen::VectorXd r = random_vector(st.preconditioner->size());
  for (auto _ : state) benchmark::DoNotOptimize(st.preconditioner->apply(r));
  state.counters["dofs"] = static_cast<double>(r.size());
}
BENCHMARK(BM_StageOneApply)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_B2Solve(benchmark::State& state) {
  const Mesh mesh = adaptation(static_cast<int>(state.range(0)));
  const DofMap cg = build_dofmap(mesh, SpaceKind::kSeCg);
  const SparseMatrix b2 = assemble_b2(cg, classify_anisotropy(cg, 2.0), 0.6);
  const Eigen::VectorXd r = random_vector(b2.rows());
  if (state.range(1) == 0) {
    const DirectSolver solver(b2);
    for (auto _ : state) benchmark::DoNotOptimize(solver.apply(r));
  } else {
    const SubstructuredB2Solver solver(b2, build_substructure_ordering(b2, cg), 7);
    for (auto _ : state) benchmark::DoNotOptimize(solver.apply(r));
    state.counters["flops"] = static_cast<double>(solver.flops_per_apply());
  }
  state.counters["dofs"] = static_cast<double>(b2.rows());
}
BENCHMARK(BM_B2Solve)->ArgsProduct({{8, 16, 32}, {0, 1}})->ArgNames({"p", "substructured"})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
