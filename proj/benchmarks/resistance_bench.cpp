#include <benchmark/benchmark.h>

#include <random>

#include "resistograph/grid_graph.hpp"
#include "resistograph/minres.hpp"
#include "resistograph/objective.hpp"
#include "resistograph/resistance.hpp"
#include "resistograph/synthetic.hpp"
#include "resistograph/weight_model.hpp"

using namespace resistograph;

namespace {

struct Fixture {
  EdgeGraph graph;
  ModelSpec spec{ModelKind::combined, 5};
  Eigen::VectorXd theta;
  SampleSet samples;
  DissimilarityMatrix target;
};

Fixture make_fixture(int side, int samples) {
  std::mt19937_64 rng(7);
  SyntheticLandscapeOptions lo;
  lo.rows = lo.cols = side;
  Fixture f;
  f.graph = build_grid_graph(make_synthetic_landscape(lo, rng));
  f.theta = init_theta(f.spec, InitMode::synthetic, rng).pack(f.spec);
  f.samples = sample_nodes(f.graph, samples, rng);
  const SyntheticScenario sc = make_scenario(f.graph, f.spec, f.theta, f.samples, 0.2, 3);
  f.target = simulate_F(sc);
  f.theta = init_theta(f.spec, InitMode::synthetic, rng).pack(f.spec);
  return f;
}

}  // namespace

static void BM_SingleSolve(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 2);
  const Eigen::VectorXd w = evaluate_weights(f.spec, f.graph, f.theta, false).weights;
  const LaplacianSolver solver(assemble_laplacian(f.graph, w), SolverOptions{});
  Eigen::VectorXd b = Eigen::VectorXd::Zero(f.graph.num_nodes());
  b[0] = 1.0;
  int iterations = 0;
  for (auto _ : state) {
    SolveResult r = solver.solve(b);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.x.data());
  }
  state.counters["minres_iters"] = iterations;
  state.counters["nodes"] = f.graph.num_nodes();
}
BENCHMARK(BM_SingleSolve)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_BatchPotentials(benchmark::State& state) {
  const Fixture f = make_fixture(20, static_cast<int>(state.range(0)));
  const Eigen::VectorXd w = evaluate_weights(f.spec, f.graph, f.theta, false).weights;
  const LaplacianSolver solver(assemble_laplacian(f.graph, w), SolverOptions{});
  for (auto _ : state) {
    SolveCache cache = batch_potentials(solver, f.samples);
    benchmark::DoNotOptimize(cache.potentials.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchPotentials)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_LossGradient(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  ObjectiveOptions opt;
  opt.warm_start = state.range(2) != 0;
  ResistanceObjective obj(f.graph, f.samples, f.target, f.spec, opt);
  Eigen::VectorXd theta = f.theta;
  for (auto _ : state) {
    GradientReport rep = obj.gradient(theta);
    benchmark::DoNotOptimize(rep.grad.data());
    // Small moves keep warm starts representative of an optimizer run.
    theta *= 1.0 + 1e-4;
  }
}
BENCHMARK(BM_LossGradient)
    ->Args({20, 50, 0})
    ->Args({20, 50, 1})
    ->Args({50, 50, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_WeightJacobian(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    WeightEvaluation e = evaluate_weights(f.spec, f.graph, f.theta, true);
    benchmark::DoNotOptimize(e.jacobian.data());
  }
}
BENCHMARK(BM_WeightJacobian)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
