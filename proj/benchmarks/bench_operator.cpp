#include <benchmark/benchmark.h>

#include <random>

#include "hdg/mesh.hpp"
#include "hdg/operator.hpp"
#include "hdg/preconditioner.hpp"

namespace {

// One trace-operator application on a 4^3 cube, reported per equivalent DOF.
void run(benchmark::State& state, hdg::HdgOperator::Variant variant) {
  const int p = static_cast<int>(state.range(0));
  const hdg::Mesh mesh = hdg::build_mesh({4, 4, 4}, {0, 0, 0}, {6.283185307179586, 6.283185307179586, 6.283185307179586});
  const auto ctx = hdg::make_context(mesh, p, hdg::Penalty{}, 0.0);
  hdg::HdgOperator op(ctx, variant);
  hdg::FluxField x(mesh, p), y(mesh, p);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (double& v : x.values()) v = dist(gen);
  hdg::zero_dirichlet(mesh, x);
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.values().data());
  }
  const double dofs = static_cast<double>(mesh.num_elements()) * (p + 1) * (p + 1) * (p + 1);
  state.counters["s_per_dof"] =
      benchmark::Counter(dofs, benchmark::Counter::kIsIterationInvariantRate | benchmark::Counter::kInvert);
}

void BM_OperatorSumFactorized(benchmark::State& state) { run(state, hdg::HdgOperator::Variant::SumFactorized); }
void BM_OperatorTransformed(benchmark::State& state) { run(state, hdg::HdgOperator::Variant::Transformed); }

void BM_BlockPreconditioner(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const hdg::Mesh mesh = hdg::build_mesh({4, 4, 4}, {0, 0, 0}, {1, 1, 1});
  const auto ctx = hdg::make_context(mesh, p, hdg::Penalty{}, 0.0);
  const auto pc = hdg::build_block_preconditioner(ctx);
  hdg::FluxField x(mesh, p), y(mesh, p);
  for (double& v : x.values()) v = 1.0;
  for (auto _ : state) {
    hdg::apply_block_preconditioner(pc, x, y);
    benchmark::DoNotOptimize(y.values().data());
  }
}

}  // namespace

BENCHMARK(BM_OperatorSumFactorized)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_OperatorTransformed)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BlockPreconditioner)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
