// Microbenchmarks for the per-iteration building blocks: prox maps, the
// maximum-eigenvalue routine, the TRS pessimizer, and whole first-order /
// nominal-oracle iterations on a generated portfolio constraint.

#include <benchmark/benchmark.h>

#include "rofo/eigen_sym.hpp"
#include "rofo/framework.hpp"
#include "rofo/geometry.hpp"
#include "rofo/oco.hpp"
#include "rofo/portfolio.hpp"
#include "rofo/robust_qp.hpp"
#include "rofo/rng.hpp"

using Eigen::MatrixXd;
using rofo::ProximalSetup;
using rofo::VectorXd;

namespace {

void bm_prox_ball(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ProximalSetup ball = ProximalSetup::euclidean_ball(VectorXd::Zero(n), 1.0);
  rofo::Rng rng(1);
  VectorXd z = rofo::initial_point(ball);
  const VectorXd g = 0.1 * rng.normal_vector(n);
  for (auto _ : state) {
    z = rofo::prox_step(ball, z, g);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(bm_prox_ball)->Arg(100)->Arg(700);

void bm_prox_simplex(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ProximalSetup setup = ProximalSetup::simplex(n);
  rofo::Rng rng(2);
  VectorXd z = rofo::initial_point(setup);
  const VectorXd g = 0.1 * rng.normal_vector(n);
  for (auto _ : state) {
    z = rofo::prox_step(setup, z, g);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(bm_prox_simplex)->Arg(100)->Arg(700);

void bm_simplex_projection(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ProximalSetup setup = ProximalSetup::simplex(n);
  rofo::Rng rng(3);
  const VectorXd v = rng.normal_vector(n);
  for (auto _ : state) {
    VectorXd p = rofo::project(setup, v);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(bm_simplex_projection)->Arg(100)->Arg(700);

void bm_max_eigenvalue(benchmark::State& state) {
  const Eigen::Index k = state.range(0);
  rofo::Rng rng(4);
  const MatrixXd g = rng.normal_matrix(k, k);
  const MatrixXd q = g * g.transpose();
  for (auto _ : state) {
    auto r = rofo::max_eigenvalue(q);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(bm_max_eigenvalue)->Arg(6)->Arg(15)->Arg(64);

void bm_trs_max(benchmark::State& state) {
  const Eigen::Index k = state.range(0);
  rofo::Rng rng(5);
  const MatrixXd g = rng.normal_matrix(k, k);
  const MatrixXd q = g * g.transpose();
  const VectorXd r = rng.normal_vector(k);
  for (auto _ : state) {
    auto res = rofo::trs_max(q, r, 0.0);
    benchmark::DoNotOptimize(res.value);
  }
}
BENCHMARK(bm_trs_max)->Arg(6)->Arg(15);

// One full OFO iteration (noise + solution updates and the certificate
// bookkeeping) on a generated portfolio epigraph constraint.
void bm_ofo_iteration(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  rofo::PortfolioParams params;
  params.n = n;
  params.m = 5;
  params.seed = 7;
  const rofo::BenchmarkInstance bi = rofo::make_benchmark_instance(params, 0.1);
  rofo::RobustInstance instance;
  instance.x_setup = ProximalSetup::simplex(bi.n);
  instance.constraints.push_back(rofo::make_robust_constraint(bi.constraint));

  rofo::RunConfig config;
  config.epsilon = 0.02;
  for (auto _ : state) {
    state.PauseTiming();
    config.max_iterations = 64;
    state.ResumeTiming();
    auto out = rofo::run_ofo(instance, config);
    benchmark::DoNotOptimize(out.iterations);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(bm_ofo_iteration)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

// One nominal-oracle outer iteration on the same constraint (a full inner
// projected-subgradient solve), for the per-iteration cost comparison.
void bm_nominal_iteration(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  rofo::PortfolioParams params;
  params.n = n;
  params.m = 5;
  params.seed = 7;
  const rofo::BenchmarkInstance bi = rofo::make_benchmark_instance(params, 0.1);
  rofo::RobustInstance instance;
  instance.x_setup = ProximalSetup::simplex(bi.n);
  instance.constraints.push_back(rofo::make_robust_constraint(bi.constraint));

  rofo::RunConfig config;
  config.epsilon = 0.02;
  config.max_iterations = 1;
  for (auto _ : state) {
    auto out = rofo::run_nominal_oracle(instance, config);
    benchmark::DoNotOptimize(out.iterations);
  }
}
BENCHMARK(bm_nominal_iteration)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
