#include <benchmark/benchmark.h>

#include "sgev/model.hpp"
#include "sgev/particle_filter.hpp"
#include "sgev/rng.hpp"

namespace {

sgev::SyntheticDataset bench_dataset() {
  sgev::SyntheticRecipe recipe;
  return sgev::make_synthetic_dataset(recipe, sgev::Rng(7));
}

void BM_pf_step(benchmark::State& state) {
  const auto data = bench_dataset();
  const int N = static_cast<int>(state.range(0));
  const int P = data.model.P;
  const int L = data.model.L;

  sgev::ParticleEnsemble ensemble;
  ensemble.particles = Eigen::MatrixXd::Zero(N, P);
  ensemble.weights = Eigen::VectorXd::Constant(N, 1.0 / N);
  ensemble.histories.assign(static_cast<std::size_t>(N),
                            Eigen::MatrixXd::Zero(L, P));
  sgev::Rng init(11);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < P; ++i) {
      ensemble.particles(k, i) = init.normal(0.2, 0.3);
      for (int l = 0; l < L; ++l)
        ensemble.histories[static_cast<std::size_t>(k)](l, i) = init.normal(0.2, 0.3);
    }
  }
  ensemble.ess = N;

  const Eigen::VectorXd x_t = data.panel.values.row(L).transpose();
  std::uint64_t step = 0;
  for (auto _ : state) {
    sgev::PfStepResult r =
        sgev::pf_step(ensemble, x_t, data.model, L, sgev::Rng(100 + step++));
    benchmark::DoNotOptimize(r.ess);
  }
  state.SetItemsProcessed(state.iterations() * N * P);
}
BENCHMARK(BM_pf_step)->Arg(100)->Arg(1000)->Arg(4000);

void BM_run_filter(benchmark::State& state) {
  const auto data = bench_dataset();
  const int N = static_cast<int>(state.range(0));
  std::uint64_t pass = 0;
  for (auto _ : state) {
    sgev::FilterResult r =
        sgev::run_filter(data.panel, data.model, N, sgev::Rng(500 + pass++));
    benchmark::DoNotOptimize(r.summary.n_steps);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(data.panel.steps()) * N);
}
BENCHMARK(BM_run_filter)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
