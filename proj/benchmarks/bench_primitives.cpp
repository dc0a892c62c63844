#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sgev/gumbel.hpp"
#include "sgev/lambert.hpp"
#include "sgev/particle_filter.hpp"
#include "sgev/rng.hpp"

namespace {

void BM_lambert_w0(benchmark::State& state) {
  sgev::Rng rng(42);
  std::vector<double> args(1024);
  for (auto& a : args) a = std::exp(-10.0 + 20.0 * rng.uniform());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgev::lambert_w0(args[i]));
    i = (i + 1) % args.size();
  }
}
BENCHMARK(BM_lambert_w0);

void BM_lambert_w0_exp(benchmark::State& state) {
  sgev::Rng rng(43);
  std::vector<double> args(1024);
  for (auto& a : args) a = -50.0 + 1550.0 * rng.uniform();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgev::lambert_w0_exp(args[i]));
    i = (i + 1) % args.size();
  }
}
BENCHMARK(BM_lambert_w0_exp);

void BM_proposal_params(benchmark::State& state) {
  sgev::Rng rng(44);
  std::vector<double> x(1024), mu(1024);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = -2.0 + 6.0 * rng.uniform();
    mu[k] = -2.0 + 6.0 * rng.uniform();
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgev::proposal_params(x[i], mu[i], 0.05, 0.3));
    i = (i + 1) % x.size();
  }
}
BENCHMARK(BM_proposal_params);

void BM_fit_gumbel_mle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  sgev::Rng rng(45);
  sgev::GumbelParams truth{1.0, 0.5};
  std::vector<double> samples(n);
  for (auto& s : samples) s = sgev::gumbel_sample(truth, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgev::fit_gumbel_mle(samples));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_fit_gumbel_mle)->Arg(100)->Arg(1000)->Arg(10000)->Complexity();

}  // namespace
