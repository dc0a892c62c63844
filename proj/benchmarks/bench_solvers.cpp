#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "sgev/baselines.hpp"
#include "sgev/lasso.hpp"
#include "sgev/rng.hpp"

namespace {

sgev::ExpectedLassoProblem random_problem(int n, int d, std::uint64_t seed) {
  sgev::Rng rng(seed);
  Eigen::MatrixXd R(n, d);
  Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; j += 3) beta_true(j) = rng.normal(0.0, 1.0);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < d; ++j) R(t, j) = rng.normal();
  Eigen::VectorXd y = R * beta_true;
  for (int t = 0; t < n; ++t) y(t) += 0.5 + rng.normal(0.0, 0.2);
  return sgev::make_problem_from_data(y, R);
}

void BM_solve_expected_lasso(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto problem = random_problem(200, d, 99);
  const double lambda = 0.1 * sgev::lasso_lambda_max(problem);
  for (auto _ : state) {
    sgev::LassoSolution sol = sgev::solve_expected_lasso(problem, lambda);
    benchmark::DoNotOptimize(sol.kkt_residual);
  }
}
BENCHMARK(BM_solve_expected_lasso)->Arg(18)->Arg(60)->Arg(200);

void BM_knn_entropy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  sgev::Rng rng(123);
  Eigen::MatrixXd samples(n, 3);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < 3; ++j) samples(t, j) = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgev::knn_entropy(samples, 4));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_knn_entropy)->Arg(200)->Arg(1000)->Arg(5000)->Complexity();

}  // namespace
