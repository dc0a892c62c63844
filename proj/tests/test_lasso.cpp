#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "sgev/lasso.hpp"
#include "sgev/rng.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

TEST_CASE("moments from data match hand computation") {
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 4.0;
  Eigen::MatrixXd r(3, 2);
  r << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  const sgev::ExpectedLassoProblem p = sgev::make_problem_from_data(y, r);
  CHECK(p.n == 3.0);
  CHECK(p.target_sum == 7.0);
  CHECK(p.target_sq_sum == 21.0);
  CHECK(p.reg_sum(0) == 2.0);
  CHECK(p.reg_sum(1) == 2.0);
  CHECK(p.gram(0, 0) == 2.0);
  CHECK(p.gram(0, 1) == 1.0);
  CHECK(p.gram(1, 1) == 2.0);
  CHECK(p.cross(0) == 5.0);
  CHECK(p.cross(1) == 6.0);
}

TEST_CASE("zero penalty reduces to least squares") {
  sgev::Rng rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    sgev::Rng instance_rng = rng.substream(static_cast<std::uint64_t>(rep));
    const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 5, 60, 0.0);
    const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, 0.0);

    const Eigen::MatrixXd centered = p.gram - p.reg_sum * p.reg_sum.transpose() / p.n;
    const Eigen::VectorXd h = p.cross - p.target_sum * p.reg_sum / p.n;
    const Eigen::VectorXd direct = centered.ldlt().solve(h);
    CHECK((sol.beta - direct).lpNorm<Eigen::Infinity>() < 1e-8);
    const double intercept = (p.target_sum - direct.dot(p.reg_sum)) / p.n;
    CHECK(std::abs(sol.intercept - intercept) < 1e-8);
  }
}

TEST_CASE("penalties at or above lambda_max force an empty support") {
  sgev::Rng rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    sgev::Rng instance_rng = rng.substream(static_cast<std::uint64_t>(rep));
    const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 6, 50, 0.01);
    const double lmax = sgev::lasso_lambda_max(p);
    for (double factor : {1.0, 1.000001, 2.0}) {
      const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, factor * lmax);
      CHECK(sol.beta.lpNorm<Eigen::Infinity>() == 0.0);
      CHECK(std::abs(sol.intercept - p.target_sum / p.n) < 1e-12);
    }
    // Just below the threshold at least one coordinate activates.
    const sgev::LassoSolution below = sgev::solve_expected_lasso(p, 0.99 * lmax);
    CHECK(below.beta.lpNorm<Eigen::Infinity>() > 0.0);
  }
}

TEST_CASE("lambda_max equals the largest centered correlation") {
  sgev::Rng rng(44);
  sgev::Rng instance_rng = rng.substream(0);
  const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 4, 30, 0.0);
  const Eigen::VectorXd h = p.cross - p.target_sum * p.reg_sum / p.n;
  CHECK(std::abs(sgev::lasso_lambda_max(p) - 2.0 * h.lpNorm<Eigen::Infinity>()) < 1e-12);
}

TEST_CASE("coordinate descent matches sign enumeration") {
  sgev::Rng rng(47);
  int checked = 0;
  for (int rep = 0; rep < 36; ++rep) {
    sgev::Rng instance_rng = rng.substream(static_cast<std::uint64_t>(rep));
    const int d = 2 + rep % 5;  // up to 6 for tractable enumeration
    const double noise = (rep % 3 == 0) ? 0.0 : 0.05;
    const sgev::ExpectedLassoProblem p =
        testgen::lasso_instance(instance_rng, d, 40, noise);
    const double lmax = sgev::lasso_lambda_max(p);
    for (double frac : {0.01, 0.2, 0.6}) {
      const double lambda = frac * lmax;
      const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, lambda);
      const oracle::SignEnumSolution exact = oracle::sign_enum_lasso(p, lambda);
      CHECK((sol.beta - exact.beta).lpNorm<Eigen::Infinity>() < 1e-7);
      const double sol_obj = sgev::lasso_objective(p, sol.beta, sol.intercept, lambda);
      CHECK(std::abs(sol_obj - exact.objective) < 1e-8 * std::max(1.0, std::abs(exact.objective)));
      ++checked;
    }
  }
  CHECK(checked == 108);
}

TEST_CASE("coordinate descent objective is never beaten by subgradient descent") {
  sgev::Rng rng(48);
  for (int rep = 0; rep < 8; ++rep) {
    sgev::Rng instance_rng = rng.substream(static_cast<std::uint64_t>(rep));
    const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 7, 50, 0.02);
    const double lambda = 0.3 * sgev::lasso_lambda_max(p);
    const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, lambda);
    const double cd_obj = sgev::lasso_objective(p, sol.beta, sol.intercept, lambda);
    const double sub_obj = oracle::subgradient_lasso_objective(p, lambda, 20000);
    CHECK(cd_obj <= sub_obj + 1e-9);
    CHECK(std::abs(cd_obj - sub_obj) < 1e-3 * std::max(1.0, std::abs(sub_obj)));
  }
}

TEST_CASE("kkt residual is small at the solution and flags perturbations") {
  sgev::Rng rng(49);
  sgev::Rng instance_rng = rng.substream(1);
  const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 6, 60, 0.01);
  const double lambda = 0.2 * sgev::lasso_lambda_max(p);
  const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, lambda);
  CHECK(sol.kkt_residual <= 1e-10);
  CHECK(sgev::lasso_kkt_residual(p, sol.beta, lambda) <= 1e-10);

  Eigen::VectorXd off = sol.beta;
  off(0) += 0.05;
  CHECK(sgev::lasso_kkt_residual(p, off, lambda) > 1e-4);
}

TEST_CASE("reported objective matches its moment expansion") {
  sgev::Rng rng(50);
  sgev::Rng instance_rng = rng.substream(2);
  const sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 4, 30, 0.03);
  sgev::Rng coef_rng = rng.substream(3);
  Eigen::VectorXd beta(4);
  for (int j = 0; j < 4; ++j) beta(j) = coef_rng.normal();
  const double intercept = coef_rng.normal();
  const double lambda = 0.7;

  double expected = p.target_sq_sum - 2.0 * intercept * p.target_sum -
                    2.0 * beta.dot(p.cross) + 2.0 * intercept * beta.dot(p.reg_sum) +
                    p.n * intercept * intercept + beta.dot(p.gram * beta) +
                    lambda * beta.lpNorm<1>();
  CHECK(std::abs(sgev::lasso_objective(p, beta, intercept, lambda) - expected) < 1e-10);
}

TEST_CASE("solver copes with strongly correlated regressors") {
  sgev::Rng rng(51);
  const int n = 80;
  Eigen::MatrixXd r(n, 3);
  Eigen::VectorXd y(n);
  for (int t = 0; t < n; ++t) {
    const double base = rng.normal();
    r(t, 0) = base;
    r(t, 1) = base + 1e-4 * rng.normal();  // near-duplicate column
    r(t, 2) = rng.normal();
    y(t) = 1.5 * base - 0.5 * r(t, 2) + 0.1 * rng.normal();
  }
  const sgev::ExpectedLassoProblem p = sgev::make_problem_from_data(y, r);
  const double lambda = 0.05 * sgev::lasso_lambda_max(p);
  const sgev::LassoSolution sol = sgev::solve_expected_lasso(p, lambda);
  CHECK(sol.kkt_residual <= 1e-10);
  const oracle::SignEnumSolution exact = oracle::sign_enum_lasso(p, lambda);
  const double sol_obj = sgev::lasso_objective(p, sol.beta, sol.intercept, lambda);
  CHECK(std::abs(sol_obj - exact.objective) < 1e-8 * std::max(1.0, std::abs(exact.objective)));
}

TEST_CASE("posterior moment inflation shrinks the solution") {
  // Adding variance to the regressors acts like ridge: coefficients move
  // toward zero but the solver stays exact.
  sgev::Rng rng(52);
  sgev::Rng instance_rng = rng.substream(0);
  sgev::ExpectedLassoProblem p = testgen::lasso_instance(instance_rng, 3, 200, 0.0);
  const double lambda = 0.01 * sgev::lasso_lambda_max(p);
  const sgev::LassoSolution plain = sgev::solve_expected_lasso(p, lambda);

  sgev::ExpectedLassoProblem inflated = p;
  inflated.gram.diagonal().array() += 5.0 * inflated.n;
  inflated.target_sq_sum += 5.0 * inflated.n;
  const sgev::LassoSolution shrunk = sgev::solve_expected_lasso(inflated, lambda);
  CHECK(shrunk.kkt_residual <= 1e-10);
  CHECK(shrunk.beta.lpNorm<1>() < plain.beta.lpNorm<1>());

  const oracle::SignEnumSolution exact = oracle::sign_enum_lasso(inflated, lambda);
  CHECK((shrunk.beta - exact.beta).lpNorm<Eigen::Infinity>() < 1e-7);
}
