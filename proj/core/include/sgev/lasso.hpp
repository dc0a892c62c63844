#pragma once

#include <Eigen/Core>

namespace sgev {

// Sufficient statistics of the penalized regression
//   minimize  sum_t E[(y_t - c - b.r_t)^2] + lambda * ||b||_1
// over (b, c), where the expectation may be a posterior average (latent
// regressors) or degenerate (observed regressors).  Only the moments
// enter the objective:
//   gram          = sum_t E[r_t r_t^T]
//   cross         = sum_t E[y_t r_t]
//   reg_sum       = sum_t E[r_t]
//   target_sum    = sum_t E[y_t]
//   target_sq_sum = sum_t E[y_t^2]
//   n             = number of terms
struct ExpectedLassoProblem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd cross;
  Eigen::VectorXd reg_sum;
  double target_sum = 0.0;
  double target_sq_sum = 0.0;
  double n = 0.0;
};

// Degenerate (plug-in) moments from observed data: y has n entries, R is
// n x d with matching rows.
ExpectedLassoProblem make_problem_from_data(const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& R);

struct LassoSolution {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
};

double lasso_objective(const ExpectedLassoProblem& p, const Eigen::VectorXd& beta,
                       double intercept, double lambda);

// Max violation of the stationarity conditions at (beta, implied c):
// zero coordinates allow |gradient| up to lambda, active ones must
// balance exactly.
double lasso_kkt_residual(const ExpectedLassoProblem& p, const Eigen::VectorXd& beta,
                          double lambda);

// Smallest penalty that forces beta = 0.
double lasso_lambda_max(const ExpectedLassoProblem& p);

// Cyclic coordinate descent with soft-thresholding; the intercept is
// unpenalized and eliminated in closed form.
LassoSolution solve_expected_lasso(const ExpectedLassoProblem& p, double lambda,
                                   double kkt_tol = 1e-10, int max_sweeps = 100000);

}  // namespace sgev
