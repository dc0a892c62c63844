#include "sgev/lasso.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sgev/errors.hpp"
#include "sgev/math_util.hpp"

namespace sgev {

namespace {

void validate_problem(const ExpectedLassoProblem& p) {
  const Eigen::Index d = p.cross.size();
  if (p.gram.rows() != d || p.gram.cols() != d || p.reg_sum.size() != d) {
    throw DimensionError("lasso problem moment shapes do not match");
  }
  if (!(p.n > 0.0)) throw DimensionError("lasso problem requires n > 0");
  if (!p.gram.allFinite() || !p.cross.allFinite() || !p.reg_sum.allFinite() ||
      !std::isfinite(p.target_sum) || !std::isfinite(p.target_sq_sum)) {
    throw DomainError("lasso problem contains non-finite moments");
  }
}

struct Centered {
  Eigen::MatrixXd gram;   // gram with the intercept profiled out
  Eigen::VectorXd cross;
};

Centered center(const ExpectedLassoProblem& p) {
  Centered c;
  c.gram = p.gram - p.reg_sum * p.reg_sum.transpose() / p.n;
  c.cross = p.cross - (p.target_sum / p.n) * p.reg_sum;
  return c;
}

// Exact solve on a working support: restricted stationarity system, then
// rounds of dropping sign flips and admitting the worst zero-coordinate
// violator.  Finishes coordinate descent to machine-level KKT residuals
// and rescues it on near-collinear designs where sweeps alone crawl.
std::optional<Eigen::VectorXd> active_set_polish(const Centered& c, double lambda,
                                                 const Eigen::VectorXd& start) {
  const Eigen::Index d = c.cross.size();
  std::vector<int> sign(static_cast<std::size_t>(d), 0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (c.gram(j, j) <= 1e-300) continue;
    sign[static_cast<std::size_t>(j)] = start[j] > 0.0 ? 1 : (start[j] < 0.0 ? -1 : 0);
  }

  const int max_rounds = static_cast<int>(4 * d + 16);
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (sign[static_cast<std::size_t>(j)] != 0) active.push_back(j);
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    if (!active.empty()) {
      const auto m = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd g(m, m);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index ja = active[static_cast<std::size_t>(a)];
        rhs[a] = c.cross[ja] - 0.5 * lambda * sign[static_cast<std::size_t>(ja)];
        for (Eigen::Index b = 0; b < m; ++b) {
          g(a, b) = c.gram(ja, active[static_cast<std::size_t>(b)]);
        }
      }
      const Eigen::LDLT<Eigen::MatrixXd> solver(g);
      if (solver.info() != Eigen::Success) return std::nullopt;
      const Eigen::VectorXd sol = solver.solve(rhs);
      if (!sol.allFinite()) return std::nullopt;
      if (lambda > 0.0) {
        bool flipped = false;
        for (Eigen::Index a = 0; a < m; ++a) {
          const Eigen::Index ja = active[static_cast<std::size_t>(a)];
          const int s = sign[static_cast<std::size_t>(ja)];
          if ((s > 0 && !(sol[a] > 0.0)) || (s < 0 && !(sol[a] < 0.0))) {
            sign[static_cast<std::size_t>(ja)] = 0;
            flipped = true;
          }
        }
        if (flipped) continue;
      }
      for (Eigen::Index a = 0; a < m; ++a) beta[active[static_cast<std::size_t>(a)]] = sol[a];
    }

    const Eigen::VectorXd grad = 2.0 * (c.gram * beta - c.cross);
    double worst = 0.0;
    Eigen::Index worst_j = -1;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (sign[static_cast<std::size_t>(j)] != 0 || c.gram(j, j) <= 1e-300) continue;
      const double violation = std::abs(grad[j]) - lambda;
      if (violation > worst) {
        worst = violation;
        worst_j = j;
      }
    }
    if (worst_j >= 0 && worst > 1e-12 * std::max(1.0, lambda)) {
      sign[static_cast<std::size_t>(worst_j)] = grad[worst_j] < 0.0 ? 1 : -1;
      continue;
    }
    return beta;
  }
  return std::nullopt;
}

}  // namespace

ExpectedLassoProblem make_problem_from_data(const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& R) {
  if (y.size() != R.rows() || y.size() == 0) {
    throw DimensionError("make_problem_from_data: row mismatch");
  }
  ExpectedLassoProblem p;
  p.gram = R.transpose() * R;
  p.cross = R.transpose() * y;
  p.reg_sum = R.colwise().sum().transpose();
  p.target_sum = y.sum();
  p.target_sq_sum = y.squaredNorm();
  p.n = static_cast<double>(y.size());
  return p;
}

double lasso_objective(const ExpectedLassoProblem& p, const Eigen::VectorXd& beta,
                       double intercept, double lambda) {
  validate_problem(p);
  if (beta.size() != p.cross.size()) throw DimensionError("beta size mismatch");
  const double c = intercept;
  return p.target_sq_sum - 2.0 * c * p.target_sum - 2.0 * beta.dot(p.cross) +
         p.n * c * c + 2.0 * c * beta.dot(p.reg_sum) +
         beta.dot(p.gram * beta) + lambda * beta.lpNorm<1>();
}

double lasso_kkt_residual(const ExpectedLassoProblem& p, const Eigen::VectorXd& beta,
                          double lambda) {
  validate_problem(p);
  if (beta.size() != p.cross.size()) throw DimensionError("beta size mismatch");
  const Centered c = center(p);
  const Eigen::VectorXd grad = 2.0 * (c.gram * beta - c.cross);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0.0) {
      worst = std::max(worst, std::max(0.0, std::abs(grad[j]) - lambda));
    } else {
      worst = std::max(worst, std::abs(grad[j] + lambda * (beta[j] > 0.0 ? 1.0 : -1.0)));
    }
  }
  return worst;
}

double lasso_lambda_max(const ExpectedLassoProblem& p) {
  validate_problem(p);
  const Centered c = center(p);
  return 2.0 * c.cross.cwiseAbs().maxCoeff();
}

LassoSolution solve_expected_lasso(const ExpectedLassoProblem& p, double lambda,
                                   double kkt_tol, int max_sweeps) {
  validate_problem(p);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("solve_expected_lasso requires lambda >= 0");
  }
  const Eigen::Index d = p.cross.size();
  const Centered c = center(p);
  const double tol = kkt_tol * std::max({1.0, c.cross.cwiseAbs().maxCoeff(), lambda});

  LassoSolution sol;
  sol.beta = Eigen::VectorXd::Zero(d);

  const auto finish = [&](const Eigen::VectorXd& beta, int sweeps) {
    LassoSolution out;
    out.beta = beta;
    out.sweeps = sweeps;
    out.kkt_residual = lasso_kkt_residual(p, beta, lambda);
    out.intercept = (p.target_sum - beta.dot(p.reg_sum)) / p.n;
    return out;
  };
  const auto try_polish = [&](const Eigen::VectorXd& beta, int sweeps)
      -> std::optional<LassoSolution> {
    const std::optional<Eigen::VectorXd> polished = active_set_polish(c, lambda, beta);
    if (!polished) return std::nullopt;
    LassoSolution out = finish(*polished, sweeps);
    if (out.kkt_residual <= tol) return out;
    return std::nullopt;
  };

  // residual_j tracks (gram.beta)_j so each coordinate update is O(d).
  Eigen::VectorXd gram_beta = Eigen::VectorXd::Zero(d);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double curvature = c.gram(j, j);
      if (curvature <= 1e-300) {
        // Degenerate covariate (no variance after centering); keep it out.
        if (sol.beta[j] != 0.0) {
          gram_beta -= sol.beta[j] * c.gram.col(j);
          sol.beta[j] = 0.0;
        }
        continue;
      }
      const double rho = c.cross[j] - (gram_beta[j] - curvature * sol.beta[j]);
      const double updated = soft_threshold(rho, 0.5 * lambda) / curvature;
      const double delta = updated - sol.beta[j];
      if (delta != 0.0) {
        gram_beta += delta * c.gram.col(j);
        sol.beta[j] = updated;
      }
    }
    sol.sweeps = sweep;
    sol.kkt_residual = lasso_kkt_residual(p, sol.beta, lambda);
    const bool converged = sol.kkt_residual <= tol;
    if (converged || sweep % 200 == 0) {
      // The exact restricted solve takes the iterate the rest of the way;
      // on stalls it also recovers the support that sweeps circle around.
      if (const auto polished = try_polish(sol.beta, sweep)) {
        if (!converged || polished->kkt_residual <= sol.kkt_residual) return *polished;
      }
    }
    if (converged) return finish(sol.beta, sweep);
  }
  throw ConvergenceError("solve_expected_lasso: KKT residual " +
                             std::to_string(sol.kkt_residual) + " above tolerance after " +
                             std::to_string(max_sweeps) + " sweeps",
                         sol.kkt_residual);
}

}  // namespace sgev
