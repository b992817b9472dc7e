#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace mgcp {

// Returns f(x) and writes the gradient into g. A non-finite value marks x as
// infeasible; the line search backs away from it.
using Objective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &g)>;

struct OptimizerOptions {
  int max_iters = 1000;
  double rel_tol = 1e-9;   // relative change of f
  int patience = 5;        // consecutive iterations below rel_tol
  double grad_tol = 1e-5;  // max-norm of the gradient
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
  int adam_steps = 200;
  double adam_rate = 1e-2;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> trace;  // f after each iteration
};

// Limited-memory BFGS with a strong-Wolfe line search. Falls back to a burst of
// Adam steps when the line search fails, then resumes with fresh memory.
// Always returns the best point seen.
OptimizerResult minimize_lbfgs(const Objective &objective, Eigen::VectorXd x0,
                               const OptimizerOptions &options = {});

OptimizerResult minimize_adam(const Objective &objective, Eigen::VectorXd x0,
                              const OptimizerOptions &options = {});

}  // namespace mgcp
