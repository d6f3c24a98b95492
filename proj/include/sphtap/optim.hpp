#pragma once

#include <Eigen/Dense>

#include <functional>

namespace sphtap::optim {

/// Objective with gradient. Returns +inf (gradient ignored) outside the
/// feasible domain; the line search backs off from such points.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-10;   // on ||grad||_inf
  double f_tol = 1e-15;      // relative decrease over one iteration
  int stall_limit = 4;       // consecutive iterations below f_tol
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Dense BFGS with Armijo backtracking. x0 must be feasible.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {});

}  // namespace sphtap::optim
