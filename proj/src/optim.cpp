#include "sphtap/optim.hpp"

#include <cmath>
#include <limits>

#include "sphtap/errors.hpp"

namespace sphtap::optim {

BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const Eigen::Index dim = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(dim);
  res.f = f(res.x, g);
  if (!std::isfinite(res.f)) throw DomainError("minimize_bfgs: infeasible starting point");

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd gnew(dim), xnew(dim);
  int stall = 0;
  bool scaled = false;

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir = -hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    double fnew = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xnew = res.x + step * dir;
      fnew = f(xnew, gnew);
      if (std::isfinite(fnew) && fnew <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= std::isfinite(fnew) ? 0.5 : 0.25;
    }
    if (!accepted) {
      if (hinv.isIdentity()) {
        // Steepest descent cannot make progress: converged to working precision.
        res.converged = true;
        return res;
      }
      hinv.setIdentity();
      continue;
    }

    const Eigen::VectorXd s = xnew - res.x;
    const Eigen::VectorXd y = gnew - g;
    const double sy = s.dot(y);
    const double decrease = res.f - fnew;
    res.x = xnew;
    res.f = fnew;
    g = gnew;

    if (sy > 1e-300) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
    }

    if (decrease <= opts.f_tol * std::max(1.0, std::abs(res.f))) {
      if (++stall >= opts.stall_limit) {
        res.converged = true;
        return res;
      }
    } else {
      stall = 0;
    }
  }
  return res;
}

}  // namespace sphtap::optim
