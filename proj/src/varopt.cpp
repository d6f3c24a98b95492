#include "sphtap/varopt.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "sphtap/errors.hpp"
#include "sphtap/gse.hpp"
#include "sphtap/optim.hpp"
#include "sphtap/parallel.hpp"
#include "sphtap/rng.hpp"

namespace sphtap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ground-state term and its gradient in Q̃ (gradient may be null).
using GroundFn = std::function<double(const SymMatrix& qt, Eigen::MatrixXd* grad)>;
using GroundFactory = std::function<GroundFn()>;

Eigen::VectorXd pack_sym(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd x(n * (n + 1) / 2);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) x(p++) = a(i, j);
  return x;
}

// Gradient of a function of the symmetric matrix with respect to its packed
// upper triangle: off-diagonal entries appear twice.
Eigen::VectorXd pack_grad(const Eigen::MatrixXd& g) {
  const Eigen::Index n = g.rows();
  Eigen::VectorXd x(n * (n + 1) / 2);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) x(p++) = i == j ? g(i, i) : g(i, j) + g(j, i);
  return x;
}

Eigen::MatrixXd unpack_sym(const Eigen::VectorXd& x, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) a(i, j) = a(j, i) = x(p++);
  return a;
}

// log det and inverse through Cholesky; nullopt if not positive definite.
struct CholInfo {
  double logdet;
  Eigen::MatrixXd inverse;
};

std::optional<CholInfo> chol(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if ((d.array() <= 1e-150).any()) return std::nullopt;
  return CholInfo{2.0 * d.array().log().sum(),
                  llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()))};
}

double dimensionless_onsager(const Eigen::VectorXd& beta, const Eigen::MatrixXd& gap) {
  return 0.5 * beta.dot(gap.cwiseProduct(gap) * beta);
}

struct Candidate {
  Eigen::MatrixXd qt;
  double value = -kInf;
};

// Objective plus barrier μ[log det Q̃ + log det(cI - β^½ (Q - Q̃) β^½)],
// returned with a flipped sign for the minimizer.
double barrier_objective(const ModelParams& p, const GroundFn& ground, double mu,
                         const Eigen::MatrixXd& qt, Eigen::MatrixXd* grad) {
  const Eigen::Index n = p.n();
  const auto own = chol(qt);
  if (!own) return -kInf;
  const Eigen::MatrixXd gap = p.q().dense() - qt;
  const auto gap_chol = chol(gap);
  if (!gap_chol) return -kInf;
  const Eigen::VectorXd d = p.sqrt_beta();
  const Eigen::MatrixXd slack =
      kInvSqrt2 * Eigen::MatrixXd::Identity(n, n) - d.asDiagonal() * gap * d.asDiagonal();
  const auto slack_chol = chol(slack);
  if (!slack_chol) return -kInf;

  Eigen::MatrixXd gground;
  double g_val;
  try {
    g_val = ground(SymMatrix(qt), grad ? &gground : nullptr);
  } catch (const DomainError&) {
    return -kInf;
  } catch (const NumericalError&) {
    return -kInf;
  }
  if (!std::isfinite(g_val)) return -kInf;
  const double value = g_val + 0.5 * gap_chol->logdet + dimensionless_onsager(p.beta(), gap) +
                       mu * (own->logdet + slack_chol->logdet);
  if (grad) {
    const Eigen::MatrixXd bb = p.beta() * p.beta().transpose();
    *grad = gground - 0.5 * gap_chol->inverse - bb.cwiseProduct(gap) +
            mu * (own->inverse + d.asDiagonal() * slack_chol->inverse * d.asDiagonal());
  }
  return value;
}

double plain_objective(const ModelParams& p, const GroundFn& ground, const Eigen::MatrixXd& qt) {
  const Eigen::MatrixXd gap = p.q().dense() - qt;
  const auto gap_chol = chol(gap);
  if (!gap_chol) return -kInf;
  return ground(SymMatrix(qt), nullptr) + 0.5 * gap_chol->logdet +
         dimensionless_onsager(p.beta(), gap);
}

Candidate climb(const ModelParams& p, const GroundFn& ground, const Eigen::MatrixXd& start) {
  const Eigen::Index n = p.n();
  Eigen::VectorXd x = pack_sym(start);
  optim::BfgsOptions bo;
  bo.grad_tol = 1e-10;
  bo.max_iter = 400;
  for (double mu = 1e-2; mu > 5e-11; mu *= 0.1) {
    const optim::Objective f = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g) {
      Eigen::MatrixXd grad;
      const double v = barrier_objective(p, ground, mu, unpack_sym(y, n), &grad);
      if (!std::isfinite(v)) return kInf;
      g = -pack_grad(grad);
      return -v;
    };
    Eigen::VectorXd g;
    if (!std::isfinite(f(x, g))) break;
    x = optim::minimize_bfgs(f, x, bo).x;
  }
  Candidate c;
  c.qt = unpack_sym(x, n);
  c.value = plain_objective(p, ground, c.qt);
  return c;
}

double plefka_scale(const ModelParams& p) {
  return spectral_norm(congruence_diag(p.sqrt_beta(), p.q()));
}

// Q̃ = (1 - η) Q with η capped so the Plefka bound holds with 2% room.
Eigen::MatrixXd shrunk_start(const ModelParams& p, double eta) {
  const double norm = plefka_scale(p);
  if (norm > 0.0) eta = std::min(eta, 0.98 * kInvSqrt2 / norm);
  return (1.0 - eta) * p.q().dense();
}

bool better(const Candidate& a, const Candidate& b, double tol) {
  if (a.value > b.value + tol) return true;
  if (a.value < b.value - tol) return false;
  return a.qt.norm() < b.qt.norm();
}

VarSolution finish(const ModelParams& p, const Candidate& best, double worst, int restarts) {
  VarSolution s;
  s.qstar = SymMatrix(best.qt);
  s.value = best.value;
  s.flags = active_constraints(p, s.qstar);
  s.restarts_used = restarts;
  s.spread = best.value - worst;
  return s;
}

GroundFactory limiting_ground(const ModelParams& p) {
  return [&p]() -> GroundFn {
    return [&p](const SymMatrix& qt, Eigen::MatrixXd* grad) {
      if (grad) *grad = gse_gradient(p.beta(), p.hmag(), qt).dense();
      return gse_value_psd(p.beta(), p.hmag(), qt);
    };
  };
}

}  // namespace

double variational_objective(const ModelParams& p, const OverlapMatrix& qt) {
  return gse_value_psd(p.beta(), p.hmag(), qt) + entropy(p, qt) + onsager(p, qt);
}

BoundaryFlags active_constraints(const ModelParams& p, const OverlapMatrix& qt) {
  BoundaryFlags f;
  const double tol = 1e-6;
  f.plefka = spectral_norm(congruence_diag(p.sqrt_beta(), p.q() - qt)) >= kInvSqrt2 - tol;
  f.psd = qt.min_eigenvalue() <= tol;
  f.upper = (p.q() - qt).min_eigenvalue() <= tol;
  return f;
}

OverlapMatrix random_feasible(const ModelParams& p, std::uint64_t seed, std::uint64_t index) {
  const Eigen::Index n = p.n();
  Engine eng = make_engine(seed, index);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  Eigen::MatrixXd gauss(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) gauss(i, j) = normal(eng);
  const Eigen::MatrixXd o = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = unif(eng);
  const Eigen::MatrixXd qh = psd_sqrt(p.q()).dense();
  const SymMatrix gap0(qh * o * z.asDiagonal() * o.transpose() * qh);
  const double norm = spectral_norm(congruence_diag(p.sqrt_beta(), gap0));
  double smax = 1.0;
  if (norm > 0.0) smax = std::min(1.0, 0.98 * kInvSqrt2 / norm);
  const double s = smax * (0.05 + 0.95 * std::uniform_real_distribution<double>(0.0, 1.0)(eng));
  return SymMatrix(p.q().dense() - s * gap0.dense());
}

namespace {

VarSolution run_multistart(const ModelParams& p, const GroundFactory& factory,
                           const std::vector<Eigen::MatrixXd>& starts, const VarOptions& opts,
                           int lattice_points) {
  const int count = static_cast<int>(starts.size());
  std::vector<Candidate> found(static_cast<std::size_t>(count));
  parallel_for(count, opts.threads, [&](int i) {
    found[static_cast<std::size_t>(i)] = climb(p, factory(), starts[static_cast<std::size_t>(i)]);
  });

  Candidate best;
  double worst = kInf;
  for (const Candidate& c : found) {
    if (!std::isfinite(c.value)) continue;
    worst = std::min(worst, c.value);
    if (!std::isfinite(best.value) || better(c, best, opts.tol)) best = c;
  }
  const GroundFn ground = factory();
  if (plefka_member(p, SymMatrix::zero(p.n()))) {
    Candidate zero;
    zero.qt = Eigen::MatrixXd::Zero(p.n(), p.n());
    zero.value = annealed_fe(p);  // the ground-state term vanishes at Q~ = 0
    if (!std::isfinite(best.value) || better(zero, best, opts.tol)) best = zero;
  }
  if (!std::isfinite(best.value)) {
    throw NumericalError("maximize_lowdim: every restart ended outside the feasible region");
  }

  // Lattice check: a lattice point beating the optimum by more than tol
  // seeds one more climb.
  Candidate lattice_best;
  for (int i = 0; i < lattice_points; ++i) {
    Candidate c;
    c.qt = random_feasible(p, opts.seed, (1ULL << 32) + static_cast<std::uint64_t>(i)).dense();
    c.value = plain_objective(p, ground, c.qt);
    if (c.value > lattice_best.value) lattice_best = c;
  }
  int used = count;
  if (lattice_best.value > best.value + opts.tol) {
    Candidate again = climb(p, ground, lattice_best.qt);
    ++used;
    if (better(again, lattice_best, opts.tol)) lattice_best = again;
    best = lattice_best;
  }
  return finish(p, best, std::min(worst, best.value), used);
}

}  // namespace

VarSolution maximize_lowdim(const ModelParams& p, const VarOptions& opts) {
  std::vector<Eigen::MatrixXd> starts;
  starts.push_back(shrunk_start(p, 0.999));
  for (double eta : {0.1, 0.3, 0.5}) starts.push_back(shrunk_start(p, eta));
  for (int i = static_cast<int>(starts.size()); i < opts.restarts; ++i) {
    starts.push_back(random_feasible(p, opts.seed, static_cast<std::uint64_t>(i)).dense());
  }
  return run_multistart(p, limiting_ground(p), starts, opts, opts.lattice_points);
}

ScalarSolution solve_n1(double beta, double h, int grid_points) {
  if (!(beta >= 0.0) || !(h >= 0.0)) throw InputError("solve_n1: beta and h must be >= 0");
  if (grid_points < 3) throw InputError("solve_n1: need at least 3 grid points");
  const double lo = beta > kInvSqrt2 ? 1.0 - kInvSqrt2 / beta : 0.0;
  auto value = [&](double q) {
    return std::sqrt(2.0 * beta * beta * q * q + h * h * q) +
           0.5 * beta * beta * (1.0 - q) * (1.0 - q) + 0.5 * std::log1p(-q);
  };
  const double step = (1.0 - lo) / grid_points;
  int best = 0;
  double best_val = value(lo);
  for (int j = 1; j < grid_points; ++j) {
    const double v = value(lo + j * step);
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = lo + std::min(best + 1, grid_points - 1) * step;
  const auto [q, neg] = boost::math::tools::brent_find_minima(
      [&](double x) { return -value(x); }, a, b, std::numeric_limits<double>::digits);
  ScalarSolution s{lo + best * step, best_val};
  if (-neg > s.value) s = ScalarSolution{q, -neg};
  return s;
}

VarSolution tap_sup_finite_n_solution(const ModelParams& p, const FiniteSystem& sys,
                                      const VarOptions& opts) {
  if (sys.size() < p.n()) throw InputError("tap_sup_finiteN: need N >= n");
  VarOptions limit_opts = opts;
  const VarSolution limit = maximize_lowdim(p, limit_opts);
  if (p.hmag().maxCoeff() == 0.0) return limit;

  const Eigen::MatrixXd fields = sys.fields(p.hmag());
  const Eigen::VectorXd sb = p.sqrt_beta();
  const bool cold = p.beta().minCoeff() > 0.0;
  const GroundFactory factory = [&]() -> GroundFn {
    auto warm = std::make_shared<std::optional<SymMatrix>>();
    return [&, warm](const SymMatrix& qt, Eigen::MatrixXd* grad) {
      if (!cold) {
        throw InputError("tap_sup_finiteN: the finite-N dual needs beta > 0 entrywise");
      }
      const FiniteDual d = finite_n_gs_dual_full(sys.thetas, fields, p.beta(), qt, 1e-14,
                                                 warm->has_value() ? &**warm : nullptr);
      *warm = d.lambda;
      if (grad) *grad = sb.asDiagonal() * d.lambda.dense() * sb.asDiagonal();
      return d.value;
    };
  };

  std::vector<Eigen::MatrixXd> starts;
  if (limit.qstar.min_eigenvalue() > 1e-12) {
    starts.push_back(limit.qstar.dense());
  }
  starts.push_back(shrunk_start(p, 0.999));
  starts.push_back(shrunk_start(p, 0.3));
  return run_multistart(p, factory, starts, opts, 0);
}

double tap_sup_finiteN(const ModelParams& p, const FiniteSystem& sys, const VarOptions& opts) {
  return tap_sup_finite_n_solution(p, sys, opts).value;
}

}  // namespace sphtap
