#include "sphtap/gse.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "sphtap/errors.hpp"
#include "sphtap/optim.hpp"
#include "sphtap/rng.hpp"

namespace sphtap {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(const Eigen::VectorXd& beta, const char* what) {
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (!(beta(k) > 0.0)) {
      std::ostringstream os;
      os << what << ": beta must be strictly positive (beta[" << k << "] = " << beta(k)
         << "); use gse_closed for zero temperatures";
      throw InputError(os.str());
    }
  }
}

void require_pd(const SymMatrix& qt, const char* what) {
  if (!is_positive_definite(qt)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": Q~ is not positive definite (min eigenvalue " << qt.min_eigenvalue() << ")";
    throw DomainError(os.str());
  }
}

Eigen::MatrixXd field_outer(const Eigen::VectorXd& beta, const Eigen::VectorXd& hmag,
                            const SymMatrix& qt) {
  const Eigen::MatrixXd bq = beta.asDiagonal() * qt.dense() * beta.asDiagonal();
  return 0.5 * hmag * hmag.transpose() + bq;
}

// Upper triangle of an n x n matrix <-> flat vector, row by row.
Eigen::VectorXd pack_upper(const Eigen::MatrixXd& l) {
  const Eigen::Index n = l.rows();
  Eigen::VectorXd x(n * (n + 1) / 2);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) x(p++) = l(i, j);
  return x;
}

Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& x, Eigen::Index n) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) l(i, j) = x(p++);
  return l;
}

// Objective in the shift S = Λ - base ⪰ 0. Writes the gradient with respect
// to Λ (equivalently S) into grad; +inf outside the domain.
using ShiftObjective = std::function<double(const EigenDecomp& shift, Eigen::MatrixXd& grad)>;

struct ShiftResult {
  double value = kInf;
  Eigen::MatrixXd shift;
  bool converged = false;
};

ShiftResult minimize_over_shift(const ShiftObjective& obj, Eigen::Index n, double tol,
                                std::uint64_t seed, int restarts) {
  const optim::Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    // Overlong line-search trials can overflow; treat them like infeasible points.
    if (!x.allFinite()) return kInf;
    const Eigen::MatrixXd l = unpack_upper(x, n);
    const Eigen::MatrixXd shift = l.transpose() * l;
    if (!shift.allFinite()) return kInf;
    const SymMatrix s(shift);
    Eigen::MatrixXd grad_lambda;
    const double v = obj(s.eigen(), grad_lambda);
    if (!std::isfinite(v) || !grad_lambda.allFinite()) return kInf;
    g = pack_upper(2.0 * l * grad_lambda);
    return v;
  };

  optim::BfgsOptions opts;
  opts.grad_tol = tol;
  opts.max_iter = 2000;

  ShiftResult best;
  bool any_converged = false;
  auto run = [&](Eigen::MatrixXd l0) {
    Eigen::VectorXd g;
    Eigen::VectorXd x0 = pack_upper(l0);
    if (!std::isfinite(f(x0, g))) return;
    const optim::BfgsResult r = optim::minimize_bfgs(f, x0, opts);
    any_converged = any_converged || r.converged;
    if (r.f < best.value) {
      const Eigen::MatrixXd l = unpack_upper(r.x, n);
      best.value = r.f;
      best.shift = l.transpose() * l;
      best.converged = r.converged;
    }
  };

  Engine eng = make_engine(seed, 0x6a5e);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::uniform_real_distribution<double> scale(0.1, 1.5);
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    const double s = scale(eng);
    for (Eigen::Index i = 0; i < n; ++i) {
      l(i, i) = s;
      for (Eigen::Index j = i + 1; j < n; ++j) l(i, j) = unif(eng) * s;
    }
    run(l);
  }
  if (!std::isfinite(best.value)) throw NumericalError("dual minimization: no feasible restart");
  if (!any_converged) throw NumericalError("dual minimization did not converge", best.value);
  return best;
}

// φ(base + d) with base = √2: Λ - sqrt(Λ² - 2) in the shift d ⪰ 0.
double phi_shift(double d) {
  const double root = std::sqrt(std::max(d, 0.0) * (2.0 * kSqrt2 + std::max(d, 0.0)));
  return 2.0 / (kSqrt2 + d + root);
}

double root_shift(double d) { return std::sqrt(std::max(d, 0.0) * (2.0 * kSqrt2 + std::max(d, 0.0))); }

}  // namespace

GseInstance::GseInstance(Eigen::VectorXd b, Eigen::VectorXd h, SymMatrix q)
    : beta(std::move(b)), hmag(std::move(h)), qt(std::move(q)) {
  const Eigen::Index n = qt.dim();
  if (beta.size() != n || hmag.size() != n) {
    throw InputError("GseInstance: beta, h and Q~ dimensions disagree");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!std::isfinite(beta(k)) || beta(k) < 0.0) throw InputError("GseInstance: beta must be >= 0");
    if (!std::isfinite(hmag(k)) || hmag(k) < 0.0) throw InputError("GseInstance: h must be >= 0");
  }
}

double gse_value_psd(const Eigen::VectorXd& beta, const Eigen::VectorXd& hmag,
                     const SymMatrix& qt) {
  const SymMatrix y = psd_sqrt(qt);
  const SymMatrix z(y.dense() * field_outer(beta, hmag, qt) * y.dense());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.dim(); ++i) total += std::sqrt(std::max(z.eigen().values(i), 0.0));
  return kSqrt2 * total;
}

double gse_closed(const GseInstance& inst) {
  require_pd(inst.qt, "gse_closed");
  return gse_value_psd(inst.beta, inst.hmag, inst.qt);
}

SymMatrix gse_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& hmag,
                       const SymMatrix& qt) {
  require_pd(qt, "gse_gradient");
  const EigenDecomp& eq = qt.eigen();
  const Eigen::VectorXd root = eq.values.cwiseSqrt();
  const Eigen::MatrixXd y = eq.vectors * root.asDiagonal() * eq.vectors.transpose();
  const Eigen::MatrixXd m = field_outer(beta, hmag, qt);
  const SymMatrix z(y * m * y);
  const EigenDecomp& ez = z.eigen();
  const double thr = pd_threshold(z);
  Eigen::VectorXd inv_root(z.dim());
  for (Eigen::Index i = 0; i < z.dim(); ++i) {
    inv_root(i) = ez.values(i) > thr ? 1.0 / std::sqrt(ez.values(i)) : 0.0;
  }
  const Eigen::MatrixXd zinv = ez.vectors * inv_root.asDiagonal() * ez.vectors.transpose();

  // Pull back sym(M Y Z^{-½}) through the square root: Δ_ij = 1/(√a_i + √a_j).
  const Eigen::MatrixXd c = m * y * zinv;
  Eigen::MatrixXd inner = eq.vectors.transpose() * (0.5 * (c + c.transpose())) * eq.vectors;
  for (Eigen::Index i = 0; i < inner.rows(); ++i)
    for (Eigen::Index j = 0; j < inner.cols(); ++j) inner(i, j) /= root(i) + root(j);
  const Eigen::MatrixXd through_root = eq.vectors * inner * eq.vectors.transpose();
  const Eigen::MatrixXd direct = beta.asDiagonal() * y * zinv * y * beta.asDiagonal();
  return SymMatrix(kSqrt2 * through_root + direct / kSqrt2);
}

double gse_1d(double beta, double h, double qt) {
  if (!(qt >= 0.0 && qt <= 1.0)) throw InputError("gse_1d: q~ must lie in [0, 1]");
  if (!(beta >= 0.0) || !(h >= 0.0)) throw InputError("gse_1d: beta and h must be >= 0");
  return std::sqrt(2.0 * beta * beta * qt * qt + h * h * qt);
}

double gse_dual_numeric(const GseInstance& inst, double tol, std::uint64_t seed) {
  require_positive(inst.beta, "gse_dual_numeric");
  require_pd(inst.qt, "gse_dual_numeric");
  const Eigen::Index n = inst.n();
  const Eigen::VectorXd sb = inst.beta.cwiseSqrt();
  const Eigen::VectorXd g = inst.hmag.cwiseQuotient(sb);
  const Eigen::MatrixXd b = congruence_diag(sb, inst.qt).dense();
  const double trace_b = b.trace();

  const ShiftObjective obj = [&](const EigenDecomp& s, Eigen::MatrixXd& grad) {
    const Eigen::VectorXd a = s.vectors.transpose() * g;
    double v = kSqrt2 * trace_b;
    Eigen::MatrixXd delta(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      v += 0.25 * a(j) * a(j) * phi_shift(s.values(j));
      v += s.values(j) * (s.vectors.col(j).transpose() * b * s.vectors.col(j))(0, 0);
      for (Eigen::Index l = 0; l < n; ++l) {
        // (φ(x) - φ(y)) / (x - y) = 1 - (x + y) / (r_x + r_y), no cancellation.
        const double sum_r = root_shift(s.values(j)) + root_shift(s.values(l));
        const double sum_x = 2.0 * kSqrt2 + s.values(j) + s.values(l);
        delta(j, l) = sum_r > 0.0 ? 1.0 - sum_x / sum_r : -1e300;
      }
    }
    const Eigen::MatrixXd inner = delta.cwiseProduct(a * a.transpose());
    grad = 0.25 * s.vectors * inner * s.vectors.transpose() + b;
    return v;
  };
  return minimize_over_shift(obj, n, tol, seed, 8).value;
}

SymMatrix gse_critical_x(const GseInstance& inst) {
  require_positive(inst.beta, "gse_critical_x");
  const Eigen::VectorXd sb = inst.beta.cwiseSqrt();
  const SymMatrix b = congruence_diag(sb, inst.qt);
  if (!is_positive_definite(b)) throw DomainError("gse_critical_x: beta^1/2 Q~ beta^1/2 is singular");
  const Eigen::VectorXd g = inst.hmag.cwiseQuotient(sb);
  const SymMatrix two_a_plus_b(0.5 * g * g.transpose() + b.dense());
  const Eigen::MatrixXd bh = psd_sqrt(b).dense();
  const Eigen::MatrixXd ph = psd_sqrt(two_a_plus_b).dense();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bh * ph, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd u = svd.matrixV() * svd.matrixU().transpose();
  const Eigen::MatrixXd x = inverse(SymMatrix(ph)).dense() * u * bh;
  const double asym = (x - x.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw NumericalError("gse_critical_x: critical point is not symmetric");
  }
  return SymMatrix(x);
}

double gse_x_objective(const GseInstance& inst, const SymMatrix& x) {
  require_positive(inst.beta, "gse_x_objective");
  const Eigen::VectorXd sb = inst.beta.cwiseSqrt();
  const Eigen::VectorXd g = inst.hmag.cwiseQuotient(sb);
  const Eigen::MatrixXd a = 0.25 * g * g.transpose();
  const Eigen::MatrixXd b = congruence_diag(sb, inst.qt).dense();
  const Eigen::MatrixXd xinv = inverse(x).dense();
  return kSqrt2 * (x.dense() * a).trace() + ((x.dense() + xinv) * b).trace() / kSqrt2;
}

namespace {

// Symmetric basis matching the packed upper triangle: E_aa = e_a e_a^T,
// E_ab = e_a e_b^T + e_b e_a^T.
std::vector<Eigen::MatrixXd> sym_basis(Eigen::Index n) {
  std::vector<Eigen::MatrixXd> basis;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(a, b) = 1.0;
      e(b, a) = 1.0;
      basis.push_back(e);
    }
  }
  return basis;
}

struct DualPoint {
  double value = kInf;  // with the barrier
  double plain = kInf;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

}  // namespace

FiniteDual finite_n_gs_dual_full(const Eigen::VectorXd& thetas, const Eigen::MatrixXd& fields,
                                 const Eigen::VectorXd& beta, const SymMatrix& qt, double tol,
                                 const SymMatrix* warm_start) {
  const Eigen::Index n = qt.dim();
  if (beta.size() != n || fields.rows() != n || fields.cols() != thetas.size() ||
      thetas.size() == 0) {
    throw InputError("finite_n_gs_dual: dimensions of theta, fields, beta and Q~ disagree");
  }
  require_positive(beta, "finite_n_gs_dual");
  if (fields.cwiseAbs().maxCoeff() == 0.0) {
    throw InputError(
        "finite_n_gs_dual: the dual is degenerate for h = 0; use gse_closed with h = 0");
  }
  const Eigen::VectorXd sb = beta.cwiseSqrt();
  const Eigen::MatrixXd g = sb.cwiseInverse().asDiagonal() * fields;
  const Eigen::MatrixXd b = congruence_diag(sb, qt).dense();
  const double top = thetas.maxCoeff();
  const Eigen::ArrayXd below = top - thetas.array();  // θ_max - θ_i >= 0
  const Eigen::Index count = thetas.size();
  const std::vector<Eigen::MatrixXd> basis = sym_basis(n);
  const auto dim = static_cast<Eigen::Index>(basis.size());

  // Λ = θ_max I + S; the objective is convex in S ⪰ 0. Its infimum may sit on
  // the boundary (a direction of S orthogonal to the top-mode field carries
  // no pole), so Newton runs on f - μ log det S with μ driven to ~0.
  auto evaluate = [&](const Eigen::MatrixXd& shift, double mu, bool second) {
    DualPoint pt;
    const SymMatrix s(shift);
    const EigenDecomp& e = s.eigen();
    if (e.values(0) <= 0.0) return pt;
    const Eigen::MatrixXd a = e.vectors.transpose() * g;  // n x N
    Eigen::MatrixXd inv_gap(n, count);
    for (Eigen::Index j = 0; j < n; ++j) {
      inv_gap.row(j) = (below.transpose() + e.values(j)).inverse();
    }
    const Eigen::MatrixXd x = 0.5 * a.cwiseProduct(inv_gap);  // maximizers, rotated
    pt.plain = 0.5 * a.cwiseProduct(x).sum() +
               ((top * Eigen::MatrixXd::Identity(n, n) + s.dense()) * b).trace();
    pt.value = pt.plain - mu * e.values.array().log().sum();
    const Eigen::MatrixXd inv_s =
        e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose();
    const Eigen::MatrixXd gm =
        b - e.vectors * (x * x.transpose()) * e.vectors.transpose() - mu * inv_s;
    pt.grad.resize(dim);
    for (Eigen::Index p = 0; p < dim; ++p) pt.grad(p) = basis[p].cwiseProduct(gm).sum();
    if (second) {
      std::vector<Eigen::MatrixXd> rotated(basis.size()), moved(basis.size());
      for (Eigen::Index p = 0; p < dim; ++p) {
        rotated[p] = e.vectors.transpose() * basis[p] * e.vectors;
        moved[p] = rotated[p] * x;
      }
      const Eigen::MatrixXd inv_pair = e.values.cwiseInverse() * e.values.cwiseInverse().transpose();
      pt.hess.resize(dim, dim);
      for (Eigen::Index p = 0; p < dim; ++p) {
        for (Eigen::Index q = p; q < dim; ++q) {
          pt.hess(p, q) = pt.hess(q, p) =
              2.0 * moved[p].cwiseProduct(moved[q]).cwiseProduct(inv_gap).sum() +
              mu * rotated[p].cwiseProduct(rotated[q]).cwiseProduct(inv_pair).sum();
        }
      }
    }
    return pt;
  };

  Eigen::MatrixXd shift = Eigen::MatrixXd::Identity(n, n);
  double mu = 1e-2;
  if (warm_start != nullptr && warm_start->dim() == n) {
    const Eigen::MatrixXd w = warm_start->dense() - top * Eigen::MatrixXd::Identity(n, n);
    if (SymMatrix(w).min_eigenvalue() > 0.0) {
      shift = w;
      mu = 1e-8;
    }
  }
  constexpr double kFinalMu = 1e-14;

  DualPoint pt;
  for (;; mu = std::max(0.1 * mu, kFinalMu)) {
    const bool last = mu <= kFinalMu;
    const double stop = last ? tol : 1e-12;
    pt = evaluate(shift, mu, true);
    bool converged = false;
    for (int it = 0; it < 100 && !converged; ++it) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(pt.hess);
      Eigen::VectorXd step = -ldlt.solve(pt.grad);
      double decrement = -pt.grad.dot(step);
      if (ldlt.info() != Eigen::Success || !(decrement > 0.0) || !step.allFinite()) {
        step = -pt.grad;
        decrement = pt.grad.squaredNorm();
      }
      if (0.5 * decrement <= stop) {
        converged = true;
        break;
      }
      Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index p = 0; p < dim; ++p) delta += step(p) * basis[p];
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        const DualPoint trial = evaluate(shift + t * delta, mu, false);
        if (trial.value <= pt.value - 0.25 * t * decrement) {
          shift += t * delta;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) {
        // No representable decrease left.
        converged = 0.5 * decrement <= 1e6 * stop + 1e-13 * std::abs(pt.value);
        break;
      }
      pt = evaluate(shift, mu, true);
    }
    if (!converged && last) {
      throw NumericalError("finite_n_gs_dual: Newton iteration stalled", pt.plain);
    }
    if (last) break;
  }
  FiniteDual out;
  out.value = pt.plain;
  out.lambda = SymMatrix(shift + top * Eigen::MatrixXd::Identity(n, n));
  return out;
}

double finite_n_gs_dual(const Eigen::VectorXd& thetas, const Eigen::MatrixXd& fields,
                        const Eigen::VectorXd& beta, const SymMatrix& qt, double tol) {
  return finite_n_gs_dual_full(thetas, fields, beta, qt, tol).value;
}

}  // namespace sphtap
