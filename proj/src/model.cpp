#include "sphtap/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sphtap/errors.hpp"

namespace sphtap {

namespace {

void require_dim(const ModelParams& p, const SymMatrix& m, const char* what) {
  if (m.dim() != p.n()) {
    std::ostringstream os;
    os << what << ": expected a " << p.n() << "x" << p.n() << " matrix, got " << m.dim()
       << "x" << m.dim();
    throw InputError(os.str());
  }
}

double quad_hadamard(const Eigen::VectorXd& beta, const Eigen::MatrixXd& a) {
  return beta.dot(a.cwiseProduct(a) * beta);
}

}  // namespace

ModelParams::ModelParams(SymMatrix q, Eigen::VectorXd beta, Eigen::VectorXd hmag)
    : q_(std::move(q)), beta_(std::move(beta)), h_(std::move(hmag)) {
  const Eigen::Index n = q_.dim();
  if (beta_.size() != n || h_.size() != n) {
    std::ostringstream os;
    os << "ModelParams: beta and h must have length n = " << n << " (got " << beta_.size()
       << ", " << h_.size() << ")";
    throw InputError(os.str());
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(q_(k, k) - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "ModelParams: Q(" << k << "," << k << ") = " << q_(k, k) << ", expected 1";
      throw InputError(os.str());
    }
    if (!std::isfinite(beta_(k)) || beta_(k) < 0.0) {
      throw InputError("ModelParams: beta entries must be finite and nonnegative");
    }
    if (!std::isfinite(h_(k)) || h_(k) < 0.0) {
      throw InputError("ModelParams: h entries must be finite and nonnegative");
    }
  }
  if (!is_positive_definite(q_)) {
    std::ostringstream os;
    os.precision(17);
    os << "ModelParams: Q is not positive definite (min eigenvalue " << q_.min_eigenvalue()
       << "); the constrained free energy is -inf";
    throw InputError(os.str());
  }
}

bool plefka_member(const ModelParams& p, const OverlapMatrix& qt, double delta) {
  require_dim(p, qt, "plefka_member");
  if (qt.min_eigenvalue() < -pd_threshold(qt)) return false;
  const SymMatrix gap = p.q() - qt;
  if (!is_positive_definite(gap)) return false;
  const double norm = spectral_norm(congruence_diag(p.sqrt_beta(), gap));
  return norm <= kInvSqrt2 - delta + 1e-12 * std::max(1.0, norm);
}

HtSpectra ht_spectra(const ModelParams& p) {
  const Eigen::VectorXd sb = p.sqrt_beta();
  HtSpectra s;
  s.beta_q_beta = congruence_diag(sb, p.q()).eigen().values;
  const SymMatrix qh = psd_sqrt(p.q());
  s.q_beta_q = SymMatrix(qh.dense() * p.beta().asDiagonal() * qh.dense()).eigen().values;
  return s;
}

double ht_norm(const ModelParams& p) {
  const HtSpectra s = ht_spectra(p);
  const double a = s.beta_q_beta.cwiseAbs().maxCoeff();
  if ((s.beta_q_beta - s.q_beta_q).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + a)) {
    throw NumericalError("ht_norm: the two similar forms disagree beyond 1e-10");
  }
  return a;
}

bool ht_member(const ModelParams& p) {
  const double norm = ht_norm(p);
  return norm <= kInvSqrt2 + 1e-12 * std::max(1.0, norm);
}

double annealed_fe(const ModelParams& p) {
  return 0.5 * quad_hadamard(p.beta(), p.q().dense()) + 0.5 * logdet(p.q());
}

double onsager(const ModelParams& p, const OverlapMatrix& qt) {
  require_dim(p, qt, "onsager");
  return 0.5 * quad_hadamard(p.beta(), p.q().dense() - qt.dense());
}

double entropy(const ModelParams& p, const OverlapMatrix& qt) {
  require_dim(p, qt, "entropy");
  const SymMatrix gap = p.q() - qt;
  if (!is_positive_definite(gap)) {
    std::ostringstream os;
    os.precision(17);
    os << "entropy: Q - Q~ is not positive definite (min eigenvalue " << gap.min_eigenvalue()
       << ")";
    throw DomainError(os.str());
  }
  return 0.5 * logdet(gap);
}

double v_func_or_neg_inf(const ModelParams& p, const Eigen::MatrixXd& a) {
  const Eigen::Index n = p.n();
  if (a.rows() != n || a.cols() != n) throw InputError("v_func: A must be n x n");
  Eigen::MatrixXd block(2 * n, 2 * n);
  block << p.q().dense(), a, a.transpose(), p.q().dense();
  const SymMatrix b(block);
  if (!is_positive_definite(b)) return -std::numeric_limits<double>::infinity();
  return quad_hadamard(p.beta(), a) + 0.5 * logdet(b);
}

double v_func(const ModelParams& p, const Eigen::MatrixXd& a) {
  const double v = v_func_or_neg_inf(p, a);
  if (std::isinf(v)) {
    throw DomainError("v_func: block overlap matrix is not positive definite", v);
  }
  return v;
}

OverlapMatrix overlap_of(const Magnetization& m) { return SymMatrix(m * m.transpose()); }

namespace {

Eigen::VectorXd residual_norms(const Magnetization& m, const ModelParams& p) {
  if (m.rows() != p.n()) throw InputError("magnetization must have n rows");
  Eigen::VectorXd r(p.n());
  for (Eigen::Index k = 0; k < p.n(); ++k) {
    const double sq = m.row(k).squaredNorm();
    if (!(sq < 1.0)) {
      std::ostringstream os;
      os << "magnetization row " << k << " has |m| >= 1";
      throw DomainError(os.str());
    }
    r(k) = 1.0 - sq;
  }
  return r;
}

}  // namespace

SymMatrix effective_constraint(const Magnetization& m, const ModelParams& p) {
  const Eigen::VectorXd r = residual_norms(m, p);
  const Eigen::VectorXd inv = r.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd centred = p.q().dense() - m * m.transpose();
  Eigen::MatrixXd qhat = inv.asDiagonal() * centred * inv.asDiagonal();
  qhat.diagonal().setOnes();
  return SymMatrix(qhat);
}

Eigen::VectorXd effective_beta(const Magnetization& m, const ModelParams& p) {
  return p.beta().cwiseProduct(residual_norms(m, p));
}

double tap_free_energy(const DisorderSample& d, const ModelParams& p, const Eigen::VectorXd& u,
                       const Magnetization& m) {
  if (m.rows() != p.n() || m.cols() != d.size() || u.size() != d.size()) {
    throw InputError("tap_free_energy: shapes of m, u and the disorder disagree");
  }
  const SymMatrix qt = overlap_of(m);
  const double ent = entropy(p, qt);
  double energy = 0.0;
  for (Eigen::Index k = 0; k < p.n(); ++k) {
    energy += p.beta()(k) * d.hamiltonian(m.row(k).transpose()) / d.size();
    energy += p.hmag()(k) * u.dot(m.row(k).transpose());
  }
  return ent + energy + onsager(p, qt);
}

double modified_onsager(const ModelParams& p, const OverlapMatrix& qt,
                        const BinnedSpectrum& spec) {
  require_dim(p, qt, "modified_onsager");
  const SymMatrix s = congruence_diag(p.sqrt_beta(), p.q() - qt);
  const double thr = pd_threshold(s);
  double total = 0.0;
  for (Eigen::Index k = 0; k < s.dim(); ++k) {
    const double b = s.eigen().values(k);
    if (b < -thr) {
      std::ostringstream os;
      os.precision(17);
      os << "modified_onsager: negative effective temperature " << b;
      throw DomainError(os.str());
    }
    total += fk(spec, std::max(b, 0.0));
  }
  return total;
}

}  // namespace sphtap
