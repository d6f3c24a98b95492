#pragma once

#include <Eigen/Dense>

#include <optional>

#include "sphtap/disorder.hpp"
#include "sphtap/spectrum.hpp"
#include "sphtap/symmat.hpp"

namespace sphtap {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// (β, h, Q) for n constrained replicas. Q has unit diagonal and is positive
/// definite; β and the field magnitudes h are finite and nonnegative. Field
/// vectors are h_k u for one shared unit direction u.
class ModelParams {
 public:
  /// InputError if any invariant fails. A Q that is not positive definite is
  /// rejected too: the constrained free energy is -inf there.
  ModelParams(SymMatrix q, Eigen::VectorXd beta, Eigen::VectorXd hmag);

  Eigen::Index n() const { return q_.dim(); }
  const SymMatrix& q() const { return q_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& hmag() const { return h_; }
  Eigen::VectorXd sqrt_beta() const { return beta_.cwiseSqrt(); }

 private:
  SymMatrix q_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd h_;
};

/// Rows are the replica magnetizations m^1..m^n (n x N).
using Magnetization = Eigen::MatrixXd;

/// Q̃, an n x n overlap matrix expected to satisfy 0 ⪯ Q̃ ⪯ Q.
using OverlapMatrix = SymMatrix;

/// Q̃ ⪰ 0, Q - Q̃ positive definite, and ||β^½ (Q - Q̃) β^½||₂ <= 1/√2 - delta.
bool plefka_member(const ModelParams& p, const OverlapMatrix& qt, double delta = 0.0);

/// ||β^½ Q β^½||₂.
double ht_norm(const ModelParams& p);
bool ht_member(const ModelParams& p);

/// Eigenvalues of β^½ Q β^½ and of Q^½ β Q^½ (ascending). They coincide;
/// ht_norm cross-checks both to 1e-10 and throws NumericalError otherwise.
struct HtSpectra {
  Eigen::VectorXd beta_q_beta;
  Eigen::VectorXd q_beta_q;
};
HtSpectra ht_spectra(const ModelParams& p);

/// ½ β^T Q^{⊙2} β + ½ log|Q|  (no external field).
double annealed_fe(const ModelParams& p);

/// ½ β^T (Q - Q̃)^{⊙2} β.
double onsager(const ModelParams& p, const OverlapMatrix& qt);

/// ½ log|Q - Q̃|; DomainError unless Q - Q̃ is positive definite.
double entropy(const ModelParams& p, const OverlapMatrix& qt);

/// Second-moment functional β^T A^{⊙2} β + ½ log det [[Q, A], [A^T, Q]] for
/// a (not necessarily symmetric) n x n cross-overlap A. DomainError carrying
/// -inf when the block matrix is not positive definite.
double v_func(const ModelParams& p, const Eigen::MatrixXd& a);

/// Same value, -inf instead of throwing.
double v_func_or_neg_inf(const ModelParams& p, const Eigen::MatrixXd& a);

/// Q̂_kl = (Q_kl - m^k·m^l) / sqrt((1 - |m^k|²)(1 - |m^l|²)). DomainError if
/// some |m^k| >= 1.
SymMatrix effective_constraint(const Magnetization& m, const ModelParams& p);

/// (β_m)_k = β_k (1 - |m^k|²).
Eigen::VectorXd effective_beta(const Magnetization& m, const ModelParams& p);

/// m m^T as a symmetric matrix.
OverlapMatrix overlap_of(const Magnetization& m);

/// Per-site TAP free energy
///   ½ log|Q - mm^T| + (1/N) Σ β_k H_N(m^k) + Σ h_k u·m^k + ½ β^T (Q - mm^T)^{⊙2} β.
/// DomainError unless Q - mm^T is positive definite.
double tap_free_energy(const DisorderSample& d, const ModelParams& p,
                       const Eigen::VectorXd& u, const Magnetization& m);

/// Σ_k F_K(β̃_k), β̃ the eigenvalues of β^½ (Q - Q̃) β^½. Eigenvalues below
/// -pd_threshold are a DomainError; smaller negatives are clamped to 0.
double modified_onsager(const ModelParams& p, const OverlapMatrix& qt,
                        const BinnedSpectrum& spec);

}  // namespace sphtap
