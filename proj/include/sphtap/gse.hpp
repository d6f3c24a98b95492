#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "sphtap/symmat.hpp"

namespace sphtap {

/// Arguments of the ground-state functional: inverse temperatures, field
/// magnitudes and the target overlap Q̃. Construction checks dimensions and
/// signs; positivity of Q̃ is checked by each operation since the closed form
/// and the duals have different requirements.
struct GseInstance {
  GseInstance(Eigen::VectorXd beta, Eigen::VectorXd hmag, SymMatrix qt);

  Eigen::Index n() const { return qt.dim(); }

  Eigen::VectorXd beta;
  Eigen::VectorXd hmag;
  SymMatrix qt;
};

/// √2 Tr sqrt(M^½ Q̃ M^½), M = ½ h h^T + β Q̃ β. DomainError unless Q̃ is
/// positive definite.
double gse_closed(const GseInstance& inst);

/// Same value for positive semidefinite Q̃ (the form used inside the
/// variational solver, where Q̃ = 0 is a legitimate point).
double gse_value_psd(const Eigen::VectorXd& beta, const Eigen::VectorXd& hmag,
                     const SymMatrix& qt);

/// Gradient of gse_value_psd with respect to Q̃ (symmetric, trace pairing).
/// Needs Q̃ positive definite.
SymMatrix gse_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& hmag,
                       const SymMatrix& qt);

/// Scalar case sqrt(2β²q̃² + h²q̃). InputError unless q̃ ∈ [0, 1].
double gse_1d(double beta, double h, double qt);

/// Minimizes the limiting Lagrange dual
///   ¼ g^T (Λ - sqrt(Λ² - 2)) g + Tr(Λ β^½ Q̃ β^½),   g = β^{-½} h,
/// over Λ ⪰ √2 I with Λ = √2 I + L^T L and 8 seeded quasi-Newton restarts.
/// Needs β > 0 entrywise and Q̃ positive definite (InputError / DomainError).
/// NumericalError carrying the best value if no restart converges.
double gse_dual_numeric(const GseInstance& inst, double tol = 1e-11, std::uint64_t seed = 0);

/// Critical point X* = (2A + B)^{-½} U B^½ of the change-of-variables form,
/// A = ¼ g g^T, B = β^½ Q̃ β^½, U = T S^T from the SVD
/// B^½ (2A + B)^½ = S Σ T^T. DomainError if B is singular.
SymMatrix gse_critical_x(const GseInstance& inst);

/// √2 Tr(X A) + (1/√2) Tr((X + X^{-1}) B).
double gse_x_objective(const GseInstance& inst, const SymMatrix& x);

/// Result of the finite-N dual: optimal value and multiplier.
struct FiniteDual {
  double value = 0.0;
  SymMatrix lambda{Eigen::MatrixXd::Zero(1, 1)};
};

/// Finite-N ground-state dual
///   Σ_i ¼ h̃_i^T β^{-½} (Λ - θ_i)^{-1} β^{-½} h̃_i + Tr(Λ β^½ Q̃ β^½)
/// over Λ ≻ θ_max I, θ the spectrum and h̃_i the columns of `fields` (n x N),
/// i.e. the field vectors written in the eigenbasis. By weak duality the
/// value bounds the constrained maximum of (1/N) Σ β_k H(m^k) + Σ h^k·m^k.
/// The problem is convex in Λ and solved by damped Newton until half the
/// squared Newton decrement falls below tol.
/// InputError when every field entry vanishes (use gse_closed with h = 0);
/// NumericalError carrying the last value if Newton stalls.
FiniteDual finite_n_gs_dual_full(const Eigen::VectorXd& thetas, const Eigen::MatrixXd& fields,
                                 const Eigen::VectorXd& beta, const SymMatrix& qt,
                                 double tol = 1e-14, const SymMatrix* warm_start = nullptr);

double finite_n_gs_dual(const Eigen::VectorXd& thetas, const Eigen::MatrixXd& fields,
                        const Eigen::VectorXd& beta, const SymMatrix& qt, double tol = 1e-14);

}  // namespace sphtap
