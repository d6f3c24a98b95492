#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string_view>

namespace sphtap {

/// Spectral factorization A = U diag(values) U^T with ascending eigenvalues
/// and orthonormal eigenvector columns.
struct EigenDecomp {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

namespace detail {
struct DecompCache;
}

/// Dense real symmetric n x n matrix.
///
/// Inputs are symmetrized as (A + A^T) / 2 on construction, so round-off
/// asymmetry never reaches the eigen-solver. Values are immutable; the
/// eigendecomposition is computed once on first use and shared between
/// copies, which makes concurrent reads safe.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& a);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n);
  static SymMatrix diagonal(const Eigen::VectorXd& d);

  Eigen::Index dim() const { return a_.rows(); }
  const Eigen::MatrixXd& dense() const { return a_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

  const EigenDecomp& eigen() const;
  double min_eigenvalue() const { return eigen().values(0); }
  double max_eigenvalue() const { return eigen().values(dim() - 1); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator*(double s, const SymMatrix& a);

 private:
  Eigen::MatrixXd a_;
  std::shared_ptr<detail::DecompCache> cache_;
};

using ScalarFn = std::function<double(double)>;

EigenDecomp eigendecompose(const SymMatrix& a);

/// U f(D) U^T. Throws DomainError naming the eigenvalue where f is not
/// finite (log of a non-positive eigenvalue, sqrt of a negative one, ...).
SymMatrix matrix_function(const SymMatrix& a, const ScalarFn& f,
                          std::string_view name = "f");

/// Tr(f'(A) Adot), the derivative of Tr f(A(alpha)) along a path with
/// A(0) = A and A'(0) = Adot.
double trace_function_derivative(const SymMatrix& a, const SymMatrix& adot,
                                 const ScalarFn& fprime);

/// Divided-difference matrix [Δf(λi, λj)] of f at the eigenvalues of A, with
/// f' on coinciding eigenvalues (relative gap below 1e-12).
Eigen::MatrixXd divided_differences(const EigenDecomp& e, const ScalarFn& f,
                                    const ScalarFn& fprime);

/// Fréchet derivative L_f(A, C) = U (Δ ⊙ U^T C U) U^T. The map is self-adjoint
/// in the trace inner product, so the same call pulls a gradient with respect
/// to f(A) back to a gradient with respect to A.
SymMatrix frechet_derivative(const SymMatrix& a, const SymMatrix& c,
                             const ScalarFn& f, const ScalarFn& fprime);

/// min eig(A - B) >= -tol. Dimension mismatch is an InputError.
bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol);

SymMatrix hadamard_square(const SymMatrix& a);

/// max |eigenvalue|
double spectral_norm(const SymMatrix& a);

/// Sum of log eigenvalues; DomainError unless A is positive definite.
double logdet(const SymMatrix& a);

/// Scale-aware threshold below which an eigenvalue counts as zero:
/// 1e-12 * max(1, largest eigenvalue).
double pd_threshold(const SymMatrix& a);
bool is_positive_definite(const SymMatrix& a);

/// Inverse of a positive definite matrix (DomainError otherwise).
SymMatrix inverse(const SymMatrix& a);

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// [-pd_threshold, 0) are treated as round-off and clamped to zero; anything
/// more negative is a DomainError.
SymMatrix psd_sqrt(const SymMatrix& a);

/// D A D for diagonal D = diag(d).
SymMatrix congruence_diag(const Eigen::VectorXd& d, const SymMatrix& a);

}  // namespace sphtap
