#include "sphtap/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "sphtap/errors.hpp"

namespace sphtap {

namespace detail {
struct DecompCache {
  std::once_flag once;
  EigenDecomp value;
};
}  // namespace detail

namespace {

EigenDecomp compute_decomp(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
  // Eigen returns eigenvalues in increasing order.
  return {solver.eigenvalues(), solver.eigenvectors()};
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw InputError(os.str());
  }
}

Eigen::MatrixXd reconstruct(const EigenDecomp& e, const Eigen::VectorXd& d) {
  return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& a)
    : cache_(std::make_shared<detail::DecompCache>()) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    std::ostringstream os;
    os << "SymMatrix: expected a non-empty square matrix, got " << a.rows() << "x"
       << a.cols();
    throw InputError(os.str());
  }
  if (!a.allFinite()) throw InputError("SymMatrix: non-finite entry");
  a_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

const EigenDecomp& SymMatrix::eigen() const {
  std::call_once(cache_->once, [this] { cache_->value = compute_decomp(a_); });
  return cache_->value;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b, "operator+");
  return SymMatrix(a.a_ + b.a_);
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b, "operator-");
  return SymMatrix(a.a_ - b.a_);
}

SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.a_); }

EigenDecomp eigendecompose(const SymMatrix& a) { return a.eigen(); }

SymMatrix matrix_function(const SymMatrix& a, const ScalarFn& f, std::string_view name) {
  const EigenDecomp& e = a.eigen();
  Eigen::VectorXd d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d(i) = f(e.values(i));
    if (!std::isfinite(d(i))) {
      std::ostringstream os;
      os.precision(17);
      os << "matrix_function: " << name << " is undefined at eigenvalue " << e.values(i);
      throw DomainError(os.str());
    }
  }
  return SymMatrix(reconstruct(e, d));
}

double trace_function_derivative(const SymMatrix& a, const SymMatrix& adot,
                                 const ScalarFn& fprime) {
  require_same_dim(a, adot, "trace_function_derivative");
  const EigenDecomp& e = a.eigen();
  // Tr(U f'(D) U^T Adot) = sum_i f'(λi) (U^T Adot U)_ii
  const Eigen::MatrixXd rotated = e.vectors.transpose() * adot.dense() * e.vectors;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double fp = fprime(e.values(i));
    if (!std::isfinite(fp)) {
      std::ostringstream os;
      os.precision(17);
      os << "trace_function_derivative: f' is undefined at eigenvalue " << e.values(i);
      throw DomainError(os.str());
    }
    acc += fp * rotated(i, i);
  }
  return acc;
}

Eigen::MatrixXd divided_differences(const EigenDecomp& e, const ScalarFn& f,
                                    const ScalarFn& fprime) {
  const Eigen::Index n = e.values.size();
  Eigen::VectorXd fv(n), fpv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fv(i) = f(e.values(i));
    fpv(i) = fprime(e.values(i));
  }
  Eigen::MatrixXd delta(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    delta(i, i) = fpv(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double li = e.values(i), lj = e.values(j);
      const double scale = std::max({1.0, std::abs(li), std::abs(lj)});
      double v;
      if (std::abs(li - lj) <= 1e-12 * scale) {
        v = 0.5 * (fpv(i) + fpv(j));
      } else {
        v = (fv(i) - fv(j)) / (li - lj);
      }
      delta(i, j) = delta(j, i) = v;
    }
  }
  return delta;
}

SymMatrix frechet_derivative(const SymMatrix& a, const SymMatrix& c, const ScalarFn& f,
                             const ScalarFn& fprime) {
  require_same_dim(a, c, "frechet_derivative");
  const EigenDecomp& e = a.eigen();
  const Eigen::MatrixXd delta = divided_differences(e, f, fprime);
  const Eigen::MatrixXd inner =
      delta.cwiseProduct(e.vectors.transpose() * c.dense() * e.vectors);
  return SymMatrix(e.vectors * inner * e.vectors.transpose());
}

bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a, b, "loewner_geq");
  return (a - b).min_eigenvalue() >= -tol;
}

SymMatrix hadamard_square(const SymMatrix& a) {
  return SymMatrix(a.dense().cwiseProduct(a.dense()));
}

double spectral_norm(const SymMatrix& a) {
  return std::max(std::abs(a.min_eigenvalue()), std::abs(a.max_eigenvalue()));
}

double pd_threshold(const SymMatrix& a) { return 1e-12 * std::max(1.0, a.max_eigenvalue()); }

bool is_positive_definite(const SymMatrix& a) { return a.min_eigenvalue() > pd_threshold(a); }

double logdet(const SymMatrix& a) {
  if (!is_positive_definite(a)) {
    std::ostringstream os;
    os.precision(17);
    os << "logdet: matrix is not positive definite (min eigenvalue " << a.min_eigenvalue()
       << ")";
    throw DomainError(os.str());
  }
  return a.eigen().values.array().log().sum();
}

SymMatrix inverse(const SymMatrix& a) {
  if (!is_positive_definite(a)) {
    std::ostringstream os;
    os.precision(17);
    os << "inverse: matrix is not positive definite (min eigenvalue " << a.min_eigenvalue()
       << ")";
    throw DomainError(os.str());
  }
  const EigenDecomp& e = a.eigen();
  return SymMatrix(reconstruct(e, e.values.cwiseInverse()));
}

SymMatrix psd_sqrt(const SymMatrix& a) {
  const EigenDecomp& e = a.eigen();
  const double thr = pd_threshold(a);
  Eigen::VectorXd d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double l = e.values(i);
    if (l < -thr) {
      std::ostringstream os;
      os.precision(17);
      os << "psd_sqrt: negative eigenvalue " << l;
      throw DomainError(os.str());
    }
    d(i) = std::sqrt(std::max(l, 0.0));
  }
  return SymMatrix(reconstruct(e, d));
}

SymMatrix congruence_diag(const Eigen::VectorXd& d, const SymMatrix& a) {
  if (d.size() != a.dim()) throw InputError("congruence_diag: dimension mismatch");
  return SymMatrix(d.asDiagonal() * a.dense() * d.asDiagonal());
}

}  // namespace sphtap
