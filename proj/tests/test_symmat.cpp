#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphtap/errors.hpp"
#include "sphtap/symmat.hpp"

using namespace sphtap;
using Eigen::MatrixXd;

namespace {

MatrixXd two_by_two(double a, double b, double c) {
  MatrixXd m(2, 2);
  m << a, b, b, c;
  return m;
}

double reconstruction_error(const SymMatrix& a) {
  const EigenDecomp& e = a.eigen();
  return (e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a.dense()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("construction symmetrizes and rejects bad input") {
  MatrixXd a(2, 2);
  a << 1.0, 2.0, 4.0, 3.0;
  const SymMatrix s(a);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(3.0));

  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{bad}, InputError);
  CHECK_THROWS_AS(SymMatrix{MatrixXd(2, 3)}, InputError);
  CHECK_THROWS_AS(SymMatrix{MatrixXd(0, 0)}, InputError);
}

TEST_CASE("eigendecomposition") {
  SUBCASE("identity") {
    const EigenDecomp e = eigendecompose(SymMatrix::identity(2));
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("2x2 closed form, ascending") {
    const EigenDecomp e = eigendecompose(SymMatrix(two_by_two(1.0, 0.3, 1.0)));
    CHECK(e.values(0) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(e.values(1) == doctest::Approx(1.3).epsilon(1e-14));
  }
  SUBCASE("random matrices reconstruct") {
    std::mt19937_64 eng(1);
    for (int t = 0; t < 50; ++t) {
      const SymMatrix a(oracle::random_symmetric(eng, 5));
      const EigenDecomp& e = a.eigen();
      CHECK(reconstruction_error(a) <= 1e-10 * (1.0 + a.dense().cwiseAbs().maxCoeff()));
      CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
      for (int i = 1; i < 5; ++i) CHECK(e.values(i - 1) <= e.values(i));
    }
  }
}

TEST_CASE("matrix functions") {
  auto log_fn = [](double x) { return std::log(x); };
  auto sqrt_fn = [](double x) { return std::sqrt(x); };
  CHECK(matrix_function(SymMatrix::identity(3), log_fn).dense().cwiseAbs().maxCoeff() == 0.0);

  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  const MatrixXd r = matrix_function(SymMatrix(d), sqrt_fn).dense();
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-15);

  CHECK_THROWS_AS(matrix_function(SymMatrix(two_by_two(1.0, 2.0, 1.0)), log_fn, "log"), DomainError);

  std::mt19937_64 eng(2);
  for (int t = 0; t < 30; ++t) {
    const MatrixXd a = oracle::random_pd(eng, 4, 0.05, 3.0);
    const SymMatrix s(a);
    const MatrixXd root = matrix_function(s, sqrt_fn).dense();
    CHECK((root * root - a).cwiseAbs().maxCoeff() <= 1e-9);
    const SymMatrix lg = matrix_function(s, log_fn);
    const MatrixXd back = matrix_function(lg, [](double x) { return std::exp(x); }).dense();
    CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-9);
    const MatrixXd inv = matrix_function(s, [](double x) { return 1.0 / x; }).dense();
    CHECK((inv * a - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-9);
    // Commutes with A.
    CHECK((root * a - a * root).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((psd_sqrt(s).dense() - root).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((inverse(s).dense() - inv).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("trace derivative") {
  auto inv = [](double x) { return 1.0 / x; };
  CHECK(trace_function_derivative(SymMatrix::identity(2), SymMatrix::identity(2), inv) ==
        doctest::Approx(2.0));
  MatrixXd dot = MatrixXd::Zero(2, 2);
  dot(0, 0) = 1.0;
  CHECK(trace_function_derivative(SymMatrix(2.0 * MatrixXd::Identity(2, 2)), SymMatrix(dot), inv) ==
        doctest::Approx(0.5));

  // Central differences, step 1e-5, eigenvalues at least 0.1 from the singularity.
  std::mt19937_64 eng(3);
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 2 + t % 4;
    const MatrixXd a = oracle::random_pd(eng, n, 0.3, 2.0);
    const MatrixXd adot = oracle::random_symmetric(eng, n);
    auto f = [](double x) { return std::log(x); };
    const double fd = (oracle::trace_fn(a + h * adot, f) - oracle::trace_fn(a - h * adot, f)) / (2 * h);
    const double an = trace_function_derivative(SymMatrix(a), SymMatrix(adot), inv);
    CHECK(std::abs(an - fd) <= 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("frechet derivative matches differences of the matrix function") {
  std::mt19937_64 eng(4);
  auto sq = [](double x) { return std::sqrt(x); };
  auto dsq = [](double x) { return 0.5 / std::sqrt(x); };
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const MatrixXd a = oracle::random_pd(eng, 3, 0.3, 2.0);
    const MatrixXd c = oracle::random_symmetric(eng, 3);
    const MatrixXd fd = (matrix_function(SymMatrix(a + h * c), sq).dense() -
                         matrix_function(SymMatrix(a - h * c), sq).dense()) /
                        (2 * h);
    const MatrixXd an = frechet_derivative(SymMatrix(a), SymMatrix(c), sq, dsq).dense();
    CHECK((an - fd).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("loewner order") {
  CHECK(loewner_geq(SymMatrix::identity(2), SymMatrix::zero(2), 0.0));
  // Eigenvalues of [[1, .9], [.9, 1]] are 0.1 and 1.9.
  CHECK_FALSE(loewner_geq(SymMatrix(two_by_two(1.0, 0.9, 1.0)), SymMatrix(0.2 * MatrixXd::Identity(2, 2)), 0.0));
  const SymMatrix a(two_by_two(2.0, 0.3, 1.0));
  CHECK(loewner_geq(a, a, 0.0));
  CHECK_THROWS_AS(loewner_geq(SymMatrix::identity(2), SymMatrix::identity(3), 0.0), InputError);

  // Transitivity on diagonal (exactly representable) chains.
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> u(0, 8);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd c(3), b(3), a2(3);
    for (int i = 0; i < 3; ++i) {
      c(i) = u(eng);
      b(i) = c(i) + u(eng) - 2;
      a2(i) = b(i) + u(eng) - 2;
    }
    const SymMatrix sa = SymMatrix::diagonal(a2), sb = SymMatrix::diagonal(b), sc = SymMatrix::diagonal(c);
    if (loewner_geq(sa, sb, 0.0) && loewner_geq(sb, sc, 0.0)) CHECK(loewner_geq(sa, sc, 0.0));
  }
}

TEST_CASE("hadamard square, norms, logdet") {
  const MatrixXd h = hadamard_square(SymMatrix(two_by_two(1.0, 0.4, 1.0))).dense();
  CHECK(h(0, 1) == doctest::Approx(0.16));
  CHECK(h(0, 0) == 1.0);
  CHECK(hadamard_square(SymMatrix::zero(3)).dense().isZero());

  std::mt19937_64 eng(6);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd a = oracle::random_symmetric(eng, 4);
    const MatrixXd sq = hadamard_square(SymMatrix(a)).dense();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(sq(i, j) == doctest::Approx(a(i, j) * a(i, j)));
    // Schur product theorem on a PSD input.
    const MatrixXd p = oracle::random_pd(eng, 4);
    CHECK(hadamard_square(SymMatrix(p)).min_eigenvalue() >= -1e-12);
    CHECK(logdet(SymMatrix(p)) == doctest::Approx(oracle::logdet_lu(p)).epsilon(1e-12));
  }

  CHECK(logdet(SymMatrix::identity(4)) == 0.0);
  CHECK(logdet(SymMatrix(two_by_two(1.0, 0.5, 1.0))) == doctest::Approx(-0.2876821).epsilon(1e-7));
  CHECK_THROWS_AS(logdet(SymMatrix(two_by_two(1.0, 1.0, 1.0))), DomainError);
  CHECK(spectral_norm(SymMatrix(two_by_two(0.0, 1.0, 0.0))) == doctest::Approx(1.0));
  CHECK(spectral_norm(SymMatrix(two_by_two(-3.0, 0.0, 1.0))) == doctest::Approx(3.0));
}

TEST_CASE("positive definite threshold is scale aware") {
  CHECK(is_positive_definite(SymMatrix::identity(2)));
  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 1e6, 1e-7;  // 1e-7 < 1e-12 * 1e6
  CHECK_FALSE(is_positive_definite(SymMatrix(d)));
  d.diagonal() << 1.0, 1e-11;
  CHECK(is_positive_definite(SymMatrix(d)));
  CHECK(pd_threshold(SymMatrix(d)) == doctest::Approx(1e-12));
}

TEST_CASE("congruence with a diagonal") {
  std::mt19937_64 eng(7);
  const MatrixXd a = oracle::random_symmetric(eng, 3);
  const Eigen::VectorXd d = Eigen::Vector3d(0.5, 2.0, 1.5);
  const MatrixXd ref = d.asDiagonal() * a * d.asDiagonal();
  CHECK((congruence_diag(d, SymMatrix(a)).dense() - ref).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(congruence_diag(Eigen::VectorXd::Ones(2), SymMatrix(a)), InputError);
}
