#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphtap/disorder.hpp"
#include "sphtap/errors.hpp"
#include "sphtap/gse.hpp"

using namespace sphtap;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using oracle::kSqrt2;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// √2 × nuclear norm of M^½ Q̃^½, M = ½ h h^T + β Q̃ β, from an SVD.
double gse_svd(const VectorXd& beta, const VectorXd& h, const MatrixXd& qt) {
  const MatrixXd m = 0.5 * h * h.transpose() + beta.asDiagonal() * qt * beta.asDiagonal();
  const MatrixXd mh = Eigen::SelfAdjointEigenSolver<MatrixXd>(m).operatorSqrt();
  const MatrixXd qh = Eigen::SelfAdjointEigenSolver<MatrixXd>(qt).operatorSqrt();
  return kSqrt2 * Eigen::JacobiSVD<MatrixXd>(mh * qh).singularValues().sum();
}

}  // namespace

TEST_CASE("closed form") {
  CHECK(gse_closed(GseInstance(vec({1.0}), vec({0.0}), SymMatrix::identity(1))) == doctest::Approx(kSqrt2));
  CHECK(gse_closed(GseInstance(vec({0.7, 0.7}), vec({0.0, 0.0}), SymMatrix::identity(2))) ==
        doctest::Approx(2 * kSqrt2 * 0.7));
  CHECK_THROWS_AS(gse_closed(GseInstance(vec({1.0, 1.0}), vec({0.0, 0.0}), SymMatrix::zero(2))), DomainError);
  CHECK_THROWS_AS(GseInstance(vec({1.0}), vec({0.0, 1.0}), SymMatrix::identity(1)), InputError);
  CHECK_THROWS_AS(GseInstance(vec({-1.0}), vec({0.0}), SymMatrix::identity(1)), InputError);

  std::mt19937_64 eng(41);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = 1 + t % 3;
    VectorXd b(n), h(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      b(k) = u(eng);
      h(k) = u(eng);
    }
    const MatrixXd qt = oracle::random_pd(eng, n, 0.05, 1.0);
    const GseInstance inst(b, h, SymMatrix(qt));
    CHECK(gse_closed(inst) == doctest::Approx(gse_svd(b, h, qt)).epsilon(1e-12));
    CHECK(gse_value_psd(b, h, SymMatrix(qt)) == doctest::Approx(gse_closed(inst)).epsilon(1e-12));
  }
  // PSD extension: Q̃ = 0 gives 0.
  CHECK(gse_value_psd(vec({0.5, 0.5}), vec({1.0, 1.0}), SymMatrix::zero(2)) == 0.0);
}

TEST_CASE("scalar case") {
  CHECK(gse_1d(1.0, 0.0, 1.0) == doctest::Approx(kSqrt2));
  CHECK(gse_1d(0.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(gse_1d(1.0, 1.0, 1.2), InputError);
  CHECK_THROWS_AS(gse_1d(1.0, 1.0, -0.1), InputError);
  for (double b : {0.1, 0.7, 1.3})
    for (double h : {0.0, 0.3, 1.1})
      for (double q : {0.05, 0.5, 1.0}) {
        CHECK(gse_closed(GseInstance(vec({b}), vec({h}), SymMatrix(MatrixXd::Constant(1, 1, q)))) ==
              doctest::Approx(gse_1d(b, h, q)).epsilon(1e-12));
      }
  // Scalar dual: inf over λ ≥ √2 of ¼ (h²/β)(λ - sqrt(λ² - 2)) + λ β q̃.
  const double b = 0.7, h = 0.3, q = 0.5;
  const double dual = oracle::golden_min(
      [&](double lam) { return 0.25 * h * h / b * (lam - std::sqrt(lam * lam - 2)) + lam * b * q; }, kSqrt2, 20.0);
  CHECK(gse_1d(b, h, q) == doctest::Approx(dual).epsilon(1e-9));
}

TEST_CASE("limiting dual") {
  // h = 0: attained at Λ = √2 I.
  const MatrixXd qt = (MatrixXd(2, 2) << 1.0, 0.5, 0.5, 1.0).finished();
  const GseInstance cold(vec({0.6, 0.8}), vec({0.0, 0.0}), SymMatrix(qt));
  CHECK(gse_dual_numeric(cold) == doctest::Approx(kSqrt2 * (0.6 + 0.8)).epsilon(1e-10));

  const GseInstance hot(vec({0.6, 0.8}), vec({0.3, 0.4}), SymMatrix(qt));
  CHECK(std::abs(gse_dual_numeric(hot) - gse_closed(hot)) <= 1e-5);

  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  for (int t = 0; t < 20; ++t) {
    const double b = u(eng), h = u(eng) - 0.1, q = (u(eng) - 0.1) / 1.4;
    CHECK(std::abs(gse_dual_numeric(GseInstance(vec({b}), vec({h}), SymMatrix(MatrixXd::Constant(1, 1, q)))) -
                   gse_1d(b, h, q)) <= 1e-6);
  }
  for (int t = 0; t < 10; ++t) {
    const GseInstance inst(vec({u(eng), u(eng), u(eng)}), vec({u(eng), u(eng), u(eng)}),
                           SymMatrix(oracle::random_pd(eng, 3, 0.1, 1.0)));
    CHECK(std::abs(gse_dual_numeric(inst, 1e-11, static_cast<std::uint64_t>(t)) - gse_closed(inst)) <=
          1e-5 * (1 + gse_closed(inst)));
  }
  CHECK_THROWS_AS(gse_dual_numeric(GseInstance(vec({0.0}), vec({1.0}), SymMatrix::identity(1))), InputError);
}

TEST_CASE("critical point of the change-of-variables form") {
  const GseInstance cold(vec({0.6, 0.8}), vec({0.0, 0.0}),
                         SymMatrix((MatrixXd(2, 2) << 1.0, 0.5, 0.5, 1.0).finished()));
  CHECK((gse_critical_x(cold).dense() - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);

  // n = 1: sqrt(B / (2A + B)).
  const double b = 0.9, h = 0.6, q = 0.4;
  const double a1 = 0.25 * h * h / b, b1 = b * q;
  CHECK(gse_critical_x(GseInstance(vec({b}), vec({h}), SymMatrix(MatrixXd::Constant(1, 1, q))))(0, 0) ==
        doctest::Approx(std::sqrt(b1 / (2 * a1 + b1))));

  std::mt19937_64 eng(43);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index n = 1 + t % 3;
    VectorXd bb(n), hh(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      bb(k) = u(eng);
      hh(k) = u(eng);
    }
    const GseInstance inst(bb, hh, SymMatrix(oracle::random_pd(eng, n, 0.1, 1.0)));
    const SymMatrix x = gse_critical_x(inst);
    CHECK(x.min_eigenvalue() > 0.0);
    CHECK(x.max_eigenvalue() <= 1.0 + 1e-10);
    CHECK(gse_x_objective(inst, x) == doctest::Approx(gse_closed(inst)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(gse_critical_x(GseInstance(vec({0.5, 0.5}), vec({1.0, 1.0}), SymMatrix::zero(2))), DomainError);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 eng(44);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  const double step = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 1 + t % 3;
    VectorXd b(n), h(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      b(k) = u(eng);
      h(k) = u(eng);
    }
    const MatrixXd qt = oracle::random_pd(eng, n, 0.2, 1.0);
    const MatrixXd dir = oracle::random_symmetric(eng, n);
    const double fd = (gse_value_psd(b, h, SymMatrix(qt + step * dir)) - gse_value_psd(b, h, SymMatrix(qt - step * dir))) /
                      (2 * step);
    const double an = (gse_gradient(b, h, SymMatrix(qt)).dense().cwiseProduct(dir)).sum();
    CHECK(an == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("continuity and convexity in beta and h") {
  std::mt19937_64 eng(45);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.05);
  for (int t = 0; t < 100; ++t) {
    const MatrixXd qt = oracle::random_correlation(eng, 2);
    const SymMatrix q(qt);
    VectorXd b = vec({u(eng), u(eng)}), h = vec({u(eng), u(eng)});
    VectorXd b2 = (b + vec({g(eng), g(eng)})).cwiseAbs(), h2 = (h + vec({g(eng), g(eng)})).cwiseAbs();
    const double v1 = gse_closed(GseInstance(b, h, q));
    const double v2 = gse_closed(GseInstance(b2, h2, q));
    // Envelope bound: |dV/dbeta_k| <= sqrt2 qt_kk, |dV/dh_k| <= sqrt(qt_kk).
    double bound = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k)
      bound += kSqrt2 * qt(k, k) * std::abs(b(k) - b2(k)) + std::sqrt(qt(k, k)) * std::abs(h(k) - h2(k));
    CHECK(std::abs(v1 - v2) <= bound + 1e-12);
    // Sup of functions affine in (beta, h): midpoint convex.
    const double vm = gse_closed(GseInstance((b + b2) / 2, (h + h2) / 2, q));
    CHECK(vm <= (v1 + v2) / 2 + 1e-10);
    // Convex and even in h, hence nondecreasing along rays h -> c h, c >= 1.
    const double c = 1.0 + s(eng);
    CHECK(gse_closed(GseInstance(b, c * h, q)) >= v1 - 1e-12);
  }
}

TEST_CASE("not monotone in a single field coordinate") {
  // Strongly anti-correlated replicas: pushing h_2 up fights replica 1.
  const SymMatrix q((MatrixXd(2, 2) << 1.0, -0.9, -0.9, 1.0).finished());
  const double v0 = gse_closed(GseInstance(vec({0.1, 0.1}), vec({1.5, 0.0}), q));
  const double v1 = gse_closed(GseInstance(vec({0.1, 0.1}), vec({1.5, 0.4}), q));
  CHECK(v1 < v0 - 0.2);
}

TEST_CASE("finite-N dual") {
  const VectorXd beta = vec({0.5, 0.7});
  const VectorXd h = vec({0.8, 1.0});
  const SymMatrix qt((MatrixXd(2, 2) << 0.8, 0.3, 0.3, 0.6).finished());
  const double limit = gse_closed(GseInstance(beta, h, qt));

  SUBCASE("direct evaluation near the returned multiplier") {
    const FiniteSystem sys = make_finite_system(300, 2, SpectrumSource::deterministic);
    const MatrixXd f = sys.fields(h);
    const FiniteDual d = finite_n_gs_dual_full(sys.thetas, f, beta, qt);
    const VectorXd sb = beta.cwiseSqrt();
    auto objective = [&](const MatrixXd& lam) {
      double v = (lam * sb.asDiagonal() * qt.dense() * sb.asDiagonal()).trace();
      for (int i = 0; i < 300; ++i) {
        const VectorXd gi = f.col(i).cwiseQuotient(sb);
        v += 0.25 * gi.dot((lam - sys.thetas(i) * MatrixXd::Identity(2, 2)).inverse() * gi);
      }
      return v;
    };
    // The multiplier may sit on lambda_min = theta_max, where the inverse is
    // ill-conditioned; step inside by delta, costing O(delta) in the value.
    for (double delta : {1e-6, 1e-8}) {
      const double v = objective(d.lambda.dense() + delta * MatrixXd::Identity(2, 2));
      CHECK(v >= d.value - 1e-12);
      CHECK(v - d.value <= 10 * delta);
    }
    CHECK(d.lambda.min_eigenvalue() >= sys.thetas.maxCoeff());
  }
  SUBCASE("one mode") {
    // N = 1, θ = √2: the infimum tends to √2 β q̃ as the field vanishes.
    const VectorXd th = VectorXd::Constant(1, kSqrt2);
    for (double hh : {1e-2, 1e-4}) {
      const double v = finite_n_gs_dual(th, MatrixXd::Constant(1, 1, hh), vec({0.8}), SymMatrix(MatrixXd::Constant(1, 1, 0.5)));
      CHECK(std::abs(v - kSqrt2 * 0.8 * 0.5) <= 2 * hh);
    }
  }
  SUBCASE("approaches the limit") {
    std::vector<double> med;
    for (int n : {250, 1000, 4000}) {
      std::vector<double> errs;
      for (std::uint64_t s = 0; s < 5; ++s) {
        const FiniteSystem sys = make_finite_system(n, s, SpectrumSource::deterministic);
        errs.push_back(std::abs(finite_n_gs_dual(sys.thetas, sys.fields(h), beta, qt) - limit));
      }
      std::sort(errs.begin(), errs.end());
      med.push_back(errs[2]);
    }
    CHECK(med[1] < med[0]);
    CHECK(med[2] < med[1]);
    CHECK(med[2] <= 0.05);
  }
  SUBCASE("warm start reaches the same value") {
    const FiniteSystem sys = make_finite_system(500, 3, SpectrumSource::deterministic);
    const FiniteDual cold = finite_n_gs_dual_full(sys.thetas, sys.fields(h), beta, qt);
    const SymMatrix qt2((MatrixXd(2, 2) << 0.75, 0.3, 0.3, 0.62).finished());
    const FiniteDual ref = finite_n_gs_dual_full(sys.thetas, sys.fields(h), beta, qt2);
    const FiniteDual warm = finite_n_gs_dual_full(sys.thetas, sys.fields(h), beta, qt2, 1e-14, &cold.lambda);
    CHECK(warm.value == doctest::Approx(ref.value).epsilon(1e-9));
  }
  SUBCASE("errors") {
    const FiniteSystem sys = make_finite_system(50, 1, SpectrumSource::deterministic);
    CHECK_THROWS_AS(finite_n_gs_dual(sys.thetas, MatrixXd::Zero(2, 50), beta, qt), InputError);
    CHECK_THROWS_AS(finite_n_gs_dual(sys.thetas, sys.fields(h), vec({0.0, 0.7}), qt), InputError);
  }
}
