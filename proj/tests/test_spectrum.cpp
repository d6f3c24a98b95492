#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sphtap/errors.hpp"
#include "sphtap/spectrum.hpp"

using namespace sphtap;
using oracle::kSqrt2;

TEST_CASE("semicircle cdf") {
  CHECK(semicircle::cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(semicircle::cdf(kSqrt2) == 1.0);
  CHECK(semicircle::cdf(-kSqrt2) == 0.0);
  CHECK(semicircle::cdf(5.0) == 1.0);
  CHECK(semicircle::cdf(-5.0) == 0.0);
  CHECK(oracle::semicircle_mass(-kSqrt2, kSqrt2) == doctest::Approx(1.0).epsilon(1e-10));
  for (double x : {-1.3, -0.7, 0.1, 0.7, 1.2, 1.41}) {
    CHECK(std::abs(semicircle::cdf(x) - oracle::semicircle_mass(-kSqrt2, x)) <= 1e-8);
  }
  double prev = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double c = semicircle::cdf(-kSqrt2 + 2 * kSqrt2 * i / 200.0);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("classical locations") {
  CHECK(std::abs(semicircle::classical_location(0.5)) < 1e-12);
  CHECK(semicircle::classical_location(1.0) == doctest::Approx(kSqrt2));
  // Bisection on the quadrature CDF.
  const double q25 = oracle::bisect([](double x) { return oracle::semicircle_mass(-kSqrt2, x) - 0.25; },
                                    -kSqrt2, kSqrt2, 80);
  CHECK(semicircle::classical_location(0.25) == doctest::Approx(q25).epsilon(1e-9));
  for (int i = 1; i <= 100; ++i) {
    const double q = i / 100.0;
    CHECK(std::abs(semicircle::cdf(semicircle::classical_location(q)) - q) <= 1e-10);
  }
  CHECK_THROWS_AS(semicircle::classical_location(0.0), InputError);
  CHECK_THROWS_AS(semicircle::classical_location(1.5), InputError);
}

TEST_CASE("binned spectrum") {
  const BinnedSpectrum two = make_binned(2);
  CHECK(two.atoms[0] == doctest::Approx(-kSqrt2));
  CHECK(std::abs(two.atoms[1]) < 1e-15);
  CHECK(two.weights[0] == doctest::Approx(0.5));
  CHECK(two.weights[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_binned(1), InputError);

  for (int k : {2, 3, 8, 64, 4096}) {
    const BinnedSpectrum s = make_binned(k);
    REQUIRE(static_cast<int>(s.atoms.size()) == k);
    CHECK(s.atoms.front() == -kSqrt2);
    CHECK(s.rightmost() == doctest::Approx(kSqrt2 - 2 * kSqrt2 / k));
    for (int i = 1; i < k; ++i) CHECK(s.atoms[i] - s.atoms[i - 1] == doctest::Approx(2 * kSqrt2 / k).epsilon(1e-12));
    for (double w : s.weights) CHECK(w >= 0.0);
    CHECK(std::accumulate(s.weights.begin(), s.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const BinnedSpectrum eight = make_binned(8);
  for (int i = 0; i < 8; ++i) {
    const double hi = i + 1 < 8 ? eight.atoms[i + 1] : kSqrt2;
    CHECK(std::abs(eight.weights[i] - oracle::semicircle_mass(eight.atoms[i], hi)) <= 1e-10);
  }
}

TEST_CASE("stieltjes transform and its inverse") {
  const BinnedSpectrum two = make_binned(2);
  CHECK(stieltjes(two, 1.0) == doctest::Approx(0.5 / (1.0 + kSqrt2) + 0.5).epsilon(1e-14));
  CHECK(v_of(two, 0.5 / (1.0 + kSqrt2) + 0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(stieltjes(two, 0.0), DomainError);
  CHECK_THROWS_AS(stieltjes(two, -0.5), DomainError);

  const BinnedSpectrum s = make_binned(256);
  CHECK(1e6 * stieltjes(s, 1e6) == doctest::Approx(1.0).epsilon(1e-5));
  double prev = stieltjes(s, s.rightmost() + 1e-3);
  for (int i = 1; i < 100; ++i) {
    const double g = stieltjes(s, s.rightmost() + 1e-3 + 0.05 * i);
    CHECK(g < prev);
    prev = g;
  }
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int t = 0; t < 50; ++t) {
    const double z = u(eng);
    CHECK(std::abs(stieltjes(s, v_of(s, z)) - z) <= 1e-10 * std::max(1.0, z));
  }
  // Offsets from the last atom keep full precision where v crowds x_K.
  for (double lz = -4; lz <= 4; lz += 0.5) {
    const double z = std::pow(10.0, lz);
    CHECK(std::abs(stieltjes_offset(s, v_offset(s, z)) / z - 1.0) <= 1e-10);
    CHECK(v_of(s, z) == doctest::Approx(s.rightmost() + v_offset(s, z)).epsilon(1e-15));
  }
  CHECK(v_of(s, 1e-4) * 1e-4 == doctest::Approx(1.0).epsilon(1e-2));
  // The offset form keeps precision right next to the last atom.
  CHECK(stieltjes_offset(s, 1e-9) == doctest::Approx(stieltjes(s, s.rightmost() + 1e-9)).epsilon(1e-6));
}

TEST_CASE("F_K") {
  const BinnedSpectrum s = make_binned(4096);
  CHECK(fk(s, 0.0) == 0.0);
  CHECK(std::abs(fk(s, 1e-6)) <= 1e-5);
  CHECK(fk(s, 0.5) == doctest::Approx(0.125).epsilon(0.02 / 0.125));
  CHECK_THROWS_AS(fk(s, -0.1), InputError);
  CHECK_THROWS_AS(fk_prime(s, 0.0), InputError);

  // Direct evaluation of the rate from its definition: v from an
  // independent bisection on G, then the closed expression.
  auto fk_direct = [&s](double beta) {
    const double z = 2 * beta;
    auto g = [&s](double v) {
      double t = 0.0;
      for (std::size_t k = 0; k < s.atoms.size(); ++k) t += s.weights[k] / (v - s.atoms[k]);
      return t;
    };
    const double v = oracle::bisect([&](double x) { return z - g(x); }, s.rightmost() + 1e-15,
                                    s.rightmost() + 1.0 / z + 3.0, 200);
    double lg = 0.0;
    for (std::size_t k = 0; k < s.atoms.size(); ++k) lg += s.weights[k] * std::log(v - s.atoms[k]);
    return 0.5 * (2 * beta * v - std::log(2 * beta) - lg - 1.0);
  };
  for (double b : {0.05, 0.2, 0.5, 0.7, 1.0}) CHECK(fk(s, b) == doctest::Approx(fk_direct(b)).epsilon(1e-9));

  CHECK(fk_prime(s, 0.5) == doctest::Approx(0.5).epsilon(0.06));
  CHECK(std::abs(fk_prime(s, 1e-4)) < 1e-3);

  for (double b : {0.05, 0.3, 0.6}) {
    const double h = 1e-5;
    const double fd = (fk(s, b + h) - fk(s, b - h)) / (2 * h);
    CHECK(std::abs(fd - fk_prime(s, b)) <= 1e-6 * std::abs(fk_prime(s, b)));
  }

  // fk(b) - fk(a) equals the integral of fk_prime.
  const double a = 0.1, b = 0.65;
  const double integral = oracle::integrate([&s](double x) { return fk_prime(s, x); }, a, b);
  CHECK(std::abs(fk(s, b) - fk(s, a) - integral) <= 1e-6);
}

TEST_CASE("F_K convexity and uniform limit") {
  const BinnedSpectrum s = make_binned(1024);
  std::mt19937_64 eng(12);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  for (int t = 0; t < 200; ++t) {
    const double a = u(eng), b = u(eng);
    CHECK(fk(s, 0.5 * (a + b)) <= 0.5 * (fk(s, a) + fk(s, b)) + 1e-12);
  }
  double prev = 1e300;
  for (int k : {64, 256, 1024, 4096}) {
    const BinnedSpectrum sk = make_binned(k);
    double sup = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double beta = 0.70710678118654752 * i / 99.0;
      sup = std::max(sup, std::abs(fk(sk, beta) - 0.5 * beta * beta));
    }
    CHECK(sup < prev);
    prev = sup;
  }
  CHECK(prev <= 0.02);
}
