#pragma once

#include <vector>

namespace sphtap {

/// The semicircle law dμ = (1/π) sqrt(2 - x²) dx on [-√2, √2]: the limiting
/// eigenvalue distribution of the normalized disorder matrix.
namespace semicircle {

inline constexpr double kEdge = 1.41421356237309504880;  // √2

double density(double x);

/// Closed-form CDF, clamped to 0 / 1 outside the support.
double cdf(double theta);

/// Classical location θ_q = inf{θ : CDF(θ) = q} for q in (0, 1].
/// InputError outside (0, 1].
double classical_location(double q);

}  // namespace semicircle

/// Semicircle law binned onto K equally spaced atoms: atom x_k is the left
/// end of bin k and carries that bin's semicircle mass.
struct BinnedSpectrum {
  int bins = 0;
  std::vector<double> atoms;    // ascending, x_1 = -√2, spacing 2√2/K
  std::vector<double> weights;  // nonnegative, sum to 1

  double rightmost() const { return atoms.back(); }
};

BinnedSpectrum make_binned(int bins);

/// G(z) = Σ ρ_k / (z - x_k) for z strictly right of the rightmost atom.
double stieltjes(const BinnedSpectrum& spec, double z);

/// Same transform written in terms of the offset t = z - x_K > 0. Keeps full
/// relative precision when z sits just to the right of the last atom.
double stieltjes_offset(const BinnedSpectrum& spec, double t);

/// Offset t = v - x_K of the inverse v = G^{-1}(z). G diverges at the last
/// atom, so the inverse branch exists for every z > 0.
double v_offset(const BinnedSpectrum& spec, double z);

/// v(z) = G^{-1}(z), z > 0.
double v_of(const BinnedSpectrum& spec, double z);

/// Rank-one spherical-integral rate on the binned law,
///   F_K(β) = ½ [ 2β v(2β) - log(2β) - Σ ρ_k log(v(2β) - x_k) - 1 ],
/// with F_K(0) = 0 (and F_K(β) = 0 for β < 1e-8). InputError for β < 0.
///
/// The general rate carries a λ*·z + (v - λ*)·G(v) pair; on the inverse
/// branch G(v) = z it collapses to v·z, so no right-edge constant appears.
double fk(const BinnedSpectrum& spec, double beta);

/// F_K'(β) = v(2β) - 1/(2β), β > 0.
double fk_prime(const BinnedSpectrum& spec, double beta);

}  // namespace sphtap
