#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>

#include "sphtap/symmat.hpp"

namespace sphtap {

/// One draw of the 2-spin disorder at size N.
///
/// The coupling matrix is G = √N (J + J^T) / 2 with J i.i.d. standard
/// normal, so H_N(m) = m^T G m = √N Σ J_ij m_i m_j and Var H_N(σ) = N on the
/// unit sphere. Its eigenvalues are N λ_i with λ_i filling [-√2, √2]; the
/// spectrum accessor reports the normalized λ_i (ascending) together with
/// the eigenvectors, computed on first use.
class DisorderSample {
 public:
  DisorderSample(int size, std::uint64_t seed, Eigen::MatrixXd coupling);

  int size() const { return static_cast<int>(g_.rows()); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& coupling() const { return g_; }

  double hamiltonian(const Eigen::Ref<const Eigen::VectorXd>& m) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& m) const;

  /// values: λ_i = eig(G)/N ascending; vectors: matching unit eigenvectors.
  const EigenDecomp& spectrum() const;

  /// Installs a spectrum loaded from the on-disk cache. InputError if the
  /// shapes do not match.
  void adopt_spectrum(EigenDecomp spectrum) const;

 private:
  struct Cache;
  std::uint64_t seed_;
  Eigen::MatrixXd g_;
  std::shared_ptr<Cache> cache_;
};

/// Deterministic in (N, seed). N >= 2.
DisorderSample sample_goe(int size, std::uint64_t seed);

/// Classical locations θ_{i/N}, i = 1..N, ascending, last entry √2.
Eigen::VectorXd deterministic_spectrum(int size);

/// A size-N energy landscape in its eigenbasis: H(m)/N = Σ θ_i m_i², and a
/// unit field direction u written in the same basis.
struct FiniteSystem {
  Eigen::VectorXd thetas;     // ascending
  Eigen::VectorXd direction;  // unit norm

  int size() const { return static_cast<int>(thetas.size()); }
  /// Rows h_k u: the n x N field matrix in the eigenbasis.
  Eigen::MatrixXd fields(const Eigen::VectorXd& hmag) const;
};

enum class SpectrumSource { deterministic, goe };

/// Spectrum from the classical locations or from sample_goe(N, seed); the
/// direction is uniform on the sphere, drawn from substream 1 of `seed`.
FiniteSystem make_finite_system(int size, std::uint64_t seed, SpectrumSource source);

/// The system of a given disorder sample and direction u (standard basis).
FiniteSystem finite_system_of(const DisorderSample& sample, const Eigen::VectorXd& direction);

/// Uniform unit vector of length N from substream `index` of `seed`.
Eigen::VectorXd random_direction(int size, std::uint64_t seed, std::uint64_t index);

// Binary spectrum cache: 8-byte magic "SPHTAPEV", u32 format version, u32
// reserved, u64 N, u64 seed, then N eigenvalues and the N x N eigenvector
// matrix (column-major), all little-endian IEEE-754 float64.
inline constexpr std::uint32_t kSpectrumCacheVersion = 1;

void save_spectrum_cache(const std::filesystem::path& path, const DisorderSample& sample);

/// InputError on a wrong magic, version, or (N, seed) key.
EigenDecomp load_spectrum_cache(const std::filesystem::path& path, int size,
                                std::uint64_t seed);

/// sample_goe, with the spectrum read from / written to `path`.
DisorderSample sample_goe_cached(int size, std::uint64_t seed,
                                 const std::filesystem::path& path);

}  // namespace sphtap
