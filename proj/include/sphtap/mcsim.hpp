#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "sphtap/disorder.hpp"
#include "sphtap/model.hpp"

namespace sphtap {

/// A Monte Carlo estimate of (1/N) log E[...].
struct FEEstimate {
  double value = 0.0;      // -inf when no sample hit the window
  double std_error = 0.0;  // from 16 batch means, delta method on the log
  long long n_samples = 0;
  double eps = 0.0;
  long long hits = 0;
  double bias_scale = 0.0;  // first-order change of the limit across the window
};

enum class VolumeMethod { direct, tilted };

struct McOptions {
  std::uint64_t seed = 0;
  long long samples = 100000;
  double eps = 0.05;
  unsigned threads = 1;
  /// Fraction of the energy folded into the per-mode proposal (estimate_fe
  /// only). 0 samples every eigen-coordinate from N(0, Q).
  double tilt = 0.0;
};

inline constexpr int kBatches = 16;

/// (1/N) log P(|σ^k·σ^l - Q_kl| <= eps for all k < l) for independent
/// uniform σ^k on the unit sphere. `direct` counts hits; `tilted` draws
/// coordinates from N(0, Q) and reweights by |Q|^{N/2} exp(-Σ u_i^T Λ u_i),
/// Λ = (I - Q^{-1}) / 2. n = 1 returns exactly 0.
FEEstimate estimate_volume(const SymMatrix& q, int size, VolumeMethod method,
                           const McOptions& opts);

/// (1/N) log E[1_window(σ) exp(Σ_k β_k H(σ^k) + N h^k·σ^k)] with the same
/// tilted sampler, run in the eigenbasis of the disorder. `fields` is n x N
/// with row norms h_k (InputError otherwise).
FEEstimate estimate_fe(const DisorderSample& disorder, const ModelParams& p,
                       const Eigen::MatrixXd& fields, const McOptions& opts);

struct AscentOptions {
  int iters = 3000;
  int restarts = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double grad_tol = 1e-11;
};

struct AscentResult {
  Eigen::MatrixXd m;  // n x N, in the basis the system is written in
  double value = 0.0;
  int restarts_ok = 0;
};

/// Maximizes (1/N) Σ β_k H(m^k) + Σ h_k u·m^k over m m^T = Q̃ by Riemannian
/// gradient ascent on the Stiefel manifold (m = Q̃^½ V, V V^T = I) with a
/// polar retraction. The returned m is in the eigenbasis of the system.
AscentResult ground_state_ascent(const FiniteSystem& sys, const ModelParams& p,
                                 const SymMatrix& qt, const AscentOptions& opts = {});

/// Same for a disorder sample and a field direction in the standard basis;
/// the returned m is in the standard basis too.
AscentResult ground_state_ascent(const DisorderSample& disorder, const Eigen::VectorXd& direction,
                                 const ModelParams& p, const SymMatrix& qt,
                                 const AscentOptions& opts = {});

}  // namespace sphtap
