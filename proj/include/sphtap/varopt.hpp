#pragma once

#include <cstdint>
#include <vector>

#include "sphtap/disorder.hpp"
#include "sphtap/model.hpp"

namespace sphtap {

struct VarOptions {
  std::uint64_t seed = 0;
  int restarts = 16;
  int lattice_points = 1000;
  double tol = 1e-9;     // tie-break window and lattice slack
  unsigned threads = 1;  // restarts are merged in index order
};

/// Constraints active at the returned point (within 1e-6).
struct BoundaryFlags {
  bool plefka = false;  // ||β^½ (Q - Q̃) β^½|| at 1/√2
  bool psd = false;     // smallest eigenvalue of Q̃ at 0
  bool upper = false;   // smallest eigenvalue of Q - Q̃ at 0
};

struct VarSolution {
  SymMatrix qstar{Eigen::MatrixXd::Zero(1, 1)};
  double value = 0.0;
  BoundaryFlags flags;
  int restarts_used = 0;
  double spread = 0.0;  // best minus worst restart value
};

/// GSE(β, h, Q̃) + ½ log|Q - Q̃| + ½ β^T (Q - Q̃)^{⊙2} β. DomainError outside
/// the Loewner interval.
double variational_objective(const ModelParams& p, const OverlapMatrix& qt);

/// Maximizes variational_objective over the Plefka region with a barrier
/// continuation and multistart. Deterministic given opts.seed.
VarSolution maximize_lowdim(const ModelParams& p, const VarOptions& opts = {});

BoundaryFlags active_constraints(const ModelParams& p, const OverlapMatrix& qt);

/// Uniform-ish random point strictly inside the Plefka region.
OverlapMatrix random_feasible(const ModelParams& p, std::uint64_t seed, std::uint64_t index);

struct ScalarSolution {
  double qt = 0.0;
  double value = 0.0;
};

/// n = 1 problem by grid scan over [max(0, 1 - 1/(√2 β)), 1) and a Brent
/// refinement around the best grid point.
ScalarSolution solve_n1(double beta, double h, int grid_points = 4001);

/// Finite-N version: the ground-state term is the finite-N dual of `sys`
/// (gse_value_psd when every h_k is 0). Starts from the limiting maximizer.
VarSolution tap_sup_finite_n_solution(const ModelParams& p, const FiniteSystem& sys,
                                      const VarOptions& opts = {});

double tap_sup_finiteN(const ModelParams& p, const FiniteSystem& sys, const VarOptions& opts = {});

}  // namespace sphtap
