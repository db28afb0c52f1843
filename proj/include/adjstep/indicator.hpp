/// @file indicator.hpp
/// @brief Space-time split of the dual-weighted error representation: temporal part η_k,
/// localized interval indicators η̄_k^n, spatial part η_h and the efficiency index.
#pragma once

#include "adjstep/adjoint.hpp"
#include "adjstep/galerkin.hpp"

#include <optional>
#include <vector>

namespace adjstep {

struct IntervalIndicator {
  int n = 0;          ///< slab index, 1-based
  double t = 0.0;     ///< slab end time
  double dt = 0.0;
  double value = 0.0; ///< η̄_k^n, without the Δt factor
};

struct ErrorBreakdown {
  double eta_k = 0.0;
  double eta_h = 0.0;
  double eta = 0.0;  ///< eta_k + eta_h
  /// Time part that N(U_h, ·) itself assigns to the slope (t - t_mid)(ψ - Ã^T w):
  /// (Δt/2)(1 - 2θ)(U^m - U^{m-1}, ψ - Ã^T w). Used by the splitting identity.
  double eta_k_consistent = 0.0;
  std::vector<IntervalIndicator> intervals;
  double eta_k_bar = 0.0;  ///< Σ_n Δt_n η̄_k^n
  double eta_h_bar = 0.0;  ///< Σ_{i,m} |local η_h contribution|
  std::vector<double> eta_h_cells;  ///< Σ_m |local η_h contribution| per cell
  std::optional<double> theta_eff;
};

/// η_k and η̄_k^n as defined by the weighted time differences of U_h.
template <class Model>
ErrorBreakdown compute_eta_k(const FiniteVolume<Model>& fv, const Trajectory& traj,
                             const DualSolution& dual, const TargetFunctional<Model::kVars>& func);

/// Adds η_h = N(U_h, w̄·(x - x_c)) to `out` and sets eta = eta_k + eta_h.
template <class Model>
void compute_eta_h(const FiniteVolume<Model>& fv, const Trajectory& traj, const DualSolution& dual,
                   ErrorBreakdown& out);

/// Both parts.
template <class Model>
ErrorBreakdown compute_breakdown(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                 const DualSolution& dual, const TargetFunctional<Model::kVars>& func);

/// N(U_h, φ_rec - Π⁰φ_rec) for the reconstruction
/// φ_rec = φ̄ + (t - t_mid)(ψ - Ã^T w̄) + w̄·(x - x_c) on each space-time cell.
template <class Model>
double reconstructed_residual(const FiniteVolume<Model>& fv, const Trajectory& traj,
                              const DualSolution& dual, const TargetFunctional<Model::kVars>& func);

/// (η_h + η_k) / (J_reference - J_coarse); ArgumentError when the denominator is below 1e-14.
double efficiency_index(const ErrorBreakdown& b, double j_coarse, double j_reference);

}  // namespace adjstep
