/// @file adjoint.hpp
/// @brief Conservative dual problem w_t + ∇(Ã^T w) = ∇ψ for w = ∇φ, solved backward in
/// time over a stored forward trajectory with characteristic dual boundary conditions.
#pragma once

#include "adjstep/forward.hpp"
#include "adjstep/functional.hpp"

#include <optional>
#include <vector>

namespace adjstep {

/// Dual fields on every time level. Cell c stores its d x n_vars matrix w_c with
/// entry (k, v) at c·d·n_vars + k·n_vars + v.
struct DualSolution {
  int dim = 1;
  int n_vars = 1;
  std::vector<double> t;          ///< t_0 .. t_M, as in the trajectory
  std::vector<Field> w;           ///< w[m] approximates ∇φ(t_m)
  std::vector<int> substeps;      ///< sub-steps on slab m (index 0 unused)

  int cell_stride() const { return dim * n_vars; }
  int num_levels() const { return static_cast<int>(w.size()); }
};

struct DualOptions {
  /// CFL number of the explicit backward sub-steps; <= 0 selects 0.9 in 1D, 0.5 in 2D.
  double cfl = 0.0;
  /// Terminal data w(T); zero when absent.
  std::optional<Field> terminal;
};

/// Per-cell Green-Gauss gradient of the interior weight ψ_x (time factor excluded).
template <int N>
Field dual_source(const TargetFunctional<N>& func, const Mesh& mesh);

/// Explicit upwind solver for the dual system with coefficients frozen per forward slab.
template <class Model>
class DualSolver {
 public:
  static constexpr int N = Model::kVars;
  static constexpr int D = Model::kDim;
  using S = State<N>;
  using M = Matrix<N>;

  DualSolver(const FiniteVolume<Model>& fv, const TargetFunctional<N>& func, DualOptions options = {});

  Eigen::Index field_size() const;

  /// Freezes Ã = A(u_coeff) and the projections for slab [t0, t1]; u_lo = U^{m-1},
  /// u_hi = U^m supply the boundary projections of the H_Γ difference quotient.
  void prepare_slab(const Field& u_coeff, const Field& u_lo, const Field& u_hi, double t0, double t1);

  /// Largest stable sub-step for the prepared slab (infinite when all speeds vanish).
  double max_substep() const { return max_substep_; }

  /// w(τ_lo) from w(τ_hi) by one explicit step; τ_lo < τ_hi inside the slab.
  /// Returns Σ over boundary faces of |Γ| n ⊗ H (d x n_vars, row-major as a cell block).
  Field substep(Field& w, double tau_lo, double tau_hi) const;

  /// Marches w from t1 back to t0 of the prepared slab. Returns the sub-step count.
  int slab_backward(Field& w) const;

 private:
  S cell_flux(const Field& w, int c) const;  // H_c = Σ_k A_k^T w_k

  const FiniteVolume<Model>* fv_;
  TargetFunctional<N> func_;
  FunctionalWeights<N> weights_;
  Field source_;
  double cfl_;

  double t0_ = 0.0, t1_ = 0.0;
  double max_substep_ = 0.0;
  std::vector<M> cell_at_;    // A_k^T per cell, k-major within a cell
  std::vector<M> face_plus_;  // P_+^T at each face
  std::vector<M> face_minus_; // P_-^T at each face
  std::vector<S> face_hgamma_; // P_+^T H_Γ on boundary faces
};

/// Backward solve over the trajectory's own partition, terminal w(T) = 0 unless given.
template <class Model>
DualSolution run_adjoint(const FiniteVolume<Model>& fv, const Trajectory& traj,
                         const TargetFunctional<Model::kVars>& func, const DualOptions& options = {});

/// Σ_i |V_i| ||w_i||_1 per level, for CSV output.
std::vector<double> dual_norms(const DualSolution& dual, const Mesh& mesh);

/// Zeroes the normal momentum of a wall trace state; identity for models without walls.
template <class Model>
State<Model::kVars> wall_trace_state(const Model& model, const State<Model::kVars>& u, const Vec2& n) {
  (void)model;
  State<Model::kVars> s = u;
  if constexpr (Model::kVars == 4 && Model::kDim == 2) {
    const double un = s[1] * n.x() + s[2] * n.y();
    s[1] -= un * n.x();
    s[2] -= un * n.y();
    // keep the pressure: remove the normal kinetic energy as well
    s[3] -= 0.5 * un * un / s[0];
  } else {
    (void)n;
  }
  return s;
}

}  // namespace adjstep
