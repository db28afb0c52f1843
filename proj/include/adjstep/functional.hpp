/// @file functional.hpp
/// @brief Target functionals J(U) = (U, ψ)_{Ω_T} - (P_+ f_ν(U), ψ_Γ)_{Γ_T} and their
/// evaluation on trajectories.
#pragma once

#include "adjstep/forward.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace adjstep {

/// Separable weights: interior ψ(x, t) = ψ_x(x) χ(t) and boundary ψ_Γ(x, t) = ψ_Γx(x) χ_Γ(t),
/// with χ the indicator of a half-open window [t0, t1).
template <int N>
struct TargetFunctional {
  using S = State<N>;
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::function<S(const Vec2&)> interior;
  double interior_t0 = -kInf, interior_t1 = kInf;

  /// Evaluated at a point of a boundary face; empty means ψ_Γ = 0.
  std::function<S(const Vec2&, const Face&)> boundary;
  double boundary_t0 = -kInf, boundary_t1 = kInf;

  /// x-coordinates where the weights have kinks; quadrature splits there.
  std::vector<double> breakpoints;

  /// Returns a copy with all weights multiplied by `factor`.
  TargetFunctional scaled(double factor) const;

  double interior_overlap(double a, double b) const { return overlap(a, b, interior_t0, interior_t1); }
  double boundary_overlap(double a, double b) const { return overlap(a, b, boundary_t0, boundary_t1); }
  bool interior_active(double t) const { return interior && t >= interior_t0 && t < interior_t1; }
  bool boundary_active(double t) const { return boundary && t >= boundary_t0 && t < boundary_t1; }

  static double overlap(double a, double b, double t0, double t1) {
    return std::max(0.0, std::min(b, t1) - std::max(a, t0));
  }
};

/// Spatial integrals of a functional's weights on one mesh.
template <int N>
struct FunctionalWeights {
  std::vector<State<N>> cell;         ///< ∫_{V_i} ψ_x dx
  std::vector<State<N>> cell_center;  ///< ψ_x at the centroid
  std::vector<Eigen::Matrix<double, 2, N>> cell_gradient;  ///< Green-Gauss ∇ψ_x
  std::vector<State<N>> face;         ///< ∫_Γ ψ_Γx ds on boundary faces, zero elsewhere
  std::vector<State<N>> face_mean;    ///< face integral / |Γ|
  bool has_interior = false;
  bool has_boundary = false;
};

template <int N>
FunctionalWeights<N> functional_weights(const TargetFunctional<N>& func, const Mesh& mesh);

/// Window ψ_i(x) = (x - (x_i - w))^2 (x - (x_i + w))^2 / w^4 on |x - x_i| <= w, zero outside.
double pressure_window(double x, double center, double half_width);

/// Bottom-wall pressure functional Σ_i ∫_0^T ∫_{κ_i} p ψ_i ds for the Euler channel.
TargetFunctional<4> bump_pressure_functional(const std::vector<double>& centers, double half_width,
                                             double t_end);

/// Interior functional ∫∫ u ψ dx dt with a smooth quartic bump in x, active on [t0, t1).
TargetFunctional<1> interval_bump_functional(double center, double half_width, double t0, double t1);

struct TracePoint {
  double t = 0.0;          ///< end of the slab
  double dt = 0.0;
  double integrand = 0.0;  ///< slab contribution / Δt
  double cumulative = 0.0;
};

/// Accumulates J slab by slab; usable as a run observer when fields are not kept.
/// Slab m contributes Σ_i (U_i^m, ∫_{I_m}∫_{V_i} ψ) - Σ_Γ (P_+ f_ν(U^m), ∫_{I_m}∫_Γ ψ_Γ).
template <class Model>
class FunctionalAccumulator {
 public:
  FunctionalAccumulator(const FiniteVolume<Model>& fv, const TargetFunctional<Model::kVars>& func);

  void add_slab(double t0, double t1, const Field& u_new);
  double value() const { return value_; }
  const std::vector<TracePoint>& trace() const { return trace_; }

  /// Slab contribution without accumulating.
  double slab_value(double t0, double t1, const Field& u_new) const;

 private:
  const FiniteVolume<Model>* fv_;
  TargetFunctional<Model::kVars> func_;
  FunctionalWeights<Model::kVars> weights_;
  double value_ = 0.0;
  std::vector<TracePoint> trace_;
};

template <class Model>
double evaluate_functional(const FiniteVolume<Model>& fv, const Trajectory& traj,
                           const TargetFunctional<Model::kVars>& func);

template <class Model>
std::vector<TracePoint> functional_trace(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                         const TargetFunctional<Model::kVars>& func);

/// Boundary integral Σ_Γ (P_+ f_ν(U), ∫_Γ ψ_Γx ds) of a single snapshot, without time weight.
template <class Model>
double snapshot_boundary_integral(const FiniteVolume<Model>& fv, const Field& u,
                                  const TargetFunctional<Model::kVars>& func);

}  // namespace adjstep
