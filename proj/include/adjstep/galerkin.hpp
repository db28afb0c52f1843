/// @file galerkin.hpp
/// @brief The semilinear form N(U_h, φ) of the DG0 reading of the finite-volume
/// scheme, and a Galerkin orthogonality check.
#pragma once

#include "adjstep/forward.hpp"

#include <cstdint>
#include <functional>

namespace adjstep {

/// Restriction of a test function to one space-time cell V_i x I_m:
/// φ(x, t) = value + time_slope (t - t_mid) + gradient^T (x - x_c).
template <int N>
struct LocalTest {
  State<N> value = State<N>::Zero();
  State<N> time_slope = State<N>::Zero();
  Eigen::Matrix<double, 2, N> gradient = Eigen::Matrix<double, 2, N>::Zero();
};

/// Callback (m, i) -> restriction on slab m (1-based, [t_{m-1}, t_m]) and cell i.
template <int N>
using TestFunction = std::function<LocalTest<N>(int, int)>;

/// Receives the contribution of each space-time cell (m, i) to N.
using LocalSink = std::function<void(int, int, double)>;

/// N(U_h, φ) = Σ_{i,m} (F_ν - f_ν(U^+), φ)_{∂V_i^m}.
///
/// Slab m uses time-face fluxes U^{m-1} (bottom) and U^m (top); spatial fluxes
/// and the interior trace U^+ are taken at U^{m-1+θ}, θ from the step's mode.
/// Face integrals use the midpoint rule, exact for the affine restrictions.
template <class Model>
double semilinear_form(const FiniteVolume<Model>& fv, const Trajectory& traj,
                       const TestFunction<Model::kVars>& phi, const LocalSink& sink = {});

struct OrthogonalityResult {
  double max_abs = 0.0;  ///< max |N(U_h, φ_h)| over the random samples
  double scale = 0.0;    ///< Σ_m ||Δt_m R(U^{m-1})||_1
};

/// Random piecewise-constant test functions with entries uniform in [-1, 1].
template <class Model>
OrthogonalityResult galerkin_orthogonality_check(const FiniteVolume<Model>& fv,
                                                 const Trajectory& traj, int n_random,
                                                 std::uint64_t seed);

/// Verifies that the trajectory belongs to this discretization; throws ArgumentError.
template <class Model>
void check_trajectory_grid(const FiniteVolume<Model>& fv, const Trajectory& traj);

}  // namespace adjstep
