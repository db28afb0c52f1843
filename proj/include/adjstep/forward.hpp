/// @file forward.hpp
/// @brief Finite-volume residual, explicit and implicit Euler steps, and the
/// forward time loop that records a trajectory.
#pragma once

#include "adjstep/linear_solver.hpp"
#include "adjstep/mesh.hpp"
#include "adjstep/numflux.hpp"
#include "adjstep/physics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace adjstep {

using Field = Eigen::VectorXd;  ///< cell states packed as n_cells x n_vars

enum class StepMode : std::uint8_t { kExplicit = 0, kImplicit = 1 };

const char* to_string(StepMode mode);
StepMode parse_step_mode(const std::string& s);

/// Time-discretization parameter of the slab flux: 0 explicit, 1 implicit.
inline int theta_of(StepMode mode) { return mode == StepMode::kImplicit ? 1 : 0; }

struct SchemeConfig {
  int theta = 1;
  double cfl = 0.8;
  double newton_tol = 1e-8;
  int newton_max = 30;
  double linear_tol = 1e-4;
  int linear_max = 200;
  bool retry_with_half_step = true;
};

struct StepStats {
  int newton_iters = 0;
  int linear_iters = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

/// One time level of a trajectory. Record 0 is the initial state (dt = 0).
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  StepMode mode = StepMode::kImplicit;
  int newton_iters = 0;
  int linear_iters = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  Field field;  ///< empty when the run did not keep fields
};

struct Trajectory {
  int n_vars = 0;
  int level = 0;
  std::uint64_t mesh_hash = 0;
  std::string scenario;
  std::vector<StepRecord> records;

  int num_steps() const { return static_cast<int>(records.size()) - 1; }
  double final_time() const { return records.empty() ? 0.0 : records.back().t; }
  bool has_fields() const;
  int implicit_steps() const;
  long total_newton() const;
  long total_linear() const;
};

struct PlannedStep {
  double dt = 0.0;
  StepMode mode = StepMode::kImplicit;
};

/// Either an explicit list of steps or a uniform CFL number up to T.
struct StepSchedule {
  std::vector<PlannedStep> steps;
  double cfl = 0.0;
  StepMode mode = StepMode::kImplicit;
  double final_time = 0.0;

  static StepSchedule uniform(double cfl, StepMode mode, double final_time) {
    StepSchedule s;
    s.cfl = cfl;
    s.mode = mode;
    s.final_time = final_time;
    return s;
  }
  static StepSchedule planned(std::vector<PlannedStep> steps) {
    StepSchedule s;
    s.steps = std::move(steps);
    for (const PlannedStep& p : s.steps) s.final_time += p.dt;
    return s;
  }
  bool is_planned() const { return !steps.empty(); }
};

struct RunOptions {
  bool keep_fields = true;
  /// Called after every accepted step with the new record (fields possibly
  /// empty), the new state and the previous state.
  std::function<void(const StepRecord&, const Field&, const Field&)> observer;
};

/// Thrown by run_forward; carries the trajectory computed before the failure.
template <class Base>
class RunAborted : public Base {
 public:
  RunAborted(const Base& cause, Trajectory partial)
      : Base(cause), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

template <class Model>
class FiniteVolume {
 public:
  static constexpr int N = Model::kVars;
  using S = State<N>;
  using M = Matrix<N>;

  FiniteVolume(const Mesh& mesh, Model model, BoundarySpec<N> boundary);

  const Mesh& mesh() const { return *mesh_; }
  const Model& model() const { return model_; }
  const BoundarySpec<N>& boundary() const { return boundary_; }
  SlabBoundary<N> freeze(double t0, double t1) const {
    return freeze_boundary(boundary_, *mesh_, t0, t1);
  }

  S cell_state(const Field& u, int c) const { return u.template segment<N>(c * N); }

  /// Throws StateError naming the first inadmissible cell.
  void check_field(const Field& u) const;

  /// R_i = sum_j |Γ_ij| F_ij. Returns sum over faces of |Γ| ||F||_1 (a magnitude scale).
  double residual(const Field& u, const SlabBoundary<N>& sb, Field& r) const;

  /// Numerical flux through face f at state u (oriented along the face normal).
  S face_flux(const Field& u, const SlabBoundary<N>& sb, int f) const;

  /// Adds scale * dR/dU (frozen-coefficient linearization) to `jac`.
  void add_residual_jacobian(const Field& u, const SlabBoundary<N>& sb, double scale,
                             BlockMatrix<N>& jac) const;

  /// Sum over boundary faces of |Γ| F (net outflow per unit time).
  S boundary_flux_total(const Field& u, const SlabBoundary<N>& sb) const;

  /// Σ_i |V_i| U_i.
  S total_conserved(const Field& u) const;

  /// Δt = cfl · min_i (length_i / max wave speed_i).
  double cfl_timestep(const Field& u, double cfl) const;

  /// Time step with CFL number 1 from a per-cell wave speed bound.
  double unit_cfl_timestep(const Field& u) const { return cfl_timestep(u, 1.0); }

  Field explicit_step(const Field& u, double t, double dt) const;

  /// Solves |V|(U - U_old) + Δt R(U) = 0 by Newton's method.
  Field implicit_step(const Field& u, double t, double dt, const SchemeConfig& cfg,
                      StepStats& stats) const;

  /// One linearized implicit step with local time steps dt_i = cfl · length_i / speed_i.
  /// Returns the 1-norm of the residual R(U) at the input state.
  double pseudo_time_step(Field& u, double cfl, const SlabBoundary<N>& sb,
                          const SchemeConfig& cfg, int& linear_iters) const;

  Trajectory run(const Field& initial, const StepSchedule& schedule, const SchemeConfig& cfg,
                 const RunOptions& options = {}) const;

 private:
  const Mesh* mesh_;
  Model model_;
  BoundarySpec<N> boundary_;
  mutable std::optional<BlockMatrix<N>> jac_;  // pattern built once, reused
};

/// Constant field with the given state in every cell.
template <int N>
Field uniform_field(std::size_t n_cells, const State<N>& s) {
  Field u(static_cast<Eigen::Index>(n_cells) * N);
  for (std::size_t c = 0; c < n_cells; ++c) u.template segment<N>(c * N) = s;
  return u;
}

}  // namespace adjstep
