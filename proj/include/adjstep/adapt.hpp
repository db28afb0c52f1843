/// @file adapt.hpp
/// @brief Timestep plans from localized indicators: error equidistribution, CFL floor and
/// explicit/implicit mode switching.
#pragma once

#include "adjstep/forward.hpp"
#include "adjstep/indicator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace adjstep {

/// Piecewise-constant CFL=1 step size on a time partition: dt1[k] applies on [edges[k], edges[k+1]).
struct StepSizeProfile {
  std::vector<double> edges;
  std::vector<double> dt1;

  /// CFL=1 step at time t (clamped to the covered range).
  double at(double t) const;
  /// Implied CFL number of a step covering [a, b], measured at its start.
  double implied_cfl(double a, double b) const { return (b - a) / at(a); }
};

/// CFL=1 step sizes of the fine mesh, estimated per coarse slab from the coarse states
/// (both ends of the slab) prolonged to the fine cells.
template <class Model>
StepSizeProfile fine_step_profile(const FiniteVolume<Model>& coarse, const Trajectory& coarse_traj,
                                  const Mesh& fine_mesh);

/// Same profile evaluated on the trajectory's own mesh.
template <class Model>
StepSizeProfile own_step_profile(const FiniteVolume<Model>& fv, const Trajectory& traj);

struct PlanEntry {
  double dt = 0.0;
  StepMode mode = StepMode::kImplicit;
};

struct TimestepPlan {
  std::vector<PlanEntry> steps;
  double final_time = 0.0;
  double tolerance = 0.0;
  std::string source;  ///< identifier of the run the indicators came from

  int num_steps() const { return static_cast<int>(steps.size()); }
  int implicit_steps() const;
  double total_time() const;
  StepSchedule schedule() const;
  /// Implied CFL of every step against `profile`.
  std::vector<double> implied_cfl(const StepSizeProfile& profile) const;
};

struct CoarseInterval {
  double t0 = 0.0;
  double dt = 0.0;
  double error = 0.0;  ///< the quantity being equidistributed
};

struct PlannerOptions {
  double tol_factor = 0.125;  ///< tolerance = tol_factor · max_n E_n
  bool dt_weighted = true;    ///< E_n = η̄_k^n Δt_n; otherwise E_n = η̄_k^n
  double cap_fraction = 0.1;  ///< Δt <= cap_fraction · T
  double floor_cfl = 0.8;
  double switch_cfl = 5.0;
  double explicit_cfl = 0.5;
  bool mixed = false;         ///< apply the explicit/implicit switch
};

/// Δt_new(t) = Δt_n tol / max(E_n, floor) on each coarse interval, capped, then turned into
/// steps by integrating the step density 1/Δt_new(t) from left to right (last step clipped at T).
TimestepPlan equidistribute(const std::vector<CoarseInterval>& intervals, double tol, double final_time,
                            double cap_fraction = 0.1, double floor_value = 1e-300);

/// Raises every step to at least floor_cfl times the CFL=1 step; ends exactly at T.
TimestepPlan apply_cfl_floor(const TimestepPlan& plan, const StepSizeProfile& profile, double floor_cfl = 0.8);

/// Steps with implied CFL < switch_cfl become runs of explicit steps at explicit_cfl; the
/// remainder of a run that is shorter than one explicit step joins the following implicit step.
TimestepPlan apply_mode_switch(const TimestepPlan& plan, const StepSizeProfile& profile,
                               double switch_cfl = 5.0, double explicit_cfl = 0.5);

/// Coarse intervals from an indicator breakdown.
std::vector<CoarseInterval> coarse_intervals(const ErrorBreakdown& b, bool dt_weighted);

/// Full planning chain: tolerance, equidistribution, floor and optional switch.
TimestepPlan plan_from_indicators(const ErrorBreakdown& b, const StepSizeProfile& profile, double final_time,
                                  const PlannerOptions& options, const std::string& source = "");

/// Text format: "# adjstep-plan v1", "T <value>", "tolerance <value>", "source <id>", then "dt mode" lines.
void write_plan(std::ostream& os, const TimestepPlan& plan);
TimestepPlan read_plan(std::istream& is);

}  // namespace adjstep
