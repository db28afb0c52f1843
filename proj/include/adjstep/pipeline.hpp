/// @file pipeline.hpp
/// @brief Run-directory workflow shared by the command-line driver and the Python module:
/// forward run, dual solve with indicators, timestep plan, and run comparison.
#pragma once

#include "adjstep/adapt.hpp"
#include "adjstep/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adjstep {

/// Fixed file names inside a run directory.
namespace runfile {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kTrajectory = "trajectory.bin";
inline constexpr const char* kDual = "dual.bin";
inline constexpr const char* kIndicators = "indicators.csv";
inline constexpr const char* kPlan = "plan.txt";
inline constexpr const char* kStats = "stats.csv";
inline constexpr const char* kFunctional = "functional.csv";
inline constexpr const char* kDualNorms = "dual_norms.csv";
inline constexpr const char* kSummary = "summary.txt";
inline constexpr const char* kStatus = "status.txt";
}  // namespace runfile

struct ForwardRequest {
  std::string config_path;
  std::string out_dir;
  std::optional<int> level;
  std::optional<double> cfl;
  StepMode mode = StepMode::kImplicit;
  std::string plan_path;  ///< replaces the uniform CFL schedule when set
  bool keep_fields = true;
};

struct ForwardSummary {
  int steps = 0;
  int implicit_steps = 0;
  long newton_iters = 0;
  long linear_iters = 0;
  double functional = 0.0;
  std::uint64_t checksum = 0;
  double seconds = 0.0;
};

/// Writes config.txt, trajectory.bin, stats.csv, functional.csv and status.txt. On a solver
/// failure the partial trajectory is written, status.txt says so, and the error is rethrown.
ForwardSummary run_forward_command(const ForwardRequest& request);

struct AdjointSummary {
  ErrorBreakdown breakdown;
  int levels = 0;
};

/// Writes dual.bin, indicators.csv, dual_norms.csv and summary.txt into an existing run.
AdjointSummary run_adjoint_command(const std::string& run_dir);

struct PlanRequest {
  PlannerOptions options;
  std::optional<int> fine_level;  ///< default: two levels above the run
};

struct PlanSummary {
  int steps = 0;
  int implicit_steps = 0;
  int explicit_steps = 0;
  double tolerance = 0.0;
  int fine_level = 0;
};

/// Writes plan.txt into the run directory from its indicators.
PlanSummary run_plan_command(const std::string& run_dir, const PlanRequest& request);

struct ReportRow {
  std::string run;
  int steps = 0;
  int implicit_steps = 0;
  long newton_iters = 0;
  long linear_iters = 0;
  double functional = 0.0;
  double deviation = 0.0;  ///< max trace deviation from the reference run
  double amplitude = 0.0;  ///< signal amplitude of the reference trace
};

/// Compares runs against runs[reference]. ArtifactError when meshes differ.
std::vector<ReportRow> run_report_command(const std::vector<std::string>& run_dirs, int reference);
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

/// max_t |trace(t) - reference(t)| with both traces linear between their slab end points,
/// sampled at the reference's slab ends.
double trace_deviation(const std::vector<TracePoint>& trace, const std::vector<TracePoint>& reference);
/// max - min of the integrand.
double trace_amplitude(const std::vector<TracePoint>& trace);
/// Linear interpolation of the integrand through the slab end points (clamped outside).
double trace_value_at(const std::vector<TracePoint>& trace, double t);

/// Plain-text mesh export for a config file and level.
void write_mesh_for_config(std::ostream& os, const ScenarioConfig& cfg, int level);

/// Steady state of the bump scenario on the given mesh, from a uniform freestream start.
Field bump_initial_state(const BumpScenario& scenario, const Mesh& mesh, const SchemeConfig& scheme,
                         const SteadyOptions& steady);

}  // namespace adjstep
