/// @file scenario.hpp
/// @brief The two reference experiments: the Burgers perturbed shock and the transonic
/// bump channel with inflow pressure perturbations; steady-state solver; config files.
#pragma once

#include "adjstep/forward.hpp"
#include "adjstep/functional.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace adjstep {

/// w(t) = 1 + amplitude (1 - s^2)^2 with s in [-1, 1] across [t0, t1].
struct PerturbationWindow {
  double t0 = 0.0;
  double t1 = 0.0;
  double amplitude = 0.0;
};

struct PerturbationSchedule {
  std::vector<PerturbationWindow> windows;

  /// Pointwise weight w_p(t).
  double weight(double t) const;
  /// Exact mean of w_p over [a, b]; the pointwise value when a == b.
  double mean_weight(double a, double b) const;
  /// End of the last window (0 without windows).
  double last_exit() const;
};

/// Quartic bump (1 - s^2)^2 on [t0, t1], zero outside.
double quartic_bump(double t, double t0, double t1);

/// p_∞ w_p(t).
double inflow_pressure(double t, double p_inf, const PerturbationSchedule& schedule);

struct BumpScenario {
  BumpChannelGeometry geometry;
  double gamma = 1.4;
  double rho_inf = 1.225;
  double p_inf = 101325.0;
  double mach = 0.85;
  double final_time = 0.0285;
  PerturbationSchedule schedule{{{0.002, 0.006, 0.20}, {0.010, 0.012, 0.02}}};
  std::vector<double> abscissae = {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
  double half_width = 0.25;

  Euler2D model() const { return Euler2D{gamma}; }
  State<4> freestream() const;
  double freestream_speed() const;
  double freestream_sound_speed() const;
  /// Isentropic inflow state at the mean pressure over [t0, t1], velocity held at freestream.
  State<4> inflow_state(double t0, double t1) const;
  BoundarySpec<4> boundary() const;
  TargetFunctional<4> functional() const;
  Mesh mesh(int level) const { return build_bump_channel_mesh(geometry, level); }
  /// Times with no perturbation signal inside the channel: before the first window and after
  /// the last window has been swept out by the u + c wave (with a 25% margin).
  bool is_stationary_time(double t) const;
};

struct BurgersScenario {
  int level = 0;
  double x_min = -1.0;
  double x_max = 1.0;
  double final_time = 1.5;
  double amplitude = 0.5;
  double pulse_t0 = 0.2;
  double pulse_t1 = 0.5;
  double psi_center = 0.0;  ///< centred on the shock; the displaced shock stays left of 0.05
  double psi_half_width = 0.2;
  double psi_t0 = 1.0;
  double psi_t1 = 1.5;

  int num_cells() const { return 40 << level; }
  Burgers1D model() const { return {}; }
  Mesh mesh() const { return build_interval_mesh(x_min, x_max, num_cells()); }
  Field initial(const Mesh& mesh) const;
  /// Mean of the inflow value 1 + amplitude·bump over [t0, t1].
  double inflow_mean(double t0, double t1) const;
  BoundarySpec<1> boundary() const;
  TargetFunctional<1> functional() const;
};

BurgersScenario burgers_perturbed_shock(int level);
BumpScenario bump_channel_scenario();

struct SteadyOptions {
  double cfl_start = 5.0;
  double cfl_max = 1000.0;
  double drop = 1e-6;      ///< converged when ||R|| <= drop · ||R_0||
  int stall_steps = 500;   ///< steps without a new residual minimum before giving up
  int max_steps = 20000;
};

struct SteadyResult {
  Field field;
  int steps = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> history;
};

/// Implicit pseudo-time marching with the ramp CFL_k = min(cfl_max, 2 CFL_{k-1} r_{k-1}/r_k)
/// on the unperturbed boundary data. Throws NonconvergenceError on stall.
SteadyResult steady_state_solve(const FiniteVolume<Euler2D>& fv, const Field& initial, const SchemeConfig& cfg,
                                const SteadyOptions& options = {});

/// Largest cell Mach number of a field.
double max_mach(const Euler2D& model, const Field& u);

/// Parsed "key = value" scenario configuration.
struct ScenarioConfig {
  std::string model;  ///< burgers1d | euler2d
  int level = 0;
  BumpScenario bump;
  BurgersScenario burgers;
  SchemeConfig scheme;
  SteadyOptions steady;
  std::map<std::string, std::string> raw;
};

/// Throws ConfigError naming the offending key (missing model, unknown key, bad value).
ScenarioConfig parse_scenario_config(std::istream& is);
ScenarioConfig load_scenario_config(const std::string& path);
void write_scenario_config(std::ostream& os, const ScenarioConfig& cfg);

}  // namespace adjstep
