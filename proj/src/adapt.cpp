#include "adjstep/adapt.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace adjstep {

double StepSizeProfile::at(double t) const {
  if (dt1.empty()) throw ArgumentError("empty step-size profile");
  auto it = std::upper_bound(edges.begin(), edges.end(), t);
  long k = static_cast<long>(it - edges.begin()) - 1;
  k = std::clamp(k, 0L, static_cast<long>(dt1.size()) - 1);
  return dt1[k];
}

namespace {

template <class Model>
StepSizeProfile profile_with_parents(const FiniteVolume<Model>& fv, const Trajectory& traj,
                                     const Mesh& target, const std::vector<int>& parent) {
  if (!traj.has_fields()) throw ArgumentError("trajectory does not store fields");
  const Model& model = fv.model();
  const int nc = static_cast<int>(fv.mesh().num_cells());
  std::vector<double> speed_lo(nc), speed_hi(nc);
  auto speeds = [&](const Field& u, std::vector<double>& out) {
    for (int c = 0; c < nc; ++c) out[c] = model.max_wave_speed(fv.cell_state(u, c));
  };
  StepSizeProfile p;
  speeds(traj.records[0].field, speed_hi);
  p.edges.push_back(traj.records[0].t);
  for (std::size_t m = 1; m < traj.records.size(); ++m) {
    std::swap(speed_lo, speed_hi);
    speeds(traj.records[m].field, speed_hi);
    double dt1 = std::numeric_limits<double>::infinity();
    for (int f = 0; f < static_cast<int>(target.num_cells()); ++f) {
      const double s = std::max(speed_lo[parent[f]], speed_hi[parent[f]]);
      if (s > 0.0) dt1 = std::min(dt1, target.cell(f).length_scale / s);
    }
    if (!std::isfinite(dt1)) dt1 = traj.final_time();
    p.edges.push_back(traj.records[m].t);
    p.dt1.push_back(dt1);
  }
  return p;
}

// Steps from a piecewise-constant step-size function by integrating the density 1/g.
std::vector<double> emit_by_density(const std::vector<double>& edges, const std::vector<double>& g,
                                    double final_time) {
  std::vector<double> bounds = {0.0};
  double s = 0.0;
  const double snap = 1e-12 * final_time;
  for (std::size_t k = 0; k < g.size(); ++k) {
    double t = edges[k];
    const double b = edges[k + 1];
    while (t < b) {
      const double need = 1.0 - s;
      const double avail = (b - t) / g[k];
      if (avail >= need - 1e-9) {
        double tn = t + need * g[k];
        if (std::abs(b - tn) <= snap || tn > b) tn = b;
        bounds.push_back(tn);
        s = 0.0;
        t = tn;
      } else {
        s += avail;
        t = b;
      }
    }
  }
  if (final_time - bounds.back() > snap) bounds.push_back(final_time);
  bounds.back() = final_time;
  std::vector<double> steps;
  for (std::size_t k = 1; k < bounds.size(); ++k) steps.push_back(bounds[k] - bounds[k - 1]);
  return steps;
}

}  // namespace

template <class Model>
StepSizeProfile fine_step_profile(const FiniteVolume<Model>& coarse, const Trajectory& coarse_traj,
                                  const Mesh& fine_mesh) {
  std::vector<int> parent(fine_mesh.num_cells());
  for (int f = 0; f < static_cast<int>(parent.size()); ++f) parent[f] = parent_cell(coarse.mesh(), fine_mesh, f);
  return profile_with_parents(coarse, coarse_traj, fine_mesh, parent);
}

template <class Model>
StepSizeProfile own_step_profile(const FiniteVolume<Model>& fv, const Trajectory& traj) {
  std::vector<int> parent(fv.mesh().num_cells());
  for (int c = 0; c < static_cast<int>(parent.size()); ++c) parent[c] = c;
  return profile_with_parents(fv, traj, fv.mesh(), parent);
}

int TimestepPlan::implicit_steps() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [](const PlanEntry& e) { return e.mode == StepMode::kImplicit; }));
}

double TimestepPlan::total_time() const {
  double t = 0.0;
  for (const PlanEntry& e : steps) t += e.dt;
  return t;
}

StepSchedule TimestepPlan::schedule() const {
  std::vector<PlannedStep> out;
  out.reserve(steps.size());
  for (const PlanEntry& e : steps) out.push_back({e.dt, e.mode});
  return StepSchedule::planned(std::move(out));
}

std::vector<double> TimestepPlan::implied_cfl(const StepSizeProfile& profile) const {
  std::vector<double> out;
  double t = 0.0;
  for (const PlanEntry& e : steps) {
    out.push_back(profile.implied_cfl(t, t + e.dt));
    t += e.dt;
  }
  return out;
}

TimestepPlan equidistribute(const std::vector<CoarseInterval>& intervals, double tol, double final_time,
                            double cap_fraction, double floor_value) {
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  if (intervals.empty()) throw ArgumentError("no coarse intervals");
  const double cap = cap_fraction * final_time;
  std::vector<double> edges, g;
  for (const CoarseInterval& iv : intervals) {
    edges.push_back(iv.t0);
    g.push_back(std::min(cap, iv.dt * tol / std::max(iv.error, floor_value)));
  }
  edges.push_back(intervals.back().t0 + intervals.back().dt);
  if (std::abs(edges.front()) > 1e-12 * final_time || std::abs(edges.back() - final_time) > 1e-9 * final_time)
    throw ArgumentError("coarse intervals do not cover [0, T]");
  edges.back() = final_time;

  TimestepPlan plan;
  plan.final_time = final_time;
  plan.tolerance = tol;
  for (double dt : emit_by_density(edges, g, final_time)) plan.steps.push_back({dt, StepMode::kImplicit});
  return plan;
}

TimestepPlan apply_cfl_floor(const TimestepPlan& plan, const StepSizeProfile& profile, double floor_cfl) {
  bool above = true;
  double t = 0.0;
  for (const PlanEntry& e : plan.steps) {
    if (e.dt < floor_cfl * profile.at(t)) above = false;
    t += e.dt;
  }
  if (above) return plan;

  std::vector<double> edges = {0.0};
  for (const PlanEntry& e : plan.steps) edges.push_back(edges.back() + e.dt);
  const double T = plan.final_time;
  edges.back() = T;
  auto planned = [&](double x) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t k = std::min<std::size_t>(std::max<long>(it - edges.begin() - 1, 0), plan.steps.size() - 1);
    return plan.steps[k].dt;
  };

  TimestepPlan out = plan;
  out.steps.clear();
  t = 0.0;
  const double snap = 1e-12 * T;
  while (T - t > snap) {
    double h = std::max(planned(t), floor_cfl * profile.at(t));
    if (t + h > T - snap) h = T - t;
    out.steps.push_back({h, StepMode::kImplicit});
    t += h;
  }
  // a clipped last step below the floor joins its predecessor
  if (out.steps.size() >= 2) {
    const double last_start = T - out.steps.back().dt;
    if (out.steps.back().dt < floor_cfl * profile.at(last_start)) {
      const double dt = out.steps.back().dt;
      out.steps.pop_back();
      out.steps.back().dt += dt;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < out.steps.size(); ++k) sum += out.steps[k].dt;
  out.steps.back().dt = T - sum;
  return out;
}

TimestepPlan apply_mode_switch(const TimestepPlan& plan, const StepSizeProfile& profile, double switch_cfl,
                               double explicit_cfl) {
  TimestepPlan out = plan;
  out.steps.clear();
  const double T = plan.final_time;
  double start = 0.0;  // start of the current plan step
  double t = 0.0;      // cursor; may lag behind `start` after an explicit run
  for (const PlanEntry& e : plan.steps) {
    const double end = start + e.dt;
    start = end;
    if (end - t <= 0.0) continue;
    if (profile.implied_cfl(t, end) >= switch_cfl) {
      out.steps.push_back({end - t, StepMode::kImplicit});
      t = end;
      continue;
    }
    while (true) {
      const double h = explicit_cfl * profile.at(t);
      if (t + h > end * (1.0 + 1e-15) + 1e-300) break;
      out.steps.push_back({h, StepMode::kExplicit});
      t += h;
    }
  }
  if (T - t > 1e-12 * T) out.steps.push_back({T - t, StepMode::kExplicit});
  return out;
}

std::vector<CoarseInterval> coarse_intervals(const ErrorBreakdown& b, bool dt_weighted) {
  std::vector<CoarseInterval> out;
  for (const IntervalIndicator& iv : b.intervals)
    out.push_back({iv.t - iv.dt, iv.dt, dt_weighted ? iv.value * iv.dt : iv.value});
  return out;
}

TimestepPlan plan_from_indicators(const ErrorBreakdown& b, const StepSizeProfile& profile, double final_time,
                                  const PlannerOptions& options, const std::string& source) {
  const std::vector<CoarseInterval> iv = coarse_intervals(b, options.dt_weighted);
  double peak = 0.0;
  for (const CoarseInterval& c : iv) peak = std::max(peak, c.error);
  TimestepPlan plan;
  if (peak > 0.0) {
    plan = equidistribute(iv, options.tol_factor * peak, final_time, options.cap_fraction);
  } else {
    // nothing to resolve: every step at the cap
    plan = equidistribute(iv, 1.0, final_time, options.cap_fraction);
    plan.tolerance = 0.0;
  }
  plan = apply_cfl_floor(plan, profile, options.floor_cfl);
  if (options.mixed) plan = apply_mode_switch(plan, profile, options.switch_cfl, options.explicit_cfl);
  plan.source = source;
  return plan;
}

void write_plan(std::ostream& os, const TimestepPlan& plan) {
  os << "# adjstep-plan v1\n" << std::setprecision(17);
  os << "T " << plan.final_time << "\n";
  os << "tolerance " << plan.tolerance << "\n";
  os << "source " << (plan.source.empty() ? "-" : plan.source) << "\n";
  os << "steps " << plan.steps.size() << "\n";
  for (const PlanEntry& e : plan.steps) os << e.dt << ' ' << to_string(e.mode) << "\n";
}

TimestepPlan read_plan(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# adjstep-plan v1") throw ArtifactError("not a plan file (bad header)");
  TimestepPlan plan;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "T") {
      ls >> plan.final_time;
    } else if (key == "tolerance") {
      ls >> plan.tolerance;
    } else if (key == "source") {
      ls >> plan.source;
      if (plan.source == "-") plan.source.clear();
    } else if (key == "steps") {
      ls >> expected;
    } else {
      PlanEntry e;
      std::string mode;
      std::istringstream es(line);
      if (!(es >> e.dt >> mode) || !(e.dt > 0.0)) throw ArtifactError("malformed plan line: " + line);
      e.mode = parse_step_mode(mode);
      plan.steps.push_back(e);
      continue;
    }
    if (!ls) throw ArtifactError("malformed plan header line: " + line);
  }
  if (plan.steps.size() != expected) throw ArtifactError("plan step count does not match its header");
  if (std::abs(plan.total_time() - plan.final_time) > 1e-12 * std::max(1.0, plan.final_time))
    throw ArtifactError("plan steps do not add up to T");
  return plan;
}

#define ADJSTEP_INSTANTIATE(Model)                                                                   \
  template StepSizeProfile fine_step_profile(const FiniteVolume<Model>&, const Trajectory&, const Mesh&); \
  template StepSizeProfile own_step_profile(const FiniteVolume<Model>&, const Trajectory&);
ADJSTEP_INSTANTIATE(Burgers1D)
ADJSTEP_INSTANTIATE(LinearAdvection1D)
ADJSTEP_INSTANTIATE(Euler2D)
#undef ADJSTEP_INSTANTIATE

}  // namespace adjstep
