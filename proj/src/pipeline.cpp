#include "adjstep/pipeline.hpp"

#include "adjstep/error.hpp"
#include "adjstep/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace adjstep {

namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string csv_tag(std::uint64_t source) {
  return "# adjstep-csv v" + std::to_string(kArtifactVersion) + " source=" + hex(source) + "\n";
}

// Returns the source hash recorded in a CSV tag line; ArtifactError on a version mismatch.
std::string check_csv_tag(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  const std::string prefix = "# adjstep-csv v";
  if (line.rfind(prefix, 0) != 0) throw ArtifactError("'" + path + "' has no artifact header");
  std::istringstream ls(line.substr(prefix.size()));
  unsigned version = 0;
  std::string source;
  ls >> version >> source;
  if (version != kArtifactVersion)
    throw ArtifactError("'" + path + "' has format version " + std::to_string(version));
  if (source.rfind("source=", 0) != 0) throw ArtifactError("'" + path + "' has a malformed header");
  return source.substr(7);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ArtifactError("cannot write '" + p.string() + "'");
  return out;
}

ScenarioConfig load_run_config(const fs::path& dir) {
  const fs::path p = dir / runfile::kConfig;
  if (!fs::exists(p)) throw ArtifactError("run directory '" + dir.string() + "' has no " + runfile::kConfig);
  return load_scenario_config(p.string());
}

Trajectory load_run_trajectory(const fs::path& dir, std::uint64_t* checksum) {
  const fs::path p = dir / runfile::kTrajectory;
  if (!fs::exists(p)) throw ArtifactError("run directory '" + dir.string() + "' has no " + runfile::kTrajectory);
  return read_trajectory(p.string(), checksum);
}

// Calls f(fv, initial_field_fn, functional) for the scenario of `cfg` at `level`.
template <class F>
auto with_scenario(const ScenarioConfig& cfg, int level, F&& f) {
  if (cfg.model == "burgers1d") {
    BurgersScenario s = cfg.burgers;
    s.level = level;
    const Mesh mesh = s.mesh();
    FiniteVolume<Burgers1D> fv(mesh, s.model(), s.boundary());
    return f(fv, [&] { return s.initial(mesh); }, s.functional(), s.final_time);
  }
  const BumpScenario& s = cfg.bump;
  const Mesh mesh = s.mesh(level);
  FiniteVolume<Euler2D> fv(mesh, s.model(), s.boundary());
  return f(fv, [&] { return bump_initial_state(s, mesh, cfg.scheme, cfg.steady); }, s.functional(), s.final_time);
}

void check_mesh(const Trajectory& traj, const Mesh& mesh, const std::string& dir) {
  if (traj.mesh_hash != mesh.hash())
    throw ArtifactError("trajectory in '" + dir + "' was computed on a different mesh than its config describes");
}

}  // namespace

Field bump_initial_state(const BumpScenario& scenario, const Mesh& mesh, const SchemeConfig& scheme,
                         const SteadyOptions& steady) {
  FiniteVolume<Euler2D> fv(mesh, scenario.model(), scenario.boundary());
  const Field start = uniform_field<4>(mesh.num_cells(), scenario.freestream());
  return steady_state_solve(fv, start, scheme, steady).field;
}

ForwardSummary run_forward_command(const ForwardRequest& req) {
  ScenarioConfig cfg = load_scenario_config(req.config_path);
  const int level = req.level.value_or(cfg.level);
  if (level < 0) throw ConfigError("level must be >= 0");
  cfg.level = level;
  cfg.raw["level"] = std::to_string(level);
  const fs::path dir(req.out_dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / runfile::kConfig);
    write_scenario_config(out, cfg);
  }
  fs::remove(dir / runfile::kDual);
  fs::remove(dir / runfile::kIndicators);

  const auto start = std::chrono::steady_clock::now();
  return with_scenario(cfg, level, [&](const auto& fv, auto initial, const auto& func, double T) {
    using Model = std::decay_t<decltype(fv.model())>;
    StepSchedule schedule;
    if (!req.plan_path.empty()) {
      std::ifstream in(req.plan_path);
      if (!in) throw ArtifactError("cannot open plan '" + req.plan_path + "'");
      const TimestepPlan plan = read_plan(in);
      if (std::abs(plan.final_time - T) > 1e-12 * T)
        throw ArtifactError("plan horizon " + format_double(plan.final_time) + " does not match T = " + format_double(T));
      schedule = plan.schedule();
    } else {
      schedule = StepSchedule::uniform(req.cfl.value_or(0.8), req.mode, T);
    }
    FunctionalAccumulator<Model> acc(fv, func);
    RunOptions opts;
    opts.keep_fields = req.keep_fields;
    double t_prev = 0.0;
    opts.observer = [&](const StepRecord& rec, const Field& u_new, const Field&) {
      acc.add_slab(t_prev, rec.t, u_new);
      t_prev = rec.t;
    };

    auto write_all = [&](Trajectory& traj, const std::string& status) {
      traj.scenario = cfg.model;
      traj.level = level;
      const std::uint64_t sum = write_trajectory((dir / runfile::kTrajectory).string(), traj);
      {
        auto out = open_out(dir / runfile::kStats);
        out << csv_tag(sum);
        write_stats_csv(out, traj);
      }
      {
        auto out = open_out(dir / runfile::kFunctional);
        out << csv_tag(sum);
        write_functional_csv(out, acc.trace());
      }
      auto out = open_out(dir / runfile::kStatus);
      out << status << "\n";
      return sum;
    };

    Trajectory traj;
    try {
      traj = fv.run(initial(), schedule, cfg.scheme, opts);
    } catch (RunAborted<NonconvergenceError>& e) {
      Trajectory partial = e.partial();
      write_all(partial, std::string("partial: ") + e.what());
      throw NonconvergenceError(e.what(), e.last_residual());
    } catch (RunAborted<StateError>& e) {
      Trajectory partial = e.partial();
      write_all(partial, std::string("partial: ") + e.what());
      throw StateError(e.what(), e.cell());
    }
    ForwardSummary s;
    s.checksum = write_all(traj, "complete");
    s.steps = traj.num_steps();
    s.implicit_steps = traj.implicit_steps();
    s.newton_iters = traj.total_newton();
    s.linear_iters = traj.total_linear();
    s.functional = acc.value();
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
  });
}

AdjointSummary run_adjoint_command(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const ScenarioConfig cfg = load_run_config(dir);
  std::uint64_t checksum = 0;
  const Trajectory traj = load_run_trajectory(dir, &checksum);
  if (!traj.has_fields()) throw ArtifactError("trajectory in '" + run_dir + "' was stored without fields");

  return with_scenario(cfg, traj.level, [&](const auto& fv, auto, const auto& func, double) {
    check_mesh(traj, fv.mesh(), run_dir);
    const DualSolution dual = run_adjoint(fv, traj, func);
    AdjointSummary s;
    s.breakdown = compute_breakdown(fv, traj, dual, func);
    s.levels = dual.num_levels();
    write_dual((dir / runfile::kDual).string(), dual, {fv.mesh().hash(), checksum});
    {
      auto out = open_out(dir / runfile::kIndicators);
      out << csv_tag(checksum);
      write_indicators_csv(out, s.breakdown);
    }
    {
      auto out = open_out(dir / runfile::kDualNorms);
      out << csv_tag(checksum);
      write_dual_norms_csv(out, dual, dual_norms(dual, fv.mesh()));
    }
    auto out = open_out(dir / runfile::kSummary);
    out << "source " << hex(checksum) << "\n";
    out << "J " << format_double(evaluate_functional(fv, traj, func)) << "\n";
    write_summary(out, s.breakdown);
    return s;
  });
}

PlanSummary run_plan_command(const std::string& run_dir, const PlanRequest& req) {
  const fs::path dir(run_dir);
  const ScenarioConfig cfg = load_run_config(dir);
  std::uint64_t checksum = 0;
  const Trajectory traj = load_run_trajectory(dir, &checksum);
  if (!traj.has_fields()) throw ArtifactError("trajectory in '" + run_dir + "' was stored without fields");
  const std::string ind_path = (dir / runfile::kIndicators).string();
  if (!fs::exists(ind_path)) throw ArtifactError("run directory '" + run_dir + "' has no indicators; run adjoint first");
  if (check_csv_tag(ind_path) != hex(checksum))
    throw ArtifactError("indicators in '" + run_dir + "' belong to a different trajectory");
  ErrorBreakdown b;
  {
    std::ifstream in(ind_path);
    b.intervals = read_indicators_csv(in);
  }
  const int fine_level = req.fine_level.value_or(traj.level + 2);
  if (fine_level < traj.level) throw ConfigError("fine level must not be below the run level");

  return with_scenario(cfg, traj.level, [&](const auto& fv, auto, const auto&, double T) {
    check_mesh(traj, fv.mesh(), run_dir);
    Mesh fine = cfg.model == "burgers1d" ? build_interval_mesh(cfg.burgers.x_min, cfg.burgers.x_max, 40 << fine_level)
                                         : cfg.bump.mesh(fine_level);
    const StepSizeProfile profile = fine_step_profile(fv, traj, fine);
    const TimestepPlan plan = plan_from_indicators(b, profile, T, req.options, hex(checksum));
    auto out = open_out(dir / runfile::kPlan);
    write_plan(out, plan);
    PlanSummary s;
    s.steps = plan.num_steps();
    s.implicit_steps = plan.implicit_steps();
    s.explicit_steps = s.steps - s.implicit_steps;
    s.tolerance = plan.tolerance;
    s.fine_level = fine_level;
    return s;
  });
}

double trace_value_at(const std::vector<TracePoint>& trace, double t) {
  if (trace.empty()) throw ArgumentError("empty trace");
  if (t <= trace.front().t) return trace.front().integrand;
  if (t >= trace.back().t) return trace.back().integrand;
  auto it = std::lower_bound(trace.begin(), trace.end(), t, [](const TracePoint& p, double x) { return p.t < x; });
  const TracePoint& b = *it;
  const TracePoint& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return (1.0 - s) * a.integrand + s * b.integrand;
}

double trace_deviation(const std::vector<TracePoint>& trace, const std::vector<TracePoint>& reference) {
  double dev = 0.0;
  for (const TracePoint& p : reference) dev = std::max(dev, std::abs(trace_value_at(trace, p.t) - p.integrand));
  for (const TracePoint& p : trace) dev = std::max(dev, std::abs(p.integrand - trace_value_at(reference, p.t)));
  return dev;
}

double trace_amplitude(const std::vector<TracePoint>& trace) {
  if (trace.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(trace.begin(), trace.end(),
                                      [](const TracePoint& a, const TracePoint& b) { return a.integrand < b.integrand; });
  return hi->integrand - lo->integrand;
}

std::vector<ReportRow> run_report_command(const std::vector<std::string>& run_dirs, int reference) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  if (reference < 0 || reference >= static_cast<int>(run_dirs.size())) throw ConfigError("reference index out of range");
  std::vector<Trajectory> trajs;
  std::vector<std::vector<TracePoint>> traces;
  for (const std::string& d : run_dirs) {
    std::uint64_t sum = 0;
    trajs.push_back(load_run_trajectory(d, &sum));
    const std::string fpath = (fs::path(d) / runfile::kFunctional).string();
    if (check_csv_tag(fpath) != hex(sum)) throw ArtifactError("functional trace in '" + d + "' belongs to another trajectory");
    std::ifstream in(fpath);
    traces.push_back(read_functional_csv(in));
  }
  const Trajectory& ref = trajs[reference];
  std::vector<ReportRow> rows;
  for (std::size_t k = 0; k < run_dirs.size(); ++k) {
    if (trajs[k].mesh_hash != ref.mesh_hash)
      throw ArtifactError("run '" + run_dirs[k] + "' uses a different mesh than the reference run");
    ReportRow r;
    r.run = run_dirs[k];
    r.steps = trajs[k].num_steps();
    r.implicit_steps = trajs[k].implicit_steps();
    r.newton_iters = trajs[k].total_newton();
    r.linear_iters = trajs[k].total_linear();
    r.functional = traces[k].empty() ? 0.0 : traces[k].back().cumulative;
    r.deviation = trace_deviation(traces[k], traces[reference]);
    r.amplitude = trace_amplitude(traces[reference]);
    rows.push_back(r);
  }
  return rows;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "run,steps,implicit_steps,newton_iters,linear_iters,functional,deviation,reference_amplitude\n";
  for (const ReportRow& r : rows)
    os << r.run << ',' << r.steps << ',' << r.implicit_steps << ',' << r.newton_iters << ',' << r.linear_iters << ','
       << format_double(r.functional) << ',' << format_double(r.deviation) << ',' << format_double(r.amplitude)
       << '\n';
}

void write_mesh_for_config(std::ostream& os, const ScenarioConfig& cfg, int level) {
  if (cfg.model == "burgers1d") {
    write_mesh_text(os, build_interval_mesh(cfg.burgers.x_min, cfg.burgers.x_max, 40 << level));
  } else {
    write_mesh_text(os, cfg.bump.mesh(level));
  }
}

}  // namespace adjstep
