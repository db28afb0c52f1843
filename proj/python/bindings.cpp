#include "adjstep/galerkin.hpp"
#include "adjstep/indicator.hpp"
#include "adjstep/io.hpp"
#include "adjstep/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

namespace py = pybind11;
using namespace adjstep;

namespace {

py::dict breakdown_dict(const ErrorBreakdown& b) {
  py::dict d;
  d["eta_k"] = b.eta_k;
  d["eta_h"] = b.eta_h;
  d["eta"] = b.eta;
  d["eta_k_bar"] = b.eta_k_bar;
  d["eta_h_bar"] = b.eta_h_bar;
  d["eta_k_consistent"] = b.eta_k_consistent;
  py::list intervals;
  for (const IntervalIndicator& iv : b.intervals) intervals.append(py::make_tuple(iv.n, iv.t, iv.dt, iv.value));
  d["intervals"] = intervals;
  return d;
}

py::dict forward_dict(const ForwardSummary& s) {
  py::dict d;
  d["steps"] = s.steps;
  d["implicit_steps"] = s.implicit_steps;
  d["newton_iters"] = s.newton_iters;
  d["linear_iters"] = s.linear_iters;
  d["functional"] = s.functional;
  d["checksum"] = s.checksum;
  d["seconds"] = s.seconds;
  return d;
}

StepMode mode_of(const std::string& name) { return parse_step_mode(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adjoint-based timestep control for finite-volume conservation laws";

  auto base = py::register_exception<std::runtime_error>(m, "AdjstepError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ArtifactError>(m, "ArtifactError", base.ptr());
  py::register_exception<NonconvergenceError>(m, "NonconvergenceError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());

  m.def(
      "forward",
      [](const std::string& config, const std::string& out, std::optional<int> level, std::optional<double> cfl,
         const std::string& mode, const std::string& plan, bool keep_fields) {
        ForwardRequest q;
        q.config_path = config;
        q.out_dir = out;
        q.level = level;
        q.cfl = cfl;
        q.mode = mode_of(mode);
        q.plan_path = plan;
        q.keep_fields = keep_fields;
        ForwardSummary s;
        {
          py::gil_scoped_release release;
          s = run_forward_command(q);
        }
        return forward_dict(s);
      },
      py::arg("config"), py::arg("out"), py::arg("level") = py::none(), py::arg("cfl") = py::none(),
      py::arg("mode") = "implicit", py::arg("plan") = "", py::arg("keep_fields") = true,
      "Primal run into a run directory; returns step and solver statistics.");

  m.def(
      "adjoint",
      [](const std::string& run) {
        AdjointSummary s;
        {
          py::gil_scoped_release release;
          s = run_adjoint_command(run);
        }
        return breakdown_dict(s.breakdown);
      },
      py::arg("run"), "Dual solve and indicators for a run directory.");

  m.def(
      "plan",
      [](const std::string& run, const std::string& mode, double tol_factor, double floor_cfl, double switch_cfl,
         double explicit_cfl, std::optional<int> fine_level) {
        if (mode != "implicit" && mode != "mixed") throw ArgumentError("plan mode must be implicit or mixed");
        PlanRequest r;
        r.options.mixed = mode == "mixed";
        r.options.tol_factor = tol_factor;
        r.options.floor_cfl = floor_cfl;
        r.options.switch_cfl = switch_cfl;
        r.options.explicit_cfl = explicit_cfl;
        r.fine_level = fine_level;
        const PlanSummary s = run_plan_command(run, r);
        py::dict d;
        d["steps"] = s.steps;
        d["implicit_steps"] = s.implicit_steps;
        d["explicit_steps"] = s.explicit_steps;
        d["tolerance"] = s.tolerance;
        d["fine_level"] = s.fine_level;
        return d;
      },
      py::arg("run"), py::arg("mode") = "implicit", py::arg("tol_factor") = 0.125, py::arg("floor_cfl") = 0.8,
      py::arg("switch_cfl") = 5.0, py::arg("explicit_cfl") = 0.5, py::arg("fine_level") = py::none(),
      "Timestep plan from a run's indicators, written to <run>/plan.txt.");

  m.def(
      "report",
      [](const std::vector<std::string>& runs, int reference) {
        py::list rows;
        for (const ReportRow& r : run_report_command(runs, reference)) {
          py::dict d;
          d["run"] = r.run;
          d["steps"] = r.steps;
          d["implicit_steps"] = r.implicit_steps;
          d["newton_iters"] = r.newton_iters;
          d["linear_iters"] = r.linear_iters;
          d["functional"] = r.functional;
          d["deviation"] = r.deviation;
          d["amplitude"] = r.amplitude;
          rows.append(d);
        }
        return rows;
      },
      py::arg("runs"), py::arg("reference") = 0, "Compare functional traces against runs[reference].");

  m.def(
      "read_trajectory",
      [](const std::string& path) {
        const Trajectory tr = read_trajectory(path);
        py::dict d;
        std::vector<double> t, dt;
        std::vector<std::string> modes;
        std::vector<Field> fields;
        for (const StepRecord& r : tr.records) {
          t.push_back(r.t);
          dt.push_back(r.dt);
          modes.push_back(to_string(r.mode));
          if (r.field.size() > 0) fields.push_back(r.field);
        }
        d["n_vars"] = tr.n_vars;
        d["level"] = tr.level;
        d["scenario"] = tr.scenario;
        d["t"] = t;
        d["dt"] = dt;
        d["modes"] = modes;
        d["fields"] = fields;
        return d;
      },
      py::arg("path"), "Contents of a trajectory container; fields are flat arrays (cell-major).");

  m.def(
      "read_plan",
      [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ArtifactError("cannot open plan '" + path + "'");
        const TimestepPlan p = read_plan(in);
        std::vector<double> dt;
        std::vector<std::string> modes;
        for (const PlanEntry& e : p.steps) {
          dt.push_back(e.dt);
          modes.push_back(to_string(e.mode));
        }
        py::dict d;
        d["dt"] = dt;
        d["modes"] = modes;
        d["final_time"] = p.final_time;
        d["tolerance"] = p.tolerance;
        return d;
      },
      py::arg("path"));

  m.def(
      "burgers_estimate",
      [](int level, double cfl, const std::string& mode) {
        const BurgersScenario s = burgers_perturbed_shock(level);
        const Mesh mesh = s.mesh();
        FiniteVolume<Burgers1D> fv(mesh, s.model(), s.boundary());
        const Trajectory tr = fv.run(s.initial(mesh), StepSchedule::uniform(cfl, mode_of(mode), s.final_time),
                                     SchemeConfig{});
        const TargetFunctional<1> func = s.functional();
        const DualSolution dual = run_adjoint(fv, tr, func);
        py::dict d = breakdown_dict(compute_breakdown(fv, tr, dual, func));
        d["functional"] = evaluate_functional(fv, tr, func);
        d["steps"] = tr.num_steps();
        d["reconstructed_residual"] = reconstructed_residual(fv, tr, dual, func);
        d["orthogonality"] = galerkin_orthogonality_check(fv, tr, 10, 1).max_abs;
        return d;
      },
      py::arg("level"), py::arg("cfl") = 0.5, py::arg("mode") = "explicit",
      "In-memory forward, dual and indicators for the Burgers perturbed shock.");

  m.def(
      "mesh",
      [](const std::string& config, int level) {
        const ScenarioConfig cfg = load_scenario_config(config);
        const Mesh mesh = cfg.model == "burgers1d"
                              ? build_interval_mesh(cfg.burgers.x_min, cfg.burgers.x_max, 40 << level)
                              : cfg.bump.mesh(level);
        Eigen::MatrixX2d centroids(mesh.num_cells(), 2);
        Eigen::VectorXd volumes(mesh.num_cells());
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
          centroids.row(c) = mesh.cell(c).centroid.transpose();
          volumes[c] = mesh.cell(c).volume;
        }
        py::dict d;
        d["centroids"] = centroids;
        d["volumes"] = volumes;
        d["hash"] = mesh.hash();
        return d;
      },
      py::arg("config"), py::arg("level") = 0, "Cell centroids and volumes of a config's mesh.");

  m.def("format_double", &format_double);
}
