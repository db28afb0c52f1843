// Command-line driver for the coarse forward -> adjoint -> plan -> fine forward workflow.
#include "adjstep/error.hpp"
#include "adjstep/io.hpp"
#include "adjstep/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kSolver = 3, kArtifact = 4 };

int report_error(const char* kind, const std::exception& e, int code) {
  std::cerr << "adjstep: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace adjstep;
  CLI::App app{"Goal-oriented adaptive time stepping for finite volume runs"};
  app.require_subcommand(1);

  ForwardRequest fwd;
  std::string mode_name = "implicit";
  bool drop_fields = false;
  auto* forward = app.add_subcommand("forward", "Run the primal solver and write a run directory");
  forward->add_option("--config", fwd.config_path, "Scenario config file")->required();
  forward->add_option("--out", fwd.out_dir, "Run directory")->required();
  forward->add_option("--level", fwd.level, "Mesh level (overrides the config)");
  auto* cfl_opt = forward->add_option("--cfl", fwd.cfl, "Uniform CFL number (default 0.8)");
  forward->add_option("--plan", fwd.plan_path, "Timestep plan file")->excludes(cfl_opt);
  forward->add_option("--mode", mode_name, "Step mode for uniform runs")
      ->check(CLI::IsMember({"implicit", "explicit"}));
  forward->add_flag("--no-fields", drop_fields, "Store statistics only (no adjoint possible)");

  std::string adjoint_dir;
  auto* adjoint = app.add_subcommand("adjoint", "Solve the dual problem and write indicators");
  adjoint->add_option("run", adjoint_dir, "Run directory")->required();

  std::string plan_dir;
  PlanRequest plan_req;
  std::string plan_mode = "implicit";
  auto* plan = app.add_subcommand("plan", "Derive a timestep plan from a run's indicators");
  plan->add_option("run", plan_dir, "Run directory")->required();
  plan->add_option("--tol-factor", plan_req.options.tol_factor, "Tolerance as a fraction of the peak indicator");
  plan->add_option("--floor-cfl", plan_req.options.floor_cfl, "Smallest admitted CFL number");
  plan->add_option("--switch-cfl", plan_req.options.switch_cfl, "Implicit steps below this CFL turn explicit");
  plan->add_option("--explicit-cfl", plan_req.options.explicit_cfl, "CFL number of explicit steps");
  plan->add_option("--mode", plan_mode, "Plan mode")->check(CLI::IsMember({"implicit", "mixed"}));
  plan->add_option("--fine-level", plan_req.fine_level, "Target mesh level (default: run level + 2)");

  std::vector<std::string> report_dirs;
  int reference = 0;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Compare runs against a reference run");
  report->add_option("runs", report_dirs, "Run directories")->required();
  report->add_option("--reference", reference, "Index of the reference run");
  report->add_option("--out", report_out, "CSV file (default: stdout)");

  std::string mesh_config, mesh_out;
  int mesh_level = 0;
  auto* mesh = app.add_subcommand("mesh", "Export the mesh of a config");
  mesh->add_option("--config", mesh_config, "Scenario config file")->required();
  mesh->add_option("--level", mesh_level, "Mesh level");
  mesh->add_option("--out", mesh_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*forward) {
      fwd.mode = parse_step_mode(mode_name);
      fwd.keep_fields = !drop_fields;
      const ForwardSummary s = run_forward_command(fwd);
      std::printf("steps %d implicit %d newton %ld linear %ld functional %s seconds %.2f\n", s.steps,
                  s.implicit_steps, s.newton_iters, s.linear_iters, format_double(s.functional).c_str(), s.seconds);
    } else if (*adjoint) {
      const AdjointSummary s = run_adjoint_command(adjoint_dir);
      const ErrorBreakdown& b = s.breakdown;
      std::printf("eta_k %s eta_h %s eta %s eta_k_bar %s eta_h_bar %s\n", format_double(b.eta_k).c_str(),
                  format_double(b.eta_h).c_str(), format_double(b.eta).c_str(), format_double(b.eta_k_bar).c_str(),
                  format_double(b.eta_h_bar).c_str());
    } else if (*plan) {
      plan_req.options.mixed = plan_mode == "mixed";
      const PlanSummary s = run_plan_command(plan_dir, plan_req);
      std::printf("steps %d implicit %d explicit %d tolerance %s fine_level %d\n", s.steps, s.implicit_steps,
                  s.explicit_steps, format_double(s.tolerance).c_str(), s.fine_level);
    } else if (*report) {
      if (reference < 0 || reference >= static_cast<int>(report_dirs.size()))
        throw ConfigError("--reference must index one of the given runs");
      const auto rows = run_report_command(report_dirs, reference);
      if (report_out.empty()) {
        write_report_csv(std::cout, rows);
      } else {
        std::ofstream out(report_out);
        if (!out) throw ArtifactError("cannot write '" + report_out + "'");
        write_report_csv(out, rows);
      }
    } else if (*mesh) {
      const ScenarioConfig cfg = load_scenario_config(mesh_config);
      if (mesh_out.empty()) {
        write_mesh_for_config(std::cout, cfg, mesh_level);
      } else {
        std::ofstream out(mesh_out);
        if (!out) throw ArtifactError("cannot write '" + mesh_out + "'");
        write_mesh_for_config(out, cfg, mesh_level);
      }
    }
  } catch (const ConfigError& e) {
    return report_error("config error", e, kConfig);
  } catch (const ArgumentError& e) {
    return report_error("invalid argument", e, kConfig);
  } catch (const NonconvergenceError& e) {
    return report_error("solver did not converge", e, kSolver);
  } catch (const StateError& e) {
    return report_error("inadmissible state", e, kSolver);
  } catch (const ArtifactError& e) {
    return report_error("artifact error", e, kArtifact);
  } catch (const std::exception& e) {
    return report_error("error", e, kFailure);
  }
  return kOk;
}
