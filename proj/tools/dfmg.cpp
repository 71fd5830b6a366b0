// Command-line driver: single solves, config sweeps, table reproduction and
// the property checks.
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "dfmg/harness.hpp"

namespace {

void print_table(const dfmg::TableResult& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) std::cout << (i ? "\t" : "") << table.header[i];
  std::cout << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << row[i];
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Darcy-Forchheimer PR iteration and FAS multigrid solver"};
  app.require_subcommand(1);

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a sweep described by a config file");
  run->add_option("--config", config_path, "INI-style sweep file")->required()->check(CLI::ExistingFile);

  // table
  int table_id = 0;
  std::string table_out = "results";
  dfmg::TableOptions table_options;
  auto* table = app.add_subcommand("table", "Reproduce one of the benchmark tables");
  table->add_option("id", table_id, "Table number")->required()->check(CLI::Range(1, 6));
  table->add_option("--out", table_out, "Output directory");
  table->add_option("--max-h-inv", table_options.max_h_inv, "Finest mesh 1/h");
  table->add_option("--max-s1-h-inv", table_options.max_s1_h_inv, "Finest mesh for the direct saddle path");

  // check
  auto* check = app.add_subcommand("check", "Run the property checks");

  // solve
  dfmg::RunSpec spec;
  std::string solver_name = "mg";
  std::string alpha_text = "auto";
  std::string tol_mode = "fixed";
  std::string linear_solver = "schur";
  std::string dump_mesh;
  int levels = 0;
  auto* solve = app.add_subcommand("solve", "Solve one configuration");
  solve->add_option("--problem", spec.problem, "problem1 or problem2");
  solve->add_option("--beta", spec.beta, "Forchheimer coefficient")->check(CLI::NonNegativeNumber);
  solve->add_option("--h-inv", spec.h_inv, "Mesh size 1/h")->check(CLI::PositiveNumber);
  solve->add_option("--solver", solver_name, "pr or mg");
  solve->add_option("--alpha", alpha_text, "auto (1/beta), a number or a fraction");
  solve->add_option("--tol", spec.tol, "Stopping tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--tol-mode", tol_mode, "fixed or h-scaled");
  solve->add_option("--max-iters", spec.max_iters, "PR iteration cap");
  solve->add_option("--max-cycles", spec.max_cycles, "V-cycle cap");
  solve->add_option("--levels", levels, "Number of multigrid levels (overrides --coarse-h-inv)");
  solve->add_option("--smooth-steps", spec.smooth_steps, "PR smoothing steps per side of a V-cycle");
  solve->add_option("--coarse-h-inv", spec.coarse_h_inv, "Coarsest multigrid mesh 1/h");
  solve->add_option("--linear-solver", linear_solver, "schur, direct or cg");
  solve->add_option("--dump-mesh", dump_mesh, "Write the finest mesh to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const dfmg::SweepConfig cfg = dfmg::load_sweep_config(config_path);
      const auto rows = dfmg::run_sweep(cfg, &std::cerr);
      dfmg::emit_outputs(rows, cfg.output_dir, cfg.name);
      std::cout << rows.size() << " rows written to " << (cfg.output_dir / (cfg.name + ".csv")).string() << '\n';
      return 0;
    }
    if (*table) {
      table_options.progress = &std::cerr;
      const dfmg::TableResult result = dfmg::reproduce_table(table_id, table_options);
      dfmg::emit_table(result, table_out);
      print_table(result);
      return 0;
    }
    if (*check) {
      return dfmg::run_property_checks(std::cout) ? 0 : 1;
    }
    if (*solve) {
      spec.solver = dfmg::parse_solver(solver_name);
      spec.alpha = dfmg::AlphaRule::parse(alpha_text);
      spec.tol_mode = dfmg::parse_tol_mode(tol_mode);
      spec.linear_solver = dfmg::parse_linear_solver(linear_solver);
      if (levels > 0) {
        const int divisor = 1 << (levels - 1);
        if (spec.h_inv % divisor != 0) throw std::invalid_argument("--levels too large for --h-inv");
        spec.coarse_h_inv = spec.h_inv / divisor;
      }
      const dfmg::RunOutput out = dfmg::run_case(spec);
      const dfmg::ResultRow& r = out.row;
      std::cout << std::setprecision(6) << "problem=" << spec.problem << " beta=" << spec.beta << " alpha=" << r.alpha
                << " h=1/" << spec.h_inv << " solver=" << dfmg::to_string(spec.solver) << '/'
                << dfmg::to_string(spec.linear_solver) << '\n'
                << "dofs=" << r.dofs << " vertices=" << r.vertices << " triangles=" << r.triangles << '\n'
                << "iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
                << " residual=" << r.residual << '\n'
                << "err_u_l2=" << r.errors.err_u_l2 << " err_p_h1=" << r.errors.err_p_h1
                << " err_p_w1_32=" << r.errors.err_p_w1_32 << '\n'
                << "max_constraint_defect=" << r.max_constraint_defect << '\n'
                << "solve_s=" << r.solve_seconds << " total_s=" << r.total_seconds << '\n';
      for (const auto& w : out.report.warnings) std::cerr << "warning: " << w << '\n';
      if (!dump_mesh.empty()) {
        std::ofstream mesh_out(dump_mesh);
        if (!mesh_out) throw std::runtime_error("cannot write " + dump_mesh);
        dfmg::write_mesh(mesh_out, out.mesh);
      }
      return r.converged ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
