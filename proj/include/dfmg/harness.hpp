#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfmg/errors.hpp"
#include "dfmg/pr_iteration.hpp"
#include "dfmg/saddle_solver.hpp"

namespace dfmg {

enum class SolverKind { PR, MG };
std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view name);

enum class TolMode {
  Fixed,    // tol as given
  HScaled,  // tol = 1.95 h
};
TolMode parse_tol_mode(std::string_view name);

/// Splitting parameter rule: a fixed value, or 1/β when unset.
struct AlphaRule {
  std::optional<double> value;

  double resolve(double beta) const { return value ? *value : PRConfig::auto_alpha(beta); }
  std::string label() const;
  /// "auto", a number, or a fraction such as "1/30".
  static AlphaRule parse(std::string_view text);
};

/// One solver run. Meshes are labelled by h_inv, the number of cells per unit
/// length, so h = 1/h_inv and the square (-1,1)² has 2*h_inv cells per side.
struct RunSpec {
  std::string problem = "problem1";
  double beta = 30.0;
  AlphaRule alpha;
  int h_inv = 16;
  SolverKind solver = SolverKind::MG;
  LinearSolverKind linear_solver = LinearSolverKind::Schur;
  double tol = 1e-6;
  TolMode tol_mode = TolMode::Fixed;
  int smooth_steps = 3;
  int coarse_h_inv = 16;
  int max_iters = 5000;
  int max_cycles = 50;
  int projection_picard_steps = 2;

  double effective_tol() const { return tol_mode == TolMode::HScaled ? 1.95 / h_inv : tol; }
};

/// Velocity components plus pressure values: 2·#triangles + #vertices.
inline std::size_t dof_count(std::size_t triangles, std::size_t vertices) { return 2 * triangles + vertices; }

/// Number of multigrid levels from coarse_h_inv up to h_inv (1 when
/// h_inv <= coarse_h_inv). Throws unless h_inv = coarse_h_inv·2^k.
int multigrid_levels(int h_inv, int coarse_h_inv);

struct ResultRow {
  RunSpec spec;
  double alpha = 0.0;
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::size_t dofs = 0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double solve_seconds = 0.0;
  /// Mesh, assembly, factorizations and iterations.
  double total_seconds = 0.0;
  ErrorReport errors;
  double max_constraint_defect = 0.0;
  std::string error;  // non-empty when the run failed
};

struct RunOutput {
  ResultRow row;
  MeshLevel mesh;
  DiscreteState state;
  SolveReport report;
};

/// Runs one configuration; exceptions propagate.
RunOutput run_case(const RunSpec& spec);
/// Runs one configuration; failures are recorded in the row.
ResultRow run_row(const RunSpec& spec);

struct SweepConfig {
  std::string name = "sweep";
  std::vector<std::string> problems;
  std::vector<double> betas;
  std::vector<AlphaRule> alphas;
  std::vector<int> h_invs;
  std::vector<SolverKind> solvers;
  RunSpec base;  // shared solver settings
  std::filesystem::path output_dir = "results";
};

/// INI-style file: optional [sweep] section with `key = value` lines; list
/// values are comma separated.
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Cartesian product problem x β x α-rule x h x solver, in that nesting order.
std::vector<RunSpec> expand_sweep(const SweepConfig& cfg);
std::vector<ResultRow> run_sweep(const SweepConfig& cfg, std::ostream* progress = nullptr);

struct TableOptions {
  int max_h_inv = 128;
  /// Largest mesh on which the slow "s1" path is run.
  int max_s1_h_inv = 64;
  std::ostream* progress = nullptr;
};

struct TableResult {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<ResultRow> runs;
};

/// Reproduces one of the six benchmark tables (ids 1-6).
TableResult reproduce_table(int id, const TableOptions& options = {});

// Output ---------------------------------------------------------------

std::string csv_escape(std::string_view field);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// <name>.csv with every row, two-column plot-data files (N vs time, N vs
/// errors) per series, and <name>_metadata.json.
void emit_outputs(const std::vector<ResultRow>& rows, const std::filesystem::path& dir, const std::string& name);
void emit_table(const TableResult& table, const std::filesystem::path& dir);

/// Self-consistency checks on small meshes; prints one line per check.
bool run_property_checks(std::ostream& out);

}  // namespace dfmg
