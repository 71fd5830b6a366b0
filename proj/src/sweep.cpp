#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dfmg/harness.hpp"
#include "dfmg/multigrid.hpp"
#include "dfmg/problems.hpp"

namespace dfmg {

std::string_view to_string(SolverKind kind) { return kind == SolverKind::PR ? "pr" : "mg"; }

SolverKind parse_solver(std::string_view name) {
  if (name == "pr") return SolverKind::PR;
  if (name == "mg") return SolverKind::MG;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected pr or mg)");
}

TolMode parse_tol_mode(std::string_view name) {
  if (name == "fixed") return TolMode::Fixed;
  if (name == "h-scaled" || name == "h_scaled") return TolMode::HScaled;
  throw std::invalid_argument("unknown tol mode '" + std::string(name) + "'");
}

std::string AlphaRule::label() const {
  if (!value) return "auto";
  std::ostringstream os;
  os << *value;
  return os.str();
}

AlphaRule AlphaRule::parse(std::string_view text) {
  std::string s = boost::algorithm::trim_copy(std::string(text));
  if (s == "auto") return {};
  double value = 0.0;
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      value = std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } else {
      value = std::stod(s);
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid alpha '" + s + "'");
  }
  if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("alpha must be positive: '" + s + "'");
  return AlphaRule{value};
}

int multigrid_levels(int h_inv, int coarse_h_inv) {
  if (h_inv < 1 || coarse_h_inv < 1) throw std::invalid_argument("h_inv values must be positive");
  if (h_inv <= coarse_h_inv) return 1;
  int levels = 1;
  int n = coarse_h_inv;
  while (n < h_inv) {
    n *= 2;
    ++levels;
  }
  if (n != h_inv) {
    throw std::invalid_argument("h_inv=" + std::to_string(h_inv) + " is not coarse_h_inv=" +
                                std::to_string(coarse_h_inv) + " times a power of two");
  }
  return levels;
}

RunOutput run_case(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const ManufacturedProblem problem = make_problem(spec.problem, spec.beta);
  const PhysicalParams params = problem.params();
  const double alpha = spec.alpha.resolve(spec.beta);

  RunOutput out;
  out.row.spec = spec;
  out.row.alpha = alpha;

  if (spec.solver == SolverKind::PR) {
    out.mesh = build_uniform_square_mesh(ManufacturedProblem::domain(), 2 * spec.h_inv);
    const AssembledOperators ops = assemble_operators(out.mesh, params, alpha);
    const auto solver = make_saddle_solver(spec.linear_solver, ops, ops.a_alpha_blocks);
    const PRConfig cfg{alpha, spec.max_iters, spec.effective_tol(), SweepOrder::NonlinearFirst};
    std::tie(out.state, out.report) = pr_solve(ops, *solver, cfg);
  } else {
    const int levels = multigrid_levels(spec.h_inv, spec.coarse_h_inv);
    const int base = 2 * std::min(spec.h_inv, spec.coarse_h_inv);
    MGConfig cfg;
    cfg.smooth_steps = spec.smooth_steps;
    cfg.outer_tol = spec.effective_tol();
    cfg.coarse_tol = cfg.outer_tol / 10.0;
    cfg.coarse_max_iters = spec.max_iters;
    cfg.max_cycles = spec.max_cycles;
    cfg.projection_picard_steps = spec.projection_picard_steps;
    cfg.linear_solver = spec.linear_solver;
    const Multigrid mg(MeshHierarchy(ManufacturedProblem::domain(), base, levels), params, alpha, cfg);
    std::tie(out.state, out.report) = mg.solve();
    out.mesh = mg.hierarchy().finest();
  }
  out.row.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out.row.vertices = out.mesh.num_vertices();
  out.row.triangles = out.mesh.num_triangles();
  out.row.dofs = dof_count(out.row.triangles, out.row.vertices);
  out.row.iterations = out.report.iterations;
  out.row.residual = out.report.final_residual.total();
  out.row.converged = out.report.converged;
  out.row.solve_seconds = out.report.wall_seconds;
  out.row.max_constraint_defect = out.report.max_constraint_defect;
  out.row.errors = compute_errors(out.state, problem, out.mesh);
  return out;
}

ResultRow run_row(const RunSpec& spec) {
  try {
    return run_case(spec).row;
  } catch (const std::exception& e) {
    ResultRow row;
    row.spec = spec;
    row.error = e.what();
    return row;
  }
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  const std::string trimmed = boost::algorithm::trim_copy(value);
  if (trimmed.empty()) return items;
  boost::algorithm::split(items, trimmed, boost::algorithm::is_any_of(","));
  for (auto& item : items) boost::algorithm::trim(item);
  std::erase_if(items, [](const std::string& s) { return s.empty(); });
  return items;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse(item));
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + s + "'");
  }
}

int parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + s + "'");
  }
}

}  // namespace

SweepConfig parse_sweep_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  const auto section = tree.get_child_optional("sweep");
  const boost::property_tree::ptree& keys = section ? *section : tree;

  SweepConfig cfg;
  cfg.problems = {"problem1"};
  cfg.betas = {30.0};
  cfg.alphas = {AlphaRule{}};
  cfg.solvers = {SolverKind::MG};
  for (const auto& [key, node] : keys) {
    if (!node.empty()) continue;  // a section other than [sweep]
    const std::string value = boost::algorithm::trim_copy(node.data());
    const auto number = [&key](const std::string& s) { return parse_double(key, s); };
    if (key == "name") {
      cfg.name = value;
    } else if (key == "problems" || key == "problem") {
      cfg.problems = split_list(value);
      for (const auto& p : cfg.problems) (void)make_problem(p, 0.0);
    } else if (key == "beta" || key == "betas") {
      cfg.betas = parse_list<double>(value, number);
    } else if (key == "alpha" || key == "alphas") {
      cfg.alphas = parse_list<AlphaRule>(value, [](const std::string& s) { return AlphaRule::parse(s); });
    } else if (key == "h_inv") {
      cfg.h_invs = parse_list<int>(value, [&key](const std::string& s) { return parse_int(key, s); });
    } else if (key == "solvers" || key == "solver") {
      cfg.solvers = parse_list<SolverKind>(value, [](const std::string& s) { return parse_solver(s); });
    } else if (key == "linear_solver") {
      cfg.base.linear_solver = parse_linear_solver(value);
    } else if (key == "tol") {
      cfg.base.tol = number(value);
    } else if (key == "tol_mode") {
      cfg.base.tol_mode = parse_tol_mode(value);
    } else if (key == "smooth_steps") {
      cfg.base.smooth_steps = parse_int(key, value);
    } else if (key == "coarse_h_inv") {
      cfg.base.coarse_h_inv = parse_int(key, value);
    } else if (key == "max_iters") {
      cfg.base.max_iters = parse_int(key, value);
    } else if (key == "max_cycles") {
      cfg.base.max_cycles = parse_int(key, value);
    } else if (key == "projection_picard_steps") {
      cfg.base.projection_picard_steps = parse_int(key, value);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_sweep_config(in);
}

std::vector<RunSpec> expand_sweep(const SweepConfig& cfg) {
  std::vector<RunSpec> specs;
  for (const auto& problem : cfg.problems) {
    for (const double beta : cfg.betas) {
      for (const auto& alpha : cfg.alphas) {
        for (const int h_inv : cfg.h_invs) {
          for (const SolverKind solver : cfg.solvers) {
            RunSpec spec = cfg.base;
            spec.problem = problem;
            spec.beta = beta;
            spec.alpha = alpha;
            spec.h_inv = h_inv;
            spec.solver = solver;
            specs.push_back(spec);
          }
        }
      }
    }
  }
  return specs;
}

namespace {

void report_progress(std::ostream* progress, const ResultRow& row) {
  if (!progress) return;
  *progress << row.spec.problem << " beta=" << row.spec.beta << " alpha=" << row.alpha << " h=1/" << row.spec.h_inv
            << ' ' << to_string(row.spec.solver) << '/' << to_string(row.spec.linear_solver);
  if (!row.error.empty()) {
    *progress << "  FAILED: " << row.error << '\n';
  } else {
    *progress << "  iters=" << row.iterations << " r=" << row.residual << " time=" << row.total_seconds << "s\n";
  }
}

}  // namespace

std::vector<ResultRow> run_sweep(const SweepConfig& cfg, std::ostream* progress) {
  std::vector<ResultRow> rows;
  for (const RunSpec& spec : expand_sweep(cfg)) {
    rows.push_back(run_row(spec));
    report_progress(progress, rows.back());
  }
  return rows;
}

// Tables -------------------------------------------------------------------

namespace {

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string h_label(int h_inv) { return "1/" + std::to_string(h_inv); }

std::string iterations_cell(const ResultRow& row) {
  if (!row.error.empty()) return "error";
  return std::to_string(row.iterations) + (row.converged ? "" : "*");
}

ResultRow run_logged(const RunSpec& spec, const TableOptions& options) {
  ResultRow row = run_row(spec);
  report_progress(options.progress, row);
  return row;
}

TableResult alpha_table(int id, const std::vector<double>& betas, const TableOptions& options) {
  TableResult table;
  table.name = "table" + std::to_string(id);
  table.header = {"problem", "beta", "alpha", "iter", "CPU_s"};
  for (const std::string problem : {"problem1", "problem2"}) {
    for (const double beta : betas) {
      for (const AlphaRule alpha : {AlphaRule{1.0}, AlphaRule{}}) {
        RunSpec spec;
        spec.problem = problem;
        spec.beta = beta;
        spec.alpha = alpha;
        spec.h_inv = 64;
        spec.solver = SolverKind::PR;
        const ResultRow row = run_logged(spec, options);
        table.rows.push_back({problem, fmt(beta), alpha.value ? "1" : "1/" + fmt(beta), iterations_cell(row),
                              fmt(row.total_seconds, 3)});
        table.runs.push_back(row);
      }
    }
  }
  return table;
}

TableResult solver_table(int id, const std::string& problem, const TableOptions& options) {
  TableResult table;
  table.name = "table" + std::to_string(id);
  table.header = {"h", "DoFs", "I_pr", "I_mg", "CPU_s1", "CPU_s2", "CPU_mg"};
  for (int h_inv = 16; h_inv <= options.max_h_inv; h_inv *= 2) {
    RunSpec spec;
    spec.problem = problem;
    spec.beta = 30.0;
    spec.h_inv = h_inv;

    spec.solver = SolverKind::PR;
    spec.linear_solver = LinearSolverKind::Schur;
    const ResultRow pr = run_logged(spec, options);
    std::string cpu_s1;
    if (h_inv <= options.max_s1_h_inv) {
      spec.linear_solver = LinearSolverKind::Direct;
      const ResultRow s1 = run_logged(spec, options);
      cpu_s1 = s1.error.empty() ? fmt(s1.total_seconds, 3) : "error";
      table.runs.push_back(s1);
    }
    spec.solver = SolverKind::MG;
    spec.linear_solver = LinearSolverKind::Schur;
    const ResultRow mg = run_logged(spec, options);

    table.rows.push_back({h_label(h_inv), std::to_string(mg.dofs), iterations_cell(pr), iterations_cell(mg), cpu_s1,
                          fmt(pr.total_seconds, 3), fmt(mg.total_seconds, 3)});
    table.runs.push_back(pr);
    table.runs.push_back(mg);
  }
  return table;
}

TableResult robustness_table(int id, const std::string& problem, const TableOptions& options) {
  TableResult table;
  table.name = "table" + std::to_string(id);
  const std::vector<double> betas{10.0, 20.0, 30.0, 40.0, 50.0};
  table.header = {"h"};
  for (const double beta : betas) table.header.push_back("beta_" + fmt(beta));
  for (int h_inv = 32; h_inv <= options.max_h_inv; h_inv *= 2) {
    std::vector<std::string> line{h_label(h_inv)};
    for (const double beta : betas) {
      RunSpec spec;
      spec.problem = problem;
      spec.beta = beta;
      spec.h_inv = h_inv;
      spec.solver = SolverKind::MG;
      const ResultRow row = run_logged(spec, options);
      line.push_back(iterations_cell(row));
      table.runs.push_back(row);
    }
    table.rows.push_back(std::move(line));
  }
  return table;
}

}  // namespace

TableResult reproduce_table(int id, const TableOptions& options) {
  switch (id) {
    case 1:
      return alpha_table(1, {10.0, 20.0, 30.0}, options);
    case 2:
      return alpha_table(2, {40.0, 50.0, 60.0}, options);
    case 3:
      return solver_table(3, "problem1", options);
    case 4:
      return robustness_table(4, "problem1", options);
    case 5:
      return solver_table(5, "problem2", options);
    case 6:
      return robustness_table(6, "problem2", options);
    default:
      throw std::invalid_argument("table id must be 1..6");
  }
}

}  // namespace dfmg
