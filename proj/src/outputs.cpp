#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <json.hpp>

#include "dfmg/harness.hpp"

namespace dfmg {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  return out;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string series_label(const RunSpec& spec) {
  std::string alpha = spec.alpha.label();
  std::replace(alpha.begin(), alpha.end(), '.', 'p');
  return spec.problem + "_beta" + number(spec.beta) + "_alpha" + alpha + "_" + std::string(to_string(spec.solver)) +
         "_" + std::string(to_string(spec.linear_solver));
}

void write_series(const std::filesystem::path& path, const std::vector<const ResultRow*>& rows,
                  double (*value)(const ResultRow&)) {
  std::ofstream out = open_for_writing(path);
  out << "# N value\n";
  for (const ResultRow* row : rows) out << row->dofs << ' ' << value(*row) << '\n';
}

}  // namespace

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_for_writing(path);
  const auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out << ',';
      out << csv_escape(fields[i]);
    }
    out << "\r\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void emit_outputs(const std::vector<ResultRow>& rows, const std::filesystem::path& dir, const std::string& name) {
  ensure_directory(dir);

  const std::vector<std::string> header{"problem", "beta", "alpha", "h", "solver", "linear_solver", "vertices",
                                        "triangles", "dofs", "iterations", "residual", "converged", "solve_s",
                                        "total_s", "err_u_l2", "err_p_h1", "err_p_w1_32", "max_constraint_defect",
                                        "error"};
  std::vector<std::vector<std::string>> table;
  for (const ResultRow& r : rows) {
    table.push_back({r.spec.problem, number(r.spec.beta), number(r.alpha), "1/" + std::to_string(r.spec.h_inv),
                     std::string(to_string(r.spec.solver)), std::string(to_string(r.spec.linear_solver)),
                     std::to_string(r.vertices), std::to_string(r.triangles), std::to_string(r.dofs),
                     std::to_string(r.iterations), number(r.residual), r.converged ? "true" : "false",
                     number(r.solve_seconds), number(r.total_seconds), number(r.errors.err_u_l2),
                     number(r.errors.err_p_h1), number(r.errors.err_p_w1_32), number(r.max_constraint_defect),
                     r.error});
  }
  write_csv(dir / (name + ".csv"), header, table);

  std::map<std::string, std::vector<const ResultRow*>> series;
  for (const ResultRow& r : rows) {
    if (r.error.empty()) series[series_label(r.spec)].push_back(&r);
  }
  nlohmann::json files = nlohmann::json::array();
  for (auto& [label, members] : series) {
    std::stable_sort(members.begin(), members.end(),
                     [](const ResultRow* a, const ResultRow* b) { return a->dofs < b->dofs; });
    const std::string stem = name + "_" + label;
    write_series(dir / (stem + "_time.dat"), members, [](const ResultRow& r) { return r.total_seconds; });
    write_series(dir / (stem + "_err_u.dat"), members, [](const ResultRow& r) { return r.errors.err_u_l2; });
    write_series(dir / (stem + "_err_p.dat"), members, [](const ResultRow& r) { return r.errors.err_p_h1; });
    files.push_back(stem + "_{time,err_u,err_p}.dat");
  }

  nlohmann::json meta;
  meta["name"] = name;
  meta["rows"] = rows.size();
  meta["failed_rows"] = std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.error.empty(); });
  meta["conventions"] = {
      {"dofs", "2 * triangles + vertices (P0 velocity components plus P1 pressure values)"},
      {"h", "1/h_inv on (-1,1)^2, i.e. 2*h_inv uniform cells per side"},
      {"residual", "||s_u - A(u) - Bp|| / ||s_u|| + ||s_p - B^T u|| / ||s_p||"},
      {"plot_data", "two columns: dofs and value, sorted by dofs"},
  };
  if (!rows.empty()) {
    meta["tol"] = rows.front().spec.effective_tol();
    meta["tol_mode"] = rows.front().spec.tol_mode == TolMode::Fixed ? "fixed" : "h-scaled";
  }
  meta["plot_files"] = files;
  meta["seeds"] = nlohmann::json::array();
  meta["versions"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
      {"cplusplus", __cplusplus},
  };
  std::ofstream out = open_for_writing(dir / (name + "_metadata.json"));
  out << meta.dump(2) << '\n';
}

void emit_table(const TableResult& table, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_csv(dir / (table.name + ".csv"), table.header, table.rows);
  emit_outputs(table.runs, dir, table.name + "_runs");
}

}  // namespace dfmg
