#include "gwmv/io.hpp"

#include "gwmv/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gwmv {

std::string format_real(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

namespace {

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_real(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  while (b < e && *b == ' ') ++b;
  if (b < e && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ParseError(fmt::format("not a number: '{}'", tok), static_cast<long>(line_no));
  return v;
}

Matrix json_matrix(const Json& rows, Index n, Index m, const char* what) {
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n)
    throw InvalidInput(fmt::format("{}: expected {} rows", what, n));
  Matrix out(n, m);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != m)
      throw InvalidInput(fmt::format("{}: row {} must have {} entries", what, i, m));
    for (Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector json_vector(const Json& j, Index n, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw InvalidInput(fmt::format("{}: expected {} entries", what, n));
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

void write_relational_csv(const std::string& path, const RelationalMatrix& d) {
  auto out = open_out(path);
  const Matrix& v = d.values();
  std::string line;
  for (Index i = 0; i < v.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < v.cols(); ++j) {
      if (j) line.push_back(',');
      line += format_real(v(i, j));
    }
    line.push_back('\n');
    out << line;
  }
}

RelationalMatrix read_relational_csv(const std::string& path, MetricTag tag) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const auto& tok : split_csv(line)) row.push_back(parse_real(tok, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(fmt::format("expected {} columns, found {}", rows.front().size(), row.size()),
                       static_cast<long>(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty relational matrix file " + path);
  const auto n = static_cast<Index>(rows.size());
  Matrix m(n, static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return RelationalMatrix(std::move(m), tag);
}

Json to_json(const RelationalMatrix& d) {
  Json j;
  j["n"] = d.size();
  j["metric_tag"] = to_string(d.tag());
  j["values"] = matrix_json(d.values());
  return j;
}

RelationalMatrix relational_from_json(const Json& j) {
  const Index n = j.at("n").get<Index>();
  return RelationalMatrix(json_matrix(j.at("values"), n, n, "relational matrix"),
                          metric_tag_from_string(j.at("metric_tag").get<std::string>()));
}

Json to_json(const Coupling& c) {
  Json j;
  j["n"] = c.plan.rows();
  j["m"] = c.plan.cols();
  j["a"] = std::vector<double>(c.a.data(), c.a.data() + c.a.size());
  j["b"] = std::vector<double>(c.b.data(), c.b.data() + c.b.size());
  j["plan"] = matrix_json(c.plan);
  return j;
}

Coupling coupling_from_json(const Json& j) {
  const Index n = j.at("n").get<Index>();
  const Index m = j.at("m").get<Index>();
  return Coupling{json_matrix(j.at("plan"), n, m, "coupling"), json_vector(j.at("a"), n, "coupling a"),
                  json_vector(j.at("b"), m, "coupling b")};
}

void write_table_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& ids,
                     const std::vector<std::string>& column_names) {
  if (static_cast<Index>(ids.size()) != values.rows() || static_cast<Index>(column_names.size()) != values.cols())
    throw InvalidInput("table shape does not match its labels");
  auto out = open_out(path);
  std::string line = "id";
  for (const auto& c : column_names) line += "," + c;
  out << line << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    line = ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < values.cols(); ++j) line += "," + format_real(values(i, j));
    out << line << '\n';
  }
}

Table read_table_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty table file " + path);
  auto header = split_csv(line);
  if (header.size() < 2 || header.front() != "id") throw ParseError("table header must start with 'id'", 1);
  Table t;
  t.columns.assign(header.begin() + 1, header.end());
  std::vector<double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError(fmt::format("expected {} fields, found {}", header.size(), fields.size()),
                       static_cast<long>(line_no));
    t.ids.push_back(fields.front());
    for (std::size_t k = 1; k < fields.size(); ++k) cells.push_back(parse_real(fields[k], line_no));
  }
  const auto n = static_cast<Index>(t.ids.size());
  const auto m = static_cast<Index>(t.columns.size());
  t.values.resize(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) t.values(i, j) = cells[static_cast<std::size_t>(i * m + j)];
  return t;
}

void write_embedding_csv(const std::string& path, const Embedding& e) {
  std::vector<std::string> cols;
  for (Index j = 0; j < e.dim(); ++j) cols.push_back(fmt::format("y{}", j + 1));
  const auto ids = e.row_ids.empty() ? default_row_ids(e.rows()) : e.row_ids;
  write_table_csv(path, e.coords, ids, cols);
}

Embedding read_embedding_csv(const std::string& path) {
  auto t = read_table_csv(path);
  Embedding e;
  e.coords = std::move(t.values);
  e.row_ids = std::move(t.ids);
  return e;
}

Json embedding_sidecar(const Embedding& e, const Json& config) {
  Json j;
  j["method"] = e.method;
  j["seed"] = e.seed;
  if (e.source_view) j["source_view"] = *e.source_view;
  j["gw_sq"] = e.gw_sq;
  j["iterations"] = e.iterations;
  j["converged"] = e.converged;
  j["n"] = e.rows();
  j["dim"] = e.dim();
  if (!e.view_correlations.empty()) j["view_correlations"] = e.view_correlations;
  if (!e.objective_trace.empty()) j["objective_trace"] = e.objective_trace;
  if (!e.notes.empty()) j["notes"] = e.notes;
  j["config"] = config;
  return j;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace gwmv
