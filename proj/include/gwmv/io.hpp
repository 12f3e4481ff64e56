#pragma once

#include "gwmv/ot.hpp"
#include "gwmv/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gwmv {

using Json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double; always 17 significant
/// digits or fewer, never locale dependent.
std::string format_real(double v);

// Dense relational matrix: n lines of n comma-separated values, no header.
void write_relational_csv(const std::string& path, const RelationalMatrix& d);
RelationalMatrix read_relational_csv(const std::string& path, MetricTag tag = MetricTag::precomputed);

Json to_json(const RelationalMatrix& d);
RelationalMatrix relational_from_json(const Json& j);

Json to_json(const Coupling& c);
Coupling coupling_from_json(const Json& j);

/// Header `id,<names...>` followed by one row per sample.
void write_table_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& ids,
                     const std::vector<std::string>& column_names);

struct Table {
  std::vector<std::string> columns;  // excluding the id column
  std::vector<std::string> ids;
  Matrix values;
};
Table read_table_csv(const std::string& path);

/// Embedding CSV with header `id,y1..yq`.
void write_embedding_csv(const std::string& path, const Embedding& e);
Embedding read_embedding_csv(const std::string& path);
/// Sidecar metadata; `config` is embedded verbatim.
Json embedding_sidecar(const Embedding& e, const Json& config);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace gwmv
