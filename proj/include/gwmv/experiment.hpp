#pragma once

#include "gwmv/geometry.hpp"
#include "gwmv/gw.hpp"
#include "gwmv/ingest.hpp"
#include "gwmv/io.hpp"
#include "gwmv/multiview.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gwmv {

enum class Method { mean_gwmds, multi_gwmds, multi_isomap, mds };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

enum class DatasetSource { manifold, eld, relational };
const char* to_string(DatasetSource s);
DatasetSource dataset_source_from_string(const std::string& s);

struct DatasetSpec {
  DatasetSource source = DatasetSource::manifold;
  // manifold
  ManifoldKind kind = ManifoldKind::s_curve;
  Index n = 500;
  double noise = 0.0;
  // eld
  std::string eld_path;
  std::vector<std::string> dates = DailyViewSpec::quarterly_2014().dates;
  Normalization normalization = Normalization::none;
  FillPolicy fill = FillPolicy::none;
  // relational: precomputed distance CSVs, one per view
  std::vector<std::string> view_files;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ViewMetric metric = ViewMetric::geodesic;
  Index k = 10;
  bool bridge_components = false;
  Method method = Method::mean_gwmds;
  MdsConfig mds;
  GwConfig gw;
  std::vector<double> lambda;  // empty: uniform
  SelectionConfig selection;
  bool raw_shared = false;
  std::uint64_t seed = 0;  // drives data generation and both optimizers
  std::string out_dir = "out";

  /// Copies `seed` into the solver configs.
  void resolve_seeds();
  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
};

/// Relational views ready for embedding, plus what produced them.
struct PreparedViews {
  std::vector<RelationalMatrix> distances;
  std::vector<std::string> row_ids;
  std::optional<MultiViewDataset> data;  // absent for precomputed inputs
  Vector color;                          // first intrinsic coordinate, when known
  std::optional<ManifoldSample> manifold;
  Json manifest = Json::object();
};

PreparedViews prepare_views(const ExperimentConfig& cfg);

struct MethodOutput {
  Embedding embedding;                  // reported embedding, sample order
  std::vector<double> view_correlations;  // table value per view
  std::optional<MultiGwResult> multi;
};

/// Runs one method on prepared views. For Multi-GWMDS the reported
/// embedding is the selected aligned one, correlated against every view.
MethodOutput run_method(const PreparedViews& views, const ExperimentConfig& cfg);

struct ResultRecord {
  std::string method;
  std::vector<double> view_correlations;
  double mean_correlation = 0.0;
  std::optional<std::size_t> selected;
  std::vector<double> scores;
  double wall_time_s = 0.0;
  Json config;
  Json artifacts = Json::object();

  Json to_json() const;
};

double mean_of(const std::vector<double>& v);

void run_generate(const ExperimentConfig& cfg, bool write_views = true);
ResultRecord run_embed(const ExperimentConfig& cfg);
ResultRecord run_eval(const std::string& embedding_csv, const std::vector<std::string>& view_csvs);
/// One table row per view, layout "view v | value".
std::string format_eval(const ResultRecord& r);

struct ReproduceOptions {
  int table = 2;
  std::uint64_t seed = 0;  // seeds seed .. seed + n_seeds - 1
  int n_seeds = 5;
  Index n = 500;
  Index k = 10;
  int restarts = 3;
  std::vector<std::string> only;  // manifold names (tables 1-2)
  std::string eld_path;
  std::vector<std::string> eld_dates = DailyViewSpec::quarterly_2014().dates;
  std::string bands_path;
  std::string out_dir = "out";
  bool quiet = false;
};

struct CellResult {
  std::string dataset;
  std::string metric;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> view_correlations;
  double mean_correlation = 0.0;
  std::optional<std::size_t> selected;
  std::vector<double> scores;
};

struct BandCheck {
  std::string label;
  bool passed = false;
  std::string detail;
};

struct ReproduceReport {
  int table = 0;
  bool skipped = false;
  std::vector<CellResult> cells;
  std::vector<BandCheck> checks;
  std::string csv;
  std::string markdown;

  bool all_passed() const;
};

/// Runs the table grid, writes `<out>/table<k>.csv` and `<out>/table<k>.md`.
ReproduceReport run_reproduce(const ReproduceOptions& opts);

}  // namespace gwmv
