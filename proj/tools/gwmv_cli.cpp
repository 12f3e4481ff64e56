// gwmv: generate synthetic multi-view data, embed it, evaluate embeddings and
// rerun the benchmark tables.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include "gwmv/error.hpp"
#include "gwmv/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace gwmv;

struct DatasetFlags {
  std::string manifold;
  Index n = 0;
  double noise = 0.0;
  std::string metric;
  Index k = 0;
  bool bridge = false;
  std::string eld;
  std::vector<std::string> dates;
  std::string normalize;
  std::string fill;
  std::vector<std::string> views;
};

struct SolverFlags {
  std::string method;
  Index dim = 0;
  double lr = 0.0;
  int restarts = 0;
  int max_epochs = 0;
  std::string init;
  std::string ot_solver;
  double epsilon = 0.0;
  std::vector<double> lambda;
  std::string selection;
  std::string aggregate;
  bool raw_shared = false;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f, bool with_views) {
  cmd->add_option("--manifold", f.manifold, "s-curve|swiss-roll|mobius|torus");
  cmd->add_option("--n", f.n, "samples per manifold")->check(CLI::PositiveNumber);
  cmd->add_option("--noise", f.noise, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  cmd->add_option("--metric", f.metric, "euclidean|geodesic");
  cmd->add_option("--k", f.k, "neighbors in the kNN graph")->check(CLI::PositiveNumber);
  cmd->add_flag("--bridge-components", f.bridge, "join disconnected kNN graphs with shortest edges");
  cmd->add_option("--eld", f.eld, "electricity load file (semicolon separated, comma decimals)");
  cmd->add_option("--dates", f.dates, "one view per date, YYYY-MM-DD")->delimiter(',');
  cmd->add_option("--normalize", f.normalize, "none|zscore|max (per client)");
  cmd->add_option("--fill", f.fill, "none|zero|previous for missing load values");
  if (with_views) cmd->add_option("--views", f.views, "precomputed distance CSVs, one per view")->delimiter(',');
}

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--method", f.method, "mean-gwmds|multi-gwmds|multi-isomap|mds");
  cmd->add_option("--dim", f.dim, "embedding dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "step size on the preconditioned gradient")->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", f.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--max-epochs", f.max_epochs, "epoch budget")->check(CLI::PositiveNumber);
  cmd->add_option("--init", f.init, "cmds|gaussian");
  cmd->add_option("--ot-solver", f.ot_solver, "exact|entropic");
  cmd->add_option("--epsilon", f.epsilon, "entropic regularization (0: 5e-3 * median cost)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda", f.lambda, "view weights w1,w2,...")->delimiter(',');
  cmd->add_option("--selection", f.selection, "max-corr|min-rho");
  cmd->add_option("--aggregate", f.aggregate, "mean|median|maxmin");
  cmd->add_flag("--raw-shared", f.raw_shared, "also write the shared embedding before alignment (debug)");
}

bool given(const CLI::App* cmd, const char* name) { return cmd->count(name) > 0; }

void apply_dataset(const CLI::App* cmd, const DatasetFlags& f, ExperimentConfig& c) {
  if (given(cmd, "--manifold")) {
    c.dataset.source = DatasetSource::manifold;
    c.dataset.kind = manifold_kind_from_string(f.manifold);
  }
  if (given(cmd, "--n")) c.dataset.n = f.n;
  if (given(cmd, "--noise")) c.dataset.noise = f.noise;
  if (given(cmd, "--metric")) c.metric = view_metric_from_string(f.metric);
  if (given(cmd, "--k")) c.k = f.k;
  if (given(cmd, "--bridge-components")) c.bridge_components = f.bridge;
  if (given(cmd, "--eld")) {
    c.dataset.source = DatasetSource::eld;
    c.dataset.eld_path = f.eld;
  }
  if (given(cmd, "--dates")) c.dataset.dates = f.dates;
  if (given(cmd, "--normalize")) c.dataset.normalization = normalization_from_string(f.normalize);
  if (given(cmd, "--fill")) c.dataset.fill = fill_policy_from_string(f.fill);
  if (cmd->get_option_no_throw("--views") && given(cmd, "--views")) {
    c.dataset.source = DatasetSource::relational;
    c.dataset.view_files = f.views;
  }
}

void apply_solver(const CLI::App* cmd, const SolverFlags& f, ExperimentConfig& c) {
  if (given(cmd, "--method")) c.method = method_from_string(f.method);
  if (given(cmd, "--dim")) c.mds.dim = f.dim;
  if (given(cmd, "--lr")) c.mds.learning_rate = f.lr;
  if (given(cmd, "--restarts")) c.gw.n_restarts = f.restarts;
  if (given(cmd, "--max-epochs")) c.mds.max_epochs = f.max_epochs;
  if (given(cmd, "--init")) {
    c.mds.init = mds_init_from_string(f.init);
    if (c.mds.init == MdsInit::provided) throw InvalidInput("--init accepts cmds or gaussian");
  }
  if (given(cmd, "--ot-solver")) c.gw.inner_ot = ot_solver_from_string(f.ot_solver);
  if (given(cmd, "--epsilon")) c.gw.epsilon = f.epsilon;
  if (given(cmd, "--lambda")) c.lambda = f.lambda;
  if (given(cmd, "--selection")) c.selection.selection = selection_from_string(f.selection);
  if (given(cmd, "--aggregate")) c.selection.aggregate = aggregate_from_string(f.aggregate);
  if (given(cmd, "--raw-shared")) c.raw_shared = f.raw_shared;
}

int table_number(const std::string& s) {
  if (s == "table1" || s == "1") return 1;
  if (s == "table2" || s == "2") return 2;
  if (s == "table3" || s == "3") return 3;
  throw InvalidInput("unknown table '" + s + "' (expected table1|table2|table3)");
}

std::string default_bands() {
#ifdef GWMV_DEFAULT_BANDS
  if (std::filesystem::exists(GWMV_DEFAULT_BANDS)) return GWMV_DEFAULT_BANDS;
#endif
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view dimensionality reduction with Gromov-Wasserstein MDS"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string config_path;
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON experiment config; flags override it");

  DatasetFlags gen_data;
  auto* gen = app.add_subcommand("generate", "write a manifold or ELD dataset with its views and distance matrices");
  add_dataset_flags(gen, gen_data, false);
  bool no_views = false;
  gen->add_flag("--no-views", no_views, "skip per-view feature CSVs");

  DatasetFlags emb_data;
  SolverFlags emb_solver;
  auto* emb = app.add_subcommand("embed", "embed a multi-view dataset");
  add_dataset_flags(emb, emb_data, true);
  add_solver_flags(emb, emb_solver);

  std::string eval_embedding;
  std::vector<std::string> eval_views;
  auto* ev = app.add_subcommand("eval", "correlate an embedding with per-view distance matrices");
  ev->add_option("--embedding", eval_embedding, "embedding CSV (id,y1..yq)")->required();
  ev->add_option("--views", eval_views, "distance CSVs, in view order")->required()->delimiter(',');
  bool eval_write = false;
  ev->add_flag("--write", eval_write, "also write <out>/eval.json");

  std::string table;
  ReproduceOptions rep;
  std::string only;
  bool strict = false;
  auto* rp = app.add_subcommand("reproduce", "rerun a benchmark table over several seeds");
  rp->add_option("table", table, "table1|table2|table3")->required();
  rp->add_option("--only", only, "comma-separated manifolds to keep");
  rp->add_option("--seeds", rep.n_seeds, "number of seeds")->check(CLI::PositiveNumber);
  rp->add_option("--n", rep.n, "samples per manifold")->check(CLI::PositiveNumber);
  rp->add_option("--k", rep.k, "neighbors in the kNN graph")->check(CLI::PositiveNumber);
  rp->add_option("--restarts", rep.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
  rp->add_option("--eld", rep.eld_path, "electricity load file for table 3");
  rp->add_option("--dates", rep.eld_dates, "ELD view dates")->delimiter(',');
  rp->add_option("--bands", rep.bands_path, "acceptance bands JSON");
  rp->add_flag("--strict", strict, "exit 1 when a band check fails");
  rp->add_flag("--quiet", rep.quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_json(read_json(config_path));
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--out") || config_path.empty()) cfg.out_dir = out_dir;

    if (gen->parsed()) {
      apply_dataset(gen, gen_data, cfg);
      cfg.resolve_seeds();
      run_generate(cfg, !no_views);
      std::printf("wrote %s\n", cfg.out_dir.c_str());
    } else if (emb->parsed()) {
      apply_dataset(emb, emb_data, cfg);
      apply_solver(emb, emb_solver, cfg);
      cfg.resolve_seeds();
      const auto rec = run_embed(cfg);
      std::printf("%s", format_eval(rec).c_str());
      if (rec.selected) std::printf("selected view %zu\n", *rec.selected + 1);
      std::printf("wrote %s\n", cfg.out_dir.c_str());
    } else if (ev->parsed()) {
      const auto rec = run_eval(eval_embedding, eval_views);
      std::printf("%s", format_eval(rec).c_str());
      if (eval_write) write_json((std::filesystem::path(cfg.out_dir) / "eval.json").string(), rec.to_json());
    } else if (rp->parsed()) {
      rep.table = table_number(table);
      rep.seed = cfg.seed;
      rep.out_dir = cfg.out_dir;
      if (rep.bands_path.empty()) rep.bands_path = default_bands();
      if (!only.empty()) {
        std::string cur;
        for (char ch : only + ",") {
          if (ch == ',') {
            if (!cur.empty()) rep.only.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(ch);
          }
        }
      }
      const auto report = run_reproduce(rep);
      if (report.skipped) {
        std::printf("table%d SKIPPED (no ELD file)\n", rep.table);
        return 0;
      }
      for (const auto& c : report.checks)
        std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.label.c_str(), c.detail.c_str());
      std::printf("wrote %s/table%d.csv and table%d.md\n", rep.out_dir.c_str(), rep.table, rep.table);
      if (strict && !report.all_passed()) return 1;
    }
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 1;
  }
  return 0;
}
