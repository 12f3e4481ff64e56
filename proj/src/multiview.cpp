#include "gwmv/multiview.hpp"

#include "gwmv/error.hpp"
#include "gwmv/relational.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwmv {

ViewWeights ViewWeights::uniform(std::size_t views) {
  if (views == 0) throw InvalidInput("view weights need at least one view");
  return ViewWeights(std::vector<double>(views, 1.0 / static_cast<double>(views)));
}

ViewWeights ViewWeights::normalized(std::vector<double> raw) {
  if (raw.empty()) throw InvalidInput("view weights need at least one view");
  double total = 0.0;
  for (double w : raw) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("view weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw InvalidInput("view weights must not all be zero");
  for (double& w : raw) w /= total;
  return ViewWeights(std::move(raw));
}

const char* to_string(Selection s) { return s == Selection::min_rho ? "min-rho" : "max-corr"; }

const char* to_string(Aggregate a) {
  switch (a) {
    case Aggregate::mean: return "mean";
    case Aggregate::median: return "median";
    case Aggregate::maxmin: return "maxmin";
  }
  return "mean";
}

Selection selection_from_string(const std::string& s) {
  if (s == "max-corr" || s == "max_corr") return Selection::max_corr;
  if (s == "min-rho" || s == "min_rho") return Selection::min_rho;
  throw InvalidInput("unknown selection '" + s + "' (expected max-corr|min-rho)");
}

Aggregate aggregate_from_string(const std::string& s) {
  if (s == "mean") return Aggregate::mean;
  if (s == "median") return Aggregate::median;
  if (s == "maxmin" || s == "max-min") return Aggregate::maxmin;
  throw InvalidInput("unknown aggregate '" + s + "' (expected mean|median|maxmin)");
}

Matrix barycentric_align(const Matrix& y, const Matrix& plan) {
  if (plan.rows() != y.rows())
    throw InvalidInput(fmt::format("plan has {} rows but the embedding has {} points", plan.rows(), y.rows()));
  const Index samples = plan.cols();
  Matrix out(samples, y.cols());
  for (Index k = 0; k < samples; ++k) {
    const double mass = plan.col(k).sum();
    if (!(mass > 0.0)) throw NumericalError(fmt::format("degenerate coupling: sample {} receives no mass", k));
    out.row(k) = (plan.col(k).transpose() * y) / mass;
  }
  return out;
}

Embedding barycentric_align(const Embedding& y, const Coupling& plan_embedding_by_sample) {
  Embedding out = y;
  out.coords = barycentric_align(y.coords, plan_embedding_by_sample.plan);
  out.row_ids = default_row_ids(out.coords.rows());
  return out;
}

std::vector<double> view_correlations(std::span<const RelationalMatrix> views, const Matrix& coords) {
  const Matrix dy = pairwise_euclidean(coords).values();
  std::vector<double> out;
  out.reserve(views.size());
  for (const auto& d : views) out.push_back(distance_correlation(d.values(), dy));
  return out;
}

Embedding mean_gwmds(std::span<const RelationalMatrix> views, const MdsConfig& mds, const GwConfig& gw) {
  const auto mean = mean_relational(views);
  auto out = gwmds_embed(mean, mds, gw);
  out.method = "mean-gwmds";
  out.view_correlations = view_correlations(views, out.coords);
  return out;
}

Embedding mean_gwmds(const MultiViewDataset& data, const MdsConfig& mds, const GwConfig& gw,
                     const GeodesicOptions& geo) {
  const auto views = view_distances(data, geo);
  auto out = mean_gwmds(views, mds, gw);
  out.row_ids = data.row_ids();
  return out;
}

JointEmbedding multi_gwmds_optimize(std::span<const RelationalMatrix> views, const ViewWeights& weights,
                                    const MdsConfig& mds, const GwConfig& gw) {
  if (views.empty()) throw InvalidInput("Multi-GWMDS needs at least one view");
  if (weights.size() != views.size())
    throw InvalidInput(fmt::format("{} view weights for {} views", weights.size(), views.size()));
  const Index n = views.front().size();
  for (std::size_t v = 0; v < views.size(); ++v)
    if (views[v].size() != n)
      throw InvalidInput(fmt::format("view {} has {} samples, expected {}", v, views[v].size(), n));

  JointEmbedding out;
  out.shared.method = "multi-gwmds-shared";
  out.shared.row_ids = default_row_ids(n);
  const auto reference = mean_relational(views);
  if (reference.values().cwiseAbs().maxCoeff() == 0.0) {
    out.shared.coords = Matrix::Zero(n, mds.dim);
    out.shared.objective_trace = {0.0};
    out.shared.notes.push_back("all-zero relational matrices: returned the zero embedding");
    out.couplings.assign(views.size(), Coupling::identity(n));
    return out;
  }
  const auto joint = optimize_joint(views, weights.values(), reference, mds, gw);
  out.shared.coords = joint.y;
  out.shared.gw_sq = joint.objective;
  out.shared.iterations = joint.epochs;
  out.shared.converged = joint.converged;
  out.shared.objective_trace = joint.trace;
  out.shared.seed = joint.seed;
  out.couplings = joint.plans;
  return out;
}

namespace {

double aggregate_scores(std::vector<double> vals, Aggregate agg) {
  switch (agg) {
    case Aggregate::mean: {
      double s = 0.0;
      for (double x : vals) s += x;
      return s / static_cast<double>(vals.size());
    }
    case Aggregate::median: {
      std::sort(vals.begin(), vals.end());
      const std::size_t h = vals.size() / 2;
      return vals.size() % 2 == 1 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
    }
    case Aggregate::maxmin: return *std::min_element(vals.begin(), vals.end());
  }
  return 0.0;
}

}  // namespace

std::size_t pick_representative(std::span<const double> scores, Selection selection) {
  if (scores.empty()) throw InvalidInput("no scores to select from");
  std::size_t best = 0;
  for (std::size_t v = 1; v < scores.size(); ++v) {
    const bool better = selection == Selection::max_corr ? scores[v] > scores[best] : scores[v] < scores[best];
    if (better) best = v;
  }
  return best;
}

SelectionResult select_representative(std::span<const RelationalMatrix> views, std::span<const Matrix> aligned,
                                      const SelectionConfig& cfg) {
  if (views.empty()) throw InvalidInput("selection needs at least one view");
  if (aligned.size() != views.size())
    throw InvalidInput(fmt::format("{} aligned embeddings for {} views", aligned.size(), views.size()));
  const Index n = views.front().size();
  const std::size_t nv = views.size();
  SelectionResult out;
  out.cross = Matrix::Constant(static_cast<Index>(nv), static_cast<Index>(nv), std::numeric_limits<double>::quiet_NaN());
  out.scores.resize(nv);
  out.degenerate.assign(nv, false);
  const double worst = cfg.selection == Selection::max_corr ? -std::numeric_limits<double>::infinity()
                                                            : std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < nv; ++v) {
    if (aligned[v].rows() != n)
      throw InvalidInput(fmt::format("aligned embedding {} has {} rows, expected {}", v, aligned[v].rows(), n));
    const Matrix dy = pairwise_euclidean(aligned[v]).values();
    std::vector<double> per_view;
    try {
      for (std::size_t u = 0; u < nv; ++u) {
        const double r = distance_correlation(views[u].values(), dy);
        out.cross(static_cast<Index>(u), static_cast<Index>(v)) = r;
        per_view.push_back(r);
      }
      out.scores[v] = aggregate_scores(std::move(per_view), cfg.aggregate);
    } catch (const NumericalError&) {
      out.degenerate[v] = true;
      out.scores[v] = worst;
    }
  }
  out.selected = pick_representative(out.scores, cfg.selection);
  return out;
}

SelectionResult select_representative(std::span<const RelationalMatrix> views, std::span<const Embedding> aligned,
                                      const SelectionConfig& cfg) {
  std::vector<Matrix> coords;
  coords.reserve(aligned.size());
  for (const auto& e : aligned) coords.push_back(e.coords);
  return select_representative(views, std::span<const Matrix>(coords), cfg);
}

MultiGwResult multi_gwmds(std::span<const RelationalMatrix> views, const ViewWeights& weights, const MdsConfig& mds,
                          const GwConfig& gw, const SelectionConfig& sel) {
  auto joint = multi_gwmds_optimize(views, weights, mds, gw);
  MultiGwResult out;
  out.criterion = sel;
  out.objective_trace = joint.shared.objective_trace;
  for (std::size_t v = 0; v < views.size(); ++v) {
    Embedding e = joint.shared;
    e.method = "multi-gwmds";
    e.source_view = v;
    e.coords = barycentric_align(joint.shared.coords, joint.couplings[v].plan.transpose());
    try {
      e.view_correlations = view_correlations(views, e.coords);
    } catch (const NumericalError&) {
      e.notes.push_back("aligned embedding is degenerate (all points coincide)");
    }
    out.aligned.push_back(std::move(e));
  }
  auto choice = select_representative(views, std::span<const Embedding>(out.aligned), sel);
  out.scores = std::move(choice.scores);
  out.degenerate = std::move(choice.degenerate);
  out.cross = std::move(choice.cross);
  out.selected = choice.selected;
  out.shared = std::move(joint.shared);
  out.couplings = std::move(joint.couplings);
  return out;
}

MultiGwResult multi_gwmds(const MultiViewDataset& data, const ViewWeights& weights, const MdsConfig& mds,
                          const GwConfig& gw, const SelectionConfig& sel, const GeodesicOptions& geo) {
  const auto views = view_distances(data, geo);
  auto out = multi_gwmds(views, weights, mds, gw, sel);
  for (auto& e : out.aligned) e.row_ids = data.row_ids();
  return out;
}

}  // namespace gwmv
