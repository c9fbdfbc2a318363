#pragma once

#include <optional>

#include "core/graph.hpp"
#include "core/json_util.hpp"
#include "core/tensor.hpp"

namespace cadet {

struct EvalReport {
  int64_t shd = 0;
  int64_t sid = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auprc;
  std::optional<double> auroc;
  bool acyclic = true;  // thresholded prediction was a DAG (no SID fallback)
  int64_t edges_predicted = 0;
};

// g_ij = 1 iff theta_ij > tau (strict). Diagonal ignored.
Graph threshold(const Tensor& beliefs, double tau);

// Structural Hamming distance; an edge reversal counts once.
int64_t shd(const Graph& a, const Graph& b);

// Descendants of i (excluding i) / ancestors of i (excluding i).
std::vector<uint8_t> descendants(const Graph& g, int i);
std::vector<uint8_t> ancestors(const Graph& g, int i);

// True iff x and y are d-separated by Z in g (Bayes-ball reachability).
bool d_separated(const Graph& g, int x, int y, const std::vector<uint8_t>& z);

// Structural intervention distance between two DAGs: the number of ordered
// pairs (i, j) whose interventional distribution is not recovered by
// parent adjustment with Pa_pred(i).
int64_t sid(const Graph& g_true, const Graph& g_pred);

// Maximal acyclic subgraph: drops the back edges of a depth-first traversal
// in ascending node order (deterministic).
Graph drop_back_edges(const Graph& g);

struct RankAreas {
  std::optional<double> auprc;
  std::optional<double> auroc;
};

// AUROC by the pairwise rank statistic with half credit for ties; AUPRC by
// the step-wise precision-recall sum (average precision, no interpolation).
// Degenerate labels leave the corresponding area absent (AUROC needs both
// classes; AUPRC needs at least one positive).
RankAreas rank_areas(const std::vector<double>& scores, const std::vector<int>& labels);

// rank_areas over the off-diagonal entries of a belief matrix.
RankAreas pr_roc(const Tensor& beliefs, const Graph& g_true);

EvalReport evaluate(const Tensor& beliefs, const Graph& g_true, double tau = 0.5);

json eval_report_to_json(const EvalReport& r);

// Mean and standard error of each metric over several reports (absent values
// are skipped per metric); includes the fraction of cyclic predictions.
json aggregate_reports(const std::vector<EvalReport>& reports);

}  // namespace cadet
