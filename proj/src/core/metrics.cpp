#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cadet {

Graph threshold(const Tensor& beliefs, double tau) {
  if (beliefs.rank() != 2 || beliefs.shape[0] != beliefs.shape[1])
    raise(ErrorKind::invalid_argument, "beliefs must be a square matrix");
  if (!(tau > 0.0 && tau < 1.0)) raise(ErrorKind::invalid_argument, "threshold must be in (0,1)");
  const int d = static_cast<int>(beliefs.shape[0]);
  Graph g(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && beliefs[static_cast<int64_t>(i) * d + j] > tau) g.set_edge(i, j, true);
  return g;
}

int64_t shd(const Graph& a, const Graph& b) {
  if (a.d != b.d) raise(ErrorKind::invalid_argument, "graphs must have the same size");
  int64_t dist = 0;
  for (int i = 0; i < a.d; ++i) {
    for (int j = i + 1; j < a.d; ++j) {
      int af = a.edge(i, j), ar = a.edge(j, i);
      int bf = b.edge(i, j), br = b.edge(j, i);
      if (af == bf && ar == br) continue;
      if (af + ar == 1 && bf + br == 1) {
        ++dist;  // reversal
      } else {
        dist += std::abs(af - bf) + std::abs(ar - br);
      }
    }
  }
  return dist;
}

std::vector<uint8_t> descendants(const Graph& g, int i) {
  std::vector<uint8_t> seen(g.d, 0);
  std::vector<int> stack{i};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < g.d; ++v) {
      if (g.edge(u, v) && !seen[v]) {
        seen[static_cast<size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  seen[static_cast<size_t>(i)] = 0;
  return seen;
}

std::vector<uint8_t> ancestors(const Graph& g, int i) {
  std::vector<uint8_t> seen(g.d, 0);
  std::vector<int> stack{i};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < g.d; ++v) {
      if (g.edge(v, u) && !seen[v]) {
        seen[static_cast<size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  seen[static_cast<size_t>(i)] = 0;
  return seen;
}

bool d_separated(const Graph& g, int x, int y, const std::vector<uint8_t>& z) {
  const int d = g.d;
  // Ancestors of the conditioning set (including the set itself).
  std::vector<uint8_t> anc_z(d, 0);
  {
    std::vector<int> stack;
    for (int v = 0; v < d; ++v)
      if (z[static_cast<size_t>(v)]) {
        anc_z[static_cast<size_t>(v)] = 1;
        stack.push_back(v);
      }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int p = 0; p < d; ++p)
        if (g.edge(p, u) && !anc_z[static_cast<size_t>(p)]) {
          anc_z[static_cast<size_t>(p)] = 1;
          stack.push_back(p);
        }
    }
  }
  // Bayes-ball: states (node, entered-from-child?).
  std::vector<uint8_t> visited(static_cast<size_t>(d) * 2, 0);
  std::vector<std::pair<int, int>> stack{{x, 1}};  // 1 = travelling up (as if from a child)
  while (!stack.empty()) {
    auto [u, up] = stack.back();
    stack.pop_back();
    size_t key = static_cast<size_t>(u) * 2 + static_cast<size_t>(up);
    if (visited[key]) continue;
    visited[key] = 1;
    if (!z[static_cast<size_t>(u)] && u == y) return false;
    if (up) {
      if (!z[static_cast<size_t>(u)]) {
        for (int p = 0; p < d; ++p)
          if (g.edge(p, u)) stack.push_back({p, 1});
        for (int c = 0; c < d; ++c)
          if (g.edge(u, c)) stack.push_back({c, 0});
      }
    } else {
      if (!z[static_cast<size_t>(u)]) {
        for (int c = 0; c < d; ++c)
          if (g.edge(u, c)) stack.push_back({c, 0});
      }
      if (anc_z[static_cast<size_t>(u)]) {  // collider opened by conditioning
        for (int p = 0; p < d; ++p)
          if (g.edge(p, u)) stack.push_back({p, 1});
      }
    }
  }
  return true;
}

int64_t sid(const Graph& g_true, const Graph& g_pred) {
  if (g_true.d != g_pred.d) raise(ErrorKind::invalid_argument, "graphs must have the same size");
  if (!is_acyclic(g_true) || !is_acyclic(g_pred))
    raise(ErrorKind::invalid_argument, "SID is defined for acyclic graphs");
  const int d = g_true.d;
  std::vector<std::vector<uint8_t>> de(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) de[static_cast<size_t>(i)] = descendants(g_true, i);

  int64_t count = 0;
  std::vector<uint8_t> z(d), forbidden(d);
  for (int i = 0; i < d; ++i) {
    // Ancestors of each j are recomputed lazily below via an(j) membership of
    // causal-path nodes; precompute an(*) once per i is not needed.
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      for (int v = 0; v < d; ++v) z[static_cast<size_t>(v)] = g_pred.edge(v, i) ? 1 : 0;
      if (z[static_cast<size_t>(j)]) {
        // Adjusting for j itself claims "no effect of i on j"; wrong iff j is
        // a true descendant of i.
        if (de[static_cast<size_t>(i)][static_cast<size_t>(j)]) ++count;
        continue;
      }
      // Nodes (other than i) on proper causal paths from i to j.
      std::vector<uint8_t> an_j = ancestors(g_true, j);
      an_j[static_cast<size_t>(j)] = 1;
      std::vector<int> cn;
      for (int w = 0; w < d; ++w)
        if (w != i && de[static_cast<size_t>(i)][static_cast<size_t>(w)] &&
            an_j[static_cast<size_t>(w)])
          cn.push_back(w);
      // Forbidden set: descendants of causal-path nodes (including them).
      std::fill(forbidden.begin(), forbidden.end(), 0);
      for (int w : cn) {
        forbidden[static_cast<size_t>(w)] = 1;
        const auto& dw = de[static_cast<size_t>(w)];
        for (int v = 0; v < d; ++v)
          if (dw[static_cast<size_t>(v)]) forbidden[static_cast<size_t>(v)] = 1;
      }
      bool valid = true;
      for (int v = 0; v < d && valid; ++v)
        if (z[static_cast<size_t>(v)] && forbidden[static_cast<size_t>(v)]) valid = false;
      if (valid) {
        // Proper back-door graph: remove the first edge of every proper
        // causal path, i.e. i -> c for causal-path nodes c.
        Graph pbd = g_true;
        for (int c : cn)
          if (pbd.edge(i, c)) pbd.set_edge(i, c, false);
        valid = d_separated(pbd, i, j, z);
      }
      if (!valid) ++count;
    }
  }
  return count;
}

Graph drop_back_edges(const Graph& g) {
  const int d = g.d;
  Graph out = g;
  std::vector<int> color(d, 0);  // 0 white, 1 on stack, 2 done
  // Iterative DFS from every node in ascending order; edges into the active
  // stack are back edges and get removed.
  struct Frame {
    int node;
    int next;
  };
  for (int root = 0; root < d; ++root) {
    if (color[static_cast<size_t>(root)] != 0) continue;
    std::vector<Frame> stack{{root, 0}};
    color[static_cast<size_t>(root)] = 1;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= d) {
        color[static_cast<size_t>(f.node)] = 2;
        stack.pop_back();
        continue;
      }
      int v = f.next++;
      if (!g.edge(f.node, v)) continue;
      if (color[static_cast<size_t>(v)] == 1) {
        out.set_edge(f.node, v, false);
      } else if (color[static_cast<size_t>(v)] == 0) {
        color[static_cast<size_t>(v)] = 1;
        stack.push_back({v, 0});
      }
    }
  }
  return out;
}

RankAreas rank_areas(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    raise(ErrorKind::invalid_argument, "scores and labels must be non-empty and equal-length");
  struct Entry {
    double score;
    int label;
  };
  std::vector<Entry> entries;
  entries.reserve(scores.size());
  int64_t pos = 0;
  for (size_t k = 0; k < scores.size(); ++k) {
    int lab = labels[k] ? 1 : 0;
    pos += lab;
    entries.push_back({scores[k], lab});
  }
  int64_t neg = static_cast<int64_t>(entries.size()) - pos;

  RankAreas out;
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  if (pos > 0 && neg > 0) {
    // Rank statistic: P(score_pos > score_neg) + 0.5 P(equal).
    double gt = 0.0;
    size_t k = 0;
    int64_t neg_seen = 0;
    while (k < entries.size()) {
      size_t e = k;
      int64_t tie_pos = 0, tie_neg = 0;
      while (e < entries.size() && entries[e].score == entries[k].score) {
        if (entries[e].label) ++tie_pos;
        else ++tie_neg;
        ++e;
      }
      // Positives in this tie group beat negatives ranked strictly below and
      // split ties within the group.
      int64_t neg_below = neg - neg_seen - tie_neg;
      gt += static_cast<double>(tie_pos) *
            (static_cast<double>(neg_below) + 0.5 * static_cast<double>(tie_neg));
      neg_seen += tie_neg;
      k = e;
    }
    out.auroc = gt / (static_cast<double>(pos) * static_cast<double>(neg));
  }
  if (pos > 0) {
    double ap = 0.0;
    int64_t tp = 0, fp = 0;
    double prev_recall = 0.0;
    size_t k = 0;
    while (k < entries.size()) {
      size_t e = k;
      while (e < entries.size() && entries[e].score == entries[k].score) {
        if (entries[e].label) ++tp;
        else ++fp;
        ++e;
      }
      double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      double recall = static_cast<double>(tp) / static_cast<double>(pos);
      ap += (recall - prev_recall) * precision;
      prev_recall = recall;
      k = e;
    }
    out.auprc = ap;
  }
  return out;
}

RankAreas pr_roc(const Tensor& beliefs, const Graph& g_true) {
  const int d = g_true.d;
  if (beliefs.shape != std::vector<int64_t>{d, d})
    raise(ErrorKind::invalid_argument, "beliefs do not match the graph size");
  if (d < 2) raise(ErrorKind::invalid_argument, "need at least two nodes");
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(static_cast<size_t>(d) * (d - 1));
  labels.reserve(scores.capacity());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      scores.push_back(beliefs[static_cast<int64_t>(i) * d + j]);
      labels.push_back(g_true.edge(i, j) ? 1 : 0);
    }
  return rank_areas(scores, labels);
}

EvalReport evaluate(const Tensor& beliefs, const Graph& g_true, double tau) {
  EvalReport r;
  Graph pred = threshold(beliefs, tau);
  r.edges_predicted = pred.edge_count();
  r.acyclic = is_acyclic(pred);
  r.shd = shd(pred, g_true);
  Graph pred_dag = r.acyclic ? pred : drop_back_edges(pred);
  if (!r.acyclic)
    CADET_LOG_WARN("cyclic prediction; SID computed on a maximal acyclic subgraph");
  r.sid = sid(g_true, pred_dag);
  int64_t tp = 0;
  for (int i = 0; i < g_true.d; ++i)
    for (int j = 0; j < g_true.d; ++j)
      if (pred.edge(i, j) && g_true.edge(i, j)) ++tp;
  int64_t true_edges = g_true.edge_count();
  r.precision = r.edges_predicted > 0
                    ? static_cast<double>(tp) / static_cast<double>(r.edges_predicted)
                    : 0.0;
  r.recall = true_edges > 0 ? static_cast<double>(tp) / static_cast<double>(true_edges) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
  RankAreas areas = pr_roc(beliefs, g_true);
  r.auprc = areas.auprc;
  r.auroc = areas.auroc;
  return r;
}

json eval_report_to_json(const EvalReport& r) {
  json j{{"shd", r.shd},
         {"sid", r.sid},
         {"precision", r.precision},
         {"recall", r.recall},
         {"f1", r.f1},
         {"acyclic", r.acyclic},
         {"edges_predicted", r.edges_predicted}};
  j["auprc"] = r.auprc.has_value() ? json(*r.auprc) : json(nullptr);
  j["auroc"] = r.auroc.has_value() ? json(*r.auroc) : json(nullptr);
  return j;
}

namespace {

json mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return json{{"mean", nullptr}, {"se", nullptr}, {"count", 0}};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  double se = xs.size() > 1
                  ? std::sqrt(var / static_cast<double>(xs.size() - 1) /
                              static_cast<double>(xs.size()))
                  : 0.0;
  return json{{"mean", mean}, {"se", se}, {"count", xs.size()}};
}

}  // namespace

json aggregate_reports(const std::vector<EvalReport>& reports) {
  std::vector<double> shds, sids, precs, recs, f1s, auprcs, aurocs, edges;
  int64_t cyclic = 0;
  for (const auto& r : reports) {
    shds.push_back(static_cast<double>(r.shd));
    sids.push_back(static_cast<double>(r.sid));
    precs.push_back(r.precision);
    recs.push_back(r.recall);
    f1s.push_back(r.f1);
    edges.push_back(static_cast<double>(r.edges_predicted));
    if (r.auprc) auprcs.push_back(*r.auprc);
    if (r.auroc) aurocs.push_back(*r.auroc);
    if (!r.acyclic) ++cyclic;
  }
  json j{{"aggregate", true},
         {"count", reports.size()},
         {"shd", mean_se(shds)},
         {"sid", mean_se(sids)},
         {"precision", mean_se(precs)},
         {"recall", mean_se(recs)},
         {"f1", mean_se(f1s)},
         {"auprc", mean_se(auprcs)},
         {"auroc", mean_se(aurocs)},
         {"edges_predicted", mean_se(edges)}};
  j["cyclic_fraction"] = reports.empty()
                             ? json(nullptr)
                             : json(static_cast<double>(cyclic) /
                                    static_cast<double>(reports.size()));
  return j;
}

}  // namespace cadet
