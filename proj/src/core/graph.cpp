#include "core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace cadet {

int Graph::edge_count() const {
  int c = 0;
  for (uint8_t v : adj) c += v;
  return c;
}

std::vector<int> Graph::parents(int j) const {
  std::vector<int> out;
  for (int i = 0; i < d; ++i) {
    if (edge(i, j)) out.push_back(i);
  }
  return out;
}

std::vector<int> topo_order(const Graph& g) {
  std::vector<int> indeg(static_cast<size_t>(g.d), 0);
  for (int i = 0; i < g.d; ++i) {
    for (int j = 0; j < g.d; ++j) {
      if (g.edge(i, j)) indeg[static_cast<size_t>(j)]++;
    }
  }
  std::deque<int> ready;
  for (int i = 0; i < g.d; ++i) {
    if (indeg[static_cast<size_t>(i)] == 0) ready.push_back(i);
  }
  std::vector<int> order;
  order.reserve(static_cast<size_t>(g.d));
  while (!ready.empty()) {
    int u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (int j = 0; j < g.d; ++j) {
      if (g.edge(u, j) && --indeg[static_cast<size_t>(j)] == 0) ready.push_back(j);
    }
  }
  if (static_cast<int>(order.size()) != g.d) {
    raise(ErrorKind::invalid_argument, "topo_order: graph is cyclic");
  }
  return order;
}

bool is_acyclic(const Graph& g) {
  try {
    topo_order(g);
    return true;
  } catch (const Error&) {
    return false;
  }
}

GraphFamily graph_family_from_string(const std::string& s) {
  if (s == "erdos_renyi") return GraphFamily::erdos_renyi;
  if (s == "scale_free") return GraphFamily::scale_free;
  if (s == "watts_strogatz") return GraphFamily::watts_strogatz;
  if (s == "stochastic_block") return GraphFamily::stochastic_block;
  if (s == "geometric") return GraphFamily::geometric;
  if (s == "subgraph_extraction") return GraphFamily::subgraph_extraction;
  raise(ErrorKind::invalid_argument, "unknown graph family: " + s);
}

std::string graph_family_to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::erdos_renyi: return "erdos_renyi";
    case GraphFamily::scale_free: return "scale_free";
    case GraphFamily::watts_strogatz: return "watts_strogatz";
    case GraphFamily::stochastic_block: return "stochastic_block";
    case GraphFamily::geometric: return "geometric";
    case GraphFamily::subgraph_extraction: return "subgraph_extraction";
  }
  raise(ErrorKind::internal, "bad graph family enum");
}

namespace {

Graph relabel(const Graph& g, const std::vector<int>& sigma) {
  Graph out(g.d);
  for (int i = 0; i < g.d; ++i) {
    for (int j = 0; j < g.d; ++j) {
      if (g.edge(i, j)) out.set_edge(sigma[static_cast<size_t>(i)], sigma[static_cast<size_t>(j)]);
    }
  }
  return out;
}

// Random relabeling, then keep the upper-triangular half: undirected edge
// {i, j} becomes min->max in the new labels. Without the relabeling, node
// index would correlate with causal order.
Graph orient_upper(const std::vector<uint8_t>& sym, int d, Rng& rng) {
  std::vector<int> sigma = rng.permutation(d);
  Graph out(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (sym[static_cast<size_t>(i) * d + j]) {
        int a = sigma[static_cast<size_t>(i)], b = sigma[static_cast<size_t>(j)];
        out.set_edge(std::min(a, b), std::max(a, b));
      }
    }
  }
  return out;
}

void check_d(int d, const char* op) {
  if (d < 1) raise(ErrorKind::invalid_argument, std::string(op) + ": d must be >= 1");
}

}  // namespace

Graph sample_erdos_renyi(int d, double e, Rng& rng) {
  check_d(d, "sample_erdos_renyi");
  if (e < 0) raise(ErrorKind::invalid_argument, "sample_erdos_renyi: e must be >= 0");
  Graph g(d);
  if (d == 1) return g;
  const double p = std::min(1.0, 2.0 * e / static_cast<double>(d - 1));
  std::vector<int> order = rng.permutation(d);  // position in causal order
  std::vector<int> pos(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) pos[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (rng.u01() < p) {
        if (pos[static_cast<size_t>(i)] < pos[static_cast<size_t>(j)]) {
          g.set_edge(i, j);
        } else {
          g.set_edge(j, i);
        }
      }
    }
  }
  return g;
}

Graph sample_scale_free(int d, double e, double alpha, Rng& rng) {
  check_d(d, "sample_scale_free");
  if (e < 0) raise(ErrorKind::invalid_argument, "sample_scale_free: e must be >= 0");
  Graph g(d);
  const int attach = static_cast<int>(std::llround(e));
  // Per-graph coin: attachment edges point away from or toward the new node.
  const bool away_from_new = rng.bernoulli(0.5);
  std::vector<int> degree(static_cast<size_t>(d), 0);
  std::vector<double> weight(static_cast<size_t>(d), 0.0);
  for (int m = 1; m < d; ++m) {
    const int picks = std::min(m, attach);
    if (picks == 0) continue;
    for (int t = 0; t < m; ++t) {
      weight[static_cast<size_t>(t)] =
          std::pow(static_cast<double>(degree[static_cast<size_t>(t)]) + 1.0, alpha);
    }
    std::vector<int> chosen;
    for (int c = 0; c < picks; ++c) {
      double total = 0.0;
      for (int t = 0; t < m; ++t) total += weight[static_cast<size_t>(t)];
      if (total <= 0.0) break;
      double u = rng.u01() * total;
      int pick = m - 1;
      double acc = 0.0;
      for (int t = 0; t < m; ++t) {
        acc += weight[static_cast<size_t>(t)];
        if (u < acc) {
          pick = t;
          break;
        }
      }
      chosen.push_back(pick);
      weight[static_cast<size_t>(pick)] = 0.0;  // without replacement
    }
    for (int t : chosen) {
      if (away_from_new) {
        g.set_edge(m, t);
      } else {
        g.set_edge(t, m);
      }
      degree[static_cast<size_t>(t)]++;
      degree[static_cast<size_t>(m)]++;
    }
  }
  return relabel(g, rng.permutation(d));
}

Graph sample_watts_strogatz(int d, int k, double rewire_p, Rng& rng) {
  check_d(d, "sample_watts_strogatz");
  if (k < 0 || rewire_p < 0 || rewire_p > 1) {
    raise(ErrorKind::invalid_argument, "sample_watts_strogatz: invalid parameters");
  }
  std::vector<uint8_t> sym(static_cast<size_t>(d) * static_cast<size_t>(d), 0);
  auto connect = [&](int a, int b, bool on) {
    sym[static_cast<size_t>(a) * d + b] = on ? 1 : 0;
    sym[static_cast<size_t>(b) * d + a] = on ? 1 : 0;
  };
  const int half = k / 2;  // 1-D ring lattice, k/2 neighbors per side
  for (int off = 1; off <= half && off < d; ++off) {
    for (int i = 0; i < d; ++i) {
      int j = (i + off) % d;
      if (i != j) connect(i, j, true);
    }
  }
  for (int off = 1; off <= half && off < d; ++off) {
    for (int i = 0; i < d; ++i) {
      int j = (i + off) % d;
      if (i == j || !sym[static_cast<size_t>(i) * d + j]) continue;
      if (rng.u01() >= rewire_p) continue;
      // Rewire the far endpoint to a uniform non-neighbor.
      std::vector<int> candidates;
      for (int t = 0; t < d; ++t) {
        if (t != i && t != j && !sym[static_cast<size_t>(i) * d + t]) candidates.push_back(t);
      }
      if (candidates.empty()) continue;
      int nj = candidates[static_cast<size_t>(rng.uniform_int(
          static_cast<int64_t>(candidates.size())))];
      connect(i, j, false);
      connect(i, nj, true);
    }
  }
  return orient_upper(sym, d, rng);
}

Graph sample_stochastic_block(int d, int blocks, double e, double damping, Rng& rng) {
  check_d(d, "sample_stochastic_block");
  if (blocks < 1 || e < 0 || damping < 0 || damping > 1) {
    raise(ErrorKind::invalid_argument, "sample_stochastic_block: invalid parameters");
  }
  std::vector<int> block(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) block[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(blocks));
  double intra = 0.0, inter = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      (block[static_cast<size_t>(i)] == block[static_cast<size_t>(j)] ? intra : inter) += 1.0;
    }
  }
  // Solve intra-block q so the expected total edge count is e*d.
  const double denom = intra + damping * inter;
  const double q = denom > 0.0 ? std::min(1.0, e * static_cast<double>(d) / denom) : 0.0;
  const double q_inter = std::min(1.0, damping * q);
  std::vector<uint8_t> sym(static_cast<size_t>(d) * static_cast<size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      double p = block[static_cast<size_t>(i)] == block[static_cast<size_t>(j)] ? q : q_inter;
      if (rng.u01() < p) {
        sym[static_cast<size_t>(i) * d + j] = 1;
        sym[static_cast<size_t>(j) * d + i] = 1;
      }
    }
  }
  return orient_upper(sym, d, rng);
}

Graph sample_geometric(int d, double radius, Rng& rng) {
  check_d(d, "sample_geometric");
  if (radius < 0) raise(ErrorKind::invalid_argument, "sample_geometric: radius must be >= 0");
  std::vector<double> x(static_cast<size_t>(d)), y(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    x[static_cast<size_t>(i)] = rng.u01();
    y[static_cast<size_t>(i)] = rng.u01();
  }
  std::vector<uint8_t> sym(static_cast<size_t>(d) * static_cast<size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      double dx = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
      double dy = y[static_cast<size_t>(i)] - y[static_cast<size_t>(j)];
      if (std::sqrt(dx * dx + dy * dy) <= radius) {
        sym[static_cast<size_t>(i) * d + j] = 1;
        sym[static_cast<size_t>(j) * d + i] = 1;
      }
    }
  }
  return orient_upper(sym, d, rng);
}

namespace {

struct Skeleton {
  int d = 0;
  int m = 0;  // undirected edge count
  std::vector<std::vector<int>> nbrs;
  std::vector<int> deg;
};

Skeleton skeleton_of(const Graph& g) {
  Skeleton s;
  s.d = g.d;
  s.nbrs.resize(static_cast<size_t>(g.d));
  s.deg.assign(static_cast<size_t>(g.d), 0);
  for (int i = 0; i < g.d; ++i) {
    for (int j = i + 1; j < g.d; ++j) {
      if (g.edge(i, j) || g.edge(j, i)) {
        s.nbrs[static_cast<size_t>(i)].push_back(j);
        s.nbrs[static_cast<size_t>(j)].push_back(i);
        s.deg[static_cast<size_t>(i)]++;
        s.deg[static_cast<size_t>(j)]++;
        s.m++;
      }
    }
  }
  return s;
}

// Two-community modularity from the counters (e_in, deg_in) of one side.
double modularity_from_counters(int m, double e_in, double deg_in) {
  if (m == 0) return 0.0;
  const double dm = static_cast<double>(m);
  const double e_out = dm + e_in - deg_in;  // m - e_in - cut
  const double deg_out = 2.0 * dm - deg_in;
  auto term = [dm](double e_c, double deg_c) {
    double frac = deg_c / (2.0 * dm);
    return e_c / dm - frac * frac;
  };
  return term(e_in, deg_in) + term(e_out, deg_out);
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& nodes_sorted) {
  Graph out(static_cast<int>(nodes_sorted.size()));
  for (size_t a = 0; a < nodes_sorted.size(); ++a) {
    for (size_t b = 0; b < nodes_sorted.size(); ++b) {
      if (a != b && g.edge(nodes_sorted[a], nodes_sorted[b])) {
        out.set_edge(static_cast<int>(a), static_cast<int>(b));
      }
    }
  }
  return out;
}

}  // namespace

double partition_modularity(const Graph& source, const std::vector<uint8_t>& in_set) {
  Skeleton s = skeleton_of(source);
  double e_in = 0.0, deg_in = 0.0;
  for (int i = 0; i < s.d; ++i) {
    if (!in_set[static_cast<size_t>(i)]) continue;
    deg_in += s.deg[static_cast<size_t>(i)];
    for (int j : s.nbrs[static_cast<size_t>(i)]) {
      if (j > i && in_set[static_cast<size_t>(j)]) e_in += 1.0;
    }
  }
  return modularity_from_counters(s.m, e_in, deg_in);
}

ExtractResult extract_subgraph(const Graph& source, int d_target, double p_percent, Rng& rng) {
  if (d_target < 1 || d_target > source.d) {
    raise(ErrorKind::invalid_argument, "extract_subgraph: d_target out of range");
  }
  if (p_percent <= 0 || p_percent > 100) {
    raise(ErrorKind::invalid_argument, "extract_subgraph: p_percent must be in (0, 100]");
  }
  if (d_target == source.d) return {source, false};

  const Skeleton s = skeleton_of(source);
  constexpr int kRestartBudget = 10;
  std::vector<int> best;

  for (int attempt = 0; attempt < kRestartBudget; ++attempt) {
    std::vector<uint8_t> in_set(static_cast<size_t>(source.d), 0);
    std::vector<int> members;
    const int seed = static_cast<int>(rng.uniform_int(source.d));
    in_set[static_cast<size_t>(seed)] = 1;
    members.push_back(seed);
    double e_in = 0.0;
    double deg_in = s.deg[static_cast<size_t>(seed)];

    std::vector<int> frontier;  // neighbors of the set, sorted unique
    auto add_frontier = [&](int node) {
      for (int nb : s.nbrs[static_cast<size_t>(node)]) {
        if (!in_set[static_cast<size_t>(nb)] &&
            std::find(frontier.begin(), frontier.end(), nb) == frontier.end()) {
          frontier.push_back(nb);
        }
      }
    };
    add_frontier(seed);

    while (static_cast<int>(members.size()) < d_target && !frontier.empty()) {
      // Rank candidates by the modularity of {set+candidate, rest}.
      std::vector<std::pair<double, int>> ranked;
      ranked.reserve(frontier.size());
      for (int cand : frontier) {
        double links = 0.0;
        for (int nb : s.nbrs[static_cast<size_t>(cand)]) {
          if (in_set[static_cast<size_t>(nb)]) links += 1.0;
        }
        double q = modularity_from_counters(s.m, e_in + links,
                                            deg_in + s.deg[static_cast<size_t>(cand)]);
        ranked.emplace_back(-q, cand);  // sort descending by q, ties by node id
      }
      std::sort(ranked.begin(), ranked.end());
      const int top = std::max(
          1, static_cast<int>(std::ceil(p_percent / 100.0 * static_cast<double>(ranked.size()))));
      const int pick = ranked[static_cast<size_t>(rng.uniform_int(top))].second;

      double links = 0.0;
      for (int nb : s.nbrs[static_cast<size_t>(pick)]) {
        if (in_set[static_cast<size_t>(nb)]) links += 1.0;
      }
      e_in += links;
      deg_in += s.deg[static_cast<size_t>(pick)];
      in_set[static_cast<size_t>(pick)] = 1;
      members.push_back(pick);
      frontier.erase(std::remove(frontier.begin(), frontier.end(), pick), frontier.end());
      add_frontier(pick);
    }

    if (members.size() > best.size()) best = members;
    if (static_cast<int>(best.size()) >= d_target) break;
  }

  std::sort(best.begin(), best.end());
  bool warning = static_cast<int>(best.size()) < d_target;
  if (warning) {
    CADET_LOG_WARN("extract_subgraph: growth stalled at %zu of %d nodes after restarts",
                   best.size(), d_target);
  }
  return {induced_subgraph(source, best), warning};
}

Graph sample_graph(const GraphModelConfig& cfg, int d, Rng& rng) {
  switch (cfg.family) {
    case GraphFamily::erdos_renyi:
      return sample_erdos_renyi(d, cfg.edges_per_node, rng);
    case GraphFamily::scale_free:
      return sample_scale_free(d, cfg.edges_per_node, cfg.power, rng);
    case GraphFamily::watts_strogatz:
      return sample_watts_strogatz(d, cfg.ws_degree, cfg.ws_rewire, rng);
    case GraphFamily::stochastic_block:
      return sample_stochastic_block(d, cfg.blocks, cfg.edges_per_node, cfg.damping, rng);
    case GraphFamily::geometric:
      return sample_geometric(d, cfg.radius, rng);
    case GraphFamily::subgraph_extraction: {
      if (cfg.source_d < d) {
        raise(ErrorKind::invalid_argument, "subgraph_extraction: source_d smaller than target d");
      }
      Graph source;
      switch (cfg.source_family) {
        case GraphFamily::erdos_renyi:
          source = sample_erdos_renyi(cfg.source_d, cfg.source_edges_per_node, rng);
          break;
        case GraphFamily::scale_free:
          source = sample_scale_free(cfg.source_d, cfg.source_edges_per_node, cfg.source_power, rng);
          break;
        default:
          raise(ErrorKind::invalid_argument,
                "subgraph_extraction: source family must be erdos_renyi or scale_free");
      }
      return extract_subgraph(source, d, cfg.percentile, rng).g;
    }
  }
  raise(ErrorKind::internal, "sample_graph: bad family");
}

}  // namespace cadet
