#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace cadet {

// Directed graph over d variables; adj[i*d+j] == 1 means edge i -> j.
struct Graph {
  int d = 0;
  std::vector<uint8_t> adj;

  Graph() = default;
  explicit Graph(int d_) : d(d_), adj(static_cast<size_t>(d_) * static_cast<size_t>(d_), 0) {}

  bool edge(int i, int j) const { return adj[static_cast<size_t>(i) * d + j] != 0; }
  void set_edge(int i, int j, bool on = true) {
    adj[static_cast<size_t>(i) * d + j] = on ? 1 : 0;
  }
  int edge_count() const;
  std::vector<int> parents(int j) const;
  bool operator==(const Graph& o) const { return d == o.d && adj == o.adj; }
};

bool is_acyclic(const Graph& g);
// Topological order (parents before children); error on cyclic input.
std::vector<int> topo_order(const Graph& g);

enum class GraphFamily {
  erdos_renyi,
  scale_free,
  watts_strogatz,
  stochastic_block,
  geometric,
  subgraph_extraction,
};

GraphFamily graph_family_from_string(const std::string& s);
std::string graph_family_to_string(GraphFamily f);

struct GraphModelConfig {
  GraphFamily family = GraphFamily::erdos_renyi;
  double edges_per_node = 1.0;  // er / scale_free / stochastic_block
  double power = 1.0;           // scale_free attachment exponent
  int ws_degree = 2;            // watts_strogatz lattice degree (even)
  double ws_rewire = 0.1;
  int blocks = 2;       // stochastic_block
  double damping = 0.1;
  double radius = 0.3;  // geometric
  // subgraph_extraction: source sampled from `source_*`, then extracted
  GraphFamily source_family = GraphFamily::scale_free;
  int source_d = 40;
  double source_edges_per_node = 2.0;
  double source_power = 1.0;
  double percentile = 20.0;
};

Graph sample_erdos_renyi(int d, double e, Rng& rng);
Graph sample_scale_free(int d, double e, double alpha, Rng& rng);
Graph sample_watts_strogatz(int d, int k, double rewire_p, Rng& rng);
Graph sample_stochastic_block(int d, int blocks, double e, double damping, Rng& rng);
Graph sample_geometric(int d, double radius, Rng& rng);

struct ExtractResult {
  Graph g;
  bool warning = false;  // set when restarts were exhausted before reaching d_target
};
// Modularity-greedy growth over the undirected skeleton of `source`.
ExtractResult extract_subgraph(const Graph& source, int d_target, double p_percent, Rng& rng);

// Two-community modularity of {in_set, complement} over the undirected
// skeleton, computed from incremental counters (the extraction path).
double partition_modularity(const Graph& source, const std::vector<uint8_t>& in_set);

// Dispatch on config.family; for subgraph_extraction, samples the source
// internally and extracts d nodes.
Graph sample_graph(const GraphModelConfig& cfg, int d, Rng& rng);

}  // namespace cadet
