#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lograb {

// sorted ascending, unique global node ids
using NodeSet = std::vector<uint32_t>;
using EdgeList = std::vector<std::pair<uint32_t, uint32_t>>;

struct Graph {
  uint32_t n = 0;
  EdgeList edges;  // u < v, sorted, unique
  std::vector<uint32_t> adj_offsets;
  std::vector<uint32_t> adj;

  const uint32_t* neighbors_begin(uint32_t v) const { return adj.data() + adj_offsets[v]; }
  const uint32_t* neighbors_end(uint32_t v) const { return adj.data() + adj_offsets[v + 1]; }
  uint32_t degree(uint32_t v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
};

struct Partition {
  std::vector<NodeSet> clusters;  // non-empty, disjoint, cover [0, n)
};

enum class EdgeFormat { auto_detect, whitespace, csv };

struct LoadReport {
  Graph graph;
  std::vector<uint64_t> original_ids;  // dense id -> original id (ascending)
  uint64_t self_loops_dropped = 0;
  uint64_t duplicates_dropped = 0;
};

// canonicalize (swap to u<v, sort, dedup); rejects self-loops and ids >= n
Graph make_graph(uint32_t n, EdgeList edges);

// '#'-prefixed comment lines skipped; malformed lines throw with line number
LoadReport load_edge_list(std::istream& in, EdgeFormat format = EdgeFormat::auto_detect);
void save_edge_list(std::ostream& out, const Graph& g);

std::vector<uint32_t> degrees(const Graph& g);

// component id per node, ids assigned in order of smallest member
std::vector<uint32_t> connected_components(const Graph& g, uint32_t* count = nullptr);

NodeSet d_hop_ball(const Graph& g, uint32_t center, int d);

// edges of the induced subgraph in local (position-in-nodes) indices
std::vector<std::pair<int, int>> induced_edges(const Graph& g, const NodeSet& nodes);

// I - D^{-1/2} A D^{-1/2} on the induced subgraph; degree-0 rows are identity rows
Eigen::MatrixXd normalized_laplacian(const Graph& g, const NodeSet& nodes);

// D - A on the induced subgraph
Eigen::MatrixXd combinatorial_laplacian(const Graph& g, const NodeSet& nodes);

// recursive Fiedler-vector bisection into exactly ell non-empty clusters
Partition spectral_bisection_partition(const Graph& g, uint32_t ell);
uint32_t default_cluster_count(uint32_t n);

// nodes plus their 1-hop neighborhood
NodeSet expand_with_boundary(const Graph& g, const NodeSet& nodes);

}  // namespace lograb
