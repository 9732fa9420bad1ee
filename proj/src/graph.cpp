#include "lograb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lograb/eigen_solver.hpp"

namespace lograb {

namespace {

void build_adjacency(Graph& g) {
  std::vector<uint32_t> deg(g.n, 0);
  for (auto& [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  g.adj_offsets.assign(g.n + 1, 0);
  for (uint32_t i = 0; i < g.n; ++i) g.adj_offsets[i + 1] = g.adj_offsets[i] + deg[i];
  g.adj.assign(g.adj_offsets.back(), 0);
  std::vector<uint32_t> cursor(g.adj_offsets.begin(), g.adj_offsets.end() - 1);
  for (auto& [u, v] : g.edges) {
    g.adj[cursor[u]++] = v;
    g.adj[cursor[v]++] = u;
  }
  for (uint32_t i = 0; i < g.n; ++i)
    std::sort(g.adj.begin() + g.adj_offsets[i], g.adj.begin() + g.adj_offsets[i + 1]);
}

}  // namespace

Graph make_graph(uint32_t n, EdgeList edges) {
  Graph g;
  g.n = n;
  for (auto& [u, v] : edges) {
    if (u == v) throw std::invalid_argument("make_graph: self-loop on node " + std::to_string(u));
    if (u >= n || v >= n)
      throw std::invalid_argument("make_graph: edge endpoint out of range: (" +
                                  std::to_string(u) + ", " + std::to_string(v) + ")");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  build_adjacency(g);
  return g;
}

LoadReport load_edge_list(std::istream& in, EdgeFormat format) {
  LoadReport report;
  std::vector<std::pair<uint64_t, uint64_t>> raw;
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    if (format == EdgeFormat::auto_detect)
      format = line.find(',') != std::string::npos ? EdgeFormat::csv : EdgeFormat::whitespace;
    std::string cleaned = line;
    if (format == EdgeFormat::csv) std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ls(cleaned);
    uint64_t a, b;
    if (!(ls >> a >> b)) {
      throw std::invalid_argument("load_edge_list: malformed line " + std::to_string(line_no) +
                                  ": '" + line + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw std::invalid_argument("load_edge_list: trailing tokens on line " +
                                  std::to_string(line_no));
    if (a == b) {
      ++report.self_loops_dropped;
      continue;
    }
    raw.emplace_back(a, b);
  }
  if (raw.empty() && report.self_loops_dropped == 0)
    throw std::invalid_argument("load_edge_list: no edges found in input");

  std::vector<uint64_t> ids;
  ids.reserve(2 * raw.size());
  for (auto& [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  report.original_ids = ids;

  auto dense = [&ids](uint64_t x) {
    return static_cast<uint32_t>(std::lower_bound(ids.begin(), ids.end(), x) - ids.begin());
  };
  EdgeList edges;
  edges.reserve(raw.size());
  for (auto& [a, b] : raw) {
    uint32_t u = dense(a), v = dense(b);
    if (u > v) std::swap(u, v);
    edges.emplace_back(u, v);
  }
  std::sort(edges.begin(), edges.end());
  size_t before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  report.duplicates_dropped = before - edges.size();
  report.graph = make_graph(static_cast<uint32_t>(ids.size()), std::move(edges));
  return report;
}

void save_edge_list(std::ostream& out, const Graph& g) {
  for (auto& [u, v] : g.edges) out << u << ' ' << v << '\n';
}

std::vector<uint32_t> degrees(const Graph& g) {
  std::vector<uint32_t> d(g.n);
  for (uint32_t i = 0; i < g.n; ++i) d[i] = g.degree(i);
  return d;
}

std::vector<uint32_t> connected_components(const Graph& g, uint32_t* count) {
  std::vector<uint32_t> comp(g.n, UINT32_MAX);
  uint32_t next_id = 0;
  std::deque<uint32_t> queue;
  for (uint32_t s = 0; s < g.n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    comp[s] = next_id;
    queue.push_back(s);
    while (!queue.empty()) {
      uint32_t v = queue.front();
      queue.pop_front();
      for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
        if (comp[*it] == UINT32_MAX) {
          comp[*it] = next_id;
          queue.push_back(*it);
        }
      }
    }
    ++next_id;
  }
  if (count) *count = next_id;
  return comp;
}

NodeSet d_hop_ball(const Graph& g, uint32_t center, int d) {
  if (center >= g.n) throw std::invalid_argument("d_hop_ball: center out of range");
  if (d < 0) throw std::invalid_argument("d_hop_ball: negative radius");
  std::vector<int> dist(g.n, -1);
  dist[center] = 0;
  std::deque<uint32_t> queue{center};
  NodeSet ball{center};
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    if (dist[v] == d) continue;
    for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
      if (dist[*it] < 0) {
        dist[*it] = dist[v] + 1;
        ball.push_back(*it);
        queue.push_back(*it);
      }
    }
  }
  std::sort(ball.begin(), ball.end());
  return ball;
}

std::vector<std::pair<int, int>> induced_edges(const Graph& g, const NodeSet& nodes) {
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < nodes.size(); ++i) {
    auto begin = g.neighbors_begin(nodes[i]);
    auto end = g.neighbors_end(nodes[i]);
    for (size_t j = i + 1; j < nodes.size(); ++j) {
      if (std::binary_search(begin, end, nodes[j])) out.emplace_back((int)i, (int)j);
    }
  }
  return out;
}

Eigen::MatrixXd normalized_laplacian(const Graph& g, const NodeSet& nodes) {
  const int q = static_cast<int>(nodes.size());
  if (q == 0) throw std::invalid_argument("normalized_laplacian: empty node set");
  for (uint32_t v : nodes)
    if (v >= g.n) throw std::invalid_argument("normalized_laplacian: node out of range");
  auto local = induced_edges(g, nodes);
  std::vector<double> deg(q, 0.0);
  for (auto& [i, j] : local) {
    deg[i] += 1.0;
    deg[j] += 1.0;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(q, q);
  for (auto& [i, j] : local) {
    double w = -1.0 / std::sqrt(deg[i] * deg[j]);
    l(i, j) = w;
    l(j, i) = w;
  }
  return l;  // degree-0 rows untouched: identity rows
}

Eigen::MatrixXd combinatorial_laplacian(const Graph& g, const NodeSet& nodes) {
  const int q = static_cast<int>(nodes.size());
  if (q == 0) throw std::invalid_argument("combinatorial_laplacian: empty node set");
  auto local = induced_edges(g, nodes);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(q, q);
  for (auto& [i, j] : local) {
    l(i, j) -= 1.0;
    l(j, i) -= 1.0;
    l(i, i) += 1.0;
    l(j, j) += 1.0;
  }
  return l;
}

uint32_t default_cluster_count(uint32_t n) {
  uint32_t ell = static_cast<uint32_t>(std::ceil(n / 150.0));
  return std::max(1u, std::min(ell, n));
}

namespace {

// sign split of the Fiedler vector; zeros go to the smaller side
std::pair<NodeSet, NodeSet> fiedler_split(const Graph& g, const NodeSet& block) {
  Eigen::MatrixXd l = normalized_laplacian(g, block);
  EigenSystem es = symmetric_eigendecompose(l, static_cast<int>(block.size()));
  Eigen::VectorXd fiedler = es.vectors.col(1);
  NodeSet pos, neg;
  std::vector<uint32_t> zeros;
  for (size_t i = 0; i < block.size(); ++i) {
    double x = fiedler(static_cast<int>(i));
    if (x > 1e-12)
      pos.push_back(block[i]);
    else if (x < -1e-12)
      neg.push_back(block[i]);
    else
      zeros.push_back(block[i]);
  }
  for (uint32_t v : zeros) {
    if (pos.size() <= neg.size())
      pos.push_back(v);
    else
      neg.push_back(v);
  }
  if (pos.empty() || neg.empty()) {
    // degenerate vector: median cut on (value, id) order
    std::vector<std::pair<double, uint32_t>> order;
    for (size_t i = 0; i < block.size(); ++i)
      order.emplace_back(fiedler(static_cast<int>(i)), block[i]);
    std::sort(order.begin(), order.end());
    pos.clear();
    neg.clear();
    size_t half = order.size() / 2;
    for (size_t i = 0; i < order.size(); ++i)
      (i < half ? neg : pos).push_back(order[i].second);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  return {pos, neg};
}

}  // namespace

Partition spectral_bisection_partition(const Graph& g, uint32_t ell) {
  if (ell == 0) throw std::invalid_argument("spectral_bisection_partition: ell must be positive");
  if (ell > g.n)
    throw std::invalid_argument("spectral_bisection_partition: ell=" + std::to_string(ell) +
                                " exceeds node count " + std::to_string(g.n));
  uint32_t comp_count = 0;
  auto comp = connected_components(g, &comp_count);
  std::vector<NodeSet> blocks(comp_count);
  for (uint32_t v = 0; v < g.n; ++v) blocks[comp[v]].push_back(v);

  // more components than requested clusters: merge smallest blocks
  auto block_less = [](const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.front() < b.front();
  };
  while (blocks.size() > ell) {
    std::sort(blocks.begin(), blocks.end(), block_less);
    NodeSet merged;
    std::merge(blocks[0].begin(), blocks[0].end(), blocks[1].begin(), blocks[1].end(),
               std::back_inserter(merged));
    blocks.erase(blocks.begin(), blocks.begin() + 2);
    blocks.push_back(std::move(merged));
  }

  while (blocks.size() < ell) {
    // split the largest splittable block (ties: smallest leading id)
    size_t pick = blocks.size();
    for (size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].size() < 2) continue;
      if (pick == blocks.size() || blocks[i].size() > blocks[pick].size() ||
          (blocks[i].size() == blocks[pick].size() && blocks[i].front() < blocks[pick].front()))
        pick = i;
    }
    if (pick == blocks.size())
      throw std::runtime_error("spectral_bisection_partition: no splittable block left");
    auto [a, b] = fiedler_split(g, blocks[pick]);
    blocks.erase(blocks.begin() + static_cast<long>(pick));
    blocks.push_back(std::move(a));
    blocks.push_back(std::move(b));
  }

  std::sort(blocks.begin(), blocks.end(),
            [](const NodeSet& a, const NodeSet& b) { return a.front() < b.front(); });
  Partition part;
  part.clusters = std::move(blocks);
  return part;
}

NodeSet expand_with_boundary(const Graph& g, const NodeSet& nodes) {
  NodeSet out = nodes;
  for (uint32_t v : nodes) {
    if (v >= g.n) throw std::invalid_argument("expand_with_boundary: node out of range");
    out.insert(out.end(), g.neighbors_begin(v), g.neighbors_end(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace lograb
