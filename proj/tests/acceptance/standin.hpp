#pragma once

// deterministic graph generators for the desk-scale acceptance runs

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "lograb/graph.hpp"
#include "lograb/rng.hpp"

namespace standin {

/* Citation-shaped benchmark graph: grown by degree-proportional attachment
 * with triangle closure and a community bias, degree-capped so no hub
 * dominates. Defaults match the shape of a ~2.7k-node citation network
 * (mean degree ~4, heavy-ish tail, 7 groups). */
inline lograb::Graph citation_standin(uint32_t n, uint64_t seed, uint32_t groups = 7,
                                      double triangle_prob = 0.4, double cross_group_prob = 0.25,
                                      uint32_t degree_cap = 50) {
  lograb::CounterRng rng = lograb::CounterRng::substream(seed, 0, 0xC0);
  std::vector<uint32_t> degree(n, 0);
  std::vector<std::vector<uint32_t>> adj(n);
  std::set<std::pair<uint32_t, uint32_t>> edge_set;
  std::vector<uint32_t> attach_pool;  // one entry per edge endpoint
  auto group_of = [&](uint32_t v) { return v % groups; };
  auto add_edge = [&](uint32_t u, uint32_t w) {
    if (u == w) return false;
    auto key = std::make_pair(std::min(u, w), std::max(u, w));
    if (!edge_set.insert(key).second) return false;
    adj[u].push_back(w);
    adj[w].push_back(u);
    ++degree[u];
    ++degree[w];
    attach_pool.push_back(u);
    attach_pool.push_back(w);
    return true;
  };

  const uint32_t m0 = std::max<uint32_t>(3, groups);
  for (uint32_t v = 1; v < m0 && v < n; ++v) add_edge(v, v - 1);

  auto pick_target = [&](uint32_t v) -> int {
    for (int attempt = 0; attempt < 40; ++attempt) {
      uint32_t cand = attach_pool[rng.uniform_u64(attach_pool.size())];
      if (cand == v || degree[cand] >= degree_cap) continue;
      if (group_of(cand) != group_of(v) && rng.uniform() >= cross_group_prob) continue;
      auto key = std::make_pair(std::min(cand, v), std::max(cand, v));
      if (edge_set.count(key)) continue;
      return static_cast<int>(cand);
    }
    return -1;
  };

  for (uint32_t v = m0; v < n; ++v) {
    int first = pick_target(v);
    if (first < 0) first = static_cast<int>(v - 1);
    add_edge(v, static_cast<uint32_t>(first));
    // second stub: close a triangle through the first target, else attach again
    int second = -1;
    if (rng.uniform() < triangle_prob && !adj[static_cast<uint32_t>(first)].empty()) {
      for (int attempt = 0; attempt < 12 && second < 0; ++attempt) {
        const auto& nb = adj[static_cast<uint32_t>(first)];
        uint32_t cand = nb[rng.uniform_u64(nb.size())];
        if (cand == v || degree[cand] >= degree_cap) continue;
        auto key = std::make_pair(std::min(cand, v), std::max(cand, v));
        if (edge_set.count(key)) continue;
        second = static_cast<int>(cand);
      }
    }
    if (second < 0) second = pick_target(v);
    if (second >= 0) add_edge(v, static_cast<uint32_t>(second));
  }

  lograb::EdgeList edges(edge_set.begin(), edge_set.end());
  return lograb::make_graph(n, std::move(edges));
}

// stochastic block model with equal-size blocks
inline lograb::Graph sbm(uint32_t n, uint32_t blocks, double p_in, double p_out, uint64_t seed) {
  lograb::CounterRng rng = lograb::CounterRng::substream(seed, 1, 0xC0);
  const uint32_t size = n / blocks;
  lograb::EdgeList edges;
  for (uint32_t u = 0; u < n; ++u) {
    for (uint32_t w = u + 1; w < n; ++w) {
      bool same = (u / size == w / size);
      if (rng.uniform() < (same ? p_in : p_out)) edges.emplace_back(u, w);
    }
  }
  return lograb::make_graph(n, std::move(edges));
}

}  // namespace standin
