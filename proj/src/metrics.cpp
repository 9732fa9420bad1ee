#include "lograb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lograb {
namespace {

uint64_t pair_key(uint32_t u, uint32_t w) { return (static_cast<uint64_t>(u) << 32) | w; }

NodeSet union_of(const std::vector<NodeSet>& islands) {
  NodeSet covered;
  for (const auto& isl : islands) {
    NodeSet merged;
    std::set_union(covered.begin(), covered.end(), isl.begin(), isl.end(),
                   std::back_inserter(merged));
    covered = std::move(merged);
  }
  return covered;
}

// per node, the sorted list of islands containing it
std::unordered_map<uint32_t, std::vector<int>> membership_of(const std::vector<NodeSet>& islands) {
  std::unordered_map<uint32_t, std::vector<int>> membership;
  for (size_t s = 0; s < islands.size(); ++s)
    for (uint32_t u : islands[s]) membership[u].push_back(static_cast<int>(s));
  return membership;
}

// islands holding both endpoints (empty -> boundary pair)
std::vector<int> shared_islands(const std::unordered_map<uint32_t, std::vector<int>>& membership,
                                uint32_t u, uint32_t w) {
  std::vector<int> shared;
  auto iu = membership.find(u);
  auto iw = membership.find(w);
  if (iu == membership.end() || iw == membership.end()) return shared;
  std::set_intersection(iu->second.begin(), iu->second.end(), iw->second.begin(),
                        iw->second.end(), std::back_inserter(shared));
  return shared;
}

EdgeList canonical_edges(const EdgeList& edges) {
  EdgeList out;
  out.reserve(edges.size());
  for (const auto& [u, w] : edges) {
    if (u == w) throw std::invalid_argument("edge_metrics: self-loop in prediction");
    out.emplace_back(std::min(u, w), std::max(u, w));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

EdgeMetrics edge_metrics(const Graph& truth, const EdgeList& predicted,
                         const std::vector<NodeSet>& islands) {
  NodeSet covered = union_of(islands);
  for (uint32_t u : covered)
    if (u >= truth.n) throw std::invalid_argument("edge_metrics: island node outside the graph");
  EdgeList pred = canonical_edges(predicted);
  for (const auto& [u, w] : pred)
    if (!std::binary_search(covered.begin(), covered.end(), u) ||
        !std::binary_search(covered.begin(), covered.end(), w))
      throw std::invalid_argument("edge_metrics: predicted edge leaves the covered node set");

  EdgeMetrics m;
  m.node_coverage = truth.n == 0 ? 0.0
                                 : static_cast<double>(covered.size()) / static_cast<double>(truth.n);

  std::unordered_set<uint64_t> pred_set;
  pred_set.reserve(pred.size() * 2);
  for (const auto& [u, w] : pred) pred_set.insert(pair_key(u, w));

  auto membership = membership_of(islands);
  std::vector<long> island_truth(islands.size(), 0);
  std::vector<long> island_hit(islands.size(), 0);
  long induced = 0, tp = 0, boundary = 0;
  for (const auto& [u, w] : truth.edges) {
    if (!std::binary_search(covered.begin(), covered.end(), u) ||
        !std::binary_search(covered.begin(), covered.end(), w))
      continue;
    ++induced;
    const bool hit = pred_set.count(pair_key(u, w)) > 0;
    if (hit) ++tp;
    std::vector<int> shared = shared_islands(membership, u, w);
    if (shared.empty()) {
      ++boundary;
    } else {
      for (int s : shared) {
        ++island_truth[static_cast<size_t>(s)];
        if (hit) ++island_hit[static_cast<size_t>(s)];
      }
    }
  }

  m.true_positives = tp;
  m.predicted_count = static_cast<long>(pred.size());
  m.truth_induced_count = induced;
  m.precision = pred.empty() ? 1.0 : static_cast<double>(tp) / static_cast<double>(pred.size());
  m.recall = induced == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(induced);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);

  long weight_sum = 0;
  double weighted = 0.0;
  for (size_t s = 0; s < islands.size(); ++s) {
    if (island_truth[s] == 0) continue;  // excluded from sum and denominator
    weight_sum += island_truth[s];
    weighted += static_cast<double>(island_hit[s]);
  }
  if (weight_sum == 0) {
    m.island_cohesion = 1.0;
    m.cohesion_undefined = true;
  } else {
    m.island_cohesion = weighted / static_cast<double>(weight_sum);
  }
  m.boundary_ratio = induced == 0 ? 0.0 : static_cast<double>(boundary) / static_cast<double>(induced);
  return m;
}

BoundsCheck cohesion_recall_bounds_check(const Graph& truth, const EdgeList& predicted,
                                         const std::vector<NodeSet>& islands) {
  EdgeMetrics m = edge_metrics(truth, predicted, islands);
  BoundsCheck b;
  b.lower = (1.0 - m.boundary_ratio) * m.island_cohesion;
  b.upper = m.boundary_ratio + (1.0 - m.boundary_ratio) * m.island_cohesion;
  b.recall = m.recall;
  b.ok = b.lower - 1e-12 <= m.recall && m.recall <= b.upper + 1e-12;
  return b;
}

LinkEvalSet build_link_eval(const Graph& truth, const std::vector<NodeSet>& islands,
                            CounterRng& rng) {
  LinkEvalSet set;
  if (islands.size() < 2) return set;
  NodeSet covered = union_of(islands);
  auto membership = membership_of(islands);

  std::unordered_set<uint64_t> truth_set;
  for (const auto& [u, w] : truth.edges) {
    if (!std::binary_search(covered.begin(), covered.end(), u) ||
        !std::binary_search(covered.begin(), covered.end(), w))
      continue;
    truth_set.insert(pair_key(u, w));
    if (shared_islands(membership, u, w).empty()) set.positives.emplace_back(u, w);
  }
  if (set.positives.empty()) return set;

  const size_t want = set.positives.size();
  std::unordered_set<uint64_t> chosen;
  const size_t nc = covered.size();
  // rejection sampling first; a deterministic full enumeration backstops
  // dense or tiny instances where misses dominate
  const size_t attempt_budget = 200 * want + 10000;
  for (size_t attempt = 0; attempt < attempt_budget && set.negatives.size() < want; ++attempt) {
    uint32_t u = covered[static_cast<size_t>(rng.uniform_u64(nc))];
    uint32_t w = covered[static_cast<size_t>(rng.uniform_u64(nc))];
    if (u == w) continue;
    if (u > w) std::swap(u, w);
    uint64_t key = pair_key(u, w);
    if (truth_set.count(key) || chosen.count(key)) continue;
    if (!shared_islands(membership, u, w).empty()) continue;
    chosen.insert(key);
    set.negatives.emplace_back(u, w);
  }
  if (set.negatives.size() < want) {
    EdgeList eligible;
    for (size_t i = 0; i < nc; ++i)
      for (size_t j = i + 1; j < nc; ++j) {
        uint32_t u = covered[i], w = covered[j];
        uint64_t key = pair_key(u, w);
        if (truth_set.count(key) || chosen.count(key)) continue;
        if (!shared_islands(membership, u, w).empty()) continue;
        eligible.emplace_back(u, w);
      }
    const size_t missing = want - set.negatives.size();
    if (eligible.size() < missing) {
      set.positives.clear();
      set.negatives.clear();
      return set;  // not enough crossing non-edges: inapplicable
    }
    for (uint32_t idx : rng.sample_without_replacement(static_cast<uint32_t>(eligible.size()),
                                                       static_cast<uint32_t>(missing)))
      set.negatives.push_back(eligible[idx]);
  }
  std::sort(set.negatives.begin(), set.negatives.end());
  set.applicable = true;
  return set;
}

double auroc(const std::vector<double>& positive_scores,
             const std::vector<double>& negative_scores) {
  if (positive_scores.empty() || negative_scores.empty())
    throw std::invalid_argument("auroc: both classes must be nonempty");
  std::vector<std::pair<double, int>> all;
  all.reserve(positive_scores.size() + negative_scores.size());
  for (double s : positive_scores) all.emplace_back(s, 1);
  for (double s : negative_scores) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t r = i; r < j; ++r)
      if (all[r].second == 1) rank_sum_pos += midrank;
    i = j;
  }
  const auto np = static_cast<double>(positive_scores.size());
  const auto nn = static_cast<double>(negative_scores.size());
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace lograb
