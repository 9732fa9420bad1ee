#pragma once

#include <vector>

#include "lograb/graph.hpp"
#include "lograb/rng.hpp"

namespace lograb {

struct EdgeMetrics {
  double node_coverage = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double island_cohesion = 0.0;
  double boundary_ratio = 0.0;
  bool cohesion_undefined = false;  // no island had internal truth edges
  long true_positives = 0;
  long predicted_count = 0;
  long truth_induced_count = 0;  // truth edges induced on the covered nodes
};

/* Coverage, precision/recall/F1 against truth edges induced on the covered
 * nodes (the union of the island node sets), edge-weighted within-island
 * recall (cohesion) and the boundary ratio. Predicted edges must stay inside
 * the covered set. Islands with no internal truth edges are excluded from the
 * cohesion average; when every island is excluded the cohesion reports 1 with
 * the undefined flag raised. */
EdgeMetrics edge_metrics(const Graph& truth, const EdgeList& predicted,
                         const std::vector<NodeSet>& islands);

struct BoundsCheck {
  bool ok = false;
  double lower = 0.0;  // (1 - rho_B) * cohesion
  double upper = 0.0;  // rho_B + (1 - rho_B) * cohesion
  double recall = 0.0;
};

// recall must sit between the cohesion-derived bounds (1e-12 slack)
BoundsCheck cohesion_recall_bounds_check(const Graph& truth, const EdgeList& predicted,
                                         const std::vector<NodeSet>& islands);

struct LinkEvalSet {
  EdgeList positives;  // true edges crossing islands
  EdgeList negatives;  // equal-size sample of absent crossing pairs
  bool applicable = false;
};

/* Positives: truth edges inside the covered set that no island contains
 * whole. Negatives: equal-size uniform sample (without replacement) of
 * crossing non-edges. Fewer than two islands, or no crossing truth edge,
 * or not enough crossing non-edges marks the set inapplicable. */
LinkEvalSet build_link_eval(const Graph& truth, const std::vector<NodeSet>& islands,
                            CounterRng& rng);

// rank-based AUROC with midrank tie handling; throws when a class is empty
double auroc(const std::vector<double>& positive_scores,
             const std::vector<double>& negative_scores);

}  // namespace lograb
