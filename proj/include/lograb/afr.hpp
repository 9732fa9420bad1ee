#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lograb/instance.hpp"
#include "lograb/patch.hpp"
#include "lograb/spectral.hpp"

namespace lograb {

struct AfrConfig {
  double t = 0.8;               // heat-kernel time
  double alpha = 0.7;           // fidelity mix between rho and entropy
  double s_min = 0.6;           // core gate on the fidelity score
  double delta_min = 0.1;       // core gate on the spectral gap
  double k_base = 5.0;          // adaptive-threshold base
  double gamma = -1.0;          // fidelity penalty slope; < 0 picks 30/70/140 by k
  int ransac_iters = 300;       // M
  double ransac_inlier_tol = 0.0;  // <= 0: adaptive per-fit tolerance
  double ransac_tol_floor = 1e-9;
  int cross_c0 = 2;             // co-occurrence vote threshold (strict >)
  double cross_kappa = 1.0;     // vote-to-probability sharpness
  int top_k_output = 5;         // per-node intra-island affinity filter
  int ba_max_iters = 200;
  double ba_rel_tol = 1e-8;
  uint64_t seed = 0;            // RANSAC sampling streams
};

double default_gamma(int k);

// max-gap split of the off-diagonal kernel entries (0.0 sentinel anchors the
// non-edge level); all-equal spreads below 1e-12 yield no edges
std::vector<std::pair<int, int>> threshold_kernel_edges(const Eigen::MatrixXd& h);

struct LocalRecon {
  std::vector<std::pair<int, int>> edges;  // local indices i < j
  std::vector<int> degrees;
};

LocalRecon local_reconstruct(const PatchObservation& obs, double t);

// max{k+1, ceil(k_base + gamma (1 - min(s_v, s_w)))}
int adaptive_threshold(double s_v, double s_w, int k, const AfrConfig& cfg);

struct CoreSelection {
  std::vector<SpectralQuantities> quantities;  // per patch
  std::vector<LocalRecon> recon;               // per patch
  std::vector<int> core;                       // gated patch indices, ascending
};

CoreSelection select_core(const std::vector<PatchObservation>& patches, const AfrConfig& cfg);

struct StitchRecord {
  int v = -1, w = -1;  // patch indices
  int overlap = 0;
  int d_adaptive = 0;
  int consensus = 0;
  bool accepted = false;
  std::string reason;
};

struct Island {
  std::vector<int> members;               // patch indices, ascending
  std::vector<Eigen::MatrixXd> rotations; // per member, K x K, patch -> island frame
  NodeSet nodes;
  EdgeList edges;                         // union of member local reconstructions
  Eigen::MatrixXd coords;                 // |nodes| x K fused embedding (row i = nodes[i])
};

// overlap rows of two member patches, padded to the common rotation width
struct StitchObs {
  int a = 0, b = 0;  // member positions within the island
  Eigen::MatrixXd pa, pb;
};

/* Riemannian gradient descent with Armijo backtracking on
 * sum ||pa R_a - pb R_b||_F^2 over O(K)^members (member 0 anchored).
 * Returns the objective trace; never increases it. */
std::vector<double> bundle_adjust(std::vector<Eigen::MatrixXd>& rotations,
                                  const std::vector<StitchObs>& stitches, const AfrConfig& cfg);

struct CrossEdge {
  uint32_t u = 0, w = 0;
  int votes = 0;
  double p = 0.0;
};

// co-occurrence votes over all original patches for node pairs no island contains together
std::vector<CrossEdge> cross_vote(const std::vector<NodeSet>& island_nodes,
                                  const std::vector<PatchObservation>& patches,
                                  const AfrConfig& cfg);

struct AfrResult {
  std::vector<Island> islands;
  std::vector<StitchRecord> audit;
  std::vector<std::vector<double>> ba_traces;
  std::vector<CrossEdge> cross_edges;
  EdgeList edges;   // final prediction, sorted unique
  NodeSet covered;  // union of island node sets
  int rotation_dim = 0;
  std::vector<std::string> warnings;
};

AfrResult run_afr(const InstanceArchive& archive, const AfrConfig& cfg);

}  // namespace lograb
