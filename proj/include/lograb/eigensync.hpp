#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lograb/instance.hpp"
#include "lograb/patch.hpp"

namespace lograb {

struct EigenSyncConfig {
  double t = 0.8;           // heat-kernel time for the no-overlap fallback
  int k_nn = 10;            // cosine nearest neighbours per node
  int max_iters = 500;      // subspace-iteration cap
  double tol = 1e-8;        // subspace convergence tolerance
  int64_t mk_cap = 200000;  // stride-subsample patches above this m*k product
};

struct SyncPair {
  int i = 0, j = 0;   // patch positions, i < j
  int weight = 0;     // overlap size |S|
  Eigen::MatrixXd r;  // k x k rotation with P_i|S r ~ P_j|S
};

// relative rotations for every patch pair sharing at least two nodes
std::vector<SyncPair> pairwise_rotations(const std::vector<PatchObservation>& patches, int k);

struct EigenSyncResult {
  NodeSet covered;
  Eigen::MatrixXd embedding;               // |covered| x k synchronized coordinates
  EdgeList edges;
  std::vector<Eigen::MatrixXd> rotations;  // per synchronized patch, k x k
  int rotation_dim = 0;
  int pairs_used = 0;
  int iterations = 0;
  bool fallback_local = false;  // no usable overlaps: union of local reconstructions
  std::vector<std::string> warnings;
};

/* Spectral synchronization baseline: pairwise Procrustes rotations feed a
 * weighted block sync matrix; its top-k eigenspace (shifted subspace
 * iteration, Rayleigh-Ritz finish) yields per-patch rotations whose QR
 * factors align all patches; averaged rows + cosine kNN give the edges. */
EigenSyncResult run_eigensync(const InstanceArchive& archive, const EigenSyncConfig& cfg);

}  // namespace lograb
