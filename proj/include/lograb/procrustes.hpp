#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lograb/rng.hpp"

namespace lograb {

/* Q = argmin_{Q in O(k)} ||B - A Q||_F via SVD of B^T A = U S V^T, Q = V U^T,
 * so A Q ~ B. Planting B = A Q0 returns Q0. Reflections allowed (full O(k)). */
Eigen::MatrixXd orthogonal_procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct RansacParams {
  int iterations = 300;
  double inlier_tol = 0.0;   // <= 0: adaptive 3 * median-row-residual * sqrt(k) per fit
  double tol_floor = 1e-9;   // lower bound on the adaptive tolerance
  double clean_tol = 1e-9;   // sample-fit residual below this counts as a clean draw
};

struct RansacStats {
  int iterations = 0;
  int clean_samples = 0;  // minimal fits with near-zero sample residual
  double best_tol = 0.0;
};

struct RansacResult {
  Eigen::MatrixXd q;           // refit on the consensus rows
  std::vector<int> consensus;  // row indices, ascending
  RansacStats stats;
};

/* Minimal samples of k+1 rows, inliers by per-row residual, refit on the
 * selected consensus. A fixed inlier_tol keeps the largest consensus across
 * samples; the adaptive tolerance ranks samples by median row residual
 * (least-median selection) so inflated tolerances from contaminated fits
 * cannot buy consensus. Returns nothing when the selected fit's consensus
 * misses min_consensus. Throws when fewer than k+1 rows are available. */
std::optional<RansacResult> ransac_procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                              int min_consensus, const RansacParams& params,
                                              CounterRng& rng);

}  // namespace lograb
