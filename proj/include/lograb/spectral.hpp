#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "lograb/eigen_solver.hpp"
#include "lograb/rng.hpp"

namespace lograb {

struct TruncatedEmbedding {
  Eigen::MatrixXd p;        // q x k_eff, bottom-k eigenvectors
  Eigen::VectorXd retained; // k_eff retained eigenvalues, ascending
  double lambda_kp1 = 0.0;  // 0 sentinel when k_eff == q
  int k() const { return static_cast<int>(p.cols()); }
  int q() const { return static_cast<int>(p.rows()); }
};

/* Keep the bottom k eigenpairs. k >= q keeps everything and sets the
 * lambda_{k+1} sentinel to 0 (no truncation error). */
TruncatedEmbedding truncate_embedding(const EigenSystem& es, int k);

// H = P diag(exp(-lambda t)) P^T, symmetrized; t must be positive
Eigen::MatrixXd truncated_heat_kernel(const Eigen::MatrixXd& p, const Eigen::VectorXd& retained,
                                      double t);

struct SpectralQuantities {
  double delta = 0.0;    // spectral gap lambda_{k+1} - lambda_k (+inf when untruncated)
  double eta = 0.0;      // truncation proxy exp(-t lambda_{k+1})
  double rho = 0.0;      // gap-to-truncation ratio delta / (delta + eta)
  double entropy = 0.0;  // normalized degree entropy of the local reconstruction
  double score = 0.0;    // alpha * rho + (1 - alpha) * entropy
};

/* Entropy over *unique* degree values: p(d) = fraction of nodes whose degree
 * equals d, normalized by log(q). Single-node patches score 0. */
double normalized_degree_entropy(const std::vector<int>& degree_per_node);

SpectralQuantities spectral_quantities(const TruncatedEmbedding& emb,
                                       const std::vector<int>& local_degrees, double t,
                                       double alpha);

// entrywise N(0, sigma^2); sigma = 0 leaves the matrix and the rng untouched
void add_gaussian_noise(Eigen::MatrixXd& m, double sigma, CounterRng& rng);

enum class DecayKind { polynomial, exponential };

/* Smallest truncation level with residual proxy below eps for a spectral decay
 * bound: C (l+1)^{-alpha} (polynomial) or C e^{-alpha l} (exponential).
 * eps >= C yields 0. */
int64_t proxy_threshold(DecayKind kind, double c, double alpha, double eps);

}  // namespace lograb
