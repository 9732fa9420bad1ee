#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace lograb {

struct PatchObservation {
  std::vector<uint32_t> nodes;  // global ids, ascending; row i of embedding is nodes[i]
  Eigen::MatrixXd embedding;    // q x k_eff
  Eigen::VectorXd retained;     // k_eff retained eigenvalues
  double lambda_kp1 = 0.0;      // 0 sentinel when k_eff == q

  int q() const { return static_cast<int>(nodes.size()); }
  int k() const { return static_cast<int>(embedding.cols()); }
};

/* Binary payload, all little-endian:
 *   u32 q, u32 k, f64 lambda_{k+1}, u32 node_id[q], f64 retained[k],
 *   f64 embedding[q*k] row-major. */
std::string encode_patch(const PatchObservation& obs);
PatchObservation decode_patch(const std::string& bytes);

}  // namespace lograb
