#pragma once

#include <Eigen/Dense>

namespace lograb {

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, orthonormal, canonical sign
};

inline constexpr int kDefaultQMax = 500;

/* Deterministic dense symmetric eigendecomposition: cyclic Jacobi up to 64x64,
 * Householder tridiagonalization + implicit-shift QL above. Sign convention:
 * the largest-magnitude entry of every eigenvector is positive (ties: first
 * such index). Throws std::invalid_argument when the matrix is asymmetric
 * beyond 1e-10 or its dimension exceeds q_max (the core patch size bound). */
EigenSystem symmetric_eigendecompose(const Eigen::MatrixXd& m, int q_max = kDefaultQMax);

// flip columns so the largest-magnitude entry of each is positive
void canonicalize_signs(Eigen::MatrixXd& vectors);

}  // namespace lograb
