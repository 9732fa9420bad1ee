#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lograb/instance.hpp"

namespace lograb {

struct DpParams {
  double epsilon = 2.0;  // +inf switches the mechanism off (identity release)
  double delta = 1e-5;
  double clip_norm = 1.0;     // R
  bool per_row_clip = false;  // default clips the whole matrix by Frobenius norm
  uint64_t seed = 0;
};

// sigma = R * sqrt(2 ln(1.25/delta)) / epsilon
double dp_sigma(double epsilon, double delta, double clip_norm);

// scale by min(1, R/norm); per_row applies the rule row-wise (L2) instead
void clip_embedding(Eigen::MatrixXd& p, double clip_norm, bool per_row);

/* Per-patch Gaussian mechanism: clip, then add entrywise N(0, sigma^2) noise
 * from a per-patch substream. Retained eigenvalues and lambda_{k+1} pass
 * through untouched. The manifest gains a "dp" block (params, sigma, formula,
 * and the guarantee's scope caveat). epsilon = inf releases the archive
 * unchanged apart from the manifest tag. */
InstanceArchive sanitize_archive(const InstanceArchive& archive, const DpParams& params);

}  // namespace lograb
