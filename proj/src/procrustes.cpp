#include "lograb/procrustes.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lograb {

Eigen::MatrixXd orthogonal_procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("orthogonal_procrustes: shape mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * a,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().transpose();
}

namespace {

double median_of(std::vector<double> v) {
  const size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2) return *mid;
  return 0.5 * (*std::max_element(v.begin(), mid) + *mid);
}

}  // namespace

std::optional<RansacResult> ransac_procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                              int min_consensus, const RansacParams& params,
                                              CounterRng& rng) {
  const int m = static_cast<int>(a.rows());
  const int k = static_cast<int>(a.cols());
  if (b.rows() != m || b.cols() != k)
    throw std::invalid_argument("ransac_procrustes: shape mismatch");
  if (m < k + 1)
    throw std::invalid_argument("ransac_procrustes: need at least k+1 = " +
                                std::to_string(k + 1) + " rows, got " + std::to_string(m));
  if (params.iterations < 1)
    throw std::invalid_argument("ransac_procrustes: iterations must be positive");

  RansacStats stats;
  stats.iterations = params.iterations;
  std::vector<int> best_inliers;
  double best_tol = 0.0;
  double best_median = std::numeric_limits<double>::infinity();

  /* With a per-fit adaptive tolerance a garbage fit earns a huge tolerance and
   * would claim every row, so consensus size cannot rank candidates; adaptive
   * mode ranks by median row residual instead (least-median selection). A
   * caller-fixed tolerance keeps the classic largest-consensus rule. */
  const bool adaptive = params.inlier_tol <= 0.0;
  Eigen::MatrixXd sample_a(k + 1, k), sample_b(k + 1, k);
  for (int iter = 0; iter < params.iterations; ++iter) {
    std::vector<int> pick = rng.sample_indices(m, k + 1);
    for (int r = 0; r <= k; ++r) {
      sample_a.row(r) = a.row(pick[r]);
      sample_b.row(r) = b.row(pick[r]);
    }
    Eigen::MatrixXd q = orthogonal_procrustes(sample_a, sample_b);
    double sample_resid = (sample_b - sample_a * q).norm();
    if (sample_resid <= params.clean_tol) ++stats.clean_samples;

    Eigen::MatrixXd resid = b - a * q;
    std::vector<double> row_resid(m);
    for (int r = 0; r < m; ++r) row_resid[r] = resid.row(r).norm();
    double sigma_est = median_of(row_resid);
    double tol = params.inlier_tol;
    if (adaptive)
      tol = std::max(3.0 * sigma_est * std::sqrt(static_cast<double>(k)), params.tol_floor);
    std::vector<int> inliers;
    for (int r = 0; r < m; ++r)
      if (row_resid[r] <= tol) inliers.push_back(r);
    bool better = adaptive ? sigma_est < best_median : inliers.size() > best_inliers.size();
    if (better) {
      best_inliers = std::move(inliers);
      best_tol = tol;
      best_median = sigma_est;
    }
  }

  if (static_cast<int>(best_inliers.size()) < std::max(min_consensus, k + 1)) return std::nullopt;

  Eigen::MatrixXd ca(best_inliers.size(), k), cb(best_inliers.size(), k);
  for (size_t r = 0; r < best_inliers.size(); ++r) {
    ca.row(static_cast<int>(r)) = a.row(best_inliers[r]);
    cb.row(static_cast<int>(r)) = b.row(best_inliers[r]);
  }
  RansacResult result;
  result.q = orthogonal_procrustes(ca, cb);
  result.consensus = std::move(best_inliers);
  stats.best_tol = best_tol;
  result.stats = stats;
  return result;
}

}  // namespace lograb
