#include "lograb/spectral.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace lograb {

TruncatedEmbedding truncate_embedding(const EigenSystem& es, int k) {
  if (k < 1) throw std::invalid_argument("truncate_embedding: k must be positive");
  const int q = static_cast<int>(es.values.size());
  TruncatedEmbedding emb;
  if (k >= q) {
    emb.p = es.vectors;
    emb.retained = es.values;
    emb.lambda_kp1 = 0.0;  // sentinel: no truncation
  } else {
    emb.p = es.vectors.leftCols(k);
    emb.retained = es.values.head(k);
    emb.lambda_kp1 = es.values(k);
  }
  return emb;
}

Eigen::MatrixXd truncated_heat_kernel(const Eigen::MatrixXd& p, const Eigen::VectorXd& retained,
                                      double t) {
  if (!(t > 0.0)) throw std::invalid_argument("truncated_heat_kernel: t must be positive");
  if (p.cols() != retained.size())
    throw std::invalid_argument("truncated_heat_kernel: eigenvalue count mismatch");
  Eigen::VectorXd w = (-t * retained.array()).exp().matrix();
  Eigen::MatrixXd h = p * w.asDiagonal() * p.transpose();
  return 0.5 * (h + h.transpose());
}

double normalized_degree_entropy(const std::vector<int>& degree_per_node) {
  const size_t q = degree_per_node.size();
  if (q <= 1) return 0.0;
  std::map<int, int> counts;
  for (int d : degree_per_node) ++counts[d];
  double h = 0.0;
  for (auto& [d, c] : counts) {
    double prob = static_cast<double>(c) / static_cast<double>(q);
    h -= prob * std::log(prob);
  }
  return h / std::log(static_cast<double>(q));
}

SpectralQuantities spectral_quantities(const TruncatedEmbedding& emb,
                                       const std::vector<int>& local_degrees, double t,
                                       double alpha) {
  if (!(t > 0.0)) throw std::invalid_argument("spectral_quantities: t must be positive");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("spectral_quantities: alpha outside [0, 1]");
  SpectralQuantities sq;
  if (emb.k() >= emb.q()) {
    // untruncated patch: degenerate gap, rho pinned to 1
    sq.delta = std::numeric_limits<double>::infinity();
    sq.eta = 1.0;
    sq.rho = 1.0;
  } else {
    sq.delta = emb.lambda_kp1 - emb.retained(emb.k() - 1);
    sq.eta = std::exp(-t * emb.lambda_kp1);
    sq.rho = (sq.delta == 0.0 && sq.eta == 0.0) ? 0.0 : sq.delta / (sq.delta + sq.eta);
  }
  sq.entropy = normalized_degree_entropy(local_degrees);
  sq.score = alpha * sq.rho + (1.0 - alpha) * sq.entropy;
  return sq;
}

void add_gaussian_noise(Eigen::MatrixXd& m, double sigma, CounterRng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: negative sigma");
  if (sigma == 0.0) return;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) += sigma * rng.normal();
}

int64_t proxy_threshold(DecayKind kind, double c, double alpha, double eps) {
  if (!(c > 0.0)) throw std::invalid_argument("proxy_threshold: C must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("proxy_threshold: alpha must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("proxy_threshold: eps must be positive");
  if (eps >= c) return 0;
  double raw;
  if (kind == DecayKind::polynomial)
    raw = std::pow(c / eps, 1.0 / alpha);
  else
    raw = std::log(c / eps) / alpha;
  // guard against representation excess like (1/0.1)^2 = 100.0000000000004
  double guarded = raw - 1e-9 * std::max(1.0, std::abs(raw));
  auto level = static_cast<int64_t>(std::ceil(guarded)) - 1;
  return std::max<int64_t>(level, 0);
}

}  // namespace lograb
