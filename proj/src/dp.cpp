#include "lograb/dp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lograb/spectral.hpp"

namespace lograb {
namespace {

constexpr uint64_t kStreamDpNoise = 0xA4;

void validate(const DpParams& p) {
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("dp: epsilon must be positive");
  if (!(p.delta > 0.0) || !(p.delta < 1.0)) throw std::invalid_argument("dp: delta outside (0, 1)");
  if (!(p.clip_norm > 0.0)) throw std::invalid_argument("dp: clip norm must be positive");
}

}  // namespace

double dp_sigma(double epsilon, double delta, double clip_norm) {
  DpParams check;
  check.epsilon = epsilon;
  check.delta = delta;
  check.clip_norm = clip_norm;
  validate(check);
  if (std::isinf(epsilon)) return 0.0;
  return clip_norm * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

void clip_embedding(Eigen::MatrixXd& p, double clip_norm, bool per_row) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_embedding: norm must be positive");
  if (per_row) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double nrm = p.row(i).norm();
      if (nrm > clip_norm) p.row(i) *= clip_norm / nrm;
    }
  } else {
    const double nrm = p.norm();
    if (nrm > clip_norm) p *= clip_norm / nrm;
  }
}

InstanceArchive sanitize_archive(const InstanceArchive& archive, const DpParams& params) {
  validate(params);
  InstanceArchive out = archive;
  const bool off = std::isinf(params.epsilon);
  const double sigma = dp_sigma(params.epsilon, params.delta, params.clip_norm);
  if (!off) {
    for (size_t i = 0; i < out.patches.size(); ++i) {
      clip_embedding(out.patches[i].embedding, params.clip_norm, params.per_row_clip);
      CounterRng rng = CounterRng::substream(params.seed, i, kStreamDpNoise);
      add_gaussian_noise(out.patches[i].embedding, sigma, rng);
    }
  }
  nlohmann::json dp;
  dp["mechanism"] = "gaussian";
  dp["epsilon"] = off ? nlohmann::json("inf") : nlohmann::json(params.epsilon);
  dp["delta"] = params.delta;
  dp["clip_norm"] = params.clip_norm;
  dp["clip_granularity"] = params.per_row_clip ? "per-row" : "frobenius";
  dp["sigma"] = sigma;
  dp["seed"] = params.seed;
  dp["calibration"] = "sigma = R * sqrt(2 ln(1.25/delta)) / epsilon";
  dp["caveat"] =
      "per-embedding release guarantee only; this is not a node-level or "
      "edge-level differential-privacy guarantee on the underlying graph";
  out.manifest["dp"] = std::move(dp);
  return out;
}

}  // namespace lograb
