#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "lograb/eigen_solver.hpp"
#include "lograb/graph.hpp"
#include "lograb/rng.hpp"
#include "lograb/spectral.hpp"
#include "oracles.hpp"

using namespace lograb;

namespace {

// synthetic embedding with prescribed gap and truncation proxy at time t
TruncatedEmbedding synthetic_embedding(double delta, double eta, double t) {
  TruncatedEmbedding emb;
  emb.p = Eigen::MatrixXd::Identity(4, 2);
  double lambda_kp1 = -std::log(eta) / t;
  emb.retained = Eigen::VectorXd::Zero(2);
  emb.retained(1) = lambda_kp1 - delta;
  emb.lambda_kp1 = lambda_kp1;
  return emb;
}

}  // namespace

TEST_CASE("truncation keeps the bottom-k pairs and the next eigenvalue") {
  Graph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  Eigen::MatrixXd lap = normalized_laplacian(g, {0, 1, 2, 3});
  EigenSystem es = symmetric_eigendecompose(lap);
  TruncatedEmbedding emb = truncate_embedding(es, 2);
  CHECK(emb.k() == 2);
  CHECK(emb.q() == 4);
  CHECK(emb.retained(0) == doctest::Approx(es.values(0)));
  CHECK(emb.retained(1) == doctest::Approx(es.values(1)));
  CHECK(emb.lambda_kp1 == doctest::Approx(es.values(2)));
  CHECK((emb.p - es.vectors.leftCols(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("requesting k >= q keeps everything with a zero sentinel") {
  Graph g = make_graph(3, {{0, 1}, {1, 2}});
  EigenSystem es = symmetric_eigendecompose(normalized_laplacian(g, {0, 1, 2}));
  for (int k : {3, 10}) {
    TruncatedEmbedding emb = truncate_embedding(es, k);
    CHECK(emb.k() == 3);
    CHECK(emb.lambda_kp1 == 0.0);
  }
}

TEST_CASE("two-node heat kernel matches the closed form at t=0.8") {
  Graph g = make_graph(2, {{0, 1}});
  EigenSystem es = symmetric_eigendecompose(normalized_laplacian(g, {0, 1}));
  TruncatedEmbedding emb = truncate_embedding(es, 2);
  Eigen::MatrixXd h = truncated_heat_kernel(emb.p, emb.retained, 0.8);
  // (1 +- e^{-1.6}) / 2
  CHECK(h(0, 0) == doctest::Approx(0.6009482585).epsilon(1e-9));
  CHECK(h(0, 1) == doctest::Approx(0.3990517415).epsilon(1e-9));
  CHECK(h(1, 0) == doctest::Approx(h(0, 1)).epsilon(1e-12));
}

TEST_CASE("untruncated kernel equals the dense exponential oracle") {
  CounterRng rng(606);
  for (int trial = 0; trial < 8; ++trial) {
    uint32_t q = 4 + static_cast<uint32_t>(rng.uniform_u64(9));  // up to 12
    Graph g = oracles::random_connected_graph(rng, q, 0.3);
    NodeSet all;
    for (uint32_t v = 0; v < q; ++v) all.push_back(v);
    Eigen::MatrixXd lap = normalized_laplacian(g, all);
    EigenSystem es = symmetric_eigendecompose(lap);
    TruncatedEmbedding emb = truncate_embedding(es, static_cast<int>(q));
    Eigen::MatrixXd h = truncated_heat_kernel(emb.p, emb.retained, 0.8);
    Eigen::MatrixXd ref = oracles::full_heat_kernel(lap, 0.8);
    CHECK((h - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("degree entropy pools repeated degree values") {
  // 3-leaf star: value 3 with weight 1/4, value 1 with weight 3/4, over log 4
  std::vector<int> star{3, 1, 1, 1};
  CHECK(normalized_degree_entropy(star) == doctest::Approx(0.405639).epsilon(1e-5));
  std::vector<int> regular{2, 2, 2, 2};
  CHECK(normalized_degree_entropy(regular) == 0.0);
  std::vector<int> single{5};
  CHECK(normalized_degree_entropy(single) == 0.0);
  // all-distinct degrees maximize the pooled entropy at exactly 1
  std::vector<int> distinct{1, 2, 3, 4, 5};
  CHECK(normalized_degree_entropy(distinct) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("untruncated patches force rho to one with a degenerate gap") {
  Graph g = make_graph(3, {{0, 1}, {1, 2}});
  EigenSystem es = symmetric_eigendecompose(normalized_laplacian(g, {0, 1, 2}));
  TruncatedEmbedding emb = truncate_embedding(es, 3);
  SpectralQuantities sq = spectral_quantities(emb, {1, 2, 1}, 0.8, 0.7);
  CHECK(std::isinf(sq.delta));
  CHECK(sq.eta == doctest::Approx(1.0));
  CHECK(sq.rho == 1.0);
  CHECK(sq.score == doctest::Approx(0.7 + 0.3 * sq.entropy));
}

TEST_CASE("fidelity quantities follow their closed forms") {
  double t = 2.0;
  TruncatedEmbedding emb = synthetic_embedding(0.5, 0.125, t);
  SpectralQuantities sq = spectral_quantities(emb, {1, 2, 2, 1}, t, 0.7);
  CHECK(sq.delta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sq.eta == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(sq.rho == doctest::Approx(0.8).epsilon(1e-12));  // 0.5 / (0.5 + 0.125)
  double entropy = normalized_degree_entropy({1, 2, 2, 1});
  CHECK(sq.score == doctest::Approx(0.7 * 0.8 + 0.3 * entropy).epsilon(1e-12));
}

TEST_CASE("fidelity is monotone on a (gap, proxy) grid and bounded in [0,1]") {
  const double t = 0.8;
  const int cells = 12;
  std::vector<int> degs{1, 2, 2, 1};
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      double delta = 0.05 + 1.5 * i / (cells - 1);
      double eta = 0.05 + 0.9 * j / (cells - 1);
      SpectralQuantities sq =
          spectral_quantities(synthetic_embedding(delta, eta, t), degs, t, 0.7);
      CHECK(sq.score >= 0.0);
      CHECK(sq.score <= 1.0);
      if (i + 1 < cells) {
        double d2 = 0.05 + 1.5 * (i + 1) / (cells - 1);
        SpectralQuantities up =
            spectral_quantities(synthetic_embedding(d2, eta, t), degs, t, 0.7);
        CHECK(up.rho > sq.rho);  // strictly increasing in the gap
      }
      if (j + 1 < cells) {
        double e2 = 0.05 + 0.9 * (j + 1) / (cells - 1);
        SpectralQuantities right =
            spectral_quantities(synthetic_embedding(delta, e2, t), degs, t, 0.7);
        CHECK(right.rho < sq.rho);  // strictly decreasing in the proxy
      }
    }
  }
}

TEST_CASE("fidelity never drops as the gap widens along the coupled path") {
  // lambda_k fixed; growing the gap also shrinks the truncation proxy
  const double t = 0.8, lambda_k = 0.3;
  double prev = -1.0;
  for (int i = 0; i <= 40; ++i) {
    double delta = 0.01 + i * 0.05;
    TruncatedEmbedding emb;
    emb.p = Eigen::MatrixXd::Identity(4, 2);
    emb.retained = Eigen::VectorXd::Zero(2);
    emb.retained(1) = lambda_k;
    emb.lambda_kp1 = lambda_k + delta;
    SpectralQuantities sq = spectral_quantities(emb, {1, 2, 2, 1}, t, 0.7);
    CHECK(sq.score >= prev - 1e-15);
    prev = sq.score;
  }
}

TEST_CASE("noise injection is deterministic and leaves sigma=0 untouched") {
  Eigen::MatrixXd base = Eigen::MatrixXd::Constant(5, 3, 1.5);
  Eigen::MatrixXd a = base, b = base, c = base;
  CounterRng r1 = CounterRng::substream(9, 0, 0xA3);
  CounterRng r2 = CounterRng::substream(9, 0, 0xA3);
  add_gaussian_noise(a, 0.05, r1);
  add_gaussian_noise(b, 0.05, r2);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - base).cwiseAbs().maxCoeff() > 0.0);
  CounterRng r3 = CounterRng::substream(9, 0, 0xA3);
  CounterRng r4 = CounterRng::substream(9, 0, 0xA3);
  add_gaussian_noise(c, 0.0, r3);
  CHECK((c - base).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r3.next() == r4.next());  // sigma=0 consumed nothing
}

TEST_CASE("noise sample mean concentrates at zero") {
  const double sigma = 0.05;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1000, 1000);
  CounterRng rng = CounterRng::substream(123, 0, 0xA3);
  add_gaussian_noise(m, sigma, rng);
  CHECK(std::abs(m.mean()) < 3.0 * sigma / 1000.0);
}

TEST_CASE("proxy threshold closed forms") {
  CHECK(proxy_threshold(DecayKind::polynomial, 1.0, 0.5, 0.1) == 99);
  CHECK(proxy_threshold(DecayKind::polynomial, 1.0, 1.0, 0.1) == 9);
  CHECK(proxy_threshold(DecayKind::exponential, 1.0, 1.0, std::exp(-3.0)) == 2);
  CHECK(proxy_threshold(DecayKind::polynomial, 2.0, 1.0, 2.0) == 0);
  CHECK(proxy_threshold(DecayKind::polynomial, 2.0, 1.0, 5.0) == 0);
}

TEST_CASE("proxy threshold is the smallest level beating the decay bound") {
  CounterRng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    double c = 0.5 + 4.0 * rng.uniform();
    double alpha = 0.3 + 2.0 * rng.uniform();
    double eps = c * (0.001 + 0.998 * rng.uniform());
    for (DecayKind kind : {DecayKind::polynomial, DecayKind::exponential}) {
      auto bound = [&](double level) {
        return kind == DecayKind::polynomial ? c * std::pow(level, -alpha)
                                             : c * std::exp(-alpha * level);
      };
      int64_t level = proxy_threshold(kind, c, alpha, eps);
      REQUIRE(level >= 0);
      CHECK(bound(static_cast<double>(level + 1)) <= eps * (1.0 + 1e-7));
      if (level > 0) CHECK(bound(static_cast<double>(level)) > eps * (1.0 - 1e-7));
    }
  }
}
