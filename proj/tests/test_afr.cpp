#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "lograb/afr.hpp"
#include "lograb/eigen_solver.hpp"
#include "lograb/graph.hpp"
#include "lograb/instance.hpp"
#include "lograb/procrustes.hpp"
#include "lograb/rng.hpp"
#include "lograb/spectral.hpp"
#include "oracles.hpp"

using namespace lograb;

namespace {

Graph path_graph(uint32_t n) {
  EdgeList e;
  for (uint32_t v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return make_graph(n, e);
}

Graph cycle_graph(uint32_t n) {
  EdgeList e;
  for (uint32_t v = 0; v < n; ++v) e.emplace_back(v, (v + 1) % n);
  return make_graph(n, e);
}

Graph complete_graph(uint32_t n) {
  EdgeList e;
  for (uint32_t u = 0; u < n; ++u)
    for (uint32_t w = u + 1; w < n; ++w) e.emplace_back(u, w);
  return make_graph(n, e);
}

// exact patch observation: full induced spectrum of the node set
PatchObservation observe(const Graph& g, const NodeSet& nodes, int k) {
  EigenSystem es = symmetric_eigendecompose(normalized_laplacian(g, nodes));
  TruncatedEmbedding emb = truncate_embedding(es, k);
  PatchObservation obs;
  obs.nodes = nodes;
  obs.embedding = emb.p;
  obs.retained = emb.retained;
  obs.lambda_kp1 = emb.lambda_kp1;
  return obs;
}

InstanceArchive archive_of(const Graph& g, std::vector<PatchObservation> patches) {
  InstanceArchive archive;
  NodeSet covered;
  for (const auto& p : patches) {
    covered.insert(covered.end(), p.nodes.begin(), p.nodes.end());
  }
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  archive.observed = covered;
  archive.patches = std::move(patches);
  archive.manifest["n"] = g.n;
  return archive;
}

std::vector<std::pair<int, int>> sorted_pairs(std::vector<std::pair<int, int>> v) {
  std::sort(v.begin(), v.end());
  return v;
}

EdgeList graph_edges(const Graph& g) { return g.edges; }

}  // namespace

TEST_CASE("kernel thresholding splits edge and non-edge levels") {
  Graph p3 = path_graph(3);
  PatchObservation obs = observe(p3, {0, 1, 2}, 3);
  Eigen::MatrixXd h = truncated_heat_kernel(obs.embedding, obs.retained, 0.8);
  auto edges = sorted_pairs(threshold_kernel_edges(h));
  std::vector<std::pair<int, int>> want{{0, 1}, {1, 2}};
  CHECK(edges == want);
}

TEST_CASE("complete-graph kernels keep all edges via the zero anchor") {
  Graph k4 = complete_graph(4);
  PatchObservation obs = observe(k4, {0, 1, 2, 3}, 4);
  Eigen::MatrixXd h = truncated_heat_kernel(obs.embedding, obs.retained, 0.8);
  auto edges = threshold_kernel_edges(h);
  CHECK(edges.size() == 6);
}

TEST_CASE("kernels at the non-edge level produce no edges") {
  CHECK(threshold_kernel_edges(Eigen::MatrixXd::Zero(3, 3)).empty());
  CHECK(threshold_kernel_edges(Eigen::MatrixXd::Ones(1, 1)).empty());
  // a constant positive off-diagonal sits one gap above the zero anchor:
  // that is the clique pattern, not the empty one
  CHECK(threshold_kernel_edges(Eigen::MatrixXd::Constant(4, 4, 0.25)).size() == 6);
}

TEST_CASE("noiseless untruncated patches reconstruct exactly") {
  for (const Graph& g : {path_graph(4), cycle_graph(5), complete_graph(3),
                         make_graph(4, {{0, 1}, {0, 2}, {0, 3}})}) {
    NodeSet all;
    for (uint32_t v = 0; v < g.n; ++v) all.push_back(v);
    PatchObservation obs = observe(g, all, static_cast<int>(g.n));
    LocalRecon rec = local_reconstruct(obs, 0.8);
    EdgeList got;
    for (auto& [i, j] : rec.edges)
      got.emplace_back(static_cast<uint32_t>(i), static_cast<uint32_t>(j));
    CHECK(got == graph_edges(g));
    for (uint32_t v = 0; v < g.n; ++v)
      CHECK(rec.degrees[v] == static_cast<int>(g.degree(v)));
  }
}

TEST_CASE("adaptive threshold closed forms and the k+1 floor") {
  AfrConfig cfg;
  CHECK(default_gamma(16) == 30.0);
  CHECK(default_gamma(24) == 30.0);
  CHECK(default_gamma(32) == 70.0);
  CHECK(default_gamma(48) == 70.0);
  CHECK(default_gamma(64) == 140.0);
  CHECK(adaptive_threshold(0.6, 0.9, 16, cfg) == 17);  // ceil(5 + 30*0.4)
  CHECK(adaptive_threshold(0.6, 0.8, 32, cfg) == 33);  // ceil(5 + 70*0.4)
  CHECK(adaptive_threshold(1.0, 1.0, 16, cfg) == 17);  // floor k+1 binds
  cfg.gamma = 30.0;
  CHECK(adaptive_threshold(0.5, 0.7, 4, cfg) == 20);  // ceil(5 + 30*0.5)
}

TEST_CASE("core gate drops zero-gap patches and keeps untruncated ones") {
  Graph c6 = cycle_graph(6);
  NodeSet all{0, 1, 2, 3, 4, 5};
  // C6 at k=2: the retained/discarded eigenvalues coincide, so the gap is 0
  PatchObservation truncated = observe(c6, all, 2);
  PatchObservation full = observe(c6, all, 6);
  AfrConfig cfg;
  CoreSelection sel = select_core({truncated, full}, cfg);
  REQUIRE(sel.quantities.size() == 2);
  CHECK(sel.quantities[0].delta == doctest::Approx(0.0).scale(1.0));
  CHECK(sel.core == std::vector<int>{1});
  // untruncated: rho forced to 1, 2-regular degrees give zero entropy
  CHECK(sel.quantities[1].rho == 1.0);
  CHECK(sel.quantities[1].score == doctest::Approx(0.7));
}

TEST_CASE("stitching undoes a planted frame ambiguity") {
  // the same window observed twice, once through a planted O(k) rotation:
  // exactly the ambiguity the aligner must resolve
  Graph p6 = path_graph(6);
  NodeSet all{0, 1, 2, 3, 4, 5};
  PatchObservation left = observe(p6, all, 3);
  PatchObservation right = left;
  CounterRng rng(606);
  Eigen::MatrixXd q0 = oracles::random_orthogonal(rng, 3);
  right.embedding = left.embedding * q0;
  AfrConfig cfg;
  cfg.k_base = 1.0;
  cfg.gamma = 1.0;
  cfg.delta_min = 0.0;
  cfg.s_min = 0.0;
  AfrResult res = run_afr(archive_of(p6, {left, right}), cfg);
  REQUIRE(res.islands.size() == 1);
  CHECK(res.islands[0].members == std::vector<int>{0, 1});
  CHECK(res.islands[0].nodes == all);
  CHECK(res.covered == all);
  CHECK(res.islands[0].coords.rows() == 6);
  bool accepted = false;
  for (const auto& rec : res.audit)
    if (rec.accepted) {
      accepted = true;
      CHECK(rec.overlap == 6);
      CHECK(rec.consensus >= rec.d_adaptive);
    }
  CHECK(accepted);
  // member rotations must map both copies onto one coherent island frame
  const Island& isl = res.islands[0];
  Eigen::MatrixXd a = left.embedding * isl.rotations[0];
  Eigen::MatrixXd b = right.embedding * isl.rotations[1];
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  // the island kernel is rotation-invariant, so the edges match the window
  CHECK(res.islands[0].edges == graph_edges(p6));
}

TEST_CASE("overlap below the adaptive threshold is audited, not stitched") {
  Graph p6 = path_graph(6);
  PatchObservation left = observe(p6, {0, 1, 2, 3}, 3);
  PatchObservation right = observe(p6, {3, 4, 5}, 3);
  AfrConfig cfg;
  cfg.s_min = 0.0;
  cfg.delta_min = 0.0;
  AfrResult res = run_afr(archive_of(p6, {left, right}), cfg);
  CHECK(res.islands.size() == 2);
  REQUIRE(res.audit.size() == 1);
  CHECK(!res.audit[0].accepted);
  CHECK(res.audit[0].reason == "overlap below adaptive threshold");
}

TEST_CASE("an empty core is reported instead of crashing") {
  Graph c6 = cycle_graph(6);
  PatchObservation truncated = observe(c6, {0, 1, 2, 3, 4, 5}, 2);
  AfrConfig cfg;
  AfrResult res = run_afr(archive_of(c6, {truncated}), cfg);
  CHECK(res.islands.empty());
  CHECK(res.edges.empty());
  REQUIRE(!res.warnings.empty());
  CHECK(res.warnings[0].find("core fidelity gate") != std::string::npos);
}

TEST_CASE("bundle adjustment never increases the objective") {
  CounterRng rng(808);
  for (int trial = 0; trial < 25; ++trial) {
    int k = 3, members = 4;
    std::vector<Eigen::MatrixXd> rot;
    for (int i = 0; i < members; ++i) rot.push_back(oracles::random_orthogonal(rng, k));
    std::vector<StitchObs> stitches;
    for (int i = 0; i + 1 < members; ++i) {
      StitchObs s;
      s.a = i;
      s.b = i + 1;
      s.pa = oracles::random_matrix(rng, 6, k);
      s.pb = oracles::random_matrix(rng, 6, k);
      stitches.push_back(std::move(s));
    }
    AfrConfig cfg;
    auto trace = bundle_adjust(rot, stitches, cfg);
    REQUIRE(trace.size() >= 1);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
    for (const auto& r : rot) {
      Eigen::MatrixXd gram = r.transpose() * r;
      CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("a consistent start stays at zero objective") {
  CounterRng rng(809);
  int k = 3;
  Eigen::MatrixXd x = oracles::random_matrix(rng, 8, k);
  std::vector<Eigen::MatrixXd> g;
  for (int i = 0; i < 3; ++i) g.push_back(oracles::random_orthogonal(rng, k));
  std::vector<StitchObs> stitches;
  for (int i = 0; i + 1 < 3; ++i) {
    StitchObs s;
    s.a = i;
    s.b = i + 1;
    s.pa = x * g[i];      // patch frames of a common global block
    s.pb = x * g[i + 1];
    stitches.push_back(std::move(s));
  }
  // start at the planted solution R_i = G_i^T (anchored by G_0)
  std::vector<Eigen::MatrixXd> rot;
  for (int i = 0; i < 3; ++i) rot.push_back(g[i].transpose() * g[0]);
  AfrConfig cfg;
  auto trace = bundle_adjust(rot, stitches, cfg);
  CHECK(trace.back() <= 1e-12);
}

TEST_CASE("single-stitch descent reaches the closed-form optimum") {
  CounterRng rng(810);
  int k = 3;
  std::vector<Eigen::MatrixXd> rot{Eigen::MatrixXd::Identity(k, k),
                                   Eigen::MatrixXd::Identity(k, k)};
  StitchObs s;
  s.a = 0;
  s.b = 1;
  s.pa = oracles::random_matrix(rng, 10, k);
  s.pb = s.pa * oracles::random_orthogonal(rng, k);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < k; ++j) s.pb(i, j) += 0.01 * rng.normal();
  AfrConfig cfg;
  cfg.ba_max_iters = 5000;
  cfg.ba_rel_tol = 1e-15;
  auto trace = bundle_adjust(rot, {s}, cfg);
  Eigen::MatrixXd best = orthogonal_procrustes(s.pb, s.pa);
  double optimum = (s.pa - s.pb * best).squaredNorm();
  CHECK(trace.back() >= optimum - 1e-12);
  CHECK(trace.back() <= optimum + 1e-9);
}

TEST_CASE("cross votes count co-occurrences strictly above the threshold") {
  std::vector<NodeSet> islands{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  Graph dummy = path_graph(10);
  auto patch_with = [&](NodeSet nodes) { return observe(dummy, nodes, 2); };
  std::vector<PatchObservation> patches;
  // (2,9) co-occurs four times, (3,5) twice, (0,1) lives inside one island
  for (int i = 0; i < 4; ++i) patches.push_back(patch_with({2, 6 - static_cast<uint32_t>(i % 2), 9}));
  patches.push_back(patch_with({3, 5}));
  patches.push_back(patch_with({3, 5}));
  patches.push_back(patch_with({0, 1}));
  AfrConfig cfg;
  auto votes = cross_vote(islands, patches, cfg);
  REQUIRE(votes.size() >= 1);
  bool found = false;
  for (const auto& v : votes) {
    CHECK(!(v.u == 3 && v.w == 5));  // exactly C0 votes: strict threshold
    CHECK(!(v.u == 0 && v.w == 1));  // same island
    if (v.u == 2 && v.w == 9) {
      found = true;
      CHECK(v.votes == 4);
      CHECK(v.p == doctest::Approx(0.8807970779778823).epsilon(1e-12));
    }
  }
  CHECK(found);
}

TEST_CASE("uncovered endpoints never receive cross votes") {
  std::vector<NodeSet> islands{{0, 1}, {2, 3}};
  Graph dummy = path_graph(6);
  std::vector<PatchObservation> patches;
  for (int i = 0; i < 5; ++i) {
    PatchObservation obs = observe(dummy, {1, 5}, 2);  // node 5 is in no island
    patches.push_back(obs);
  }
  AfrConfig cfg;
  CHECK(cross_vote(islands, patches, cfg).empty());
}

TEST_CASE("per-node affinity filter keeps either-endpoint survivors") {
  // 9-leaf star: the hub's own list holds only 5 edges, but every leaf keeps
  // its hub edge, so the whole star survives the filter
  Graph star = make_graph(10, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5},
                               {0, 6}, {0, 7}, {0, 8}, {0, 9}});
  NodeSet all;
  for (uint32_t v = 0; v < 10; ++v) all.push_back(v);
  PatchObservation obs = observe(star, all, 10);
  AfrConfig cfg;
  AfrResult res = run_afr(archive_of(star, {obs}), cfg);
  CHECK(res.edges == graph_edges(star));
}

TEST_CASE("equal-affinity ties resolve by node id in the top-k filter") {
  /* Hand-built embedding: rows 0..6 identical, row 7 orthogonal. The kernel
   * thresholds to a 7-clique on 0..6, the coordinate ties are bit-exact
   * (duplicate rows make the affinities collapse to a single value), so each
   * clique member keeps its five smallest-id partners and only edge (5,6)
   * misses both endpoints' lists. */
  PatchObservation obs;
  for (uint32_t v = 0; v < 8; ++v) obs.nodes.push_back(v);
  obs.embedding = Eigen::MatrixXd::Zero(8, 2);
  for (int r = 0; r < 7; ++r) obs.embedding(r, 0) = 1.0;
  obs.embedding(7, 1) = 1.0;
  obs.retained = Eigen::Vector2d(0.0, 0.0);
  obs.lambda_kp1 = 5.0;  // large gap: passes the default fidelity gate
  Graph k8 = complete_graph(8);
  AfrConfig cfg;
  AfrResult res = run_afr(archive_of(k8, {obs}), cfg);
  REQUIRE(res.islands.size() == 1);
  CHECK(res.islands[0].edges.size() == 21);  // clique on 0..6 before the filter
  CHECK(res.edges.size() == 20);
  for (auto& [u, w] : res.edges) CHECK(!(u == 5 && w == 6));
}

TEST_CASE("reruns are bit-identical") {
  CounterRng grng(4242);
  Graph g = oracles::random_connected_graph(grng, 16, 0.2);
  InstanceParams params;
  params.d = 2;
  params.k = 4;
  params.sigma = 0.02;
  params.seed = 31;
  InstanceArchive archive = generate_instance(g, params, "unit");
  AfrConfig cfg;
  cfg.s_min = 0.0;
  cfg.delta_min = 0.0;
  cfg.k_base = 2.0;
  AfrResult a = run_afr(archive, cfg);
  AfrResult b = run_afr(archive, cfg);
  CHECK(a.edges == b.edges);
  CHECK(a.covered == b.covered);
  REQUIRE(a.audit.size() == b.audit.size());
  for (size_t i = 0; i < a.audit.size(); ++i) {
    CHECK(a.audit[i].v == b.audit[i].v);
    CHECK(a.audit[i].accepted == b.audit[i].accepted);
    CHECK(a.audit[i].reason == b.audit[i].reason);
  }
}
