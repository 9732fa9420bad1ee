#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lograb/instance.hpp"
#include "lograb/rng.hpp"
#include "oracles.hpp"

using namespace lograb;
namespace fs = std::filesystem;

namespace {

Graph two_triangles() {
  return make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
}

Graph path_graph(uint32_t n) {
  EdgeList e;
  for (uint32_t v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return make_graph(n, e);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lograb-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("observed-node selection hits the requested fraction") {
  Graph g = path_graph(10);
  CounterRng rng(3);
  NodeSet all = select_observed(g, 1.0, rng);
  CHECK(all.size() == 10);
  NodeSet half = select_observed(g, 0.5, rng);
  CHECK(half.size() == 5);
  CHECK(std::is_sorted(half.begin(), half.end()));
  CHECK(half.back() < 10);
  CHECK_THROWS_AS(select_observed(g, 1.5, rng), std::invalid_argument);
}

TEST_CASE("d-hop decomposition emits one ball per observed node") {
  Graph g = path_graph(5);
  auto patches = decompose_d_hop(g, {0, 2, 4}, 1);
  REQUIRE(patches.size() == 3);
  CHECK(patches[0] == NodeSet{0, 1});
  CHECK(patches[1] == NodeSet{1, 2, 3});
  CHECK(patches[2] == NodeSet{3, 4});
}

TEST_CASE("cluster decomposition separates disconnected triangles exactly") {
  Graph g = two_triangles();
  NodeSet observed{0, 1, 2, 3, 4, 5};
  auto patches = decompose_cluster(g, observed, 2, nullptr);
  REQUIRE(patches.size() == 2);
  std::sort(patches.begin(), patches.end());
  CHECK(patches[0] == NodeSet{0, 1, 2});
  CHECK(patches[1] == NodeSet{3, 4, 5});
}

TEST_CASE("cluster patches grow a one-hop boundary, then restrict to observed") {
  Graph g = path_graph(6);
  std::vector<std::string> warnings;
  auto patches = decompose_cluster(g, {0, 1, 2, 3, 4, 5}, 2, &warnings);
  REQUIRE(patches.size() == 2);
  std::sort(patches.begin(), patches.end());
  // {0,1,2} and {3,4,5} clusters, each pulling one fringe node across the cut
  CHECK(patches[0] == NodeSet{0, 1, 2, 3});
  CHECK(patches[1] == NodeSet{2, 3, 4, 5});

  // unobserved clusters drop with a warning
  warnings.clear();
  auto sparse = decompose_cluster(g, {0, 1}, 2, &warnings);
  CHECK(sparse.size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("random decomposition seeds balls from observed nodes only") {
  Graph g = path_graph(12);
  NodeSet observed{0, 2, 4, 6, 8, 10};
  CounterRng rng(9);
  auto patches = decompose_random(g, observed, 1, 4, rng);
  REQUIRE(patches.size() == 4);
  for (const auto& p : patches) {
    bool seeded_from_observed = false;
    for (uint32_t c : observed) {
      NodeSet ball = d_hop_ball(g, c, 1);
      if (ball == p) seeded_from_observed = true;
    }
    CHECK(seeded_from_observed);
  }
  CHECK_THROWS_AS(decompose_random(g, observed, 1, 7, rng), std::invalid_argument);
}

TEST_CASE("noiseless patch embeddings solve the local eigenproblem") {
  CounterRng grng(41);
  Graph g = oracles::random_connected_graph(grng, 14, 0.2);
  InstanceParams params;
  params.strategy = "d_hop";
  params.d = 1;
  params.k = 3;
  params.sigma = 0.0;
  params.p = 1.0;
  params.seed = 7;
  InstanceArchive archive = generate_instance(g, params, "unit");
  REQUIRE(archive.patches.size() == 14);
  for (const auto& obs : archive.patches) {
    Eigen::MatrixXd lap = normalized_laplacian(g, obs.nodes);
    oracles::DenseEigen ref = oracles::reference_eigen(lap);
    int k_eff = obs.k();
    CHECK(k_eff == std::min<int>(3, obs.q()));
    for (int c = 0; c < k_eff; ++c) {
      CHECK(obs.retained(c) == doctest::Approx(ref.values(c)).epsilon(1e-9));
      Eigen::VectorXd resid = lap * obs.embedding.col(c) - obs.retained(c) * obs.embedding.col(c);
      CHECK(resid.cwiseAbs().maxCoeff() < 1e-9);
    }
    if (k_eff < obs.q())
      CHECK(obs.lambda_kp1 == doctest::Approx(ref.values(k_eff)).epsilon(1e-9));
    else
      CHECK(obs.lambda_kp1 == 0.0);
  }
}

TEST_CASE("generation is seed-deterministic and noise is per-patch") {
  CounterRng grng(42);
  Graph g = oracles::random_connected_graph(grng, 12, 0.25);
  InstanceParams params;
  params.k = 4;
  params.sigma = 0.05;
  params.p = 0.8;
  params.seed = 11;
  InstanceArchive a = generate_instance(g, params, "unit");
  InstanceArchive b = generate_instance(g, params, "unit");
  CHECK(archive_digest(a) == archive_digest(b));
  REQUIRE(a.patches.size() == b.patches.size());
  for (size_t i = 0; i < a.patches.size(); ++i)
    CHECK(encode_patch(a.patches[i]) == encode_patch(b.patches[i]));

  params.seed = 12;
  InstanceArchive c = generate_instance(g, params, "unit");
  CHECK(archive_digest(a) != archive_digest(c));
}

TEST_CASE("manifest carries format, parameters, and per-file digests") {
  Graph g = two_triangles();
  InstanceParams params;
  params.strategy = "cluster";
  params.ell = 2;
  params.k = 2;
  params.seed = 5;
  InstanceArchive archive = generate_instance(g, params, "triangles");
  nlohmann::json manifest = finalize_manifest(archive);
  CHECK(manifest["format"] == kArchiveFormat);
  CHECK(manifest["dataset"] == "triangles");
  CHECK(manifest["params"]["strategy"] == "cluster");
  CHECK(manifest["patch_count"] == 2);
  CHECK(manifest["files"].contains("observed.bin"));
  CHECK(manifest["files"].contains("patch_000000.bin"));
  CHECK(manifest["rng"] == CounterRng::kAlgorithmId);
}

TEST_CASE("stitchability audit reports full coverage on one big patch") {
  Graph g = path_graph(6);
  InstanceParams params;
  params.strategy = "d_hop";
  params.d = 5;  // every ball is the whole path
  params.k = 2;
  params.audit_overlap = true;
  InstanceArchive archive = generate_instance(g, params, "unit");
  nlohmann::json manifest = finalize_manifest(archive);
  REQUIRE(manifest.contains("audit"));
  double frac = manifest["audit"]["overlap_ok_fraction"].get<double>();
  CHECK(frac == doctest::Approx(1.0));
}

TEST_CASE("archives round-trip through both container layouts") {
  CounterRng grng(77);
  Graph g = oracles::random_connected_graph(grng, 10, 0.3);
  InstanceParams params;
  params.k = 3;
  params.sigma = 0.01;
  params.seed = 3;
  InstanceArchive archive = generate_instance(g, params, "unit");

  TempDir tmp;
  for (std::string name : {std::string("inst.lgb"), std::string("inst-dir")}) {
    std::string path = (tmp.path / name).string();
    write_archive(archive, path);
    InstanceArchive back = read_archive(path);
    CHECK(back.observed == archive.observed);
    REQUIRE(back.patches.size() == archive.patches.size());
    for (size_t i = 0; i < archive.patches.size(); ++i)
      CHECK(encode_patch(back.patches[i]) == encode_patch(archive.patches[i]));
    CHECK(archive_digest(back) == archive_digest(archive));
    VerifyReport rep = verify_archive(path);
    CHECK(rep.ok);
    for (const auto& entry : rep.entries) CHECK(entry.ok);
  }
}

TEST_CASE("tampered payloads fail verification and integrity-checked reads") {
  CounterRng grng(78);
  Graph g = oracles::random_connected_graph(grng, 8, 0.3);
  InstanceParams params;
  params.k = 2;
  params.seed = 4;
  InstanceArchive archive = generate_instance(g, params, "unit");

  TempDir tmp;
  std::string dir = (tmp.path / "inst").string();
  write_archive(archive, dir);

  // flip one byte inside a patch payload
  std::string victim = dir + "/patch_000000.bin";
  std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
  REQUIRE(f.good());
  f.seekp(12);
  char b = 0;
  f.seekg(12);
  f.get(b);
  f.seekp(12);
  f.put(static_cast<char>(b ^ 0x40));
  f.close();

  VerifyReport rep = verify_archive(dir);
  CHECK(!rep.ok);
  bool flagged = false;
  for (const auto& entry : rep.entries)
    if (!entry.ok && entry.name == "patch_000000.bin") flagged = true;
  CHECK(flagged);
  CHECK_THROWS_AS(read_archive(dir), IntegrityError);
  CHECK_NOTHROW(read_archive(dir, false));

  // a stray file not listed in the manifest also fails the audit
  std::ofstream extra(dir + "/stray.bin", std::ios::binary);
  extra << "x";
  extra.close();
  CHECK(!verify_archive(dir).ok);
}

TEST_CASE("missing payloads surface as integrity errors") {
  CounterRng grng(79);
  Graph g = oracles::random_connected_graph(grng, 8, 0.3);
  InstanceParams params;
  params.k = 2;
  InstanceArchive archive = generate_instance(g, params, "unit");
  TempDir tmp;
  std::string dir = (tmp.path / "inst").string();
  write_archive(archive, dir);
  fs::remove(dir + "/observed.bin");
  CHECK_THROWS_AS(read_archive(dir), IntegrityError);
  CHECK(!verify_archive(dir).ok);
}
