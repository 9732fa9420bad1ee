#include "lograb/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lograb {
namespace {

std::vector<NodeSet> components_of(const NodeSet& covered, const EdgeList& edges) {
  std::vector<int> parent(covered.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x)
      x = parent[static_cast<size_t>(x)] =
          parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    return x;
  };
  auto pos = [&](uint32_t u) {
    return static_cast<int>(std::lower_bound(covered.begin(), covered.end(), u) - covered.begin());
  };
  for (const auto& [u, w] : edges) {
    int a = find(pos(u));
    int b = find(pos(w));
    if (a != b) parent[static_cast<size_t>(b)] = a;
  }
  std::vector<NodeSet> comps;
  std::vector<int> comp_of(covered.size(), -1);
  for (size_t i = 0; i < covered.size(); ++i) {
    int r = find(static_cast<int>(i));
    if (comp_of[static_cast<size_t>(r)] < 0) {
      comp_of[static_cast<size_t>(r)] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<size_t>(comp_of[static_cast<size_t>(r)])].push_back(covered[i]);
  }
  return comps;
}

nlohmann::json edges_json(const EdgeList& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [u, w] : edges) arr.push_back(nlohmann::json::array({u, w}));
  return arr;
}

EdgeList edges_from_json(const nlohmann::json& arr) {
  EdgeList edges;
  for (const auto& e : arr) edges.emplace_back(e.at(0).get<uint32_t>(), e.at(1).get<uint32_t>());
  return edges;
}

}  // namespace

nlohmann::json afr_config_json(const AfrConfig& cfg) {
  nlohmann::json j;
  j["t"] = cfg.t;
  j["alpha"] = cfg.alpha;
  j["s_min"] = cfg.s_min;
  j["delta_min"] = cfg.delta_min;
  j["k_base"] = cfg.k_base;
  j["gamma"] = cfg.gamma;
  j["ransac_iters"] = cfg.ransac_iters;
  j["ransac_inlier_tol"] = cfg.ransac_inlier_tol;
  j["ransac_tol_floor"] = cfg.ransac_tol_floor;
  j["cross_c0"] = cfg.cross_c0;
  j["cross_kappa"] = cfg.cross_kappa;
  j["top_k_output"] = cfg.top_k_output;
  j["ba_max_iters"] = cfg.ba_max_iters;
  j["ba_rel_tol"] = cfg.ba_rel_tol;
  j["seed"] = cfg.seed;
  return j;
}

nlohmann::json eigensync_config_json(const EigenSyncConfig& cfg) {
  nlohmann::json j;
  j["t"] = cfg.t;
  j["k_nn"] = cfg.k_nn;
  j["max_iters"] = cfg.max_iters;
  j["tol"] = cfg.tol;
  j["mk_cap"] = cfg.mk_cap;
  return j;
}

ReconstructionFile make_afr_report(const AfrResult& result, const AfrConfig& cfg,
                                   const std::string& archive_digest) {
  ReconstructionFile rec;
  rec.method = "afr";
  rec.archive_digest = archive_digest;
  rec.config = afr_config_json(cfg);
  rec.rotation_dim = result.rotation_dim;
  rec.covered = result.covered;
  for (const auto& isl : result.islands) rec.islands.push_back(isl.nodes);
  rec.audit = result.audit;
  rec.edges = result.edges;
  rec.cross_edges = result.cross_edges;
  rec.warnings = result.warnings;
  int accepted = 0;
  for (const auto& a : result.audit)
    if (a.accepted) ++accepted;
  rec.details["island_count"] = result.islands.size();
  rec.details["stitches_accepted"] = accepted;
  rec.details["stitches_attempted"] = result.audit.size();
  rec.details["ransac_note"] =
      "all-inlier success probability is 1-(1-p^(k+1))^M for inlier rate p; "
      "the default M is a budget knob and is not sufficient for small p at "
      "large k";
  return rec;
}

ReconstructionFile make_eigensync_report(const EigenSyncResult& result,
                                         const EigenSyncConfig& cfg,
                                         const std::string& archive_digest) {
  ReconstructionFile rec;
  rec.method = "eigensync";
  rec.archive_digest = archive_digest;
  rec.config = eigensync_config_json(cfg);
  rec.rotation_dim = result.rotation_dim;
  rec.covered = result.covered;
  rec.islands = components_of(result.covered, result.edges);
  rec.edges = result.edges;
  rec.warnings = result.warnings;
  if (result.embedding.size() > 0) {
    rec.embedding_nodes = result.covered;
    rec.embedding = result.embedding;
  }
  rec.details["pairs_used"] = result.pairs_used;
  rec.details["iterations"] = result.iterations;
  rec.details["fallback_local"] = result.fallback_local;
  rec.details["sync_diagonal"] = "zero";
  rec.details["sync_weights"] = "overlap-size";
  return rec;
}

nlohmann::json reconstruction_to_json(const ReconstructionFile& rec) {
  nlohmann::json j;
  j["format"] = kReconstructionFormat;
  j["method"] = rec.method;
  j["archive_digest"] = rec.archive_digest;
  j["config"] = rec.config;
  j["details"] = rec.details;
  j["rotation_dim"] = rec.rotation_dim;
  j["covered"] = rec.covered;
  nlohmann::json islands = nlohmann::json::array();
  for (const auto& isl : rec.islands) islands.push_back(isl);
  j["islands"] = islands;
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& a : rec.audit) {
    nlohmann::json e;
    e["v"] = a.v;
    e["w"] = a.w;
    e["overlap"] = a.overlap;
    e["d_adaptive"] = a.d_adaptive;
    e["consensus"] = a.consensus;
    e["accepted"] = a.accepted;
    e["reason"] = a.reason;
    audit.push_back(std::move(e));
  }
  j["audit"] = audit;
  j["edges"] = edges_json(rec.edges);
  nlohmann::json cross = nlohmann::json::array();
  for (const auto& c : rec.cross_edges) {
    nlohmann::json e;
    e["u"] = c.u;
    e["w"] = c.w;
    e["votes"] = c.votes;
    e["p"] = c.p;
    cross.push_back(std::move(e));
  }
  j["cross_edges"] = cross;
  j["warnings"] = rec.warnings;
  if (rec.embedding.size() > 0) {
    nlohmann::json emb;
    emb["nodes"] = rec.embedding_nodes;
    emb["k"] = rec.embedding.cols();
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rec.embedding.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < rec.embedding.cols(); ++c) row.push_back(rec.embedding(i, c));
      rows.push_back(std::move(row));
    }
    emb["rows"] = rows;
    j["embedding"] = emb;
  } else {
    j["embedding"] = nullptr;
  }
  return j;
}

ReconstructionFile reconstruction_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kReconstructionFormat)
    throw std::invalid_argument("reconstruction file: unknown format tag");
  ReconstructionFile rec;
  rec.method = j.at("method").get<std::string>();
  rec.archive_digest = j.at("archive_digest").get<std::string>();
  rec.config = j.at("config");
  rec.details = j.value("details", nlohmann::json::object());
  rec.rotation_dim = j.at("rotation_dim").get<int>();
  rec.covered = j.at("covered").get<NodeSet>();
  for (const auto& isl : j.at("islands")) rec.islands.push_back(isl.get<NodeSet>());
  for (const auto& a : j.at("audit")) {
    StitchRecord s;
    s.v = a.at("v").get<int>();
    s.w = a.at("w").get<int>();
    s.overlap = a.at("overlap").get<int>();
    s.d_adaptive = a.at("d_adaptive").get<int>();
    s.consensus = a.at("consensus").get<int>();
    s.accepted = a.at("accepted").get<bool>();
    s.reason = a.at("reason").get<std::string>();
    rec.audit.push_back(std::move(s));
  }
  rec.edges = edges_from_json(j.at("edges"));
  for (const auto& c : j.at("cross_edges")) {
    CrossEdge e;
    e.u = c.at("u").get<uint32_t>();
    e.w = c.at("w").get<uint32_t>();
    e.votes = c.at("votes").get<int>();
    e.p = c.at("p").get<double>();
    rec.cross_edges.push_back(e);
  }
  rec.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("embedding") && !j.at("embedding").is_null()) {
    const auto& emb = j.at("embedding");
    rec.embedding_nodes = emb.at("nodes").get<NodeSet>();
    const auto k = emb.at("k").get<Eigen::Index>();
    const auto& rows = emb.at("rows");
    rec.embedding.resize(static_cast<Eigen::Index>(rows.size()), k);
    for (size_t i = 0; i < rows.size(); ++i)
      for (Eigen::Index c = 0; c < k; ++c)
        rec.embedding(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<size_t>(c)].get<double>();
  }
  return rec;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return nlohmann::json::parse(in);
}

}  // namespace lograb
