#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "lograb/afr.hpp"
#include "lograb/eigensync.hpp"
#include "lograb/graph.hpp"

namespace lograb {

inline constexpr const char* kReconstructionFormat = "lograb-reconstruction/v1";

/* One reconstruction output: method tag, the digest of the consumed archive,
 * a full config echo, island node sets (connected components for the
 * synchronization baseline), the stitch audit, the predicted edges, scored
 * cross edges, and — for the baseline — the synchronized embedding. */
struct ReconstructionFile {
  std::string method;  // "afr" | "eigensync"
  std::string archive_digest;
  nlohmann::json config;
  nlohmann::json details;  // method-specific counters and conventions
  int rotation_dim = 0;
  NodeSet covered;
  std::vector<NodeSet> islands;
  std::vector<StitchRecord> audit;
  EdgeList edges;
  std::vector<CrossEdge> cross_edges;
  NodeSet embedding_nodes;     // rows of embedding, when present
  Eigen::MatrixXd embedding;   // baseline synchronized coordinates
  std::vector<std::string> warnings;
};

nlohmann::json afr_config_json(const AfrConfig& cfg);
nlohmann::json eigensync_config_json(const EigenSyncConfig& cfg);

ReconstructionFile make_afr_report(const AfrResult& result, const AfrConfig& cfg,
                                   const std::string& archive_digest);
ReconstructionFile make_eigensync_report(const EigenSyncResult& result,
                                         const EigenSyncConfig& cfg,
                                         const std::string& archive_digest);

nlohmann::json reconstruction_to_json(const ReconstructionFile& rec);
ReconstructionFile reconstruction_from_json(const nlohmann::json& j);

// atomic (temp + rename) canonical JSON write with trailing newline
void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace lograb
