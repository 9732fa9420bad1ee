#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lograb/graph.hpp"
#include "lograb/patch.hpp"
#include "lograb/rng.hpp"

namespace lograb {

inline constexpr const char* kArchiveFormat = "lograb-archive/v1";
inline constexpr const char* kGeneratorVersion = "0.1.0";

// digest mismatches, missing payloads, malformed containers
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceParams {
  std::string strategy = "d_hop";  // d_hop | cluster | random
  int d = 1;
  int k = 16;
  double sigma = 0.0;
  double p = 1.0;
  uint64_t seed = 0;
  int ell = 0;        // cluster count; 0 = ceil(n/150)
  int num_seeds = 0;  // random strategy seed count; 0 = round(0.3 |observed|)
  int q_max = 500;
  bool audit_overlap = false;  // stitchability statistic over true edges (costly)
};

struct InstanceArchive {
  nlohmann::json manifest;  // finalized at write/stamp time
  NodeSet observed;
  std::vector<PatchObservation> patches;
};

// round(p*n) nodes uniformly without replacement, ascending
NodeSet select_observed(const Graph& g, double p, CounterRng& rng);

std::vector<NodeSet> decompose_d_hop(const Graph& g, const NodeSet& observed, int d);
std::vector<NodeSet> decompose_cluster(const Graph& g, const NodeSet& observed, uint32_t ell,
                                       std::vector<std::string>* warnings = nullptr);
std::vector<NodeSet> decompose_random(const Graph& g, const NodeSet& observed, int d,
                                      int num_seeds, CounterRng& rng);

InstanceArchive generate_instance(const Graph& g, const InstanceParams& params,
                                  const std::string& dataset_name);

/* Canonical manifest with per-file SHA-256 digests filled in; its dump(2)
 * bytes are what verify_archive checks and what reports stamp. */
nlohmann::json finalize_manifest(const InstanceArchive& archive);
std::string archive_digest(const InstanceArchive& archive);

/* Archive container: path ending in ".lgb" is a single flat file
 * (magic, entry count, then name/size/payload records, sorted by name);
 * any other path is a directory of the same entries. */
void write_archive(const InstanceArchive& archive, const std::string& path);
InstanceArchive read_archive(const std::string& path, bool verify_digests = true);

struct VerifyEntry {
  std::string name;
  bool ok = false;
  std::string detail;
};
struct VerifyReport {
  bool ok = false;
  std::vector<VerifyEntry> entries;
};
VerifyReport verify_archive(const std::string& path);

}  // namespace lograb
