#include "lograb/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lograb/sha256.hpp"
#include "lograb/spectral.hpp"

namespace fs = std::filesystem;

namespace lograb {

namespace {

constexpr uint64_t kStreamObserved = 0xA1;
constexpr uint64_t kStreamRandomSeeds = 0xA2;
constexpr uint64_t kStreamNoise = 0xA3;

constexpr char kContainerMagic[6] = {'L', 'G', 'R', 'B', '1', '\n'};

std::string patch_file_name(size_t idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "patch_%06zu.bin", idx);
  return buf;
}

std::string encode_observed(const NodeSet& observed) {
  std::string out;
  auto put_u32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put_u32(static_cast<uint32_t>(observed.size()));
  for (uint32_t id : observed) put_u32(id);
  return out;
}

NodeSet decode_observed(const std::string& bytes) {
  if (bytes.size() < 4) throw IntegrityError("observed payload truncated");
  auto get_u32 = [&bytes](size_t pos) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i]);
    return v;
  };
  uint32_t count = get_u32(0);
  if (bytes.size() != 4 + 4ull * count) throw IntegrityError("observed payload size mismatch");
  NodeSet out(count);
  for (uint32_t i = 0; i < count; ++i) out[i] = get_u32(4 + 4ull * i);
  return out;
}

NodeSet intersect_sorted(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// flat container I/O -------------------------------------------------------

using Entries = std::vector<std::pair<std::string, std::string>>;

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pack_container(const Entries& entries) {
  std::string out(kContainerMagic, sizeof(kContainerMagic));
  auto put_u32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto put_u64 = [&out](uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put_u64(entries.size());
  for (auto& [name, bytes] : entries) {
    put_u32(static_cast<uint32_t>(name.size()));
    out += name;
    put_u64(bytes.size());
    out += bytes;
  }
  return out;
}

Entries unpack_container(const std::string& blob) {
  if (blob.size() < sizeof(kContainerMagic) + 8 ||
      std::memcmp(blob.data(), kContainerMagic, sizeof(kContainerMagic)) != 0)
    throw IntegrityError("not an archive container (bad magic)");
  size_t pos = sizeof(kContainerMagic);
  auto get_u32 = [&blob, &pos]() {
    if (pos + 4 > blob.size()) throw IntegrityError("container truncated");
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(blob[pos + i]);
    pos += 4;
    return v;
  };
  auto get_u64 = [&blob, &pos]() {
    if (pos + 8 > blob.size()) throw IntegrityError("container truncated");
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(blob[pos + i]);
    pos += 8;
    return v;
  };
  uint64_t count = get_u64();
  Entries entries;
  entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t name_len = get_u32();
    if (pos + name_len > blob.size()) throw IntegrityError("container truncated");
    std::string name = blob.substr(pos, name_len);
    pos += name_len;
    uint64_t size = get_u64();
    if (pos + size > blob.size()) throw IntegrityError("container truncated");
    entries.emplace_back(std::move(name), blob.substr(pos, size));
    pos += size;
  }
  if (pos != blob.size()) throw IntegrityError("container has trailing bytes");
  return entries;
}

bool is_container_path(const std::string& path) {
  return path.size() > 4 && path.substr(path.size() - 4) == ".lgb" && !fs::is_directory(path);
}

Entries read_entries(const std::string& path) {
  if (fs::is_directory(path)) {
    Entries entries;
    for (auto& de : fs::directory_iterator(path)) {
      if (!de.is_regular_file()) continue;
      entries.emplace_back(de.path().filename().string(), read_file(de.path()));
    }
    std::sort(entries.begin(), entries.end());
    return entries;
  }
  if (!fs::exists(path)) throw IntegrityError("archive not found: " + path);
  return unpack_container(read_file(path));
}

Entries archive_entries(const InstanceArchive& archive) {
  Entries entries;
  entries.emplace_back("manifest.json", finalize_manifest(archive).dump(2) + "\n");
  entries.emplace_back("observed.bin", encode_observed(archive.observed));
  for (size_t i = 0; i < archive.patches.size(); ++i)
    entries.emplace_back(patch_file_name(i), encode_patch(archive.patches[i]));
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return entries;
}

}  // namespace

NodeSet select_observed(const Graph& g, double p, CounterRng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("select_observed: p outside [0, 1]");
  auto m = static_cast<uint32_t>(std::llround(p * static_cast<double>(g.n)));
  return rng.sample_without_replacement(g.n, m);
}

std::vector<NodeSet> decompose_d_hop(const Graph& g, const NodeSet& observed, int d) {
  if (d < 1) throw std::invalid_argument("decompose_d_hop: d must be >= 1");
  std::vector<NodeSet> patches;
  patches.reserve(observed.size());
  for (uint32_t center : observed) patches.push_back(d_hop_ball(g, center, d));
  return patches;
}

std::vector<NodeSet> decompose_cluster(const Graph& g, const NodeSet& observed, uint32_t ell,
                                       std::vector<std::string>* warnings) {
  Partition part = spectral_bisection_partition(g, ell);
  std::vector<NodeSet> patches;
  for (size_t i = 0; i < part.clusters.size(); ++i) {
    NodeSet expanded = expand_with_boundary(g, part.clusters[i]);
    NodeSet kept = intersect_sorted(expanded, observed);
    if (kept.empty()) {
      if (warnings)
        warnings->push_back("cluster " + std::to_string(i) +
                            " dropped: no observed nodes after boundary expansion");
      continue;
    }
    patches.push_back(std::move(kept));
  }
  return patches;
}

std::vector<NodeSet> decompose_random(const Graph& g, const NodeSet& observed, int d,
                                      int num_seeds, CounterRng& rng) {
  if (d < 1) throw std::invalid_argument("decompose_random: d must be >= 1");
  if (num_seeds < 0) throw std::invalid_argument("decompose_random: negative num_seeds");
  if (static_cast<size_t>(num_seeds) > observed.size())
    throw std::invalid_argument("decompose_random: num_seeds exceeds observed count");
  auto picks = rng.sample_without_replacement(static_cast<uint32_t>(observed.size()),
                                              static_cast<uint32_t>(num_seeds));
  std::vector<NodeSet> patches;
  patches.reserve(picks.size());
  for (uint32_t idx : picks) patches.push_back(d_hop_ball(g, observed[idx], d));
  return patches;
}

namespace {

// fraction of true edges covered by some patch pair overlapping in >= k+1 nodes
double overlap_audit(const Graph& g, const std::vector<NodeSet>& patches, int k) {
  if (g.edges.empty()) return 1.0;
  std::vector<std::vector<uint32_t>> patches_of(g.n);
  for (size_t a = 0; a < patches.size(); ++a)
    for (uint32_t v : patches[a]) patches_of[v].push_back(static_cast<uint32_t>(a));
  std::unordered_map<uint64_t, int> overlap_cache;
  auto overlap_size = [&](uint32_t a, uint32_t b) {
    uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
    auto it = overlap_cache.find(key);
    if (it != overlap_cache.end()) return it->second;
    int size = static_cast<int>(intersect_sorted(patches[a], patches[b]).size());
    overlap_cache.emplace(key, size);
    return size;
  };
  size_t covered = 0;
  for (auto& [u, w] : g.edges) {
    std::vector<uint32_t> common;
    std::set_intersection(patches_of[u].begin(), patches_of[u].end(), patches_of[w].begin(),
                          patches_of[w].end(), std::back_inserter(common));
    bool ok = false;
    for (size_t i = 0; i < common.size() && !ok; ++i)
      for (size_t j = i + 1; j < common.size() && !ok; ++j)
        if (overlap_size(common[i], common[j]) >= k + 1) ok = true;
    if (ok) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(g.edges.size());
}

}  // namespace

InstanceArchive generate_instance(const Graph& g, const InstanceParams& params,
                                  const std::string& dataset_name) {
  if (params.k < 1) throw std::invalid_argument("generate_instance: k must be positive");
  if (params.sigma < 0.0) throw std::invalid_argument("generate_instance: negative sigma");
  if (params.q_max < 1) throw std::invalid_argument("generate_instance: q_max must be positive");

  std::vector<std::string> warnings;
  InstanceArchive archive;
  CounterRng obs_rng = CounterRng::substream(params.seed, 0, kStreamObserved);
  archive.observed = select_observed(g, params.p, obs_rng);

  int resolved_ell = params.ell;
  int resolved_seeds = params.num_seeds;
  std::vector<NodeSet> node_sets;
  if (params.strategy == "d_hop") {
    node_sets = decompose_d_hop(g, archive.observed, params.d);
  } else if (params.strategy == "cluster") {
    if (resolved_ell <= 0) resolved_ell = static_cast<int>(default_cluster_count(g.n));
    node_sets = decompose_cluster(g, archive.observed, static_cast<uint32_t>(resolved_ell),
                                  &warnings);
  } else if (params.strategy == "random") {
    if (resolved_seeds <= 0)
      resolved_seeds = std::max<int>(
          1, static_cast<int>(std::llround(0.3 * static_cast<double>(archive.observed.size()))));
    if (archive.observed.empty()) resolved_seeds = 0;
    CounterRng seed_rng = CounterRng::substream(params.seed, 0, kStreamRandomSeeds);
    node_sets = decompose_random(g, archive.observed, params.d, resolved_seeds, seed_rng);
  } else {
    throw std::invalid_argument("generate_instance: unknown strategy '" + params.strategy + "'");
  }

  archive.patches.reserve(node_sets.size());
  for (size_t i = 0; i < node_sets.size(); ++i) {
    const NodeSet& nodes = node_sets[i];
    Eigen::MatrixXd lap = normalized_laplacian(g, nodes);
    EigenSystem es;
    try {
      es = symmetric_eigendecompose(lap, params.q_max);
    } catch (const std::exception& e) {
      throw std::runtime_error("generate_instance: patch " + std::to_string(i) + ": " + e.what());
    }
    TruncatedEmbedding emb = truncate_embedding(es, params.k);
    PatchObservation obs;
    obs.nodes = nodes;
    obs.embedding = emb.p;
    obs.retained = emb.retained;
    obs.lambda_kp1 = emb.lambda_kp1;
    CounterRng noise_rng = CounterRng::substream(params.seed, i, kStreamNoise);
    add_gaussian_noise(obs.embedding, params.sigma, noise_rng);
    archive.patches.push_back(std::move(obs));
  }

  nlohmann::json manifest;
  manifest["format"] = kArchiveFormat;
  manifest["generator_version"] = kGeneratorVersion;
  manifest["rng"] = CounterRng::kAlgorithmId;
  manifest["dataset"] = dataset_name;
  {
    std::ostringstream canon;
    save_edge_list(canon, g);
    manifest["dataset_sha256"] = sha256_hex(canon.str());
  }
  manifest["n"] = g.n;
  manifest["params"] = {
      {"strategy", params.strategy}, {"d", params.d},
      {"k", params.k},               {"sigma", params.sigma},
      {"p", params.p},               {"seed", params.seed},
      {"ell", resolved_ell},         {"num_seeds", resolved_seeds},
      {"q_max", params.q_max},
  };
  manifest["patch_count"] = archive.patches.size();
  manifest["observed_count"] = archive.observed.size();
  if (params.audit_overlap) {
    double frac = overlap_audit(g, node_sets, params.k);
    manifest["audit"] = {{"overlap_ok_fraction", frac}};
    if (frac < 1.0)
      warnings.push_back("overlap audit: only " + std::to_string(frac) +
                         " of true edges have a stitchable patch pair (need >= k+1 shared nodes)");
  }
  manifest["warnings"] = warnings;
  archive.manifest = std::move(manifest);
  return archive;
}

nlohmann::json finalize_manifest(const InstanceArchive& archive) {
  nlohmann::json manifest = archive.manifest;
  nlohmann::json files = nlohmann::json::object();
  files["observed.bin"] = sha256_hex(encode_observed(archive.observed));
  for (size_t i = 0; i < archive.patches.size(); ++i)
    files[patch_file_name(i)] = sha256_hex(encode_patch(archive.patches[i]));
  manifest["files"] = std::move(files);
  manifest["patch_count"] = archive.patches.size();
  manifest["observed_count"] = archive.observed.size();
  return manifest;
}

std::string archive_digest(const InstanceArchive& archive) {
  return sha256_hex(finalize_manifest(archive).dump(2) + "\n");
}

void write_archive(const InstanceArchive& archive, const std::string& path) {
  Entries entries = archive_entries(archive);
  if (is_container_path(path)) {
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_file_atomic(path, pack_container(entries));
  } else {
    fs::create_directories(path);
    for (auto& [name, bytes] : entries) write_file_atomic(fs::path(path) / name, bytes);
  }
}

InstanceArchive read_archive(const std::string& path, bool verify_digests) {
  Entries entries = read_entries(path);
  std::unordered_map<std::string, const std::string*> by_name;
  for (auto& [name, bytes] : entries) {
    if (!by_name.emplace(name, &bytes).second)
      throw IntegrityError("duplicate archive entry: " + name);
  }
  auto manifest_it = by_name.find("manifest.json");
  if (manifest_it == by_name.end()) throw IntegrityError("archive missing manifest.json");

  InstanceArchive archive;
  try {
    archive.manifest = nlohmann::json::parse(*manifest_it->second);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("manifest.json unparsable: ") + e.what());
  }
  if (!archive.manifest.contains("files") || !archive.manifest["files"].is_object())
    throw IntegrityError("manifest.json missing files map");

  for (auto& [name, digest] : archive.manifest["files"].items()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IntegrityError("archive missing payload " + name);
    if (verify_digests && sha256_hex(*it->second) != digest.get<std::string>())
      throw IntegrityError("digest mismatch for " + name);
  }

  auto observed_it = by_name.find("observed.bin");
  if (observed_it == by_name.end()) throw IntegrityError("archive missing observed.bin");
  archive.observed = decode_observed(*observed_it->second);

  size_t patch_count = archive.manifest.value("patch_count", size_t{0});
  archive.patches.reserve(patch_count);
  for (size_t i = 0; i < patch_count; ++i) {
    auto it = by_name.find(patch_file_name(i));
    if (it == by_name.end()) throw IntegrityError("archive missing " + patch_file_name(i));
    try {
      archive.patches.push_back(decode_patch(*it->second));
    } catch (const std::exception& e) {
      throw IntegrityError(patch_file_name(i) + ": " + e.what());
    }
  }
  // files map must not reference anything beyond what we loaded
  for (auto& [name, bytes] : entries) {
    if (name == "manifest.json") continue;
    if (!archive.manifest["files"].contains(name))
      throw IntegrityError("archive entry not listed in manifest: " + name);
  }
  return archive;
}

VerifyReport verify_archive(const std::string& path) {
  Entries entries = read_entries(path);
  std::unordered_map<std::string, const std::string*> by_name;
  for (auto& [name, bytes] : entries) by_name.emplace(name, &bytes);
  auto manifest_it = by_name.find("manifest.json");
  if (manifest_it == by_name.end()) throw IntegrityError("archive missing manifest.json");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(*manifest_it->second);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("manifest.json unparsable: ") + e.what());
  }
  if (!manifest.contains("files") || !manifest["files"].is_object())
    throw IntegrityError("manifest.json missing files map");

  VerifyReport report;
  report.ok = true;
  for (auto& [name, digest] : manifest["files"].items()) {
    VerifyEntry entry;
    entry.name = name;
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      entry.ok = false;
      entry.detail = "missing payload";
    } else {
      std::string actual = sha256_hex(*it->second);
      entry.ok = actual == digest.get<std::string>();
      if (!entry.ok) entry.detail = "digest mismatch";
    }
    report.ok = report.ok && entry.ok;
    report.entries.push_back(std::move(entry));
  }
  for (auto& [name, bytes] : entries) {
    if (name == "manifest.json" || manifest["files"].contains(name)) continue;
    report.entries.push_back({name, false, "not listed in manifest"});
    report.ok = false;
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const VerifyEntry& a, const VerifyEntry& b) { return a.name < b.name; });
  return report;
}

}  // namespace lograb
