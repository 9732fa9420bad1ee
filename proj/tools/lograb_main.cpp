#include <CLI11.hpp>
#include <sys/resource.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "lograb/afr.hpp"
#include "lograb/dp.hpp"
#include "lograb/eigensync.hpp"
#include "lograb/graph.hpp"
#include "lograb/instance.hpp"
#include "lograb/metrics.hpp"
#include "lograb/report.hpp"
#include "lograb/sha256.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

lograb::Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return lograb::load_edge_list(in).graph;
}

double parse_epsilon(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF")
    return std::numeric_limits<double>::infinity();
  size_t used = 0;
  double value = std::stod(text, &used);
  if (used != text.size()) throw CLI::ValidationError("--epsilon", "not a number or 'inf'");
  return value;
}

long peak_rss_kb() {
  struct rusage usage {};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

void write_text_atomic(const std::string& text, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

json metrics_json(const lograb::EdgeMetrics& m) {
  json j;
  j["node_coverage"] = m.node_coverage;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["island_cohesion"] = m.island_cohesion;
  j["boundary_ratio"] = m.boundary_ratio;
  j["cohesion_undefined"] = m.cohesion_undefined;
  j["true_positives"] = m.true_positives;
  j["predicted_count"] = m.predicted_count;
  j["truth_induced_count"] = m.truth_induced_count;
  return j;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string dataset;
  std::string name;
  std::string out;
  lograb::InstanceParams params;
  bool as_json = false;
};

int cmd_generate(const GenerateArgs& a) {
  lograb::Graph g = load_graph(a.dataset);
  std::string name = a.name.empty() ? a.dataset : a.name;
  lograb::InstanceArchive archive = lograb::generate_instance(g, a.params, name);
  lograb::write_archive(archive, a.out);
  json out;
  out["archive"] = a.out;
  out["digest"] = lograb::archive_digest(archive);
  out["patch_count"] = archive.patches.size();
  out["observed"] = archive.observed.size();
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "wrote " << a.out << " (" << archive.patches.size() << " patches, digest "
              << out["digest"].get<std::string>() << ")\n";
  }
  return 0;
}

// ------------------------------------------------------------------ defend

struct DefendArgs {
  std::string epsilon_text = "2";
  std::string in, out;
  lograb::DpParams params;
  bool as_json = false;
};

int cmd_defend(const DefendArgs& a) {
  lograb::DpParams params = a.params;
  params.epsilon = parse_epsilon(a.epsilon_text);
  lograb::InstanceArchive archive = lograb::read_archive(a.in);
  lograb::InstanceArchive defended = lograb::sanitize_archive(archive, params);
  lograb::write_archive(defended, a.out);
  json out;
  out["archive"] = a.out;
  out["digest"] = lograb::archive_digest(defended);
  out["sigma"] = lograb::dp_sigma(params.epsilon, params.delta, params.clip_norm);
  out["epsilon"] = std::isinf(params.epsilon) ? json("inf") : json(params.epsilon);
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "wrote " << a.out << " (sigma " << out["sigma"].get<double>() << ", digest "
              << out["digest"].get<std::string>() << ")\n";
  }
  return 0;
}

// ------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string method = "afr";
  std::string in, out;
  lograb::AfrConfig afr;
  lograb::EigenSyncConfig sync;
  bool as_json = false;
};

lograb::ReconstructionFile reconstruct_archive(const lograb::InstanceArchive& archive,
                                               const ReconstructArgs& a) {
  const std::string digest = lograb::archive_digest(archive);
  if (a.method == "afr") {
    lograb::AfrResult result = lograb::run_afr(archive, a.afr);
    return lograb::make_afr_report(result, a.afr, digest);
  }
  lograb::EigenSyncResult result = lograb::run_eigensync(archive, a.sync);
  return lograb::make_eigensync_report(result, a.sync, digest);
}

int cmd_reconstruct(const ReconstructArgs& a) {
  lograb::InstanceArchive archive = lograb::read_archive(a.in);
  lograb::ReconstructionFile rec = reconstruct_archive(archive, a);
  json j = lograb::reconstruction_to_json(rec);
  lograb::write_json_file(j, a.out);
  json out;
  out["reconstruction"] = a.out;
  out["method"] = rec.method;
  out["edges"] = rec.edges.size();
  out["covered"] = rec.covered.size();
  out["islands"] = rec.islands.size();
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "wrote " << a.out << " (" << rec.edges.size() << " edges over "
              << rec.covered.size() << " nodes, " << rec.islands.size() << " islands)\n";
  }
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth;
  std::string rec;
  std::string out;
  std::string scores = "auto";  // auto | votes | cosine
  uint64_t link_seed = 0;
  bool as_json = false;
};

// cross-pair scores: cross-vote probabilities or embedding cosine similarity
std::vector<double> score_pairs(const lograb::ReconstructionFile& rec, const lograb::EdgeList& pairs,
                                const std::string& source) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  if (source == "votes") {
    std::unordered_map<uint64_t, double> p;
    for (const auto& c : rec.cross_edges)
      p[(static_cast<uint64_t>(c.u) << 32) | c.w] = c.p;
    for (const auto& [u, w] : pairs) {
      auto it = p.find((static_cast<uint64_t>(u) << 32) | w);
      scores.push_back(it == p.end() ? 0.0 : it->second);
    }
    return scores;
  }
  if (rec.embedding.size() == 0)
    throw std::runtime_error("cosine scores requested but the reconstruction has no embedding");
  std::unordered_map<uint32_t, Eigen::Index> row;
  for (size_t i = 0; i < rec.embedding_nodes.size(); ++i)
    row[rec.embedding_nodes[i]] = static_cast<Eigen::Index>(i);
  for (const auto& [u, w] : pairs) {
    auto iu = row.find(u);
    auto iw = row.find(w);
    if (iu == row.end() || iw == row.end()) {
      scores.push_back(0.0);
      continue;
    }
    Eigen::RowVectorXd a = rec.embedding.row(iu->second);
    Eigen::RowVectorXd b = rec.embedding.row(iw->second);
    const double den = a.norm() * b.norm();
    scores.push_back(den > 0.0 ? a.dot(b) / den : 0.0);
  }
  return scores;
}

json evaluate_reconstruction(const lograb::Graph& truth, const lograb::ReconstructionFile& rec,
                             const std::string& scores, uint64_t link_seed) {
  lograb::EdgeMetrics m = lograb::edge_metrics(truth, rec.edges, rec.islands);
  lograb::BoundsCheck bounds = lograb::cohesion_recall_bounds_check(truth, rec.edges, rec.islands);
  json j;
  j["format"] = "lograb-eval/v1";
  j["method"] = rec.method;
  j["config_echo"] = rec.config;
  j["archive_digest"] = rec.archive_digest;
  j["metrics"] = metrics_json(m);
  j["cohesion_recall_bounds"] = {
      {"ok", bounds.ok}, {"lower", bounds.lower}, {"upper", bounds.upper}, {"recall", bounds.recall}};

  std::string source = scores;
  if (source == "auto") source = rec.method == "afr" ? "votes" : "cosine";
  lograb::CounterRng rng = lograb::CounterRng::substream(link_seed, 0, 0xE1);
  lograb::LinkEvalSet link = lograb::build_link_eval(truth, rec.islands, rng);
  json le;
  le["applicable"] = link.applicable;
  le["score_source"] = source;
  if (link.applicable) {
    std::vector<double> pos = score_pairs(rec, link.positives, source);
    std::vector<double> neg = score_pairs(rec, link.negatives, source);
    le["positives"] = link.positives.size();
    le["negatives"] = link.negatives.size();
    le["auroc"] = lograb::auroc(pos, neg);
  } else {
    le["auroc"] = nullptr;  // single island or no crossing edges
  }
  j["link_eval"] = le;
  return j;
}

int cmd_evaluate(const EvaluateArgs& a) {
  lograb::Graph truth = load_graph(a.truth);
  const std::string rec_bytes = slurp(a.rec);
  lograb::ReconstructionFile rec = lograb::reconstruction_from_json(json::parse(rec_bytes));
  json j = evaluate_reconstruction(truth, rec, a.scores, a.link_seed);
  j["truth_digest"] = lograb::sha256_hex(slurp(a.truth));
  j["reconstruction_digest"] = lograb::sha256_hex(rec_bytes);
  if (!a.out.empty()) lograb::write_json_file(j, a.out);
  if (a.as_json || a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    const auto& m = j["metrics"];
    std::cout << "coverage " << m["node_coverage"].get<double>() << "  precision "
              << m["precision"].get<double>() << "  recall " << m["recall"].get<double>()
              << "  f1 " << m["f1"].get<double>() << "  cohesion "
              << m["island_cohesion"].get<double>() << "  boundary "
              << m["boundary_ratio"].get<double>() << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string dataset;
  std::string name;
  std::string grid;     // strategy:d:k:sigma:p;...
  std::string methods = "afr,eigensync";
  std::string seeds = "1,2,3,4,5";
  std::string out_dir;
  uint64_t link_seed = 0;
  bool as_json = false;
};

struct SweepCell {
  lograb::InstanceParams params;
  std::string method;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<lograb::InstanceParams> parse_grid(const std::string& grid) {
  std::vector<lograb::InstanceParams> tuples;
  for (const std::string& part : split(grid, ';')) {
    std::vector<std::string> f = split(part, ':');
    if (f.size() != 5)
      throw CLI::ValidationError("--grid", "expected strategy:d:k:sigma:p, got '" + part + "'");
    lograb::InstanceParams p;
    p.strategy = f[0];
    p.d = std::stoi(f[1]);
    p.k = std::stoi(f[2]);
    p.sigma = std::stod(f[3]);
    p.p = std::stod(f[4]);
    tuples.push_back(p);
  }
  if (tuples.empty()) throw CLI::ValidationError("--grid", "no tuples");
  return tuples;
}

int worker_count() {
  const char* env = std::getenv("LOGRAB_WORKERS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

int cmd_sweep(const SweepArgs& a) {
  lograb::Graph g = load_graph(a.dataset);
  std::filesystem::create_directories(a.out_dir);
  const std::string dataset_name = a.name.empty() ? a.dataset : a.name;
  std::vector<lograb::InstanceParams> tuples = parse_grid(a.grid);
  std::vector<std::string> methods = split(a.methods, ',');
  std::vector<uint64_t> seeds;
  for (const std::string& s : split(a.seeds, ',')) seeds.push_back(std::stoull(s));
  if (methods.empty()) throw CLI::ValidationError("--methods", "empty");
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "empty");

  struct Run {
    size_t tuple = 0;
    std::string method;
    uint64_t seed = 0;
    json record;     // deterministic payload
    double wall_ms = 0.0;
    bool failed = false;
  };
  std::vector<Run> runs;
  for (size_t t = 0; t < tuples.size(); ++t)
    for (const std::string& method : methods)
      for (uint64_t seed : seeds) runs.push_back({t, method, seed, json{}, 0.0, false});

  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= runs.size()) return;
      Run& run = runs[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        lograb::InstanceParams params = tuples[run.tuple];
        params.seed = run.seed;
        lograb::InstanceArchive archive = lograb::generate_instance(g, params, dataset_name);
        ReconstructArgs ra;
        ra.method = run.method;
        ra.afr.seed = run.seed;
        lograb::ReconstructionFile rec = reconstruct_archive(archive, ra);
        json eval = evaluate_reconstruction(g, rec, "auto", a.link_seed);
        run.record["params"] = {{"strategy", params.strategy}, {"d", params.d},
                                {"k", params.k},               {"sigma", params.sigma},
                                {"p", params.p}};
        run.record["method"] = run.method;
        run.record["seed"] = run.seed;
        run.record["metrics"] = eval["metrics"];
        run.record["link_eval"] = eval["link_eval"];
      } catch (const std::exception& e) {
        run.failed = true;
        run.record["error"] = e.what();
        run.record["method"] = run.method;
        run.record["seed"] = run.seed;
      }
      const auto t1 = std::chrono::steady_clock::now();
      run.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  };
  const int workers = worker_count();
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // aggregate mean +- sample standard deviation per (tuple, method) cell
  const std::vector<std::string> keys = {"f1", "precision", "recall", "node_coverage",
                                         "island_cohesion", "boundary_ratio"};
  json cells = json::array();
  std::ostringstream csv;
  csv << "strategy,d,k,sigma,p,method,seeds";
  for (const auto& key : keys) csv << "," << key << "_mean," << key << "_std";
  csv << "\n";
  for (size_t t = 0; t < tuples.size(); ++t) {
    for (const std::string& method : methods) {
      std::vector<const Run*> cell;
      for (const Run& run : runs)
        if (run.tuple == t && run.method == method && !run.failed) cell.push_back(&run);
      json c;
      c["params"] = {{"strategy", tuples[t].strategy}, {"d", tuples[t].d}, {"k", tuples[t].k},
                     {"sigma", tuples[t].sigma},       {"p", tuples[t].p}};
      c["method"] = method;
      c["seeds_ok"] = cell.size();
      c["seeds_failed"] = seeds.size() * 1 - cell.size();
      csv << tuples[t].strategy << "," << tuples[t].d << "," << tuples[t].k << ","
          << tuples[t].sigma << "," << tuples[t].p << "," << method << "," << cell.size();
      for (const auto& key : keys) {
        double mean = 0.0, stdev = 0.0;
        if (!cell.empty()) {
          for (const Run* run : cell) mean += run->record["metrics"][key].get<double>();
          mean /= static_cast<double>(cell.size());
          if (cell.size() > 1) {
            for (const Run* run : cell) {
              const double dlt = run->record["metrics"][key].get<double>() - mean;
              stdev += dlt * dlt;
            }
            stdev = std::sqrt(stdev / static_cast<double>(cell.size() - 1));
          }
        }
        c[key + "_mean"] = mean;
        c[key + "_std"] = stdev;
        csv << "," << mean << "," << stdev;
      }
      csv << "\n";
      cells.push_back(std::move(c));
    }
  }

  json per_run = json::array();
  for (const Run& run : runs) per_run.push_back(run.record);
  json summary;
  summary["format"] = "lograb-sweep/v1";
  summary["dataset"] = dataset_name;
  summary["cells"] = cells;

  bool any_failed = false;
  for (const Run& run : runs) any_failed = any_failed || run.failed;

  std::ostringstream timings;
  timings << "index,method,seed,wall_ms,peak_rss_kb\n";
  for (size_t i = 0; i < runs.size(); ++i)
    timings << i << "," << runs[i].method << "," << runs[i].seed << "," << runs[i].wall_ms << ","
            << peak_rss_kb() << "\n";

  lograb::write_json_file(per_run, a.out_dir + "/runs.json");
  lograb::write_json_file(summary, a.out_dir + "/summary.json");
  write_text_atomic(csv.str(), a.out_dir + "/summary.csv");
  write_text_atomic(timings.str(), a.out_dir + "/timings.csv");
  if (a.as_json)
    std::cout << summary.dump(2) << "\n";
  else
    std::cout << "sweep complete: " << runs.size() << " runs, "
              << (any_failed ? "with failures" : "all ok") << ", results in " << a.out_dir << "\n";
  return any_failed ? 4 : 0;
}

// --------------------------------------------------------------- threshold

struct ThresholdArgs {
  std::string decay = "poly";
  double c = 1.0;
  double alpha = 1.0;
  double eps = 0.1;
  bool as_json = false;
};

int cmd_threshold(const ThresholdArgs& a) {
  lograb::DecayKind kind;
  if (a.decay == "poly")
    kind = lograb::DecayKind::polynomial;
  else if (a.decay == "exp")
    kind = lograb::DecayKind::exponential;
  else
    throw CLI::ValidationError("--decay", "expected poly or exp");
  int64_t level = lograb::proxy_threshold(kind, a.c, a.alpha, a.eps);
  if (a.as_json)
    std::cout << json{{"level", level}}.dump() << "\n";
  else
    std::cout << level << "\n";
  return 0;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& in, bool as_json) {
  lograb::VerifyReport report = lograb::verify_archive(in);
  if (as_json) {
    json j;
    j["ok"] = report.ok;
    json entries = json::array();
    for (const auto& e : report.entries)
      entries.push_back({{"name", e.name}, {"ok", e.ok}, {"detail", e.detail}});
    j["entries"] = entries;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& e : report.entries)
      std::cout << (e.ok ? "ok   " : "FAIL ") << e.name
                << (e.detail.empty() ? "" : "  (" + e.detail + ")") << "\n";
    std::cout << (report.ok ? "archive ok" : "archive corrupt") << "\n";
  }
  return report.ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph reconstruction benchmark toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cgen = app.add_subcommand("generate", "build a benchmark instance archive");
  cgen->add_option("--dataset", gen.dataset, "edge-list file")->required();
  cgen->add_option("--name", gen.name, "dataset name recorded in the manifest");
  cgen->add_option("--strategy", gen.params.strategy, "d_hop | cluster | random");
  cgen->add_option("--d", gen.params.d, "hop radius");
  cgen->add_option("--k", gen.params.k, "embedding width");
  cgen->add_option("--sigma", gen.params.sigma, "noise level");
  cgen->add_option("--p", gen.params.p, "observed-node fraction");
  cgen->add_option("--seed", gen.params.seed, "rng seed");
  cgen->add_option("--ell", gen.params.ell, "cluster count (0 = auto)");
  cgen->add_option("--num-seeds", gen.params.num_seeds, "random-strategy seeds (0 = auto)");
  cgen->add_option("--q-max", gen.params.q_max, "patch size bound");
  cgen->add_flag("--audit-overlap", gen.params.audit_overlap, "record overlap statistics");
  cgen->add_option("--out", gen.out, "archive path (.lgb or directory)")->required();
  cgen->add_flag("--json", gen.as_json, "machine-readable stdout");

  DefendArgs def;
  CLI::App* cdef = app.add_subcommand("defend", "apply the Gaussian privacy mechanism");
  cdef->add_option("--epsilon", def.epsilon_text, "privacy budget (number or 'inf')");
  cdef->add_option("--delta", def.params.delta, "failure probability");
  cdef->add_option("--clip", def.params.clip_norm, "clip norm R");
  cdef->add_flag("--per-row", def.params.per_row_clip, "clip rows instead of the whole matrix");
  cdef->add_option("--seed", def.params.seed, "noise seed");
  cdef->add_option("--in", def.in, "input archive")->required();
  cdef->add_option("--out", def.out, "output archive")->required();
  cdef->add_flag("--json", def.as_json, "machine-readable stdout");

  ReconstructArgs rec;
  CLI::App* crec = app.add_subcommand("reconstruct", "rebuild topology from an archive");
  crec->add_option("--method", rec.method, "afr | eigensync")
      ->check(CLI::IsMember({"afr", "eigensync"}));
  crec->add_option("--in", rec.in, "input archive")->required();
  crec->add_option("--out", rec.out, "reconstruction JSON path")->required();
  crec->add_option("--t", rec.afr.t, "heat-kernel time");
  crec->add_option("--alpha", rec.afr.alpha, "fidelity mix");
  crec->add_option("--s-min", rec.afr.s_min, "core fidelity gate");
  crec->add_option("--delta-min", rec.afr.delta_min, "core gap gate");
  crec->add_option("--k-base", rec.afr.k_base, "adaptive threshold base");
  crec->add_option("--gamma", rec.afr.gamma, "fidelity slope (<0 = auto)");
  crec->add_option("--ransac-iters", rec.afr.ransac_iters, "RANSAC iterations");
  crec->add_option("--ransac-tol", rec.afr.ransac_inlier_tol, "fixed inlier tolerance (<=0 adaptive)");
  crec->add_option("--cross-c0", rec.afr.cross_c0, "cross-vote threshold");
  crec->add_option("--kappa", rec.afr.cross_kappa, "cross-vote sharpness");
  crec->add_option("--top-k", rec.afr.top_k_output, "per-node output filter");
  crec->add_option("--ba-max-iters", rec.afr.ba_max_iters, "bundle-adjust iteration cap");
  crec->add_option("--seed", rec.afr.seed, "RANSAC seed");
  crec->add_option("--k-nn", rec.sync.k_nn, "baseline kNN degree");
  crec->add_option("--sync-iters", rec.sync.max_iters, "baseline subspace iterations");
  crec->add_option("--sync-tol", rec.sync.tol, "baseline convergence tolerance");
  crec->add_flag("--json", rec.as_json, "machine-readable stdout");

  EvaluateArgs ev;
  CLI::App* cev = app.add_subcommand("evaluate", "score a reconstruction against ground truth");
  cev->add_option("--truth", ev.truth, "ground-truth edge list")->required();
  cev->add_option("--rec", ev.rec, "reconstruction JSON")->required();
  cev->add_option("--out", ev.out, "evaluation JSON path");
  cev->add_option("--scores", ev.scores, "cross-pair score source: auto | votes | cosine")
      ->check(CLI::IsMember({"auto", "votes", "cosine"}));
  cev->add_option("--link-seed", ev.link_seed, "negative-sampling seed");
  cev->add_flag("--json", ev.as_json, "machine-readable stdout");

  SweepArgs sw;
  CLI::App* csw = app.add_subcommand("sweep", "run a parameter grid and aggregate");
  csw->add_option("--dataset", sw.dataset, "edge-list file")->required();
  csw->add_option("--name", sw.name, "dataset name");
  csw->add_option("--grid", sw.grid, "tuples strategy:d:k:sigma:p separated by ';'")->required();
  csw->add_option("--methods", sw.methods, "comma list from {afr, eigensync}");
  csw->add_option("--seeds", sw.seeds, "comma list of seeds");
  csw->add_option("--link-seed", sw.link_seed, "negative-sampling seed");
  csw->add_option("--out-dir", sw.out_dir, "output directory")->required();
  csw->add_flag("--json", sw.as_json, "machine-readable stdout");

  ThresholdArgs th;
  CLI::App* cth = app.add_subcommand("threshold", "truncation level for a decay bound");
  cth->add_option("--decay", th.decay, "poly | exp");
  cth->add_option("--C", th.c, "decay constant");
  cth->add_option("--alpha", th.alpha, "decay rate");
  cth->add_option("--eps", th.eps, "target residual");
  cth->add_flag("--json", th.as_json, "machine-readable stdout");

  std::string verify_in;
  bool verify_json = false;
  CLI::App* cver = app.add_subcommand("verify", "check archive digests");
  cver->add_option("--in", verify_in, "archive path")->required();
  cver->add_flag("--json", verify_json, "machine-readable stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cgen->parsed()) return cmd_generate(gen);
    if (cdef->parsed()) return cmd_defend(def);
    if (crec->parsed()) return cmd_reconstruct(rec);
    if (cev->parsed()) return cmd_evaluate(ev);
    if (csw->parsed()) return cmd_sweep(sw);
    if (cth->parsed()) return cmd_threshold(th);
    if (cver->parsed()) return cmd_verify(verify_in, verify_json);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lograb::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
