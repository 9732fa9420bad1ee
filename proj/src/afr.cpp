#include "lograb/afr.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "lograb/procrustes.hpp"

namespace lograb {
namespace {

constexpr uint64_t kStreamRansac = 0xB1;

uint64_t pair_key(uint32_t u, uint32_t w) { return (static_cast<uint64_t>(u) << 32) | w; }

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // attaches b's root under a's root; false when already joined
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

size_t index_of(const NodeSet& sorted, uint32_t u) {
  return static_cast<size_t>(std::lower_bound(sorted.begin(), sorted.end(), u) - sorted.begin());
}

double ba_objective(const std::vector<Eigen::MatrixXd>& rot, const std::vector<StitchObs>& st) {
  double f = 0.0;
  for (const auto& s : st) f += (s.pa * rot[s.a] - s.pb * rot[s.b]).squaredNorm();
  return f;
}

Eigen::MatrixXd polar_retract(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// sampled median of pairwise squared distances between island coordinates
double median_sq_dist(const Island& isl) {
  const size_t n = isl.nodes.size();
  if (n < 2) return 0.0;
  constexpr size_t kCap = 1500;
  std::vector<size_t> pick;
  if (n <= kCap) {
    pick.resize(n);
    std::iota(pick.begin(), pick.end(), size_t{0});
  } else {
    pick.reserve(kCap);
    for (size_t i = 0; i < kCap; ++i) pick.push_back(i * n / kCap);
  }
  std::vector<double> d2;
  d2.reserve(pick.size() * (pick.size() - 1) / 2);
  for (size_t i = 0; i < pick.size(); ++i)
    for (size_t j = i + 1; j < pick.size(); ++j)
      d2.push_back((isl.coords.row(static_cast<Eigen::Index>(pick[i])) -
                    isl.coords.row(static_cast<Eigen::Index>(pick[j])))
                       .squaredNorm());
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  return *mid;
}

EdgeList finalize_prediction(const AfrResult& res, const AfrConfig& cfg) {
  // score each intra-island edge by a Gaussian affinity of the fused coordinates
  std::map<std::pair<uint32_t, uint32_t>, double> score;
  for (const auto& isl : res.islands) {
    if (isl.edges.empty()) continue;
    double h2 = median_sq_dist(isl);
    for (const auto& [u, w] : isl.edges) {
      auto pu = static_cast<Eigen::Index>(index_of(isl.nodes, u));
      auto pw = static_cast<Eigen::Index>(index_of(isl.nodes, w));
      double d2 = (isl.coords.row(pu) - isl.coords.row(pw)).squaredNorm();
      double a = h2 > 1e-300 ? std::exp(-d2 / (2.0 * h2)) : 1.0;
      auto [it, fresh] = score.emplace(std::make_pair(u, w), a);
      if (!fresh && a > it->second) it->second = a;
    }
  }
  // a scored edge survives when either endpoint ranks it among its best
  std::unordered_map<uint32_t, std::vector<std::pair<double, uint32_t>>> per_node;
  for (const auto& [e, a] : score) {
    per_node[e.first].emplace_back(a, e.second);
    per_node[e.second].emplace_back(a, e.first);
  }
  std::set<std::pair<uint32_t, uint32_t>> kept;
  for (auto& [u, lst] : per_node) {
    std::sort(lst.begin(), lst.end(),
              [](const std::pair<double, uint32_t>& x, const std::pair<double, uint32_t>& y) {
                if (x.first != y.first) return x.first > y.first;
                return x.second < y.second;
              });
    size_t limit = std::min(lst.size(), static_cast<size_t>(std::max(cfg.top_k_output, 0)));
    for (size_t i = 0; i < limit; ++i) {
      uint32_t w = lst[i].second;
      kept.insert({std::min(u, w), std::max(u, w)});
    }
  }
  EdgeList out(kept.begin(), kept.end());
  for (const auto& ce : res.cross_edges)
    if (ce.p >= 0.5) out.emplace_back(std::min(ce.u, ce.w), std::max(ce.u, ce.w));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double default_gamma(int k) {
  if (k <= 24) return 30.0;
  if (k <= 48) return 70.0;
  return 140.0;
}

std::vector<std::pair<int, int>> threshold_kernel_edges(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("threshold_kernel_edges: square matrix expected");
  const int q = static_cast<int>(h.rows());
  std::vector<double> levels;
  levels.reserve(static_cast<size_t>(q) * static_cast<size_t>(q - 1) / 2 + 1);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) levels.push_back(h(i, j));
  if (levels.empty()) return {};
  levels.push_back(0.0);  // non-edge anchor so one-level patches (cliques) still split
  std::sort(levels.begin(), levels.end());
  if (levels.back() - levels.front() < 1e-12) return {};
  size_t cut = 0;
  double widest = -1.0;
  for (size_t i = 0; i + 1 < levels.size(); ++i) {
    double gap = levels[i + 1] - levels[i];
    if (gap > widest) {
      widest = gap;
      cut = i;
    }
  }
  const double tau = 0.5 * (levels[cut] + levels[cut + 1]);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j)
      if (h(i, j) > tau) edges.emplace_back(i, j);
  return edges;
}

LocalRecon local_reconstruct(const PatchObservation& obs, double t) {
  LocalRecon r;
  Eigen::MatrixXd h = truncated_heat_kernel(obs.embedding, obs.retained, t);
  r.edges = threshold_kernel_edges(h);
  r.degrees.assign(static_cast<size_t>(obs.q()), 0);
  for (const auto& [i, j] : r.edges) {
    ++r.degrees[static_cast<size_t>(i)];
    ++r.degrees[static_cast<size_t>(j)];
  }
  return r;
}

int adaptive_threshold(double s_v, double s_w, int k, const AfrConfig& cfg) {
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : default_gamma(k);
  const double raw = cfg.k_base + gamma * (1.0 - std::min(s_v, s_w));
  // shave representation excess (e.g. 30*(1-0.6) = 12.000000000000002) before ceil
  const double guarded = raw - 1e-9 * std::max(1.0, std::abs(raw));
  return std::max(k + 1, static_cast<int>(std::ceil(guarded)));
}

CoreSelection select_core(const std::vector<PatchObservation>& patches, const AfrConfig& cfg) {
  CoreSelection sel;
  sel.quantities.reserve(patches.size());
  sel.recon.reserve(patches.size());
  for (size_t i = 0; i < patches.size(); ++i) {
    LocalRecon rec = local_reconstruct(patches[i], cfg.t);
    TruncatedEmbedding emb{patches[i].embedding, patches[i].retained, patches[i].lambda_kp1};
    SpectralQuantities sq = spectral_quantities(emb, rec.degrees, cfg.t, cfg.alpha);
    if (sq.score >= cfg.s_min && sq.delta >= cfg.delta_min) sel.core.push_back(static_cast<int>(i));
    sel.quantities.push_back(sq);
    sel.recon.push_back(std::move(rec));
  }
  return sel;
}

std::vector<double> bundle_adjust(std::vector<Eigen::MatrixXd>& rotations,
                                  const std::vector<StitchObs>& stitches, const AfrConfig& cfg) {
  const int m = static_cast<int>(rotations.size());
  std::vector<double> trace;
  trace.push_back(ba_objective(rotations, stitches));
  if (m <= 1 || stitches.empty()) return trace;
  double step = 0.5;
  for (int iter = 0; iter < cfg.ba_max_iters; ++iter) {
    std::vector<Eigen::MatrixXd> grad(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
      grad[static_cast<size_t>(i)] =
          Eigen::MatrixXd::Zero(rotations[static_cast<size_t>(i)].rows(),
                                rotations[static_cast<size_t>(i)].cols());
    for (const auto& s : stitches) {
      Eigen::MatrixXd r = s.pa * rotations[static_cast<size_t>(s.a)] -
                          s.pb * rotations[static_cast<size_t>(s.b)];
      grad[static_cast<size_t>(s.a)] += 2.0 * s.pa.transpose() * r;
      grad[static_cast<size_t>(s.b)] -= 2.0 * s.pb.transpose() * r;
    }
    grad[0].setZero();  // anchor pins the global frame
    std::vector<Eigen::MatrixXd> tangent(static_cast<size_t>(m));
    double gnorm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const Eigen::MatrixXd& ri = rotations[static_cast<size_t>(i)];
      Eigen::MatrixXd rg = ri.transpose() * grad[static_cast<size_t>(i)];
      tangent[static_cast<size_t>(i)] =
          grad[static_cast<size_t>(i)] - ri * (0.5 * (rg + rg.transpose()));
      gnorm2 += tangent[static_cast<size_t>(i)].squaredNorm();
    }
    if (gnorm2 < 1e-30) break;
    const double f0 = trace.back();
    double s = step * 2.0;
    bool moved = false;
    for (int back = 0; back < 48; ++back, s *= 0.5) {
      std::vector<Eigen::MatrixXd> cand(static_cast<size_t>(m));
      cand[0] = rotations[0];
      for (int i = 1; i < m; ++i)
        cand[static_cast<size_t>(i)] = polar_retract(rotations[static_cast<size_t>(i)] -
                                                     s * tangent[static_cast<size_t>(i)]);
      double f1 = ba_objective(cand, stitches);
      if (f1 <= f0 - 1e-4 * s * gnorm2) {
        rotations = std::move(cand);
        trace.push_back(f1);
        step = s;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    if (f0 - trace.back() < cfg.ba_rel_tol * std::max(f0, 1e-300)) break;
  }
  return trace;
}

std::vector<CrossEdge> cross_vote(const std::vector<NodeSet>& island_nodes,
                                  const std::vector<PatchObservation>& patches,
                                  const AfrConfig& cfg) {
  std::unordered_map<uint32_t, std::vector<int>> membership;
  for (size_t s = 0; s < island_nodes.size(); ++s)
    for (uint32_t u : island_nodes[s]) membership[u].push_back(static_cast<int>(s));
  std::unordered_map<uint64_t, int> votes;
  for (const auto& patch : patches) {
    const auto& nd = patch.nodes;
    for (size_t i = 0; i < nd.size(); ++i)
      for (size_t j = i + 1; j < nd.size(); ++j) ++votes[pair_key(nd[i], nd[j])];
  }
  std::vector<CrossEdge> out;
  for (const auto& [key, count] : votes) {
    if (count <= cfg.cross_c0) continue;
    const auto u = static_cast<uint32_t>(key >> 32);
    const auto w = static_cast<uint32_t>(key & 0xffffffffu);
    auto iu = membership.find(u);
    auto iw = membership.find(w);
    // only pairs whose endpoints live in islands but never the same one
    if (iu == membership.end() || iw == membership.end()) continue;
    const auto& a = iu->second;
    const auto& b = iw->second;
    bool shared = false;
    for (size_t x = 0, y = 0; x < a.size() && y < b.size();) {
      if (a[x] == b[y]) {
        shared = true;
        break;
      }
      if (a[x] < b[y])
        ++x;
      else
        ++y;
    }
    if (shared) continue;
    CrossEdge e;
    e.u = u;
    e.w = w;
    e.votes = count;
    e.p = 1.0 / (1.0 + std::exp(-cfg.cross_kappa * (count - cfg.cross_c0)));
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const CrossEdge& x, const CrossEdge& y) {
    return std::tie(x.u, x.w) < std::tie(y.u, y.w);
  });
  return out;
}

AfrResult run_afr(const InstanceArchive& archive, const AfrConfig& cfg) {
  AfrResult res;
  const auto& patches = archive.patches;
  CoreSelection sel = select_core(patches, cfg);
  if (sel.core.empty()) {
    res.warnings.push_back("no patches passed the core fidelity gate");
    return res;
  }

  const int nc = static_cast<int>(sel.core.size());
  int bigk = 0;
  for (int idx : sel.core) bigk = std::max(bigk, patches[static_cast<size_t>(idx)].k());
  res.rotation_dim = bigk;

  // zero-pad every core patch to the common rotation width
  std::vector<Eigen::MatrixXd> padded(static_cast<size_t>(nc));
  std::vector<int> core_pos(patches.size(), -1);
  for (int c = 0; c < nc; ++c) {
    const auto& obs = patches[static_cast<size_t>(sel.core[static_cast<size_t>(c)])];
    padded[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(obs.q(), bigk);
    padded[static_cast<size_t>(c)].leftCols(obs.k()) = obs.embedding;
    core_pos[static_cast<size_t>(sel.core[static_cast<size_t>(c)])] = c;
  }

  auto overlap_rows = [&](int cv, int cw, const NodeSet& inter) {
    const auto& nv = patches[static_cast<size_t>(sel.core[static_cast<size_t>(cv)])].nodes;
    const auto& nw = patches[static_cast<size_t>(sel.core[static_cast<size_t>(cw)])].nodes;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(inter.size()), bigk);
    Eigen::MatrixXd b(static_cast<Eigen::Index>(inter.size()), bigk);
    for (size_t i = 0; i < inter.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = padded[static_cast<size_t>(cv)].row(
          static_cast<Eigen::Index>(index_of(nv, inter[i])));
      b.row(static_cast<Eigen::Index>(i)) = padded[static_cast<size_t>(cw)].row(
          static_cast<Eigen::Index>(index_of(nw, inter[i])));
    }
    return std::make_pair(std::move(a), std::move(b));
  };

  // candidate stitches: overlapping core pairs ordered by fidelity, then overlap
  std::unordered_map<uint32_t, std::vector<int>> where;
  for (int c = 0; c < nc; ++c)
    for (uint32_t u : patches[static_cast<size_t>(sel.core[static_cast<size_t>(c)])].nodes)
      where[u].push_back(c);
  std::map<std::pair<int, int>, int> overlap_count;
  for (const auto& [u, cs] : where)
    for (size_t i = 0; i < cs.size(); ++i)
      for (size_t j = i + 1; j < cs.size(); ++j) ++overlap_count[{cs[i], cs[j]}];

  struct Cand {
    double f;
    int v, w;    // patch indices, v < w
    int ca, cb;  // core positions
  };
  auto cand_less = [](const Cand& a, const Cand& b) {
    if (a.f != b.f) return a.f < b.f;
    return std::tie(a.v, a.w) > std::tie(b.v, b.w);
  };
  std::priority_queue<Cand, std::vector<Cand>, decltype(cand_less)> pq(cand_less);
  for (const auto& [pr, cnt] : overlap_count) {
    int v = sel.core[static_cast<size_t>(pr.first)];
    int w = sel.core[static_cast<size_t>(pr.second)];
    double f = std::min(sel.quantities[static_cast<size_t>(v)].score,
                        sel.quantities[static_cast<size_t>(w)].score) +
               0.001 * std::min(cnt, 1000);
    pq.push({f, v, w, pr.first, pr.second});
  }

  Dsu dsu(nc);
  std::vector<Eigen::MatrixXd> rot(static_cast<size_t>(nc), Eigen::MatrixXd::Identity(bigk, bigk));
  std::vector<std::vector<int>> group(static_cast<size_t>(nc));
  for (int c = 0; c < nc; ++c) group[static_cast<size_t>(c)] = {c};

  while (!pq.empty()) {
    Cand cand = pq.top();
    pq.pop();
    StitchRecord note;
    note.v = cand.v;
    note.w = cand.w;
    const auto& nv = patches[static_cast<size_t>(cand.v)].nodes;
    const auto& nw = patches[static_cast<size_t>(cand.w)].nodes;
    NodeSet inter;
    std::set_intersection(nv.begin(), nv.end(), nw.begin(), nw.end(), std::back_inserter(inter));
    note.overlap = static_cast<int>(inter.size());
    note.d_adaptive = adaptive_threshold(sel.quantities[static_cast<size_t>(cand.v)].score,
                                         sel.quantities[static_cast<size_t>(cand.w)].score, bigk,
                                         cfg);
    const int ra = dsu.find(cand.ca);
    const int rb = dsu.find(cand.cb);
    if (ra == rb) {
      note.reason = "already in one island";
      res.audit.push_back(std::move(note));
      continue;
    }
    if (note.overlap < note.d_adaptive) {
      note.reason = "overlap below adaptive threshold";
      res.audit.push_back(std::move(note));
      continue;
    }
    // the union of both local reconstructions must connect the overlap
    Dsu od(static_cast<int>(inter.size()));
    auto link = [&](int pidx) {
      const auto& nodes = patches[static_cast<size_t>(pidx)].nodes;
      for (const auto& [i, j] : sel.recon[static_cast<size_t>(pidx)].edges) {
        uint32_t gu = nodes[static_cast<size_t>(i)];
        uint32_t gw = nodes[static_cast<size_t>(j)];
        if (!std::binary_search(inter.begin(), inter.end(), gu)) continue;
        if (!std::binary_search(inter.begin(), inter.end(), gw)) continue;
        od.unite(static_cast<int>(index_of(inter, gu)), static_cast<int>(index_of(inter, gw)));
      }
    };
    link(cand.v);
    link(cand.w);
    bool connected = true;
    for (size_t i = 1; i < inter.size(); ++i)
      if (od.find(static_cast<int>(i)) != od.find(0)) {
        connected = false;
        break;
      }
    if (!connected) {
      note.reason = "overlap reconstruction disconnected";
      res.audit.push_back(std::move(note));
      continue;
    }
    auto [a, b] = overlap_rows(cand.ca, cand.cb, inter);
    RansacParams rp;
    rp.iterations = cfg.ransac_iters;
    rp.inlier_tol = cfg.ransac_inlier_tol;
    rp.tol_floor = cfg.ransac_tol_floor;
    CounterRng rng = CounterRng::substream(
        cfg.seed,
        (static_cast<uint64_t>(cand.v) << 32) | static_cast<uint64_t>(static_cast<uint32_t>(cand.w)),
        kStreamRansac);
    auto fit = ransac_procrustes(a, b, note.d_adaptive, rp, rng);
    if (!fit) {
      note.reason = "no consensus at adaptive threshold";
      res.audit.push_back(std::move(note));
      continue;
    }
    note.consensus = static_cast<int>(fit->consensus.size());
    note.accepted = true;
    res.audit.push_back(std::move(note));
    // fit gives P_v Q ~ P_w, so island(w) moves into island(v)'s frame via
    // R_x <- R_x (R_w^T Q^T R_v)
    Eigen::MatrixXd tform = rot[static_cast<size_t>(cand.cb)].transpose() *
                            fit->q.transpose() * rot[static_cast<size_t>(cand.ca)];
    for (int x : group[static_cast<size_t>(rb)])
      rot[static_cast<size_t>(x)] = rot[static_cast<size_t>(x)] * tform;
    auto& gv = group[static_cast<size_t>(ra)];
    auto& gw = group[static_cast<size_t>(rb)];
    gv.insert(gv.end(), gw.begin(), gw.end());
    gw.clear();
    dsu.unite(ra, rb);
  }

  // materialize islands, ordered by their smallest member patch index
  std::vector<std::vector<int>> protos;
  for (int c = 0; c < nc; ++c) {
    if (dsu.find(c) != c) continue;
    std::vector<int> members = group[static_cast<size_t>(c)];
    std::sort(members.begin(), members.end());
    protos.push_back(std::move(members));
  }
  std::sort(protos.begin(), protos.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });

  std::vector<std::pair<int, int>> locate(static_cast<size_t>(nc), {-1, -1});
  res.islands.resize(protos.size());
  for (size_t s = 0; s < protos.size(); ++s) {
    Island& isl = res.islands[s];
    for (size_t mpos = 0; mpos < protos[s].size(); ++mpos) {
      int cp = protos[s][mpos];
      locate[static_cast<size_t>(cp)] = {static_cast<int>(s), static_cast<int>(mpos)};
      isl.members.push_back(sel.core[static_cast<size_t>(cp)]);
      isl.rotations.push_back(rot[static_cast<size_t>(cp)]);
    }
  }

  // refine every stitched island, warm-started at the stitch rotations
  std::vector<std::vector<StitchObs>> island_stitches(protos.size());
  for (const auto& note : res.audit) {
    if (!note.accepted) continue;
    int cv = core_pos[static_cast<size_t>(note.v)];
    int cw = core_pos[static_cast<size_t>(note.w)];
    const auto& nv = patches[static_cast<size_t>(note.v)].nodes;
    const auto& nw = patches[static_cast<size_t>(note.w)].nodes;
    NodeSet inter;
    std::set_intersection(nv.begin(), nv.end(), nw.begin(), nw.end(), std::back_inserter(inter));
    StitchObs so;
    so.a = locate[static_cast<size_t>(cv)].second;
    so.b = locate[static_cast<size_t>(cw)].second;
    std::tie(so.pa, so.pb) = overlap_rows(cv, cw, inter);
    island_stitches[static_cast<size_t>(locate[static_cast<size_t>(cv)].first)].push_back(
        std::move(so));
  }
  for (size_t s = 0; s < res.islands.size(); ++s) {
    if (res.islands[s].members.size() < 2 || island_stitches[s].empty()) continue;
    res.ba_traces.push_back(bundle_adjust(res.islands[s].rotations, island_stitches[s], cfg));
  }

  // fuse coordinates and pool member reconstructions
  for (auto& isl : res.islands) {
    NodeSet uni;
    for (int pidx : isl.members) {
      NodeSet merged;
      const auto& nodes = patches[static_cast<size_t>(pidx)].nodes;
      std::set_union(uni.begin(), uni.end(), nodes.begin(), nodes.end(),
                     std::back_inserter(merged));
      uni = std::move(merged);
    }
    isl.nodes = std::move(uni);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(isl.nodes.size()), bigk);
    std::vector<int> hits(isl.nodes.size(), 0);
    for (size_t mpos = 0; mpos < isl.members.size(); ++mpos) {
      int pidx = isl.members[mpos];
      int cp = core_pos[static_cast<size_t>(pidx)];
      Eigen::MatrixXd rotated = padded[static_cast<size_t>(cp)] * isl.rotations[mpos];
      const auto& nodes = patches[static_cast<size_t>(pidx)].nodes;
      for (size_t i = 0; i < nodes.size(); ++i) {
        size_t pos = index_of(isl.nodes, nodes[i]);
        acc.row(static_cast<Eigen::Index>(pos)) += rotated.row(static_cast<Eigen::Index>(i));
        ++hits[pos];
      }
    }
    for (size_t i = 0; i < isl.nodes.size(); ++i)
      acc.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(hits[i]);
    isl.coords = std::move(acc);
    EdgeList ed;
    for (int pidx : isl.members) {
      const auto& nodes = patches[static_cast<size_t>(pidx)].nodes;
      for (const auto& [i, j] : sel.recon[static_cast<size_t>(pidx)].edges)
        ed.emplace_back(nodes[static_cast<size_t>(i)], nodes[static_cast<size_t>(j)]);
    }
    std::sort(ed.begin(), ed.end());
    ed.erase(std::unique(ed.begin(), ed.end()), ed.end());
    isl.edges = std::move(ed);
  }

  NodeSet covered;
  for (const auto& isl : res.islands) {
    NodeSet merged;
    std::set_union(covered.begin(), covered.end(), isl.nodes.begin(), isl.nodes.end(),
                   std::back_inserter(merged));
    covered = std::move(merged);
  }
  res.covered = std::move(covered);

  std::vector<NodeSet> island_nodes;
  island_nodes.reserve(res.islands.size());
  for (const auto& isl : res.islands) island_nodes.push_back(isl.nodes);
  res.cross_edges = cross_vote(island_nodes, patches, cfg);
  res.edges = finalize_prediction(res, cfg);
  return res;
}

}  // namespace lograb
