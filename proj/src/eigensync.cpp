#include "lograb/eigensync.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <unordered_map>

#include "lograb/afr.hpp"
#include "lograb/procrustes.hpp"

namespace lograb {
namespace {

Eigen::MatrixXd pad_embedding(const PatchObservation& obs, int k) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(obs.q(), k);
  p.leftCols(obs.k()) = obs.embedding;
  return p;
}

// thin Q of a tall matrix, QR via Householder reflections
Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

// square orthogonal factor with the R diagonal forced non-negative
Eigen::MatrixXd signed_q(const Eigen::MatrixXd& block) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), block.cols());
  Eigen::MatrixXd r = q.transpose() * block;
  for (Eigen::Index c = 0; c < r.cols(); ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

}  // namespace

std::vector<SyncPair> pairwise_rotations(const std::vector<PatchObservation>& patches, int k) {
  std::unordered_map<uint32_t, std::vector<int>> where;
  for (size_t i = 0; i < patches.size(); ++i)
    for (uint32_t u : patches[i].nodes) where[u].push_back(static_cast<int>(i));
  std::map<std::pair<int, int>, int> counts;
  for (const auto& [u, ps] : where)
    for (size_t a = 0; a < ps.size(); ++a)
      for (size_t b = a + 1; b < ps.size(); ++b) ++counts[{ps[a], ps[b]}];

  std::vector<SyncPair> pairs;
  for (const auto& [pr, cnt] : counts) {
    if (cnt < 2) continue;
    const auto& pi = patches[static_cast<size_t>(pr.first)];
    const auto& pj = patches[static_cast<size_t>(pr.second)];
    NodeSet inter;
    std::set_intersection(pi.nodes.begin(), pi.nodes.end(), pj.nodes.begin(), pj.nodes.end(),
                          std::back_inserter(inter));
    Eigen::MatrixXd padi = pad_embedding(pi, k);
    Eigen::MatrixXd padj = pad_embedding(pj, k);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(inter.size()), k);
    Eigen::MatrixXd b(static_cast<Eigen::Index>(inter.size()), k);
    for (size_t s = 0; s < inter.size(); ++s) {
      auto posi = std::lower_bound(pi.nodes.begin(), pi.nodes.end(), inter[s]) - pi.nodes.begin();
      auto posj = std::lower_bound(pj.nodes.begin(), pj.nodes.end(), inter[s]) - pj.nodes.begin();
      a.row(static_cast<Eigen::Index>(s)) = padi.row(posi);
      b.row(static_cast<Eigen::Index>(s)) = padj.row(posj);
    }
    SyncPair sp;
    sp.i = pr.first;
    sp.j = pr.second;
    sp.weight = cnt;
    sp.r = orthogonal_procrustes(a, b);  // P_i|S r ~ P_j|S
    pairs.push_back(std::move(sp));
  }
  return pairs;
}

EigenSyncResult run_eigensync(const InstanceArchive& archive, const EigenSyncConfig& cfg) {
  EigenSyncResult res;
  const auto& all = archive.patches;
  if (all.empty()) {
    res.warnings.push_back("archive holds no patches");
    return res;
  }

  int bigk = 0;
  for (const auto& p : all) bigk = std::max(bigk, p.k());
  res.rotation_dim = bigk;

  // keep the m*k working size bounded; stride keeps the selection deterministic
  std::vector<int> selected(all.size());
  std::iota(selected.begin(), selected.end(), 0);
  if (static_cast<int64_t>(all.size()) * bigk > cfg.mk_cap) {
    const auto keep = static_cast<size_t>(std::max<int64_t>(cfg.mk_cap / std::max(bigk, 1), 2));
    std::vector<int> strided;
    strided.reserve(keep);
    for (size_t i = 0; i < keep; ++i)
      strided.push_back(static_cast<int>(i * all.size() / keep));
    strided.erase(std::unique(strided.begin(), strided.end()), strided.end());
    selected = std::move(strided);
    res.warnings.push_back("patch count exceeded the sync working-set cap; strided subsample used");
  }
  std::vector<PatchObservation> patches;
  patches.reserve(selected.size());
  for (int idx : selected) patches.push_back(all[static_cast<size_t>(idx)]);

  const int m = static_cast<int>(patches.size());
  std::vector<SyncPair> pairs = pairwise_rotations(patches, bigk);
  res.pairs_used = static_cast<int>(pairs.size());

  if (m < 2 || pairs.empty()) {
    // nothing to synchronize: pool the local reconstructions instead
    res.fallback_local = true;
    res.warnings.push_back("fewer than two overlapping patches; local reconstructions pooled");
    EdgeList ed;
    NodeSet covered;
    for (const auto& obs : all) {
      LocalRecon rec = local_reconstruct(obs, cfg.t);
      for (const auto& [i, j] : rec.edges)
        ed.emplace_back(obs.nodes[static_cast<size_t>(i)], obs.nodes[static_cast<size_t>(j)]);
      NodeSet merged;
      std::set_union(covered.begin(), covered.end(), obs.nodes.begin(), obs.nodes.end(),
                     std::back_inserter(merged));
      covered = std::move(merged);
    }
    std::sort(ed.begin(), ed.end());
    ed.erase(std::unique(ed.begin(), ed.end()), ed.end());
    res.edges = std::move(ed);
    res.covered = std::move(covered);
    return res;
  }

  std::vector<Eigen::MatrixXd> padded(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) padded[static_cast<size_t>(i)] = pad_embedding(patches[static_cast<size_t>(i)], bigk);

  // shift keeps the iterated operator positive semidefinite (Gershgorin bound)
  std::vector<double> row_weight(static_cast<size_t>(m), 0.0);
  for (const auto& sp : pairs) {
    row_weight[static_cast<size_t>(sp.i)] += sp.weight;
    row_weight[static_cast<size_t>(sp.j)] += sp.weight;
  }
  const double shift = *std::max_element(row_weight.begin(), row_weight.end());

  const Eigen::Index dim = static_cast<Eigen::Index>(m) * bigk;
  auto apply_sync = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y = shift * x;
    for (const auto& sp : pairs) {
      const Eigen::Index oi = static_cast<Eigen::Index>(sp.i) * bigk;
      const Eigen::Index oj = static_cast<Eigen::Index>(sp.j) * bigk;
      y.middleRows(oi, bigk) += sp.weight * (sp.r * x.middleRows(oj, bigk));
      y.middleRows(oj, bigk) += sp.weight * (sp.r.transpose() * x.middleRows(oi, bigk));
    }
    return y;
  };

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, bigk);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i)
    x.middleRows(static_cast<Eigen::Index>(i) * bigk, bigk) =
        scale * Eigen::MatrixXd::Identity(bigk, bigk);

  int iters = 0;
  for (; iters < cfg.max_iters; ++iters) {
    Eigen::MatrixXd next = thin_q(apply_sync(x));
    double err = (x - next * (next.transpose() * x)).norm();
    x = std::move(next);
    if (err <= cfg.tol) {
      ++iters;
      break;
    }
  }
  res.iterations = iters;

  // Rayleigh-Ritz: rotate the basis onto ritz vectors, leading values first
  Eigen::MatrixXd t = x.transpose() * apply_sync(x);
  t = 0.5 * (t + t.transpose());
  EigenSystem ritz = symmetric_eigendecompose(t, std::max(bigk, 1));
  Eigen::MatrixXd order(bigk, bigk);
  for (int c = 0; c < bigk; ++c) order.col(c) = ritz.vectors.col(bigk - 1 - c);
  x = x * order;

  std::vector<Eigen::MatrixXd> rot(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    rot[static_cast<size_t>(i)] = signed_q(x.middleRows(static_cast<Eigen::Index>(i) * bigk, bigk));

  NodeSet covered;
  for (const auto& obs : patches) {
    NodeSet merged;
    std::set_union(covered.begin(), covered.end(), obs.nodes.begin(), obs.nodes.end(),
                   std::back_inserter(merged));
    covered = std::move(merged);
  }
  Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(covered.size()), bigk);
  std::vector<int> hits(covered.size(), 0);
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd rows = padded[static_cast<size_t>(i)] * rot[static_cast<size_t>(i)];
    const auto& nodes = patches[static_cast<size_t>(i)].nodes;
    for (size_t s = 0; s < nodes.size(); ++s) {
      auto pos = std::lower_bound(covered.begin(), covered.end(), nodes[s]) - covered.begin();
      emb.row(pos) += rows.row(static_cast<Eigen::Index>(s));
      ++hits[static_cast<size_t>(pos)];
    }
  }
  for (size_t i = 0; i < covered.size(); ++i)
    emb.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(hits[i]);

  // cosine kNN graph over nonzero rows, union convention, processed in blocks
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(covered.size()); ++i)
    if (emb.row(i).norm() > 0.0) live.push_back(i);
  const auto n = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd unit(n, bigk);
  for (Eigen::Index i = 0; i < n; ++i) unit.row(i) = emb.row(live[static_cast<size_t>(i)]).normalized();
  EdgeList ed;
  const Eigen::Index block = 512;
  const int knn = std::max(cfg.k_nn, 0);
  for (Eigen::Index lo = 0; lo < n; lo += block) {
    const Eigen::Index rows = std::min(block, n - lo);
    Eigen::MatrixXd sim = unit.middleRows(lo, rows) * unit.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index u = lo + r;
      std::vector<std::pair<double, uint32_t>> cand;
      cand.reserve(static_cast<size_t>(n) - 1);
      for (Eigen::Index w = 0; w < n; ++w)
        if (w != u)
          cand.emplace_back(sim(r, w), covered[static_cast<size_t>(live[static_cast<size_t>(w)])]);
      auto better = [](const std::pair<double, uint32_t>& a, const std::pair<double, uint32_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      };
      const auto take = std::min(cand.size(), static_cast<size_t>(knn));
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take),
                        cand.end(), better);
      uint32_t gu = covered[static_cast<size_t>(live[static_cast<size_t>(u)])];
      for (size_t s = 0; s < take; ++s)
        ed.emplace_back(std::min(gu, cand[s].second), std::max(gu, cand[s].second));
    }
  }
  std::sort(ed.begin(), ed.end());
  ed.erase(std::unique(ed.begin(), ed.end()), ed.end());

  res.covered = std::move(covered);
  res.embedding = std::move(emb);
  res.edges = std::move(ed);
  res.rotations = std::move(rot);
  return res;
}

}  // namespace lograb
