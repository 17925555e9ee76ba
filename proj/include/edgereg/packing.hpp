#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "extract.hpp"
#include "functional.hpp"
#include "regularity.hpp"

namespace edgereg::packing {

using core::BigInt;
using core::BipartiteGraph;
using core::Rational;

// Rooted tree with its level decomposition: L1 = {root}, L_{i+1} = children
// of L_i. Vertex 0 is the root.
struct RootedTree {
  std::size_t t = 0;
  std::vector<std::size_t> parent;  // parent[v] for v >= 1; parent[0] unused
  std::vector<std::vector<std::size_t>> levels;  // each sorted ascending
  std::size_t s = 0;                // level count
  std::size_t max_level_size = 0;

  std::size_t edge_count() const { return t == 0 ? 0 : t - 1; }
};

// Builds the level structure from a parent array and validates that it is a
// tree: every vertex reaches the root without cycles.
inline RootedTree tree_from_parents(const std::vector<std::size_t>& parent) {
  const std::size_t t = parent.size();
  if (t == 0) throw Error("bad-tree", "no vertices");
  RootedTree tree;
  tree.t = t;
  tree.parent = parent;

  std::vector<std::size_t> depth(t, t);  // t = unknown
  depth[0] = 0;
  for (std::size_t v = 1; v < t; ++v) {
    // walk up collecting the chain; a walk longer than t is a cycle
    std::vector<std::size_t> chain;
    std::size_t u = v;
    while (depth[u] == t) {
      if (u >= t || parent[u] >= t)
        throw Error("bad-tree", "parent index out of range");
      if (parent[u] == u) throw Error("bad-tree", "self parent");
      chain.push_back(u);
      u = parent[u];
      if (chain.size() > t) throw Error("bad-tree", "cycle in parent array");
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      depth[*it] = depth[u] + 1 + std::distance(chain.rbegin(), it);
  }

  std::size_t max_d = 0;
  for (std::size_t v = 0; v < t; ++v) max_d = std::max(max_d, depth[v]);
  tree.s = max_d + 1;
  tree.levels.assign(tree.s, {});
  for (std::size_t v = 0; v < t; ++v) tree.levels[depth[v]].push_back(v);
  for (auto& lvl : tree.levels) {
    if (lvl.empty()) throw Error("bad-tree", "gap in levels");
    tree.max_level_size = std::max(tree.max_level_size, lvl.size());
  }
  return tree;
}

// phi maps tree vertices to host indices; the side is determined by the
// level: level_on_a[i] says whether level i+1 landed in part A.
struct Embedding {
  std::vector<std::size_t> phi;
  std::vector<char> level_on_a;
};

// Snapshot of the dynamic sets after a level is placed; test instrumentation.
struct LevelTrace {
  std::vector<std::size_t> Au, Bu, Ap, Bp;
};

// Greedy level-by-level embedding into a super-regular pair. The uncovered
// sets A_u, B_u and the high-degree subsets
//   A' = {v in A_u : deg(v, B_u) >= (delta-eps)|B_u|}   (B' symmetric)
// shrink monotonically: placing a level into one side removes its images
// from that side's sets and re-filters the opposite prime set against the
// smaller uncovered set. Children are processed in tree order and take the
// lowest available host neighbor. Super-regularity of h is the caller's
// promise; the cheap half (degree floors) is verified here, the expensive
// half surfaces as embedding-stuck if the promise was false.
inline Embedding embed_tree(const BipartiteGraph& h, const RootedTree& tree,
                            const Rational& eps, const Rational& delta,
                            std::span<const std::size_t> occupied_a = {},
                            std::span<const std::size_t> occupied_b = {},
                            std::vector<LevelTrace>* trace = nullptr) {
  if (h.nA() != h.nB()) throw Error("hypotheses-violated", "host not balanced");
  const std::size_t m = h.nA();
  if (m == 0 || tree.t == 0)
    throw Error("hypotheses-violated", "empty host or tree");
  if (eps <= 0 || !(delta >= 3 * eps) || delta > 1)
    throw Error("hypotheses-violated", "need 0 < 3*eps <= delta <= 1");
  if (m < 2 * tree.t)
    throw Error("hypotheses-violated", "part size below twice the tree size");
  if (Rational(tree.max_level_size) > delta * m / 4)
    throw Error("hypotheses-violated", "a level exceeds delta*m/4");
  for (std::size_t a = 0; a < m; ++a)
    if (Rational(h.deg_a(a)) < delta * m)
      throw Error("hypotheses-violated", "A-side degree below delta*m");
  for (std::size_t b = 0; b < m; ++b)
    if (Rational(h.deg_b(b)) < delta * m)
      throw Error("hypotheses-violated", "B-side degree below delta*m");

  std::vector<char> inAu(m, 1), inBu(m, 1);
  for (std::size_t i : occupied_a) {
    if (i >= m) throw Error("hypotheses-violated", "occupied index out of range");
    inAu[i] = 0;
  }
  for (std::size_t i : occupied_b) {
    if (i >= m) throw Error("hypotheses-violated", "occupied index out of range");
    inBu[i] = 0;
  }

  const std::size_t words = core::bits::words_for(m);
  auto mask_from = [&](const std::vector<char>& in) {
    std::vector<std::uint64_t> mk(words, 0);
    for (std::size_t i = 0; i < m; ++i)
      if (in[i]) mk[i >> 6] |= std::uint64_t(1) << (i & 63);
    return mk;
  };
  std::vector<std::uint64_t> maskAu = mask_from(inAu), maskBu = mask_from(inBu);
  std::size_t cntAu = core::bits::popcount(maskAu);
  std::size_t cntBu = core::bits::popcount(maskBu);

  const Rational need = delta - eps;
  std::vector<char> inAp(m, 0), inBp(m, 0);
  for (std::size_t a = 0; a < m; ++a)
    inAp[a] = inAu[a] && Rational(core::bits::and_popcount(h.row_a(a),
                                                           maskBu)) >=
                             need * cntBu;
  for (std::size_t b = 0; b < m; ++b)
    inBp[b] = inBu[b] && Rational(core::bits::and_popcount(h.row_b(b),
                                                           maskAu)) >=
                             need * cntAu;
  std::vector<std::uint64_t> maskAp = mask_from(inAp), maskBp = mask_from(inBp);

  std::vector<std::vector<std::size_t>> children(tree.t);
  for (std::size_t v = 1; v < tree.t; ++v)
    children[tree.parent[v]].push_back(v);  // ascending by construction

  Embedding out;
  out.phi.assign(tree.t, 0);
  out.level_on_a.assign(tree.s, 0);

  auto stuck = [&](std::size_t level, std::size_t tv) {
    return Error("embedding-stuck",
                 "no available host neighbor for tree vertex " +
                     std::to_string(tv) + " at level " +
                     std::to_string(level + 1));
  };
  auto take_bit = [&](std::vector<std::uint64_t>& mask, std::size_t i) {
    mask[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
  };
  auto first_common = [&](std::span<const std::uint64_t> row,
                          const std::vector<std::uint64_t>& mask)
      -> std::size_t {
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t x = row[w] & mask[w];
      if (x) return (w << 6) + std::countr_zero(x);
    }
    return m;
  };

  for (std::size_t li = 0; li < tree.s; ++li) {
    const bool to_a = (li % 2 == 0);  // L1 goes to A'
    out.level_on_a[li] = to_a;
    auto& prime = to_a ? inAp : inBp;
    auto& prime_mask = to_a ? maskAp : maskBp;
    std::vector<std::size_t> used;

    if (li == 0) {
      std::size_t v = first_common(prime_mask, prime_mask);
      if (v >= m) throw stuck(0, 0);
      out.phi[0] = v;
      prime[v] = 0;
      take_bit(prime_mask, v);
      used.push_back(v);
    } else {
      for (std::size_t x : tree.levels[li - 1]) {
        const std::size_t host = out.phi[x];
        auto row = to_a ? h.row_b(host) : h.row_a(host);
        for (std::size_t y : children[x]) {
          std::size_t v = first_common(row, prime_mask);
          if (v >= m) throw stuck(li, y);
          out.phi[y] = v;
          prime[v] = 0;
          take_bit(prime_mask, v);
          used.push_back(v);
        }
      }
    }

    // uncovered side shrinks by the placed level; the opposite prime set is
    // re-filtered against it, everything else stays
    auto& un = to_a ? inAu : inBu;
    auto& un_mask = to_a ? maskAu : maskBu;
    auto& un_cnt = to_a ? cntAu : cntBu;
    for (std::size_t v : used) {
      un[v] = 0;
      take_bit(un_mask, v);
      --un_cnt;
    }
    auto& other = to_a ? inBp : inAp;
    auto& other_mask = to_a ? maskBp : maskAp;
    for (std::size_t v = 0; v < m; ++v) {
      if (!other[v]) continue;
      auto row = to_a ? h.row_b(v) : h.row_a(v);
      if (Rational(core::bits::and_popcount(row, un_mask)) < need * un_cnt) {
        other[v] = 0;
        take_bit(other_mask, v);
      }
    }

    if (trace) {
      LevelTrace lt;
      for (std::size_t v = 0; v < m; ++v) {
        if (inAu[v]) lt.Au.push_back(v);
        if (inBu[v]) lt.Bu.push_back(v);
        if (inAp[v]) lt.Ap.push_back(v);
        if (inBp[v]) lt.Bp.push_back(v);
      }
      trace->push_back(std::move(lt));
    }
  }
  return out;
}

struct PackResult {
  std::vector<Embedding> embeddings;  // phi holds indices into the input graph
  // host pair of each embedded tree, as (A-indices, B-indices) into the input
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
      hosts;
  std::string status;  // "packed" or "packing-incomplete"
  std::size_t first_unplaced = 0;  // == trees.size() when complete
  std::vector<std::string> events, warnings;
  BipartiteGraph remaining;  // input minus every consumed tree edge
};

// One tree per extraction round: find a dense pair, super-regularize it,
// verify the (eps, delta) hypotheses, embed, delete exactly the used edges.
// Unused pair edges were never removed, so they stay available. A failed
// round ends the packing with status "packing-incomplete".
inline PackResult pack_trees(const BipartiteGraph& g,
                             const std::vector<RootedTree>& trees,
                             const Rational& eps, const Rational& delta,
                             extract::Mode mode, std::size_t floor_size = 4) {
  if (g.nA() != g.nB()) throw Error("unbalanced");
  const std::size_t n = g.nA();
  if (n == 0) throw Error("empty-part");
  if (eps <= 0 || eps >= 1) throw Error("bad-epsilon");
  if (!(delta >= 3 * eps) || delta > 1)
    throw Error("bad-epsilon", "need 3*eps <= delta <= 1");

  PackResult out;
  out.status = "packed";
  out.first_unplaced = trees.size();

  BigInt total_tree_edges = 0;
  for (auto& t : trees) total_tree_edges += t.edge_count();
  // the packing guarantee wants d_G*n^2 >= sum e(T_i) + (delta+eps)*n^2
  if (Rational(total_tree_edges) + (delta + eps) * n * n >
      Rational(BigInt(g.edge_count())))
    out.warnings.push_back(
        "budget: total tree edges exceed the guaranteed slack "
        "(e(G) - (delta+eps)*n^2)");

  functional::FunctionalParams fparams;
  if (mode == extract::Mode::functional) {
    fparams.epsilon = eps;
    fparams.r = functional::r_of(eps);
    fparams.q = Rational(2) / eps;
  }

  BipartiteGraph work = g;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    auto give_up = [&](const std::string& why) {
      out.status = "packing-incomplete";
      out.first_unplaced = i;
      out.events.push_back("tree " + std::to_string(i) + ": " + why);
    };

    if (core::density(work) < delta + eps) {
      give_up("density below delta+eps");
      break;
    }

    // extraction; certified indicates an eps-regular certificate in hand
    std::vector<std::size_t> X, Y;
    bool certified = false;
    if (mode == extract::Mode::algorithmic) {
      auto lo = extract::detail::extract_loop(work, eps, floor_size);
      if (!lo.ok) {
        give_up(lo.fail_code + " (" + lo.fail_detail + ")");
        break;
      }
      X = std::move(lo.X);
      Y = std::move(lo.Y);
      certified = true;
    } else {
      try {
        auto sub = functional::maximize_phi(work, fparams);
        X = sub.X;
        Y = sub.Y;
      } catch (const Error& e) {
        give_up(std::string("maximize failed: ") + e.what());
        break;
      }
    }

    // super-regularize the pair; trimming invalidates the certificate
    auto h = work.induced(X, Y);
    try {
      auto tr = regularity::detail::super_regularize_kept(h, eps);
      if (tr.keptA.size() < X.size() || tr.keptB.size() < Y.size()) {
        std::vector<std::size_t> rx, ry;
        for (std::size_t k : tr.keptA) rx.push_back(X[k]);
        for (std::size_t k : tr.keptB) ry.push_back(Y[k]);
        X = std::move(rx);
        Y = std::move(ry);
        h = work.induced(X, Y);
        certified = false;
      }
    } catch (const Error& e) {
      give_up(std::string("super-regularize failed: ") + e.what());
      break;
    }

    // (eps, delta) hypotheses: degree floors always; regularity re-verified
    // only when no certificate survives
    const std::size_t mh = h.nA();
    bool floors = true;
    for (std::size_t a = 0; a < mh && floors; ++a)
      if (Rational(h.deg_a(a)) < delta * mh) floors = false;
    for (std::size_t b = 0; b < mh && floors; ++b)
      if (Rational(h.deg_b(b)) < delta * mh) floors = false;
    if (!floors) {
      give_up("pair misses the delta degree floor");
      break;
    }
    if (!certified && !regularity::is_super_regular(h, eps, delta)) {
      give_up("pair not verifiably super-regular");
      break;
    }

    const RootedTree& tree = trees[i];
    if (mh < 2 * tree.t) {
      give_up("pair too small for the tree");
      break;
    }
    if (Rational(tree.max_level_size) > delta * mh / 4) {
      give_up("level bound exceeds delta*m/4 for the pair");
      break;
    }

    Embedding emb;
    try {
      emb = embed_tree(h, tree, eps, delta);
    } catch (const Error& e) {
      give_up(std::string("embedding failed: ") + e.what());
      break;
    }

    // translate to input-graph indices and consume the used edges
    std::vector<std::size_t> depth_of(tree.t, 0);
    for (std::size_t li = 0; li < tree.s; ++li)
      for (std::size_t v : tree.levels[li]) depth_of[v] = li;
    for (std::size_t v = 0; v < tree.t; ++v)
      emb.phi[v] = emb.level_on_a[depth_of[v]] ? X[emb.phi[v]] : Y[emb.phi[v]];
    for (std::size_t v = 1; v < tree.t; ++v) {
      const std::size_t p = tree.parent[v];
      const std::size_t a = emb.level_on_a[depth_of[v]] ? emb.phi[v]
                                                        : emb.phi[p];
      const std::size_t b = emb.level_on_a[depth_of[v]] ? emb.phi[p]
                                                        : emb.phi[v];
      if (!work.remove_edge(a, b))
        throw Error("embedding-stuck", "consumed edge was not in the host");
    }
    out.embeddings.push_back(std::move(emb));
    out.hosts.push_back({std::move(X), std::move(Y)});
  }

  out.remaining = std::move(work);
  return out;
}

}  // namespace edgereg::packing
