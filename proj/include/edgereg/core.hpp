#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rational.hpp"
#include "rng.hpp"

namespace edgereg::core {

inline Rational density(const BipartiteGraph& g) {
  if (g.nA() == 0 || g.nB() == 0) throw Error("empty-part");
  return Rational(BigInt(g.edge_count()), BigInt(g.nA()) * g.nB());
}

// e(G) / C(n,2) for the simple-graph input of balanced_split
inline Rational density(const SimpleGraph& g) {
  if (g.n() < 2) throw Error("empty-part");
  return Rational(BigInt(g.edge_count()) * 2, BigInt(g.n()) * (g.n() - 1));
}

inline std::uint64_t edges_between(const BipartiteGraph& g,
                                   std::span<const std::size_t> X,
                                   std::span<const std::size_t> Y) {
  auto ymask = bits::mask_of(Y, g.nB());
  std::uint64_t e = 0;
  for (std::size_t x : X) e += bits::and_popcount(g.row_a(x), ymask);
  return e;
}

inline Rational subpair_density(const Subpair& p) {
  std::uint64_t e = edges_between(*p.parent, p.X, p.Y);
  return Rational(BigInt(e), BigInt(p.X.size()) * p.Y.size());
}

struct SplitResult {
  std::vector<std::size_t> X, rest;
  BipartiteGraph cross;
};

namespace detail {

inline std::uint64_t cross_edges(const SimpleGraph& g,
                                 const std::vector<char>& in_x) {
  std::uint64_t c = 0;
  for (std::size_t u = 0; u < g.n(); ++u)
    if (in_x[u])
      for (std::size_t v = 0; v < g.n(); ++v)
        if (!in_x[v] && g.has_edge(u, v)) ++c;
  return c;
}

// hill-climb on swaps across the cut; returns the local optimum's cross count
inline std::uint64_t improve_split(const SimpleGraph& g,
                                   std::vector<char>& in_x) {
  std::size_t n = g.n();
  auto count_within = [&](std::size_t u, bool side) {
    std::size_t c = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (v != u && in_x[v] == side && g.has_edge(u, v)) ++c;
    return c;
  };
  std::uint64_t cross = cross_edges(g, in_x);
  for (;;) {
    long best_gain = 0;
    std::size_t bu = 0, bv = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!in_x[u]) continue;
      long au = static_cast<long>(count_within(u, true));
      long bu_deg = static_cast<long>(count_within(u, false));
      for (std::size_t v = 0; v < n; ++v) {
        if (in_x[v]) continue;
        long cv = static_cast<long>(count_within(v, true));
        long dv = static_cast<long>(count_within(v, false));
        long gain = au - bu_deg + dv - cv + 2 * (g.has_edge(u, v) ? 1 : 0);
        if (gain > best_gain) {
          best_gain = gain;
          bu = u;
          bv = v;
        }
      }
    }
    if (best_gain <= 0) return cross;
    in_x[bu] = 0;
    in_x[bv] = 1;
    cross += static_cast<std::uint64_t>(best_gain);
  }
}

inline SplitResult finish_split(const SimpleGraph& g,
                                const std::vector<char>& in_x) {
  SplitResult out;
  for (std::size_t v = 0; v < g.n(); ++v)
    (in_x[v] ? out.X : out.rest).push_back(v);
  out.cross = BipartiteGraph(out.X.size(), out.rest.size());
  for (std::size_t i = 0; i < out.X.size(); ++i)
    for (std::size_t j = 0; j < out.rest.size(); ++j)
      if (g.has_edge(out.X[i], out.rest[j])) out.cross.add_edge(i, j);
  return out;
}

}  // namespace detail

// Balanced split with cross density >= density(g). Local search from the
// identity split; exhaustive for small n; seeded restarts otherwise (the
// average over all balanced splits equals the density exactly, so a good
// split always exists).
inline SplitResult balanced_split(const SimpleGraph& g) {
  std::size_t n = g.n();
  if (n < 2) throw Error("empty-part");
  std::size_t h = n / 2;
  Rational d = density(g);

  // cross density >= d  <=>  cross * C(n,2) >= e * h*(n-h)
  auto good = [&](std::uint64_t cross) {
    return BigInt(cross) * n * (n - 1) >=
           BigInt(g.edge_count()) * 2 * h * (n - h);
  };

  std::vector<char> in_x(n, 0);
  std::fill(in_x.begin(), in_x.begin() + h, 1);
  if (good(detail::improve_split(g, in_x))) return detail::finish_split(g, in_x);

  if (n <= 12) {  // exhaustive: pick the maximum-cross split
    std::vector<char> best;
    std::uint64_t best_cross = 0;
    std::vector<char> cur(n, 0);
    std::fill(cur.begin(), cur.begin() + h, 1);
    std::vector<std::size_t> pick(h);
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
      std::fill(cur.begin(), cur.end(), 0);
      for (std::size_t i : pick) cur[i] = 1;
      std::uint64_t c = detail::cross_edges(g, cur);
      if (best.empty() || c > best_cross) {
        best = cur;
        best_cross = c;
      }
      // next h-combination of {0..n-1}
      std::size_t i = h;
      while (i > 0 && pick[i - 1] == n - h + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < h; ++j) pick[j] = pick[j - 1] + 1;
    }
    return detail::finish_split(g, best);
  }

  SplitMix64 rng(0x5eedULL);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i)
      std::swap(perm[i - 1], perm[rng.below(i)]);
    std::fill(in_x.begin(), in_x.end(), 0);
    for (std::size_t i = 0; i < h; ++i) in_x[perm[i]] = 1;
    if (good(detail::improve_split(g, in_x)))
      return detail::finish_split(g, in_x);
  }
  throw Error("split-failed");  // unreachable: a valid split always exists
}

// Greedy peeling: drop the minimum-degree vertex from whichever part still
// exceeds its target (larger excess first, A on ties). Removing a min-degree
// vertex never lowers the density, so the output density >= density(g).
inline Subpair find_dense_subpair(const BipartiteGraph& g, std::size_t k,
                                  std::size_t m) {
  if (k < 1 || k > g.nA() || m < 1 || m > g.nB())
    throw Error("size-out-of-range");

  std::vector<char> aliveA(g.nA(), 1), aliveB(g.nB(), 1);
  std::vector<std::size_t> degA(g.nA()), degB(g.nB());
  for (std::size_t a = 0; a < g.nA(); ++a) degA[a] = g.deg_a(a);
  for (std::size_t b = 0; b < g.nB(); ++b) degB[b] = g.deg_b(b);
  std::size_t cA = g.nA(), cB = g.nB();

  auto min_alive = [](const std::vector<char>& alive,
                      const std::vector<std::size_t>& deg) {
    std::size_t arg = alive.size();
    for (std::size_t i = 0; i < alive.size(); ++i)
      if (alive[i] && (arg == alive.size() || deg[i] < deg[arg])) arg = i;
    return arg;
  };

  while (cA > k || cB > m) {
    bool from_a = cA > k && (cB <= m || cA - k >= cB - m);
    if (from_a) {
      std::size_t a = min_alive(aliveA, degA);
      aliveA[a] = 0;
      --cA;
      for (std::size_t b : g.neighbors_a(a))
        if (aliveB[b]) --degB[b];
    } else {
      std::size_t b = min_alive(aliveB, degB);
      aliveB[b] = 0;
      --cB;
      for (std::size_t a : g.neighbors_b(b))
        if (aliveA[a]) --degA[a];
    }
  }

  std::vector<std::size_t> X, Y;
  for (std::size_t a = 0; a < g.nA(); ++a)
    if (aliveA[a]) X.push_back(a);
  for (std::size_t b = 0; b < g.nB(); ++b)
    if (aliveB[b]) Y.push_back(b);
  return Subpair(g, std::move(X), std::move(Y));
}

}  // namespace edgereg::core
