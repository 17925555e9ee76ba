#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "extract.hpp"

namespace edgereg::removal {

using core::BipartiteGraph;
using core::Rational;
using core::TripartiteGraph;

// A good C5 is an ordered tuple x1 y1 x2 y2 z (x1 != x2, y1 != y2) whose
// three XY edges x1y1, y1x2, x2y2 are owned by ONE bundle, closed by
// y2 z in YZ and z x1 in ZX. Reversing the cycle swaps the edge roles, so
// each labeled cycle is counted exactly once.
struct C5Counts {
  std::uint64_t total = 0;
  std::vector<std::uint64_t> per_z;
};

// Per z and bundle, the tuples are the length-3 walks from S = N_ZX(z)
// into T = N_YZ(z) inside the bundle, minus the degenerate families
// x2 = x1 and y2 = y1; their overlap is e(S, T) and is added back.
inline C5Counts count_good_c5(const TripartiteGraph& g,
                              const extract::Decomposition& bundles) {
  const std::size_t n = g.n;
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  C5Counts out;
  out.per_z.assign(n, 0);

  for (const auto& p : bundles.pairs) {
    const std::size_t ma = p.A.size(), mb = p.B.size();
    const std::size_t wa = core::bits::words_for(ma);
    const std::size_t wb = core::bits::words_for(mb);

    std::vector<std::size_t> locA(n, npos), locB(n, npos);
    for (std::size_t i = 0; i < ma; ++i) locA[p.A[i]] = i;
    for (std::size_t j = 0; j < mb; ++j) locB[p.B[j]] = j;

    // bundles may share vertices, so adjacency comes from the owned edge
    // list, never from rows of g induced on (A, B)
    std::vector<std::uint64_t> rx(ma * wb, 0), ry(mb * wa, 0);
    std::vector<std::uint64_t> degx(ma, 0), degy(mb, 0);
    for (auto [x, y] : p.edges) {
      if (x >= n || y >= n || !g.XY.has_edge(x, y))
        throw Error("bundle-mismatch", "bundle edge not in block XY");
      const std::size_t i = locA[x], j = locB[y];
      if (i == npos || j == npos)
        throw Error("bundle-mismatch", "bundle edge leaves the pair's parts");
      rx[i * wb + (j >> 6)] |= std::uint64_t(1) << (j & 63);
      ry[j * wa + (i >> 6)] |= std::uint64_t(1) << (i & 63);
      ++degx[i];
      ++degy[j];
    }

    std::vector<std::uint64_t> smask(wa), tmask(wb), t_row(ma);
    std::vector<char> inS(ma), inT(mb);
    for (std::size_t z = 0; z < n; ++z) {
      std::fill(smask.begin(), smask.end(), 0);
      std::fill(tmask.begin(), tmask.end(), 0);
      std::fill(inS.begin(), inS.end(), 0);
      std::fill(inT.begin(), inT.end(), 0);
      std::size_t scnt = 0, tcnt = 0;
      for (std::size_t x : g.ZX.neighbors_a(z))
        if (locA[x] != npos) {
          smask[locA[x] >> 6] |= std::uint64_t(1) << (locA[x] & 63);
          inS[locA[x]] = 1;
          ++scnt;
        }
      for (std::size_t y : g.YZ.neighbors_b(z))
        if (locB[y] != npos) {
          tmask[locB[y] >> 6] |= std::uint64_t(1) << (locB[y] & 63);
          inT[locB[y]] = 1;
          ++tcnt;
        }
      if (scnt == 0 || tcnt == 0) continue;

      std::uint64_t walks = 0, d1 = 0, d2 = 0, both = 0;
      for (std::size_t i = 0; i < ma; ++i) {
        std::span<const std::uint64_t> row{rx.data() + i * wb, wb};
        t_row[i] = core::bits::and_popcount(row, tmask);
        if (inS[i]) {
          d1 += degx[i] * t_row[i];
          both += t_row[i];
        }
      }
      for (std::size_t j = 0; j < mb; ++j) {
        std::span<const std::uint64_t> col{ry.data() + j * wa, wa};
        const std::uint64_t s = core::bits::and_popcount(col, smask);
        if (s == 0) continue;
        std::uint64_t inner = 0;
        for (std::size_t w = 0; w < wa; ++w) {
          std::uint64_t word = col[w];
          while (word) {
            inner += t_row[(w << 6) + std::countr_zero(word)];
            word &= word - 1;
          }
        }
        walks += s * inner;
        if (inT[j]) d2 += s * degy[j];
      }
      // walks >= d1 + d2 - both, so this order never wraps
      const std::uint64_t cnt = walks + both - d1 - d2;
      out.per_z[z] += cnt;
      out.total += cnt;
    }
  }
  return out;
}

struct RemovalReport {
  extract::Decomposition bundles;  // of block XY at (eps, d = 2*eps)
  std::uint64_t good_c5_total = 0;
  std::vector<std::uint64_t> good_c5_per_z;
  // run-scale gates, from the actual m = m_min and K of the decomposition:
  // a Z vertex is bad above eps^5 m^2 n^2 / (2 K^2); the guarantee assumes
  // at most eps^6 m^2 n^3 / (2 K^2) good C5s in total
  Rational bad_threshold;
  Rational c5_budget;
  double k0_asymptotic = 0.0;  // exp((20/e^2) log^2(1/e)) / e
  double m_asymptotic = 0.0;   // exp(-10 log^2(1/e) / e^2) * n
  std::vector<std::size_t> bad_vertices;
  std::uint64_t phase1_deleted = 0;  // residual XY edges
  std::uint64_t phase2_deleted = 0;  // all Z-X edges at bad vertices
  std::uint64_t phase3_deleted = 0;  // smaller side per (good z, bundle)
  std::uint64_t edges_deleted = 0;
  std::uint64_t triangles_left = 0;  // trace of the triple product
  bool triangle_free = false;
  bool within_budget = false;  // edges_deleted <= 4*eps*n^2
  std::vector<std::string> warnings;
};

// Makes the tripartite graph triangle-free in four sequential phases:
// bundle the XY block and drop the residual; count good C5s and cut all
// Z-X edges at vertices over the threshold; for every remaining z and
// every bundle, cut z's edges to the bundle side where it has smaller
// degree; certify by counting the triangles that survive. Always
// completes; the gates and the certificate are computed, not assumed.
inline std::pair<TripartiteGraph, RemovalReport> conditional_triangle_removal(
    const TripartiteGraph& g, const Rational& eps) {
  if (eps <= 0 || eps > Rational(1, 4))
    throw Error("bad-epsilon", "need 0 < eps <= 1/4");
  TripartiteGraph work = g;
  RemovalReport rep;
  const std::size_t n = g.n;
  if (n == 0) {
    rep.triangle_free = rep.within_budget = true;
    return {std::move(work), std::move(rep)};
  }

  {
    const double e = core::approx(eps);
    const double lg = std::log(1.0 / e);
    rep.k0_asymptotic = std::exp(20.0 / (e * e) * lg * lg) / e;
    rep.m_asymptotic = std::exp(-10.0 * lg * lg / (e * e)) * double(n);
  }

  rep.bundles =
      extract::decompose(g.XY, eps, 2 * eps, extract::Mode::algorithmic);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y : rep.bundles.residual.neighbors_a(x))
      rep.phase1_deleted += work.XY.remove_edge(x, y);
  if (Rational(rep.phase1_deleted) >= 2 * eps * n * n)
    rep.warnings.push_back(
        "residual reached 2*eps*n^2 edges; the decomposition stopped early");
  // every surviving XY edge is owned by exactly one bundle
  std::uint64_t owned = 0;
  for (const auto& p : rep.bundles.pairs) owned += p.edges.size();
  if (owned != work.XY.edge_count())
    throw Error("bundle-mismatch", "bundles plus residual miss the XY block");

  auto counts = count_good_c5(work, rep.bundles);
  rep.good_c5_total = counts.total;
  rep.good_c5_per_z = std::move(counts.per_z);

  const std::size_t K = rep.bundles.K, m = rep.bundles.m_min;
  if (K > 0) {
    rep.bad_threshold =
        eps * eps * eps * eps * eps * m * m * n * n / (2 * K * K);
    rep.c5_budget = rep.bad_threshold * eps * n;
    if (Rational(rep.good_c5_total) > rep.c5_budget)
      rep.warnings.push_back("hypothesis: good-C5 total exceeds the budget " +
                             rep.c5_budget.str());
  }

  std::vector<char> bad(n, 0);
  for (std::size_t z = 0; z < n; ++z) {
    if (!(Rational(rep.good_c5_per_z[z]) > rep.bad_threshold)) continue;
    bad[z] = 1;
    rep.bad_vertices.push_back(z);
    for (std::size_t x : work.ZX.neighbors_a(z))
      rep.phase2_deleted += work.ZX.remove_edge(z, x);
  }
  if (Rational(rep.bad_vertices.size()) >= eps * n)
    rep.warnings.push_back("hypothesis: bad vertices reach eps*n");

  std::vector<std::vector<std::uint64_t>> amask, bmask;
  for (const auto& p : rep.bundles.pairs) {
    amask.push_back(core::bits::mask_of(p.A, n));
    bmask.push_back(core::bits::mask_of(p.B, n));
  }
  for (std::size_t z = 0; z < n; ++z) {
    if (bad[z]) continue;
    for (std::size_t i = 0; i < rep.bundles.pairs.size(); ++i) {
      const auto& p = rep.bundles.pairs[i];
      const auto dx = core::bits::and_popcount(work.ZX.row_a(z), amask[i]);
      const auto dy = core::bits::and_popcount(work.YZ.row_b(z), bmask[i]);
      if (dx <= dy)
        for (std::size_t x : p.A)
          rep.phase3_deleted += work.ZX.remove_edge(z, x);
      else
        for (std::size_t y : p.B)
          rep.phase3_deleted += work.YZ.remove_edge(y, z);
    }
  }

  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y : work.XY.neighbors_a(x))
      rep.triangles_left +=
          core::bits::and_popcount(work.YZ.row_a(y), work.ZX.row_b(x));
  rep.triangle_free = rep.triangles_left == 0;

  rep.edges_deleted =
      rep.phase1_deleted + rep.phase2_deleted + rep.phase3_deleted;
  rep.within_budget = Rational(rep.edges_deleted) <= 4 * eps * n * n;
  return {std::move(work), std::move(rep)};
}

}  // namespace edgereg::removal
