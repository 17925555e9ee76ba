#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "functional.hpp"
#include "regularity.hpp"

namespace edgereg::extract {

using core::BigInt;
using core::BipartiteGraph;
using core::Rational;
using core::Subpair;

// Witness pair (A1, B1) whose density deviates from the host's by at least
// eta; boost_density turns it into a denser balanced subpair.
struct BoostInput {
  const BipartiteGraph* graph = nullptr;
  std::vector<std::size_t> A1, B1;
  Rational eta;

  BoostInput() = default;
  BoostInput(const BipartiteGraph& g, std::vector<std::size_t> a1,
             std::vector<std::size_t> b1, Rational e)
      : graph(&g), A1(std::move(a1)), B1(std::move(b1)), eta(std::move(e)) {}
};

namespace detail {

using IndexSets = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;

inline std::vector<std::size_t> complement(std::span<const std::size_t> s,
                                           std::size_t n) {
  std::vector<char> in(n, 0);
  for (std::size_t i : s) in[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

inline Rational dens_of(const BipartiteGraph& g,
                        std::span<const std::size_t> X,
                        std::span<const std::size_t> Y) {
  return Rational(BigInt(core::edges_between(g, X, Y)),
                  BigInt(X.size()) * Y.size());
}

// the `count` lowest-degree vertices of `verts` measured into `target`
// (trimming removes the highest degrees first, ties drop the higher index)
inline std::vector<std::size_t> keep_lowest_degrees(
    const BipartiteGraph& g, std::span<const std::size_t> verts, bool a_side,
    std::span<const std::size_t> target, std::size_t count) {
  auto mask = core::bits::mask_of(target, a_side ? g.nB() : g.nA());
  std::vector<std::pair<std::uint64_t, std::size_t>> scored;
  scored.reserve(verts.size());
  for (std::size_t v : verts)
    scored.push_back(
        {core::bits::and_popcount(a_side ? g.row_a(v) : g.row_b(v), mask), v});
  std::sort(scored.begin(), scored.end());  // (degree asc, index asc)
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count && i < scored.size(); ++i)
    out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

// the `count` highest-degree vertices, ties keep the lowest index
inline std::vector<std::size_t> keep_highest_degrees(
    const BipartiteGraph& g, std::span<const std::size_t> verts, bool a_side,
    std::span<const std::size_t> target, std::size_t count) {
  auto mask = core::bits::mask_of(target, a_side ? g.nB() : g.nA());
  std::vector<std::pair<std::uint64_t, std::size_t>> scored;
  scored.reserve(verts.size());
  for (std::size_t v : verts)
    scored.push_back(
        {core::bits::and_popcount(a_side ? g.row_a(v) : g.row_b(v), mask), v});
  std::sort(scored.begin(), scored.end(), [](auto& x, auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count && i < scored.size(); ++i)
    out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

// densest of (A1,B2), (A2,B1), (A2,B2); earlier wins ties
inline IndexSets densest_quadrant(const BipartiteGraph& g,
                                  const std::vector<std::size_t>& A1,
                                  const std::vector<std::size_t>& A2,
                                  const std::vector<std::size_t>& B1,
                                  const std::vector<std::size_t>& B2) {
  IndexSets best;
  Rational best_d(-1);
  for (auto& [X, Y] : {IndexSets{A1, B2}, IndexSets{A2, B1}, IndexSets{A2, B2}}) {
    Rational d = dens_of(g, X, Y);
    if (d > best_d) {
      best_d = d;
      best = {X, Y};
    }
  }
  return best;
}

}  // namespace detail

// Density boost from a deviating witness pair. Case split on d(A1,B1):
//   >= d+eta           : (A1,B1) equalized.
//   <= d-eta, |A1| = n : (highest-degree rows into B2, B2); symmetric for B.
//   <= d-eta, else     : densest complementary quadrant, equalized. When the
//                        raw quadrant is too lopsided to meet the ceil(eta*n)
//                        size bound, the witnesses are first trimmed to
//                        exactly that size (dropping high-degree vertices
//                        keeps them deviating low) and the quadrants retried.
// Every candidate is checked exactly against the contract before returning.
inline Subpair boost_density(const BoostInput& in) {
  if (!in.graph) throw Error("invalid-witnesses", "no graph");
  const BipartiteGraph& g = *in.graph;
  if (g.nA() != g.nB()) throw Error("invalid-witnesses", "host not balanced");
  const std::size_t n = g.nA();
  if (n == 0) throw Error("invalid-witnesses", "empty host");

  std::vector<std::size_t> A1, B1;
  try {
    Subpair probe(g, in.A1, in.B1);  // sorts and validates the index sets
    A1 = std::move(probe.X);
    B1 = std::move(probe.Y);
  } catch (const Error& e) {
    throw Error("invalid-witnesses", e.what());
  }

  const Rational d = core::density(g);
  const Rational& eta = in.eta;
  if (!(eta > 0) || !(eta < d))
    throw Error("invalid-witnesses", "eta must lie strictly between 0 and d");
  if (Rational(A1.size()) < eta * n || Rational(B1.size()) < eta * n)
    throw Error("invalid-witnesses", "witness sets smaller than eta*n");
  const Rational d1 = detail::dens_of(g, A1, B1);
  if ((d1 > d ? d1 - d : d - d1) < eta)
    throw Error("invalid-witnesses", "witness deviation below eta");

  const std::size_t s = core::ceil_size(eta * n);
  const Rational target = d + eta * eta * eta;
  auto meets = [&](const detail::IndexSets& c) {
    return !c.first.empty() && c.first.size() == c.second.size() &&
           c.first.size() >= s &&
           detail::dens_of(g, c.first, c.second) >= target;
  };
  auto equalized = [&](std::vector<std::size_t> X, std::vector<std::size_t> Y) {
    functional::detail::equalize_top_degrees(g, X, Y);
    return detail::IndexSets{std::move(X), std::move(Y)};
  };

  std::vector<detail::IndexSets> cands;
  if (d1 >= d + eta) {
    cands.push_back(equalized(A1, B1));
  } else {
    auto A2 = detail::complement(A1, n);
    auto B2 = detail::complement(B1, n);
    std::vector<std::size_t> whole(n);
    for (std::size_t i = 0; i < n; ++i) whole[i] = i;
    if (A2.empty()) {
      cands.push_back({detail::keep_highest_degrees(g, whole, true, B2,
                                                    B2.size()),
                       B2});
    } else if (B2.empty()) {
      cands.push_back({A2, detail::keep_highest_degrees(g, whole, false, A2,
                                                        A2.size())});
    } else {
      auto raw = detail::densest_quadrant(g, A1, A2, B1, B2);
      cands.push_back(equalized(raw.first, raw.second));
      if (2 * s <= n) {
        auto A1t = detail::keep_lowest_degrees(g, A1, true, B1, s);
        auto B1t = detail::keep_lowest_degrees(g, B1, false, A1t, s);
        auto A2t = detail::complement(A1t, n);
        auto B2t = detail::complement(B1t, n);
        auto trimmed = detail::densest_quadrant(g, A1t, A2t, B1t, B2t);
        cands.push_back(equalized(trimmed.first, trimmed.second));
      }
      // eta near 1: no quadrant can reach the size bound through the two
      // standard routes; try everything else before giving up
      cands.push_back(equalized(A1, B2));
      cands.push_back(equalized(A2, B1));
      cands.push_back(equalized(A2, B2));
      cands.push_back(equalized(A1, B1));
    }
  }

  for (auto& c : cands)
    if (meets(c)) return Subpair(g, std::move(c.first), std::move(c.second));
  throw Error("invalid-witnesses",
              "no construction reached density d + eta^3 at size ceil(eta*n)");
}

struct ExtractResult {
  Subpair sub;                   // indices into the caller's graph
  regularity::Verdict verdict;   // the certification of the returned subgraph
  std::size_t iterations = 0;    // verifier calls
  std::vector<Rational> densities;  // density before each verification
};

namespace detail {

struct LoopOutcome {
  bool ok = false;
  std::string fail_code, fail_detail;
  std::vector<std::size_t> X, Y;  // result region, or last region on failure
  regularity::Verdict verdict;
  std::size_t iterations = 0;
  std::vector<Rational> densities;
};

inline LoopOutcome extract_loop(const BipartiteGraph& g, const Rational& eps,
                                std::size_t floor_size) {
  const Rational eta = eps * eps * eps * eps / 16;
  LoopOutcome out;
  out.X.resize(g.nA());
  out.Y.resize(g.nB());
  for (std::size_t i = 0; i < out.X.size(); ++i) out.X[i] = i;
  for (std::size_t i = 0; i < out.Y.size(); ++i) out.Y[i] = i;

  BipartiteGraph h = g;
  for (;;) {
    if (h.nA() < floor_size) {
      out.fail_code = "shrunk-out";
      out.fail_detail = "part size " + std::to_string(h.nA()) +
                        " below floor " + std::to_string(floor_size);
      return out;
    }
    out.densities.push_back(core::density(h));
    ++out.iterations;
    regularity::Verdict v;
    try {
      v = regularity::verify_regularity(h, eps);
    } catch (const Error& e) {
      if (e.code() == "inconclusive-large") {
        out.fail_code = e.code();
        out.fail_detail = e.what();
        return out;
      }
      throw;
    }
    if (v.regular()) {
      out.ok = true;
      out.verdict = std::move(v);
      return out;
    }
    if (!(eta < out.densities.back())) {
      out.fail_code = "shrunk-out";
      out.fail_detail = "density at or below eta, cannot boost";
      return out;
    }
    Subpair b = boost_density(BoostInput(h, v.A1, v.B1, eta));
    std::vector<std::size_t> nx, ny;
    nx.reserve(b.X.size());
    ny.reserve(b.Y.size());
    for (std::size_t i : b.X) nx.push_back(out.X[i]);
    for (std::size_t j : b.Y) ny.push_back(out.Y[j]);
    out.X = std::move(nx);
    out.Y = std::move(ny);
    h = g.induced(out.X, out.Y);
  }
}

}  // namespace detail

// Repeat verify-or-boost with eta = eps^4/16 until a certified subgraph
// remains. Density rises by at least eta^3 per boost, so the loop ends; at
// desk scale it can instead shrink below `floor_size`, which is an error
// here and a recorded event inside decompose.
inline ExtractResult extract_regular_subgraph(const BipartiteGraph& g,
                                              const Rational& eps,
                                              std::size_t floor_size = 4) {
  if (g.nA() != g.nB()) throw Error("unbalanced");
  if (g.nA() == 0) throw Error("empty-part");
  if (eps <= 0 || eps >= 1) throw Error("bad-epsilon");
  auto lo = detail::extract_loop(g, eps, floor_size);
  if (!lo.ok) throw Error(lo.fail_code, lo.fail_detail);
  return {Subpair(g, std::move(lo.X), std::move(lo.Y)), std::move(lo.verdict),
          lo.iterations, std::move(lo.densities)};
}

enum class Mode { algorithmic, functional };

// Edge decomposition into dense pairs plus a sparse residual. Pairs may
// share vertices; their edge sets and the residual partition E(G) exactly.
struct Decomposition {
  struct Pair {
    std::vector<std::size_t> A, B;  // indices into the input graph
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // owned edges
    Rational epsilon;  // parameter the pair was checked at
    Rational density;
    bool certified = false;      // Regular verdict from the verifier
    bool super_regular = false;  // functional mode: is_super_regular outcome
  };
  std::vector<Pair> pairs;
  BipartiteGraph residual;
  std::size_t K = 0;
  std::size_t m_min = 0;  // smallest part size among pairs, 0 when K = 0
  std::vector<std::string> events;  // failed rounds, recorded in order
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> edges_inside(
    const BipartiteGraph& g, std::span<const std::size_t> X,
    std::span<const std::size_t> Y) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a : X)
    for (std::size_t b : Y)
      if (g.has_edge(a, b)) out.push_back({a, b});
  return out;
}

}  // namespace detail

// Round loop: while the working density is at least threshold_delta, extract
// a dense pair (mode-dependent), record it with the edges it owns, delete
// those edges, repeat. A failed round (shrunk-out / inconclusive) moves the
// failed region's remaining edges to the residual and retries once on the
// remainder; a second failure stops the loop. threshold_delta means the
// certification floor delta in algorithmic mode and the target pair density d
// in functional mode.
inline Decomposition decompose(const BipartiteGraph& g, const Rational& eps,
                               const Rational& threshold_delta, Mode mode,
                               std::size_t floor_size = 4) {
  if (g.nA() != g.nB()) throw Error("unbalanced");
  if (g.nA() == 0) throw Error("empty-part");
  if (eps <= 0 || eps >= 1) throw Error("bad-epsilon");
  if (threshold_delta <= 0 || threshold_delta > 1)
    throw Error("bad-epsilon", "threshold_delta must lie in (0, 1]");
  if (mode == Mode::functional && !(eps < Rational(1, 4)))
    throw Error("bad-epsilon", "functional mode requires epsilon < 1/4");

  Decomposition out;
  if (mode == Mode::functional && !(eps < Rational(1, 12)))
    out.warnings.push_back(
        "epsilon-range: functional decomposition is stated for eps < 1/12");

  functional::FunctionalParams fparams;
  if (mode == Mode::functional) {
    fparams.epsilon = eps;
    fparams.r = functional::r_of(eps);
    fparams.q = Rational(2) / eps;
  }

  BipartiteGraph work = g;
  std::vector<std::pair<std::size_t, std::size_t>> banked;
  std::size_t round = 0;
  bool stopped = false;

  while (!stopped) {
    ++round;
    if (work.edge_count() == 0 || core::density(work) < threshold_delta) break;

    bool recorded = false;
    for (int attempt = 0; attempt < 2 && !recorded && !stopped; ++attempt) {
      std::vector<std::size_t> X, Y;
      bool certified = false;
      if (mode == Mode::algorithmic) {
        auto lo = detail::extract_loop(work, eps, floor_size);
        if (!lo.ok) {
          auto failed = detail::edges_inside(work, lo.X, lo.Y);
          for (auto& e : failed) work.remove_edge(e.first, e.second);
          out.events.push_back(
              "round " + std::to_string(round) + ": " + lo.fail_code + " (" +
              lo.fail_detail + "); " + std::to_string(failed.size()) +
              " edges to residual; " + (attempt == 0 ? "retrying" : "stopping"));
          banked.insert(banked.end(), failed.begin(), failed.end());
          if (attempt == 1) stopped = true;
          continue;
        }
        X = std::move(lo.X);
        Y = std::move(lo.Y);
        certified = true;
      } else {
        Subpair sub;
        try {
          sub = functional::maximize_phi(work, fparams);
        } catch (const Error& e) {
          if (e.code() == "too-sparse") {  // threshold_delta <= eps admits this
            out.events.push_back("round " + std::to_string(round) +
                                 ": too-sparse; stopping");
            stopped = true;
            continue;
          }
          throw;
        }
        X = sub.X;
        Y = sub.Y;
        // refine toward super-regularity; keep only if still above threshold
        try {
          auto h = work.induced(X, Y);
          auto t = regularity::detail::super_regularize_kept(h, eps);
          std::vector<std::size_t> rx, ry;
          for (std::size_t i : t.keptA) rx.push_back(X[i]);
          for (std::size_t j : t.keptB) ry.push_back(Y[j]);
          if (!rx.empty() &&
              detail::dens_of(work, rx, ry) >= threshold_delta) {
            X = std::move(rx);
            Y = std::move(ry);
          }
        } catch (const Error&) {
          // not-regular: the raw maximizer stands
        }
      }

      Decomposition::Pair p;
      p.A = std::move(X);
      p.B = std::move(Y);
      p.edges = detail::edges_inside(work, p.A, p.B);
      p.epsilon = eps;
      p.density = Rational(BigInt(p.edges.size()),
                           BigInt(p.A.size()) * p.B.size());
      p.certified = certified;
      if (mode == Mode::functional && threshold_delta > eps) {
        auto h = work.induced(p.A, p.B);
        p.super_regular =
            regularity::is_super_regular(h, eps, threshold_delta - eps);
      }
      for (auto& e : p.edges) work.remove_edge(e.first, e.second);
      out.pairs.push_back(std::move(p));
      recorded = true;
    }
    if (!recorded) break;
  }

  out.K = out.pairs.size();
  out.m_min = 0;
  for (auto& p : out.pairs)
    if (out.m_min == 0 || p.A.size() < out.m_min) out.m_min = p.A.size();
  out.residual = std::move(work);
  for (auto& e : banked) out.residual.add_edge(e.first, e.second);
  return out;
}

}  // namespace edgereg::extract
