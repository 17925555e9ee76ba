#pragma once

// Shared test fixtures and independent oracles. Oracles here recompute
// quantities by brute force so library results are checked against a second
// implementation, not against themselves.

#include <edgereg/core.hpp>
#include <edgereg/graph.hpp>
#include <edgereg/rational.hpp>
#include <edgereg/rng.hpp>

#include <cstdint>
#include <vector>

namespace th {

using edgereg::core::BigInt;
using edgereg::core::BipartiteGraph;
using edgereg::core::Rational;
using edgereg::core::SimpleGraph;
using edgereg::core::SplitMix64;
using edgereg::core::Subpair;
using edgereg::core::TripartiteGraph;

// two complete blocks on the diagonal, cross edges empty
inline BipartiteGraph two_blocks(std::size_t block = 4) {
  BipartiteGraph g(2 * block, 2 * block);
  for (std::size_t a = 0; a < block; ++a)
    for (std::size_t b = 0; b < block; ++b) g.add_edge(a, b);
  for (std::size_t a = block; a < 2 * block; ++a)
    for (std::size_t b = block; b < 2 * block; ++b) g.add_edge(a, b);
  return g;
}

inline BipartiteGraph random_bipartite(std::size_t nA, std::size_t nB,
                                       std::uint64_t num, std::uint64_t den,
                                       std::uint64_t seed) {
  SplitMix64 rng(seed);
  BipartiteGraph g(nA, nB);
  for (std::size_t a = 0; a < nA; ++a)
    for (std::size_t b = 0; b < nB; ++b)
      if (rng.chance(num, den)) g.add_edge(a, b);
  return g;
}

// sequential seeds give independent splitmix streams per block
inline TripartiteGraph random_tripartite(std::size_t n, std::uint64_t num,
                                         std::uint64_t den,
                                         std::uint64_t seed) {
  return {random_bipartite(n, n, num, den, seed),
          random_bipartite(n, n, num, den, seed + 1),
          random_bipartite(n, n, num, den, seed + 2)};
}

inline SimpleGraph random_simple(std::size_t n, std::uint64_t num,
                                 std::uint64_t den, std::uint64_t seed) {
  SplitMix64 rng(seed);
  SimpleGraph g(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.chance(num, den)) g.add_edge(u, v);
  return g;
}

inline std::vector<std::size_t> bits_of(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask; ++i, mask >>= 1)
    if (mask & 1) out.push_back(i);
  return out;
}

// brute-force edge count inside X x Y
inline std::uint64_t count_edges(const BipartiteGraph& g,
                                 const std::vector<std::size_t>& X,
                                 const std::vector<std::size_t>& Y) {
  std::uint64_t e = 0;
  for (auto a : X)
    for (auto b : Y)
      if (g.has_edge(a, b)) ++e;
  return e;
}

inline Rational brute_density(const BipartiteGraph& g,
                              const std::vector<std::size_t>& X,
                              const std::vector<std::size_t>& Y) {
  return Rational(BigInt(count_edges(g, X, Y)), BigInt(X.size()) * Y.size());
}

}  // namespace th
