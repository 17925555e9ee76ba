#include <edgereg/extract.hpp>

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <vector>

#include "helpers.hpp"

using edgereg::Error;
using edgereg::core::BigInt;
using edgereg::core::BipartiteGraph;
using edgereg::core::Rational;
using edgereg::core::density;
using edgereg::core::subpair_density;
using namespace edgereg::extract;

namespace {

// every (a, b) edge of g, counted once, as a sorted multiset key
std::map<std::pair<std::size_t, std::size_t>, int> edge_multiset(
    const BipartiteGraph& g) {
  std::map<std::pair<std::size_t, std::size_t>, int> m;
  for (std::size_t a = 0; a < g.nA(); ++a)
    for (std::size_t b = 0; b < g.nB(); ++b)
      if (g.has_edge(a, b)) ++m[{a, b}];
  return m;
}

void check_partition(const BipartiteGraph& g, const Decomposition& dec) {
  auto want = edge_multiset(g);
  std::map<std::pair<std::size_t, std::size_t>, int> got =
      edge_multiset(dec.residual);
  for (auto& p : dec.pairs)
    for (auto& e : p.edges) ++got[e];
  REQUIRE(got == want);
}

}  // namespace

TEST_CASE("boost picks the dense quadrant of a two-blocks graph") {
  auto g = th::two_blocks(4);  // d = 1/2
  BoostInput in(g, {0, 1, 2, 3}, {4, 5, 6, 7}, Rational(1, 4));
  auto out = boost_density(in);
  CHECK(out.X == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(out.Y == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(subpair_density(out) == Rational(1));
  CHECK(subpair_density(out) >= Rational(1, 2) + Rational(1, 64));
}

TEST_CASE("boost returns overdense witnesses unchanged") {
  BipartiteGraph g(6, 6);
  for (std::size_t a : {0, 1})
    for (std::size_t b : {0, 1}) g.add_edge(a, b);
  for (std::size_t a : {2, 3})
    for (std::size_t b : {2, 3}) g.add_edge(a, b);
  for (std::size_t a : {4, 5})
    for (std::size_t b : {4, 5}) g.add_edge(a, b);
  REQUIRE(density(g) == Rational(1, 3));

  auto out = boost_density(BoostInput(g, {0, 1}, {0, 1}, Rational(1, 4)));
  CHECK(out.X == std::vector<std::size_t>{0, 1});
  CHECK(out.Y == std::vector<std::size_t>{0, 1});
}

TEST_CASE("boost equalizes by keeping the highest degrees") {
  BipartiteGraph g(8, 8);
  for (std::size_t a : {0, 1, 2, 3})
    for (std::size_t b : {0, 1, 2}) g.add_edge(a, b);
  for (std::size_t a = 4; a < 8; ++a)
    for (std::size_t b = 3; b < 8; ++b) g.add_edge(a, b);
  REQUIRE(density(g) == Rational(1, 2));

  auto out = boost_density(BoostInput(g, {0, 1, 2, 3}, {0, 1, 2}, Rational(1, 4)));
  // A1 x B1 is complete, so degrees tie and the lowest three indices stay
  CHECK(out.X == std::vector<std::size_t>{0, 1, 2});
  CHECK(out.Y == std::vector<std::size_t>{0, 1, 2});
  CHECK(subpair_density(out) == Rational(1));
}

TEST_CASE("boost meets the gain and size contract on oracle witnesses") {
  std::size_t boosted = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::size_t m = 8 + (seed % 3) * 2;  // 8, 10, 12
    auto g = th::random_bipartite(m, m, 3, 5, seed * 17 + 1);
    if (g.edge_count() == 0) continue;
    auto v = edgereg::regularity::oracle_witnesses(g, Rational(1, 4));
    if (v.regular()) continue;

    Rational d = density(g);
    Rational eta = v.deviation;
    eta = std::min(eta, Rational(v.A1.size(), m));
    eta = std::min(eta, Rational(v.B1.size(), m));
    eta = std::min(eta, d * Rational(99, 100));
    if (!(eta > 0)) continue;

    auto out = boost_density(BoostInput(g, v.A1, v.B1, eta));
    REQUIRE(out.X.size() == out.Y.size());
    REQUIRE(Rational(out.X.size()) >= eta * m);
    REQUIRE(th::brute_density(g, out.X, out.Y) >= d + eta * eta * eta);
    ++boosted;
  }
  CHECK(boosted >= 20);
}

TEST_CASE("boost rejects invalid witnesses") {
  auto g = th::two_blocks(4);
  auto starts_with = [](const char* s) {
    return Catch::Matchers::MessageMatches(Catch::Matchers::StartsWith(s));
  };
  // set smaller than eta*n
  CHECK_THROWS_MATCHES(
      boost_density(BoostInput(g, {0}, {0, 1, 2, 3}, Rational(1, 2))), Error,
      starts_with("invalid-witnesses"));
  // no deviation: the whole graph against itself
  CHECK_THROWS_MATCHES(
      boost_density(BoostInput(g, {0, 1, 2, 3, 4, 5, 6, 7},
                               {0, 1, 2, 3, 4, 5, 6, 7}, Rational(1, 4))),
      Error, starts_with("invalid-witnesses"));
  // eta at or above the density
  CHECK_THROWS_MATCHES(
      boost_density(BoostInput(g, {0, 1, 2, 3}, {4, 5, 6, 7}, Rational(1, 2))),
      Error, starts_with("invalid-witnesses"));
  // duplicate index
  CHECK_THROWS_MATCHES(
      boost_density(BoostInput(g, {0, 0, 1, 2}, {4, 5, 6, 7}, Rational(1, 4))),
      Error, starts_with("invalid-witnesses"));
}

TEST_CASE("extraction certifies a complete graph immediately") {
  auto g = BipartiteGraph::complete(8, 8);
  auto res = extract_regular_subgraph(g, Rational(1, 2));
  CHECK(res.iterations == 1);
  CHECK(res.verdict.regular());
  CHECK(res.sub.X.size() == 8);
  CHECK(res.sub.Y.size() == 8);
  CHECK(res.densities == std::vector<Rational>{Rational(1)});
}

TEST_CASE("extraction walks two blocks up to a complete block") {
  auto g = th::two_blocks(8);  // 16 x 16, d = 1/2
  auto res = extract_regular_subgraph(g, Rational(1, 2));
  CHECK(res.verdict.regular());
  CHECK(subpair_density(res.sub) > Rational(1, 2));
  CHECK(res.iterations >= 2);
  // every boost step gains at least eta^3 = (eps^4/16)^3
  Rational gain = Rational(1, 256) * Rational(1, 256) * Rational(1, 256);
  for (std::size_t i = 1; i < res.densities.size(); ++i)
    REQUIRE(res.densities[i] - res.densities[i - 1] >= gain);
  CHECK(subpair_density(res.sub) == res.densities.back());
}

TEST_CASE("extraction output density never drops below the input") {
  // planted dense block plus sparse noise
  BipartiteGraph g(12, 12);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) g.add_edge(a, b);
  g.add_edge(7, 8);
  g.add_edge(9, 10);
  g.add_edge(10, 7);
  g.add_edge(11, 11);

  auto res = extract_regular_subgraph(g, Rational(1, 3));
  CHECK(res.verdict.regular());
  CHECK(subpair_density(res.sub) >= density(g));
  for (std::size_t i = 1; i < res.densities.size(); ++i)
    REQUIRE(res.densities[i] > res.densities[i - 1]);
}

TEST_CASE("extraction reports shrunk-out below the size floor") {
  auto g = BipartiteGraph::complete(3, 3);
  CHECK_THROWS_MATCHES(
      extract_regular_subgraph(g, Rational(1, 2)), Error,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::StartsWith("shrunk-out")));
  // a custom floor admits the same graph
  auto res = extract_regular_subgraph(g, Rational(1, 2), 2);
  CHECK(res.verdict.regular());
}

TEST_CASE("decompose takes a complete graph in one round") {
  auto g = BipartiteGraph::complete(6, 6);
  auto dec = decompose(g, Rational(1, 2), Rational(1, 4), Mode::algorithmic);
  REQUIRE(dec.K == 1);
  CHECK(dec.pairs[0].A.size() == 6);
  CHECK(dec.pairs[0].density == Rational(1));
  CHECK(dec.pairs[0].certified);
  CHECK(dec.pairs[0].edges.size() == 36);
  CHECK(dec.residual.edge_count() == 0);
  CHECK(dec.m_min == 6);
  CHECK(dec.events.empty());
  check_partition(g, dec);
}

TEST_CASE("decompose leaves an empty graph alone") {
  BipartiteGraph g(5, 5);
  auto dec = decompose(g, Rational(1, 2), Rational(1, 4), Mode::algorithmic);
  CHECK(dec.K == 0);
  CHECK(dec.m_min == 0);
  CHECK(dec.residual.edge_count() == 0);
  CHECK(dec.events.empty());
  check_partition(g, dec);
}

TEST_CASE("functional decompose splits two blocks into two certified pairs") {
  auto g = th::two_blocks(4);
  auto dec = decompose(g, Rational(1, 5), Rational(1, 4), Mode::functional);
  REQUIRE(dec.K == 2);
  for (auto& p : dec.pairs) {
    CHECK(p.A.size() == 4);
    CHECK(p.density == Rational(1));
    CHECK_FALSE(p.certified);  // functional pairs carry the flag instead
    CHECK(p.super_regular);
  }
  CHECK(dec.residual.edge_count() == 0);
  CHECK(dec.m_min == 4);
  check_partition(g, dec);
}

TEST_CASE("decompose partitions edges exactly in both modes") {
  struct Config {
    Rational eps, delta;
    Mode mode;
  };
  const Config configs[] = {
      {Rational(1, 2), Rational(1, 4), Mode::algorithmic},
      {Rational(1, 5), Rational(1, 4), Mode::functional},
  };
  const std::size_t floor_size = 4;

  for (auto& cfg : configs) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      auto g = th::random_bipartite(10, 10, 3, 5, seed * 7 + 3);
      auto dec = decompose(g, cfg.eps, cfg.delta, cfg.mode, floor_size);
      check_partition(g, dec);

      std::uint64_t pair_edges = 0;
      for (auto& p : dec.pairs) {
        REQUIRE(p.A.size() == p.B.size());
        REQUIRE(p.density >= cfg.delta);
        REQUIRE(p.density ==
                Rational(BigInt(p.edges.size()),
                         BigInt(p.A.size()) * p.B.size()));
        // owned edges really lie inside A x B and inside the input graph
        for (auto& e : p.edges) {
          REQUIRE(g.has_edge(e.first, e.second));
          REQUIRE(std::find(p.A.begin(), p.A.end(), e.first) != p.A.end());
          REQUIRE(std::find(p.B.begin(), p.B.end(), e.second) != p.B.end());
        }
        pair_edges += p.edges.size();
      }
      REQUIRE(pair_edges <= g.edge_count());

      if (dec.events.empty() && dec.residual.edge_count() > 0)
        REQUIRE(density(dec.residual) < cfg.delta);

      // each recorded round removes at least delta * floor^2 edges
      Rational fl(floor_size);
      std::size_t bound = edgereg::core::ceil_size(
                              Rational(BigInt(g.edge_count()) * 2) /
                              (cfg.delta * fl * fl)) +
                          1;
      REQUIRE(dec.K <= bound);
    }
  }
}

TEST_CASE("decompose records shrunk-out rounds and still partitions") {
  // too small for the default floor but dense: extraction can never certify
  auto g = BipartiteGraph::complete(3, 3);
  auto dec = decompose(g, Rational(1, 2), Rational(1, 4), Mode::algorithmic);
  CHECK(dec.K == 0);
  CHECK_FALSE(dec.events.empty());
  CHECK(dec.residual.edge_count() == 9);
  check_partition(g, dec);
}

TEST_CASE("decompose validates its parameters") {
  auto g = th::two_blocks(2);
  auto starts_with = [](const char* s) {
    return Catch::Matchers::MessageMatches(Catch::Matchers::StartsWith(s));
  };
  CHECK_THROWS_MATCHES(
      decompose(BipartiteGraph(3, 4), Rational(1, 2), Rational(1, 4),
                Mode::algorithmic),
      Error, starts_with("unbalanced"));
  CHECK_THROWS_MATCHES(
      decompose(g, Rational(1, 2), Rational(2), Mode::algorithmic), Error,
      starts_with("bad-epsilon"));
  CHECK_THROWS_MATCHES(
      decompose(g, Rational(1, 3), Rational(1, 4), Mode::functional), Error,
      starts_with("bad-epsilon"));  // functional mode needs eps < 1/4
}
