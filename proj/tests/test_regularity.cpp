#include <edgereg/regularity.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace edgereg;
using namespace edgereg::core;
using namespace edgereg::regularity;

namespace {

// independent check: enumerate every qualifying subpair, count edges the
// dumb way, compare densities with exact rationals
bool brute_regular(const BipartiteGraph& g, const Rational& eps) {
  const std::size_t m = g.nA();
  for (std::uint32_t xm = 1; xm < (1u << m); ++xm)
    for (std::uint32_t ym = 1; ym < (1u << m); ++ym) {
      auto X = th::bits_of(xm), Y = th::bits_of(ym);
      if (Rational(X.size()) < eps * m || Rational(Y.size()) < eps * m)
        continue;
      Rational dev = subpair_density(Subpair(g, X, Y)) - density(g);
      if (dev < 0) dev = -dev;
      if (dev > eps) return false;
    }
  return true;
}

Rational brute_max_deviation(const BipartiteGraph& g, const Rational& eps) {
  const std::size_t m = g.nA();
  Rational best(0);
  for (std::uint32_t xm = 1; xm < (1u << m); ++xm)
    for (std::uint32_t ym = 1; ym < (1u << m); ++ym) {
      auto X = th::bits_of(xm), Y = th::bits_of(ym);
      if (Rational(X.size()) < eps * m || Rational(Y.size()) < eps * m)
        continue;
      Rational dev = subpair_density(Subpair(g, X, Y)) - density(g);
      if (dev < 0) dev = -dev;
      if (dev > best) best = dev;
    }
  return best;
}

BipartiteGraph complete_minus_matching(std::size_t n) {
  auto g = BipartiteGraph::complete(n, n);
  for (std::size_t i = 0; i < n; ++i) g.remove_edge(i, i);
  return g;
}

Rational witness_deviation(const BipartiteGraph& g, const Verdict& v) {
  Rational dev = subpair_density(Subpair(g, v.A1, v.B1)) - density(g);
  return dev < 0 ? Rational(-dev) : dev;
}

}  // namespace

TEST_CASE("oracle agrees with subset enumeration on tiny graphs") {
  for (std::size_t m : {4, 5, 6}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      auto g = th::random_bipartite(m, m, 1, 2, seed);
      for (auto eps : {Rational(1, 2), Rational(1, 3), Rational(1, 4)}) {
        bool brute = brute_regular(g, eps);
        REQUIRE(is_regular_oracle(g, eps) == brute);
        auto v = oracle_witnesses(g, eps);
        REQUIRE(v.regular() == brute);
        if (!v.regular()) {
          // scan returns the maximally deviating subpair
          REQUIRE(witness_deviation(g, v) == v.deviation);
          REQUIRE(v.deviation == brute_max_deviation(g, eps));
          REQUIRE(v.deviation > eps);
        }
      }
    }
  }
}

TEST_CASE("complete and empty graphs are regular at every epsilon") {
  for (auto eps : {Rational(1, 10), Rational(1, 4), Rational(1, 2),
                   Rational(9, 10)}) {
    CHECK(is_regular_oracle(BipartiteGraph::complete(8, 8), eps));
    CHECK(is_regular_oracle(BipartiteGraph(8, 8), eps));
    CHECK(verify_regularity(BipartiteGraph::complete(16, 16), eps).regular());
    CHECK(verify_regularity(BipartiteGraph(16, 16), eps).regular());
  }
}

TEST_CASE("two blocks: irregular at 1/4, witnesses surface at 1/2") {
  auto g = th::two_blocks(4);  // 8x8, density 1/2, max deviation exactly 1/2
  CHECK_FALSE(is_regular_oracle(g, Rational(1, 4)));
  CHECK(is_regular_oracle(g, Rational(1, 2)));

  // the verifier may still produce self-certifying witnesses for a graph
  // that is regular: the dichotomy is not exclusive
  auto v = verify_regularity(g, Rational(1, 2));
  REQUIRE_FALSE(v.regular());
  CHECK(v.deviation >= Rational(1, 16));
  CHECK(witness_deviation(g, v) == v.deviation);
  CHECK(v.A1.size() >= 1);
  CHECK(v.B1.size() >= 1);
}

TEST_CASE("verifier Regular verdicts are sound against the oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto g = th::random_bipartite(12, 12, 1, 2, seed);
    for (auto eps : {Rational(1, 2), Rational(1, 4)}) {
      auto v = verify_regularity(g, eps);
      if (v.regular()) REQUIRE(is_regular_oracle(g, eps));
    }
  }
}

TEST_CASE("witness verdicts satisfy the exact invariants") {
  int witnessed = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::size_t m = 8 + seed % 5;
    auto g = th::random_bipartite(m, m, 2, 5, seed * 7 + 1);
    for (auto eps : {Rational(1, 2), Rational(1, 3), Rational(1, 4)}) {
      auto v = verify_regularity(g, eps);
      if (v.regular()) continue;
      ++witnessed;
      Rational eps4 = eps * eps * eps * eps;
      std::size_t need = ceil_size(eps4 * m / constants::witness_size_den);
      REQUIRE(v.A1.size() >= need);
      REQUIRE(v.B1.size() >= need);
      REQUIRE(v.deviation >= eps4);
      REQUIRE(witness_deviation(g, v) == v.deviation);
      REQUIRE(std::is_sorted(v.A1.begin(), v.A1.end()));
      REQUIRE(std::is_sorted(v.B1.begin(), v.B1.end()));
      REQUIRE(v.A1.back() < m);
      REQUIRE(v.B1.back() < m);
    }
  }
  CHECK(witnessed > 0);
}

TEST_CASE("planted low-degree vertices are found by the degree hunt") {
  auto g = BipartiteGraph::complete(16, 16);
  for (std::size_t a : {3, 7, 9, 12})
    for (std::size_t b = 0; b < 16; ++b) g.remove_edge(a, b);

  auto v = verify_regularity(g, Rational(1, 4));
  REQUIRE_FALSE(v.regular());
  // every prefix of the dead rows deviates by exactly 3/4; ties keep them all
  CHECK(v.A1 == std::vector<std::size_t>{3, 7, 9, 12});
  CHECK(v.B1.size() == 16);
  CHECK(v.deviation == Rational(3, 4));
}

TEST_CASE("near-complete flat graph is certified without witnesses") {
  auto g = complete_minus_matching(32);
  auto v = verify_regularity(g, Rational(1, 4));
  CHECK(v.regular());
  CHECK(v.density == Rational(31, 32));
  // 1/4 is far outside the stated epsilon range; that is only a warning
  REQUIRE_FALSE(v.warnings.empty());
  CHECK(v.warnings.front().find("epsilon-range") != std::string::npos);
}

TEST_CASE("verdicts are deterministic") {
  for (std::uint64_t seed : {5ull, 11ull}) {
    auto g = th::random_bipartite(12, 12, 2, 5, seed);
    auto h = th::random_bipartite(12, 12, 2, 5, seed);
    for (auto eps : {Rational(1, 2), Rational(1, 4)}) {
      auto v1 = verify_regularity(g, eps);
      auto v2 = verify_regularity(g, eps);
      auto v3 = verify_regularity(h, eps);
      for (auto* w : {&v2, &v3}) {
        CHECK(v1.kind == w->kind);
        CHECK(v1.density == w->density);
        CHECK(v1.A1 == w->A1);
        CHECK(v1.B1 == w->B1);
        CHECK(v1.deviation == w->deviation);
        CHECK(v1.warnings == w->warnings);
      }
    }
  }
}

TEST_CASE("oracle guards: size cap and unbalanced parts") {
  CHECK_THROWS_MATCHES(is_regular_oracle(BipartiteGraph(15, 15), Rational(1, 2)),
                       Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::StartsWith("oracle-size-exceeded")));
  CHECK_THROWS_MATCHES(verify_regularity(BipartiteGraph(4, 5), Rational(1, 2)),
                       Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::StartsWith("unbalanced")));
}

TEST_CASE("super-regularity: degree floor plus regularity") {
  for (auto eps : {Rational(1, 4), Rational(1, 2)})
    for (auto delta : {Rational(1, 4), Rational(1, 2), Rational(1)})
      CHECK(is_super_regular(BipartiteGraph::complete(6, 6), eps, delta));

  // isolated vertex kills the degree condition outright
  auto iso = BipartiteGraph::complete(4, 4);
  for (std::size_t b = 0; b < 4; ++b) iso.remove_edge(2, b);
  CHECK_FALSE(is_super_regular(iso, Rational(1, 2), Rational(1, 2)));

  // two blocks pass the degree floor at delta = 1/2 but are not 1/4-regular
  auto tb = th::two_blocks(4);
  CHECK_FALSE(is_super_regular(tb, Rational(1, 4), Rational(1, 2)));

  // at small m the semantics is exactly: degree floor AND oracle regularity
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = th::random_bipartite(10, 10, 2, 3, seed);
    Rational eps(1, 3), delta(2, 5);
    bool degs = true;
    for (std::size_t i = 0; i < 10; ++i) {
      if (Rational(g.deg_a(i)) < delta * 10) degs = false;
      if (Rational(g.deg_b(i)) < delta * 10) degs = false;
    }
    CHECK(is_super_regular(g, eps, delta) ==
          (degs && is_regular_oracle(g, eps)));
  }
}

TEST_CASE("super_regularize keeps a complete graph unchanged") {
  auto g = BipartiteGraph::complete(6, 6);
  CHECK(super_regularize(g, Rational(1, 5)) == g);
}

TEST_CASE("super_regularize drops a dead vertex and one partner") {
  auto g = BipartiteGraph::complete(8, 8);
  for (std::size_t b = 0; b < 8; ++b) g.remove_edge(0, b);

  // threshold (d - eps)*m = (3/4 - 1/4 + ... ) -- recount: d = 56/64 = 7/8,
  // (7/8 - 1/4)*8 = 5, so only the isolated vertex falls below; b0 is the
  // lowest-index surplus partner
  auto h = super_regularize(g, Rational(1, 4));
  CHECK(h == BipartiteGraph::complete(7, 7));
}

TEST_CASE("super_regularize rejects provably irregular input") {
  auto g = BipartiteGraph::complete(8, 8);
  for (std::size_t a : {0, 1})
    for (std::size_t b = 0; b < 8; ++b) g.remove_edge(a, b);
  // two dead vertices = a low-degree set of size eps*m, a witness against
  // eps-regularity
  CHECK_THROWS_MATCHES(super_regularize(g, Rational(1, 4)), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::StartsWith("not-regular")));
  CHECK_THROWS_MATCHES(super_regularize(th::two_blocks(4), Rational(1)),
                       Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::StartsWith("bad-epsilon")));
}

TEST_CASE("super_regularize size, degree and density floors") {
  auto check = [](const BipartiteGraph& g, const Rational& eps) {
    const std::size_t m = g.nA();
    const Rational d = density(g);
    BipartiteGraph h = super_regularize(g, eps);
    REQUIRE(h.nA() == h.nB());
    const std::size_t mp = h.nA();
    REQUIRE(Rational(mp) >= (Rational(1) - eps) * m);
    for (std::size_t i = 0; i < mp; ++i) {
      REQUIRE(Rational(h.deg_a(i)) >= (d - 2 * eps) * mp);
      REQUIRE(Rational(h.deg_b(i)) >= (d - 2 * eps) * mp);
    }
    REQUIRE(density(h) >= d - 2 * eps);
  };
  check(BipartiteGraph::complete(16, 16), Rational(1, 5));
  check(complete_minus_matching(12), Rational(1, 5));
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
    check(th::random_bipartite(20, 20, 7, 10, seed), Rational(1, 5));
}

TEST_CASE("high_degree_vertices on complete and planted graphs") {
  auto g = BipartiteGraph::complete(8, 8);
  std::vector<std::size_t> SA{0, 1, 2, 3, 4, 5}, SB{2, 3, 4, 5, 6, 7};
  auto out = high_degree_vertices(g, SA, SB, 2, Rational(1, 8), Rational(1));
  CHECK(out == SA);  // every vertex of a complete graph qualifies

  auto p = complete_minus_matching(12);
  std::vector<std::size_t> TA{0, 2, 4, 6, 8, 10}, TB{1, 3, 5, 7, 9, 11};
  Rational d = density(p), eps(1, 6);
  auto picked = high_degree_vertices(p, TA, TB, 2, eps, d);
  REQUIRE(picked.size() >= 2);
  for (std::size_t v : picked) {
    std::size_t deg = 0;
    for (std::size_t b : TB) deg += p.has_edge(v, b);
    REQUIRE(Rational(deg) >= (d - eps) * TB.size());
  }
}

TEST_CASE("high_degree_vertices failure paths") {
  auto g = BipartiteGraph::complete(8, 8);
  CHECK_THROWS_MATCHES(
      high_degree_vertices(g, std::vector<std::size_t>{0},
                           std::vector<std::size_t>{0, 1, 2, 3, 4}, 3,
                           Rational(1, 4), Rational(1)),
      Error,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::StartsWith("sets-too-small")));

  // cross-block sets in a two-blocks graph: no vertex can qualify, which is
  // itself proof the pair was not regular at this density
  auto tb = th::two_blocks(4);
  CHECK_THROWS_MATCHES(
      high_degree_vertices(tb, std::vector<std::size_t>{0, 1, 2, 3},
                           std::vector<std::size_t>{4, 5, 6, 7}, 1,
                           Rational(1, 4), Rational(1, 2)),
      Error,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::StartsWith("not-regular")));
}
