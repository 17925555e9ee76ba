#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"

namespace edgereg::core {

namespace bits {

inline std::size_t words_for(std::size_t nbits) { return (nbits + 63) / 64; }

inline std::vector<std::uint64_t> mask_of(std::span<const std::size_t> idx,
                                          std::size_t nbits) {
  std::vector<std::uint64_t> m(words_for(nbits), 0);
  for (std::size_t i : idx) m[i >> 6] |= std::uint64_t(1) << (i & 63);
  return m;
}

inline std::uint64_t and_popcount(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += std::popcount(a[i] & b[i]);
  return c;
}

inline std::uint64_t popcount(std::span<const std::uint64_t> a) {
  std::uint64_t c = 0;
  for (std::uint64_t w : a) c += std::popcount(w);
  return c;
}

}  // namespace bits

// Dense bipartite adjacency. Rows are kept in both orientations (A-major and
// B-major) so degree/codegree kernels stream whole words either way.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  BipartiteGraph(std::size_t nA, std::size_t nB)
      : nA_(nA),
        nB_(nB),
        wA_(bits::words_for(nA)),
        wB_(bits::words_for(nB)),
        ab_(nA * wB_, 0),
        ba_(nB * wA_, 0) {}

  static BipartiteGraph complete(std::size_t nA, std::size_t nB) {
    BipartiteGraph g(nA, nB);
    for (std::size_t a = 0; a < nA; ++a)
      for (std::size_t b = 0; b < nB; ++b) g.add_edge(a, b);
    return g;
  }

  std::size_t nA() const { return nA_; }
  std::size_t nB() const { return nB_; }
  std::uint64_t edge_count() const { return edges_; }

  bool has_edge(std::size_t a, std::size_t b) const {
    check(a, b);
    return (ab_[a * wB_ + (b >> 6)] >> (b & 63)) & 1;
  }

  // true if the edge was actually inserted / removed
  bool add_edge(std::size_t a, std::size_t b) {
    check(a, b);
    std::uint64_t& w = ab_[a * wB_ + (b >> 6)];
    std::uint64_t m = std::uint64_t(1) << (b & 63);
    if (w & m) return false;
    w |= m;
    ba_[b * wA_ + (a >> 6)] |= std::uint64_t(1) << (a & 63);
    ++edges_;
    return true;
  }

  bool remove_edge(std::size_t a, std::size_t b) {
    check(a, b);
    std::uint64_t& w = ab_[a * wB_ + (b >> 6)];
    std::uint64_t m = std::uint64_t(1) << (b & 63);
    if (!(w & m)) return false;
    w &= ~m;
    ba_[b * wA_ + (a >> 6)] &= ~(std::uint64_t(1) << (a & 63));
    --edges_;
    return true;
  }

  std::span<const std::uint64_t> row_a(std::size_t a) const {
    return {ab_.data() + a * wB_, wB_};
  }
  std::span<const std::uint64_t> row_b(std::size_t b) const {
    return {ba_.data() + b * wA_, wA_};
  }

  std::size_t deg_a(std::size_t a) const { return bits::popcount(row_a(a)); }
  std::size_t deg_b(std::size_t b) const { return bits::popcount(row_b(b)); }

  std::vector<std::size_t> neighbors_a(std::size_t a) const {
    return expand(row_a(a), nB_);
  }
  std::vector<std::size_t> neighbors_b(std::size_t b) const {
    return expand(row_b(b), nA_);
  }

  BipartiteGraph induced(std::span<const std::size_t> X,
                         std::span<const std::size_t> Y) const {
    BipartiteGraph h(X.size(), Y.size());
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t j = 0; j < Y.size(); ++j)
        if (has_edge(X[i], Y[j])) h.add_edge(i, j);
    return h;
  }

  // full recount from the A-major bits; test hook for the edge_count invariant
  std::uint64_t recount() const {
    std::uint64_t c = 0;
    for (std::size_t a = 0; a < nA_; ++a) c += bits::popcount(row_a(a));
    return c;
  }

  // both orientations agree; test hook
  bool orientations_consistent() const {
    for (std::size_t a = 0; a < nA_; ++a)
      for (std::size_t b = 0; b < nB_; ++b) {
        bool ab = (ab_[a * wB_ + (b >> 6)] >> (b & 63)) & 1;
        bool ba = (ba_[b * wA_ + (a >> 6)] >> (a & 63)) & 1;
        if (ab != ba) return false;
      }
    return true;
  }

  bool operator==(const BipartiteGraph& o) const {
    return nA_ == o.nA_ && nB_ == o.nB_ && ab_ == o.ab_;
  }

 private:
  void check(std::size_t a, std::size_t b) const {
    if (a >= nA_ || b >= nB_) throw Error("bad-index");
  }

  static std::vector<std::size_t> expand(std::span<const std::uint64_t> row,
                                         std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < row.size(); ++w) {
      std::uint64_t word = row[w];
      while (word) {
        std::size_t i = (w << 6) + std::countr_zero(word);
        if (i < n) out.push_back(i);
        word &= word - 1;
      }
    }
    return out;
  }

  std::size_t nA_ = 0, nB_ = 0, wA_ = 0, wB_ = 0;
  std::uint64_t edges_ = 0;
  std::vector<std::uint64_t> ab_, ba_;
};

// Symmetric simple graph, only as the input of balanced_split.
class SimpleGraph {
 public:
  SimpleGraph() = default;
  explicit SimpleGraph(std::size_t n)
      : n_(n), w_(bits::words_for(n)), rows_(n * w_, 0) {}

  std::size_t n() const { return n_; }
  std::uint64_t edge_count() const { return edges_; }

  bool has_edge(std::size_t u, std::size_t v) const {
    check(u, v);
    return (rows_[u * w_ + (v >> 6)] >> (v & 63)) & 1;
  }

  bool add_edge(std::size_t u, std::size_t v) {
    check(u, v);
    if (u == v) throw Error("bad-index", "self loop");
    if (has_edge(u, v)) return false;
    rows_[u * w_ + (v >> 6)] |= std::uint64_t(1) << (v & 63);
    rows_[v * w_ + (u >> 6)] |= std::uint64_t(1) << (u & 63);
    ++edges_;
    return true;
  }

  std::span<const std::uint64_t> row(std::size_t u) const {
    return {rows_.data() + u * w_, w_};
  }

  std::size_t deg(std::size_t u) const { return bits::popcount(row(u)); }

 private:
  void check(std::size_t u, std::size_t v) const {
    if (u >= n_ || v >= n_) throw Error("bad-index");
  }

  std::size_t n_ = 0, w_ = 0;
  std::uint64_t edges_ = 0;
  std::vector<std::uint64_t> rows_;
};

// A view (X subset of A, Y subset of B) into a parent graph; no edge copies.
struct Subpair {
  const BipartiteGraph* parent = nullptr;
  std::vector<std::size_t> X, Y;  // sorted ascending, distinct

  Subpair() = default;

  Subpair(const BipartiteGraph& g, std::vector<std::size_t> x,
          std::vector<std::size_t> y)
      : parent(&g), X(std::move(x)), Y(std::move(y)) {
    normalize(X, g.nA());
    normalize(Y, g.nB());
  }

  static Subpair whole(const BipartiteGraph& g) {
    std::vector<std::size_t> x(g.nA()), y(g.nB());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i;
    return Subpair(g, std::move(x), std::move(y));
  }

  BipartiteGraph materialize() const { return parent->induced(X, Y); }

 private:
  static void normalize(std::vector<std::size_t>& v, std::size_t bound) {
    if (v.empty()) throw Error("empty-part");
    std::sort(v.begin(), v.end());
    if (v.back() >= bound) throw Error("bad-index");
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
      throw Error("bad-index", "duplicate index in subpair");
  }
};

// Three parts of a common size with dense blocks XY, YZ, ZX.
// Block edge orientation: XY is (x,y), YZ is (y,z), ZX is (z,x).
struct TripartiteGraph {
  std::size_t n = 0;
  BipartiteGraph XY, YZ, ZX;

  TripartiteGraph() = default;
  explicit TripartiteGraph(std::size_t n_)
      : n(n_), XY(n_, n_), YZ(n_, n_), ZX(n_, n_) {}

  TripartiteGraph(BipartiteGraph xy, BipartiteGraph yz, BipartiteGraph zx)
      : n(xy.nA()), XY(std::move(xy)), YZ(std::move(yz)), ZX(std::move(zx)) {
    for (const BipartiteGraph* b : {&XY, &YZ, &ZX})
      if (b->nA() != n || b->nB() != n)
        throw Error("bad-index", "tripartite blocks must share the part size");
  }

  std::uint64_t edge_count() const {
    return XY.edge_count() + YZ.edge_count() + ZX.edge_count();
  }
};

}  // namespace edgereg::core
