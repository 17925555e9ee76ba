#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "extract.hpp"
#include "functional.hpp"
#include "packing.hpp"
#include "regularity.hpp"
#include "removal.hpp"
#include "rng.hpp"

namespace edgereg::io {

using core::BigInt;
using core::BipartiteGraph;
using core::Rational;
using core::SplitMix64;
using core::TripartiteGraph;
using Json = nlohmann::ordered_json;

// recorded in every seeded report so runs can be reproduced elsewhere
inline constexpr const char* generator_id = "splitmix64-v1";

// ---------------------------------------------------------------- formats
// bipartite:  "bipartite <nA> <nB> <m>", then m lines "<a> <b>"  (1-based)
// tripartite: "tripartite <n> <mXY> <mYZ> <mZX>", blocks opened by
//             "# XY", "# YZ", "# ZX"; edges in block orientation
// forest:     "tree <t>" blocks, each with t-1 lines "<child> <parent>",
//             vertex 1 is the root
// JSON reports use 0-based indices; only the text formats are 1-based.

namespace detail {

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
  throw Error("bad-format", "line " + std::to_string(line) + ": " + what);
}

// whitespace-tokenized lines; blank lines are skipped but still numbered
struct Lines {
  std::istream& in;
  std::size_t num = 0;

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in, line)) {
      ++num;
      std::vector<std::string> f;
      std::istringstream ss(line);
      for (std::string t; ss >> t;) f.push_back(std::move(t));
      if (!f.empty()) return f;
    }
    return {};
  }
};

inline std::uint64_t parse_u64(const std::string& t, std::size_t line) {
  if (t.empty()) fail(line, "expected a number");
  std::uint64_t v = 0;
  for (char c : t) {
    if (c < '0' || c > '9') fail(line, "expected a number, got '" + t + "'");
    const std::uint64_t d = std::uint64_t(c - '0');
    if (v > (~std::uint64_t(0) - d) / 10) fail(line, "number out of range");
    v = v * 10 + d;
  }
  return v;
}

inline void read_edges(Lines& lx, BipartiteGraph& g, std::uint64_t m,
                       std::size_t hiA, std::size_t hiB) {
  for (std::uint64_t k = 0; k < m; ++k) {
    auto f = lx.next();
    if (f.empty()) fail(lx.num, "unexpected end of file; expected an edge");
    if (f.size() != 2) fail(lx.num, "expected '<a> <b>'");
    const auto a = parse_u64(f[0], lx.num), b = parse_u64(f[1], lx.num);
    if (a < 1 || a > hiA || b < 1 || b > hiB)
      fail(lx.num, "edge endpoint out of range");
    if (!g.add_edge(a - 1, b - 1))
      throw Error("duplicate-edge",
                  "line " + std::to_string(lx.num) + ": " + f[0] + " " + f[1]);
  }
}

inline void expect_marker(Lines& lx, const char* name) {
  auto f = lx.next();
  if (f.empty())
    fail(lx.num, std::string("unexpected end of file; expected '# ") + name +
                     "'");
  if (f.size() != 2 || f[0] != "#" || f[1] != name)
    fail(lx.num, std::string("expected block marker '# ") + name + "'");
}

}  // namespace detail

inline BipartiteGraph read_bipartite(std::istream& in) {
  detail::Lines lx{in};
  auto h = lx.next();
  if (h.empty()) detail::fail(1, "expected 'bipartite <nA> <nB> <m>'");
  if (h[0] != "bipartite" || h.size() != 4)
    detail::fail(lx.num, "expected 'bipartite <nA> <nB> <m>'");
  const auto nA = detail::parse_u64(h[1], lx.num);
  const auto nB = detail::parse_u64(h[2], lx.num);
  const auto m = detail::parse_u64(h[3], lx.num);
  BipartiteGraph g(nA, nB);
  detail::read_edges(lx, g, m, nA, nB);
  if (auto f = lx.next(); !f.empty())
    detail::fail(lx.num, "unexpected trailing content");
  return g;
}

inline void write_bipartite(std::ostream& out, const BipartiteGraph& g) {
  out << "bipartite " << g.nA() << ' ' << g.nB() << ' ' << g.edge_count()
      << '\n';
  for (std::size_t a = 0; a < g.nA(); ++a)
    for (std::size_t b : g.neighbors_a(a))
      out << a + 1 << ' ' << b + 1 << '\n';
}

inline TripartiteGraph read_tripartite(std::istream& in) {
  detail::Lines lx{in};
  auto h = lx.next();
  if (h.empty()) detail::fail(1, "expected 'tripartite <n> <mXY> <mYZ> <mZX>'");
  if (h[0] != "tripartite" || h.size() != 5)
    detail::fail(lx.num, "expected 'tripartite <n> <mXY> <mYZ> <mZX>'");
  const auto n = detail::parse_u64(h[1], lx.num);
  std::uint64_t counts[3];
  for (int i = 0; i < 3; ++i) counts[i] = detail::parse_u64(h[2 + i], lx.num);
  TripartiteGraph g(n);
  const char* names[3] = {"XY", "YZ", "ZX"};
  BipartiteGraph* blocks[3] = {&g.XY, &g.YZ, &g.ZX};
  for (int i = 0; i < 3; ++i) {
    detail::expect_marker(lx, names[i]);
    detail::read_edges(lx, *blocks[i], counts[i], n, n);
  }
  if (auto f = lx.next(); !f.empty())
    detail::fail(lx.num, "unexpected trailing content");
  return g;
}

inline void write_tripartite(std::ostream& out, const TripartiteGraph& g) {
  out << "tripartite " << g.n << ' ' << g.XY.edge_count() << ' '
      << g.YZ.edge_count() << ' ' << g.ZX.edge_count() << '\n';
  const char* names[3] = {"XY", "YZ", "ZX"};
  const BipartiteGraph* blocks[3] = {&g.XY, &g.YZ, &g.ZX};
  for (int i = 0; i < 3; ++i) {
    out << "# " << names[i] << '\n';
    for (std::size_t a = 0; a < g.n; ++a)
      for (std::size_t b : blocks[i]->neighbors_a(a))
        out << a + 1 << ' ' << b + 1 << '\n';
  }
}

inline std::vector<packing::RootedTree> read_forest(std::istream& in) {
  detail::Lines lx{in};
  std::vector<packing::RootedTree> out;
  for (auto h = lx.next(); !h.empty(); h = lx.next()) {
    const std::size_t start = lx.num;
    if (h[0] != "tree" || h.size() != 2)
      detail::fail(lx.num, "expected 'tree <t>'");
    const auto t = detail::parse_u64(h[1], lx.num);
    if (t == 0) detail::fail(lx.num, "a tree needs at least one vertex");
    std::vector<std::size_t> par(t, 0);
    std::vector<char> seen(t + 1, 0);
    for (std::uint64_t k = 0; k + 1 < t; ++k) {
      auto f = lx.next();
      if (f.empty())
        detail::fail(lx.num, "unexpected end of file inside a tree block");
      if (f.size() != 2) detail::fail(lx.num, "expected '<child> <parent>'");
      const auto c = detail::parse_u64(f[0], lx.num);
      const auto p = detail::parse_u64(f[1], lx.num);
      if (c < 2 || c > t) detail::fail(lx.num, "child out of range (root is 1)");
      if (p < 1 || p > t) detail::fail(lx.num, "parent out of range");
      if (seen[c]) detail::fail(lx.num, "vertex has two parents");
      seen[c] = 1;
      par[c - 1] = p - 1;
    }
    try {
      out.push_back(packing::tree_from_parents(par));
    } catch (const Error& e) {  // e.g. a parent cycle
      detail::fail(start, e.what());
    }
  }
  if (out.empty()) throw Error("bad-format", "line 1: no tree blocks");
  return out;
}

inline void write_forest(std::ostream& out,
                         const std::vector<packing::RootedTree>& forest) {
  for (const auto& tree : forest) {
    out << "tree " << tree.t << '\n';
    for (std::size_t v = 1; v < tree.t; ++v)
      out << v + 1 << ' ' << tree.parent[v] + 1 << '\n';
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io-error", path + ": cannot open");
  return f;
}

inline BipartiteGraph load_bipartite(const std::string& path) {
  auto f = open_input(path);
  return read_bipartite(f);
}
inline TripartiteGraph load_tripartite(const std::string& path) {
  auto f = open_input(path);
  return read_tripartite(f);
}
inline std::vector<packing::RootedTree> load_forest(const std::string& path) {
  auto f = open_input(path);
  return read_forest(f);
}

// ------------------------------------------------------------- generators

// exact Bernoulli(p) per cell; the draw needs denominator(p) <= 2^32
inline BipartiteGraph gen_random(std::size_t nA, std::size_t nB,
                                 const Rational& p, SplitMix64& rng) {
  if (p < 0 || p > 1) throw Error("gen-unsat", "density outside [0, 1]");
  if (denominator(p) > BigInt(1) << 32)
    throw Error("gen-unsat", "density denominator above 2^32");
  const auto num = numerator(p).convert_to<std::uint64_t>();
  const auto den = denominator(p).convert_to<std::uint64_t>();
  BipartiteGraph g(nA, nB);
  for (std::size_t a = 0; a < nA; ++a)
    for (std::size_t b = 0; b < nB; ++b)
      if (rng.chance(num, den)) g.add_edge(a, b);
  return g;
}

// two complete blocks on the diagonal: the canonical irregular instance
inline BipartiteGraph gen_two_blocks(std::size_t block) {
  if (block == 0) throw Error("gen-unsat", "block size 0");
  BipartiteGraph g(2 * block, 2 * block);
  for (std::size_t a = 0; a < block; ++a)
    for (std::size_t b = 0; b < block; ++b) {
      g.add_edge(a, b);
      g.add_edge(block + a, block + b);
    }
  return g;
}

// rejection-samples density delta + 2*eps until the pair checks out
inline BipartiteGraph gen_planted_regular(std::size_t m, const Rational& eps,
                                          const Rational& delta,
                                          SplitMix64& rng) {
  if (m == 0) throw Error("gen-unsat", "m = 0");
  if (eps <= 0 || eps >= 1 || delta <= 0 || delta > 1)
    throw Error("gen-unsat", "need 0 < eps < 1 and 0 < delta <= 1");
  Rational p = delta + 2 * eps;
  if (p > 1) p = 1;
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto g = gen_random(m, m, p, rng);
    if (regularity::is_super_regular(g, eps, delta)) return g;
  }
  throw Error("gen-unsat", "no (eps, delta)-super-regular sample in 64 draws");
}

// complete XY with rotated perfect matchings on YZ and ZX: a dense block,
// sparse closings, n triangles, and few five-cycles per Z vertex
inline TripartiteGraph gen_low_c5(std::size_t n, SplitMix64& rng) {
  if (n == 0) throw Error("gen-unsat", "n = 0");
  TripartiteGraph g(n);
  g.XY = BipartiteGraph::complete(n, n);
  const std::size_t s1 = rng.below(n), s2 = rng.below(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.YZ.add_edge(i, (i + s1) % n);
    g.ZX.add_edge(i, (i + s2) % n);
  }
  return g;
}

// uniform random recursive trees of 2..size vertices; with a level cap,
// oversized samples are redrawn
inline std::vector<packing::RootedTree> gen_forest(std::size_t count,
                                                   std::size_t size,
                                                   std::size_t max_level,
                                                   SplitMix64& rng) {
  if (count == 0 || size < 2)
    throw Error("gen-unsat", "need count >= 1 and size >= 2");
  std::vector<packing::RootedTree> out;
  for (std::size_t i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const std::size_t t = 2 + rng.below(size - 1);
      std::vector<std::size_t> par(t, 0);
      for (std::size_t v = 1; v < t; ++v) par[v] = rng.below(v);
      auto tree = packing::tree_from_parents(par);
      if (max_level == 0 || tree.max_level_size <= max_level) {
        out.push_back(std::move(tree));
        placed = true;
      }
    }
    if (!placed) throw Error("gen-unsat", "level cap rejected 64 samples");
  }
  return out;
}

// ------------------------------------------------------------------ json

// exact num/den as decimal strings (they outgrow any fixed width); the
// float lives only in the parallel approx field
inline Json rat_json(const Rational& x) {
  return Json{{"num", numerator(x).str()},
              {"den", denominator(x).str()},
              {"approx", core::approx(x)}};
}

inline Rational rat_from(const Json& j) {
  return Rational(BigInt(j.at("num").get<std::string>()),
                  BigInt(j.at("den").get<std::string>()));
}

namespace detail {

inline Json edges_json(
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Json a = Json::array();
  for (auto [x, y] : edges) a.push_back(Json::array({x, y}));
  return a;
}

}  // namespace detail

inline Json verdict_json(const regularity::Verdict& v) {
  Json j;
  j["verdict"] = v.regular() ? "regular" : "witnesses";
  j["density"] = rat_json(v.density);
  if (!v.regular()) {
    j["A1"] = v.A1;
    j["B1"] = v.B1;
    j["deviation"] = rat_json(v.deviation);
  }
  j["warnings"] = v.warnings;
  return j;
}

inline Json decomposition_json(const extract::Decomposition& d,
                               std::uint64_t input_edges) {
  Json j;
  j["K"] = d.K;
  j["m_min"] = d.m_min;
  Json pairs = Json::array();
  std::uint64_t pair_total = 0;
  for (const auto& p : d.pairs) {
    pair_total += p.edges.size();
    pairs.push_back(Json{{"A", p.A},
                         {"B", p.B},
                         {"edge_count", p.edges.size()},
                         {"edges", detail::edges_json(p.edges)},
                         {"epsilon", rat_json(p.epsilon)},
                         {"density", rat_json(p.density)},
                         {"certified", p.certified},
                         {"super_regular", p.super_regular}});
  }
  j["pairs"] = std::move(pairs);
  j["pair_edges_total"] = pair_total;
  j["residual_edges"] = d.residual.edge_count();
  j["input_edges"] = input_edges;
  j["partition_exact"] = pair_total + d.residual.edge_count() == input_edges;
  j["events"] = d.events;
  j["warnings"] = d.warnings;
  return j;
}

inline Json pack_json(const packing::PackResult& r,
                      const std::vector<packing::RootedTree>& trees) {
  Json j;
  j["status"] = r.status;
  j["trees"] = trees.size();
  j["placed"] = r.embeddings.size();
  j["first_unplaced"] = r.first_unplaced;
  Json embs = Json::array();
  std::uint64_t consumed = 0;
  for (std::size_t i = 0; i < r.embeddings.size(); ++i) {
    consumed += trees[i].edge_count();
    Json levels = Json::array();
    for (char c : r.embeddings[i].level_on_a) levels.push_back(bool(c));
    embs.push_back(Json{{"phi", r.embeddings[i].phi},
                        {"level_on_a", std::move(levels)},
                        {"host_A", r.hosts[i].first},
                        {"host_B", r.hosts[i].second}});
  }
  j["embeddings"] = std::move(embs);
  j["consumed_edges"] = consumed;
  j["remaining_edges"] = r.remaining.edge_count();
  j["events"] = r.events;
  j["warnings"] = r.warnings;
  return j;
}

inline Json removal_json(const removal::RemovalReport& rep,
                         std::uint64_t input_xy_edges) {
  Json j;
  j["bundles"] = decomposition_json(rep.bundles, input_xy_edges);
  j["good_c5_total"] = rep.good_c5_total;
  j["good_c5_per_z"] = rep.good_c5_per_z;
  j["bad_threshold"] = rat_json(rep.bad_threshold);
  j["c5_budget"] = rat_json(rep.c5_budget);
  j["k0_asymptotic"] = rep.k0_asymptotic;
  j["m_asymptotic"] = rep.m_asymptotic;
  j["bad_vertices"] = rep.bad_vertices;
  j["phase1_deleted"] = rep.phase1_deleted;
  j["phase2_deleted"] = rep.phase2_deleted;
  j["phase3_deleted"] = rep.phase3_deleted;
  j["edges_deleted"] = rep.edges_deleted;
  j["triangles_left"] = rep.triangles_left;
  j["triangle_free"] = rep.triangle_free;
  j["within_budget"] = rep.within_budget;
  j["warnings"] = rep.warnings;
  return j;
}

// --------------------------------------------------------------- reports

inline Json make_report(const std::string& command, Json parameters,
                        Json result,
                        std::optional<std::uint64_t> seed = {}) {
  Json j;
  j["command"] = command;
  if (seed) {
    j["generator"] = generator_id;
    j["seed"] = *seed;
  }
  j["parameters"] = std::move(parameters);
  j["result"] = std::move(result);
  j["timing_ms"] = nullptr;  // filled only on request, so reports stay
                             // byte-identical across runs
  return j;
}

inline Json parameters_json(const Rational& eps, const Rational* delta = nullptr,
                            const Rational* d = nullptr) {
  Json p;
  p["epsilon"] = rat_json(eps);
  if (delta) p["delta"] = rat_json(*delta);
  if (d) p["d"] = rat_json(*d);
  p["r"] = rat_json(functional::r_of(eps));
  p["q"] = rat_json(Rational(2) / eps);
  return p;
}

struct RunResult {
  int exit_code = 0;
  Json report;
  std::string file_body;  // gen only: the generated file's bytes
};

inline RunResult run_verify(const BipartiteGraph& g, const Rational& eps) {
  RunResult rr;
  Json res;
  try {
    res = verdict_json(regularity::verify_regularity(g, eps));
  } catch (const Error& e) {
    if (e.code() != "inconclusive-large") throw;
    res["verdict"] = "inconclusive-large";
    res["density"] = rat_json(core::density(g));
    res["warnings"] = Json::array({e.what()});
  }
  rr.report = make_report("verify", parameters_json(eps), std::move(res));
  return rr;
}

inline extract::Mode mode_from(const std::string& s) {
  if (s == "algorithmic") return extract::Mode::algorithmic;
  if (s == "functional") return extract::Mode::functional;
  throw Error("bad-format", "mode must be 'algorithmic' or 'functional'");
}

inline RunResult run_decompose(const BipartiteGraph& g, const Rational& eps,
                               const Rational& delta,
                               const std::string& mode) {
  RunResult rr;
  auto dec = extract::decompose(g, eps, delta, mode_from(mode));
  rr.exit_code = dec.events.empty() ? 0 : 2;
  Json params = parameters_json(eps, &delta);
  params["mode"] = mode;
  rr.report = make_report("decompose", std::move(params),
                          decomposition_json(dec, g.edge_count()));
  return rr;
}

inline RunResult run_pack(const BipartiteGraph& g,
                          const std::vector<packing::RootedTree>& trees,
                          const Rational& eps, const Rational& delta,
                          const std::string& mode) {
  RunResult rr;
  auto res = packing::pack_trees(g, trees, eps, delta, mode_from(mode));
  rr.exit_code = res.status == "packed" ? 0 : 2;
  Json params = parameters_json(eps, &delta);
  params["mode"] = mode;
  rr.report =
      make_report("pack-trees", std::move(params), pack_json(res, trees));
  return rr;
}

inline RunResult run_removal(const TripartiteGraph& g, const Rational& eps) {
  RunResult rr;
  const Rational d = 2 * eps;
  auto [out, rep] = removal::conditional_triangle_removal(g, eps);
  Json res = removal_json(rep, g.XY.edge_count());
  res["output_edges"] = out.edge_count();
  rr.report =
      make_report("removal", parameters_json(eps, nullptr, &d), std::move(res));
  return rr;
}

struct GenSpec {
  std::string model;
  std::size_t m = 8;          // part size (random, planted-regular, low-c5)
  std::size_t nB = 0;         // random: B side, 0 = same as m
  std::size_t block = 4;      // two-blocks
  std::size_t count = 3;      // forest
  std::size_t size = 8;       // forest: max vertices per tree
  std::size_t max_level = 0;  // forest: level cap, 0 = none
  Rational p = Rational(1, 2);
  Rational epsilon = Rational(1, 2);
  Rational delta = Rational(1, 4);
};

inline RunResult run_gen(const GenSpec& s, std::uint64_t seed) {
  RunResult rr;
  SplitMix64 rng(seed);
  std::ostringstream os;
  Json params;
  params["model"] = s.model;
  if (s.model == "random") {
    const std::size_t nB = s.nB ? s.nB : s.m;
    params["nA"] = s.m;
    params["nB"] = nB;
    params["p"] = rat_json(s.p);
    write_bipartite(os, gen_random(s.m, nB, s.p, rng));
  } else if (s.model == "planted-regular") {
    params["m"] = s.m;
    params["epsilon"] = rat_json(s.epsilon);
    params["delta"] = rat_json(s.delta);
    write_bipartite(os, gen_planted_regular(s.m, s.epsilon, s.delta, rng));
  } else if (s.model == "two-blocks") {
    params["block"] = s.block;
    write_bipartite(os, gen_two_blocks(s.block));
  } else if (s.model == "low-c5") {
    params["n"] = s.m;
    write_tripartite(os, gen_low_c5(s.m, rng));
  } else if (s.model == "forest") {
    params["count"] = s.count;
    params["size"] = s.size;
    params["max_level"] = s.max_level;
    write_forest(os, gen_forest(s.count, s.size, s.max_level, rng));
  } else {
    throw Error("gen-unsat", "unknown model '" + s.model + "'");
  }
  rr.file_body = os.str();
  Json res;
  res["bytes"] = rr.file_body.size();
  rr.report = make_report("gen", std::move(params), std::move(res), seed);
  return rr;
}

}  // namespace edgereg::io
