// Command-line front end: verify / decompose / pack-trees / removal / gen.
// Reports are JSON on stdout (or --out); generated instances go to --out.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <edgereg/edgereg.hpp>

namespace {

using edgereg::Error;
using edgereg::core::Rational;
namespace io = edgereg::io;

Rational rat(const std::string& s) { return edgereg::core::parse_rational(s); }

void emit(const io::RunResult& rr, const std::string& out_path, bool timing,
          double elapsed_ms) {
  io::Json report = rr.report;
  if (timing) {
    report["timing_ms"] = elapsed_ms;
    std::cerr << "elapsed: " << elapsed_ms << " ms\n";
  }
  const std::string body = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("io-error", out_path + ": cannot open");
    f << body;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-disjoint regular decompositions"};
  app.require_subcommand(1);

  std::string input, out, trees_path, mode = "algorithmic", model;
  std::string eps_s = "1/2", delta_s = "1/4", p_s = "1/2";
  std::uint64_t seed = 0;
  bool timing = false;
  io::GenSpec gen;

  auto add_common = [&](CLI::App* c, bool needs_delta) {
    c->add_option("-i,--input", input, "instance file")->required();
    c->add_option("-e,--epsilon", eps_s, "epsilon, a rational like 1/5");
    if (needs_delta) {
      c->add_option("-d,--delta", delta_s, "density floor");
      c->add_option("-m,--mode", mode, "algorithmic | functional");
    }
    c->add_option("-o,--out", out, "write the report here instead of stdout");
    c->add_flag("--timing", timing, "record elapsed time in the report");
  };

  auto* verify = app.add_subcommand("verify", "check a pair for regularity");
  add_common(verify, false);

  auto* decompose =
      app.add_subcommand("decompose", "split a graph into regular bundles");
  add_common(decompose, true);

  auto* pack = app.add_subcommand("pack-trees",
                                  "embed a forest on disjoint edge sets");
  add_common(pack, true);
  pack->add_option("-t,--trees", trees_path, "forest file")->required();

  auto* removal =
      app.add_subcommand("removal", "make a tripartite graph triangle-free");
  add_common(removal, false);

  auto* g = app.add_subcommand("gen", "write a seeded instance file");
  g->add_option("--model", model,
                "random | planted-regular | two-blocks | low-c5 | forest")
      ->required();
  g->add_option("-s,--seed", seed, "rng seed");
  g->add_option("-m", gen.m, "part size (random, planted-regular, low-c5)");
  g->add_option("--nB", gen.nB, "random: B-side size, default m");
  g->add_option("-p", p_s, "random: edge density");
  g->add_option("-e,--epsilon", eps_s, "planted-regular: epsilon");
  g->add_option("-d,--delta", delta_s, "planted-regular: delta");
  g->add_option("--block", gen.block, "two-blocks: block size");
  g->add_option("--count", gen.count, "forest: number of trees");
  g->add_option("--size", gen.size, "forest: max vertices per tree");
  g->add_option("--max-level", gen.max_level, "forest: level cap, 0 = none");
  g->add_option("-o,--out", out, "instance file to write")->required();
  g->add_flag("--timing", timing, "record elapsed time in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    io::RunResult rr;
    std::string report_out = out;
    if (verify->parsed()) {
      rr = io::run_verify(io::load_bipartite(input), rat(eps_s));
    } else if (decompose->parsed()) {
      rr = io::run_decompose(io::load_bipartite(input), rat(eps_s),
                             rat(delta_s), mode);
    } else if (pack->parsed()) {
      rr = io::run_pack(io::load_bipartite(input), io::load_forest(trees_path),
                        rat(eps_s), rat(delta_s), mode);
    } else if (removal->parsed()) {
      rr = io::run_removal(io::load_tripartite(input), rat(eps_s));
    } else {
      gen.model = model;
      gen.p = rat(p_s);
      gen.epsilon = rat(eps_s);
      gen.delta = rat(delta_s);
      rr = io::run_gen(gen, seed);
      std::ofstream f(out);
      if (!f) throw Error("io-error", out + ": cannot open");
      f << rr.file_body;
      report_out.clear();  // the instance takes --out; the report gets stdout
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    emit(rr, report_out, timing, ms);
    return rr.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
