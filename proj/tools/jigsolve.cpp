// jigsolve: command line front end for the eroded-border jigsaw solver.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "jigsaw/bench.hpp"
#include "jigsaw/border_repair.hpp"
#include "jigsaw/compat_mgc.hpp"
#include "jigsaw/image_io.hpp"
#include "jigsaw/metrics.hpp"
#include "jigsaw/puzzle_gen.hpp"
#include "jigsaw/rl_solver.hpp"
#include "jigsaw/synth.hpp"

namespace fs = std::filesystem;
using namespace jigsaw;

namespace {

ColorSpace parse_color(const std::string& s) {
  if (s == "lab") return ColorSpace::Lab;
  if (s == "rgb") return ColorSpace::Rgb;
  throw DomainError("unknown color space '" + s + "'");
}

std::array<std::uint8_t, 3> parse_rgb(const std::string& s) {
  std::array<std::uint8_t, 3> out{};
  std::istringstream in(s);
  std::string part;
  for (int c = 0; c < 3; ++c) {
    if (!std::getline(in, part, ',')) throw DomainError("gap color must be R,G,B");
    out[c] = static_cast<std::uint8_t>(std::stoi(part));
  }
  return out;
}

void add_solver_flags(CLI::App* cmd, SolverConfig& s) {
  cmd->add_option("--solver-seed", s.seed, "Seed for the initial jitter");
  cmd->add_option("--max-iters", s.max_iters, "Relaxation labeling iteration budget");
  cmd->add_option("--sk-sweeps", s.sk_sweeps, "Sinkhorn sweeps per iteration (0 disables)");
  cmd->add_option("--sk-tol", s.sk_tol, "Sinkhorn tolerance");
  cmd->add_option("--stop-tol", s.stop_tol, "Stop once every piece is this close to certain");
  cmd->add_option("--init-jitter", s.init_jitter, "Multiplicative jitter around the barycenter");
  cmd->add_flag("--symmetrize,!--no-symmetrize", s.symmetrize, "Symmetrize the compatibility tensor (default on)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Square jigsaw solver for puzzles with eroded piece borders"};
  app.require_subcommand(1);

  // synth
  struct {
    std::string out;
    int count = 20;
    int height = 216;
    int width = 216;
    std::string kind = "textured";
    std::uint64_t seed = 0;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a procedural image dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--count", synth.count, "Number of images");
  synth_cmd->add_option("--height", synth.height, "Image height");
  synth_cmd->add_option("--width", synth.width, "Image width");
  synth_cmd->add_option("--kind", synth.kind, "smooth or textured");
  synth_cmd->add_option("--seed", synth.seed, "Dataset seed");

  // gen
  struct {
    std::string image;
    std::string out;
    int rows = 0, cols = 0, tile_side = 0;
    double beta = 0.0;
    std::uint64_t seed = 0;
  } gen;
  auto* gen_cmd = app.add_subcommand("gen", "Cut, erode and shuffle an image into a puzzle bundle");
  gen_cmd->add_option("--image", gen.image, "Source image (PNG or JPEG)")->required();
  gen_cmd->add_option("--out", gen.out, "Bundle directory")->required();
  gen_cmd->add_option("--rows", gen.rows, "Grid rows");
  gen_cmd->add_option("--cols", gen.cols, "Grid columns");
  gen_cmd->add_option("--tile-side", gen.tile_side, "Tile side; derives the grid");
  gen_cmd->add_option("--beta", gen.beta, "Erosion fraction in [0, 0.5)");
  gen_cmd->add_option("--seed", gen.seed, "Shuffle seed");

  // solve
  struct {
    std::string bundle, method = "none", color = "lab", report, recon, cache, adapter;
    int k = kDefaultK;
    SolverConfig solver;
  } sol;
  auto* solve_cmd = app.add_subcommand("solve", "Repair, score and solve a puzzle bundle");
  solve_cmd->add_option("--bundle", sol.bundle, "Bundle directory")->required();
  solve_cmd->add_option("--method", sol.method, "none, replicate, mirror, linear or external");
  solve_cmd->add_option("--adapter", sol.adapter, "External adapter command or URL");
  solve_cmd->add_option("-k,--k", sol.k, "K of the K-min normalization");
  solve_cmd->add_option("--color", sol.color, "lab or rgb");
  solve_cmd->add_option("--report", sol.report, "Write the solve report JSON here");
  solve_cmd->add_option("--recon", sol.recon, "Write the reconstruction PNG here");
  solve_cmd->add_option("--cache", sol.cache, "Dissimilarity cache file");
  add_solver_flags(solve_cmd, sol.solver);

  // render
  struct {
    std::string bundle, report, out, gap = "0,0,0";
  } ren;
  auto* render_cmd = app.add_subcommand("render", "Paste bundle tiles at solved or true positions");
  render_cmd->add_option("--bundle", ren.bundle, "Bundle directory")->required();
  render_cmd->add_option("--report", ren.report, "Solve report; ground truth when omitted");
  render_cmd->add_option("--out", ren.out, "Output PNG")->required();
  render_cmd->add_option("--gap", ren.gap, "Gutter color R,G,B");

  // bench
  struct {
    std::string config, output_dir, color;
    std::vector<double> betas;
    std::vector<std::string> methods;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers, k;
    bool no_recon = false;
  } bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment sweep");
  bench_cmd->add_option("--config", bench.config, "Experiment config JSON")->required();
  bench_cmd->add_option("--output-dir", bench.output_dir, "Overrides output_dir");
  bench_cmd->add_option("--betas", bench.betas, "Overrides betas");
  bench_cmd->add_option("--methods", bench.methods, "Overrides methods");
  bench_cmd->add_option("--seed", bench.seed, "Overrides seed");
  bench_cmd->add_option("--workers", bench.workers, "Overrides workers");
  bench_cmd->add_option("-k,--k", bench.k, "Overrides K");
  bench_cmd->add_option("--color", bench.color, "Overrides color_space");
  bench_cmd->add_flag("--no-recon", bench.no_recon, "Skip reconstruction images");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      auto paths = write_synthetic_dataset(synth.out, synth.count, synth.height, synth.width,
                                           parse_synth_kind(synth.kind), synth.seed);
      std::cout << "wrote " << paths.size() << " images to " << synth.out << '\n';
      return 0;
    }

    if (*gen_cmd) {
      const Image img = read_image(gen.image);
      GridGeometry g;
      if (gen.tile_side > 0)
        g = {img.height() / gen.tile_side, img.width() / gen.tile_side};
      else if (gen.rows > 0 && gen.cols > 0)
        g = {gen.rows, gen.cols};
      else
        throw DomainError("gen needs --rows/--cols or --tile-side");
      const PuzzleInstance p = make_puzzle(img, g, gen.beta, gen.seed, gen.image);
      save_bundle(p, gen.out);
      std::cout << "wrote " << p.tiles.size() << " tiles (" << g.rows << "x" << g.cols
                << ", side " << p.tile_side << ", erosion " << p.erosion_px << " px/side) to "
                << gen.out << '\n';
      return 0;
    }

    if (*solve_cmd) {
      const PuzzleInstance p = load_bundle(sol.bundle);
      RepairMethod method = parse_method(sol.method);
      if (method.kind == RepairMethod::Kind::External && !sol.adapter.empty())
        method.adapter = adapter_from_string(sol.adapter);
      const PuzzleInstance repaired = repair_instance(p, method);
      const MgcOptions opts{parse_color(sol.color), repaired.erosion_px > 0};

      SolveReport report;
      if (repaired.tiles.size() < 2) {
        report.final_assignment = Permutation::identity(static_cast<int>(repaired.tiles.size()));
      } else {
        std::optional<DissimilarityTable> d;
        const std::string checksum = tiles_checksum(repaired.tiles);
        if (!sol.cache.empty()) d = load_dissimilarity_cache(sol.cache, checksum, opts.color);
        if (!d) {
          d = dissimilarity_table(repaired.tiles, opts);
          if (!sol.cache.empty()) save_dissimilarity_cache(sol.cache, *d, checksum, opts.color);
        }
        report = solve(normalize(*d, sol.k), p.geometry, sol.solver);
      }
      const Scores s = score(report.final_assignment, p.ground_truth, p.geometry);
      nlohmann::json j = to_json(report);
      j["scores"] = {{"direct", s.direct}, {"neighbor", s.neighbor}, {"perfect", s.perfect}};
      j["method"] = method_name(method);
      if (!sol.report.empty()) std::ofstream(sol.report) << j.dump(2) << '\n';
      if (!sol.recon.empty())
        write_png(sol.recon, render(repaired.tiles, report.final_assignment, p.geometry));
      std::cout << j["scores"].dump() << " iterations=" << report.iterations << '\n';
      return 0;
    }

    if (*render_cmd) {
      const PuzzleInstance p = load_bundle(ren.bundle);
      Permutation perm = p.ground_truth;
      if (!ren.report.empty()) {
        std::ifstream in(ren.report);
        if (!in) throw std::runtime_error(ren.report + ": cannot open");
        perm = Permutation(nlohmann::json::parse(in).at("final_assignment").get<std::vector<int>>());
      }
      write_png(ren.out, render(p.tiles, perm, p.geometry, parse_rgb(ren.gap)));
      return 0;
    }

    if (*bench_cmd) {
      std::ifstream in(bench.config);
      if (!in) throw std::runtime_error(bench.config + ": cannot open");
      nlohmann::json j = nlohmann::json::parse(in);
      if (!bench.output_dir.empty()) j["output_dir"] = bench.output_dir;
      if (!bench.betas.empty()) j["betas"] = bench.betas;
      if (!bench.methods.empty()) j["methods"] = bench.methods;
      if (bench.seed) j["seed"] = *bench.seed;
      if (bench.workers) j["workers"] = *bench.workers;
      if (bench.k) j["K"] = *bench.k;
      if (!bench.color.empty()) j["color_space"] = bench.color;
      if (bench.no_recon) j["write_recon"] = false;
      ExperimentConfig config = experiment_config_from_json(j);
      if (config.output_dir.empty()) config.output_dir = "bench_out";

      const RunResult result = run(config, [](const ResultRow& r) {
        if (r.failed)
          std::cerr << "FAILED " << r.dataset << " " << r.image_id << ": " << r.error << '\n';
      });
      for (const auto& line : result.log)
        if (line.rfind("warning", 0) == 0) std::cerr << line << '\n';
      if (!result.rows.empty()) std::cout << summarize(result.rows).text;
      std::cout << result.rows.size() << " rows, " << result.failures.size() << " failed; output in "
                << config.output_dir.string() << '\n';
      return result.failures.empty() ? 0 : 2;
    }
  } catch (const std::exception& ex) {
    std::cerr << "jigsolve: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
