#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jigsaw/border_repair.hpp"
#include "jigsaw/compat_mgc.hpp"
#include "jigsaw/core.hpp"
#include "jigsaw/rl_solver.hpp"

namespace jigsaw {

/// A directory of images cut either into a fixed grid or into tiles of a
/// fixed side (grid derived per image).
struct DatasetSpec {
  std::string name;
  std::filesystem::path dir;
  std::optional<GridGeometry> grid;
  int tile_side = 0;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<double> betas{0.0};
  std::vector<RepairMethod> methods{RepairMethod::none()};
  int k = kDefaultK;
  SolverConfig solver;
  ColorSpace color = ColorSpace::Lab;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty: nothing written
  int workers = 0;                   // 0: hardware concurrency
  bool write_recon = true;

  /// Throws DomainError on betas outside [0, 0.5) or an empty method list.
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// One decoded image ready to be cut. Images inside a subdirectory of the
/// dataset are grouped under "<dataset>/<subdir>".
struct PuzzleSource {
  std::string group;
  std::string image_id;
  Image image;
  GridGeometry grid;
  std::uint64_t seed = 0;
};

struct IngestResult {
  std::vector<PuzzleSource> sources;
  std::vector<std::string> warnings;
};

/// Lexicographic by relative path. Undecodable or too-small files are
/// skipped with a warning.
IngestResult ingest(const DatasetSpec& dataset, std::uint64_t seed = 0);

struct ResultRow {
  std::string dataset;
  std::string image_id;
  double beta = 0.0;
  std::string method;
  double direct = 0.0;
  double neighbor = 0.0;
  bool perfect = false;
  int iterations = 0;
  double wall_time = 0.0;  // seconds
  bool failed = false;
  std::string error;
};

struct PuzzleOutcome {
  ResultRow row;
  Image reconstruction;
};

/// generate -> erode -> repair -> compatibility -> solve -> score.
PuzzleOutcome run_puzzle(const PuzzleSource& src, double beta, const RepairMethod& method,
                         const ExperimentConfig& config);

struct RunResult {
  std::vector<ResultRow> rows;  // successful rows, job order
  std::vector<ResultRow> failures;
  std::vector<std::string> log;
};

/// Runs every (image, beta, method) job on a bounded worker pool. External
/// repairs are serialized through one client. When output_dir is set,
/// writes results.csv, results.json, summary.txt, run.log and recon/.
RunResult run(const ExperimentConfig& config,
              const std::function<void(const ResultRow&)>& progress = {});

struct SummaryRow {
  std::string group;  // "mean" for the all-puzzle row
  double beta = 0.0;
  std::string method;
  double direct = 0.0;
  double neighbor = 0.0;
  double perfect = 0.0;
  int n = 0;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::string text;
  nlohmann::json json;
};

/// Means per (group, beta, method), followed by a "mean" row per
/// (beta, method) over all puzzles.
Summary summarize(const std::vector<ResultRow>& rows);

std::string results_csv(const std::vector<ResultRow>& rows);
nlohmann::json results_json(const std::vector<ResultRow>& rows);

}  // namespace jigsaw
