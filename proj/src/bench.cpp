#include "jigsaw/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "jigsaw/image_io.hpp"
#include "jigsaw/metrics.hpp"
#include "jigsaw/puzzle_gen.hpp"

namespace jigsaw {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string format_beta(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", beta);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.')) ch = '_';
  return s;
}

std::mutex& external_repair_mutex() {
  static std::mutex m;
  return m;
}

CompatibilityTable single_piece_table() {
  CompatibilityTable c;
  c.n = 1;
  c.k = 1;
  for (auto& m : c.compat) m.resize(1, 1);
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  for (double b : betas)
    if (!(b >= 0.0 && b < 0.5)) throw DomainError("beta " + std::to_string(b) + " outside [0, 0.5)");
  if (methods.empty()) throw DomainError("at least one repair method is required");
  if (k < 2) throw DomainError("K must be at least 2");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  auto parse_dataset = [](const nlohmann::json& d, std::string fallback_name) {
    DatasetSpec s;
    s.dir = d.at("dir").get<std::string>();
    s.name = d.value("name", fallback_name.empty() ? s.dir.filename().string() : fallback_name);
    if (d.contains("grid"))
      s.grid = GridGeometry{d["grid"].at("rows").get<int>(), d["grid"].at("cols").get<int>()};
    else if (d.contains("rows"))
      s.grid = GridGeometry{d.at("rows").get<int>(), d.at("cols").get<int>()};
    s.tile_side = d.value("tile_side", 0);
    if (!s.grid && s.tile_side <= 0)
      throw DomainError("dataset '" + s.name + "' needs a grid or a tile_side");
    return s;
  };
  if (j.contains("datasets"))
    for (const auto& d : j["datasets"]) c.datasets.push_back(parse_dataset(d, ""));
  if (j.contains("dataset_dir")) {
    nlohmann::json d = j;
    d["dir"] = j["dataset_dir"];
    c.datasets.push_back(parse_dataset(d, j.value("dataset_name", "")));
  }
  if (j.contains("betas")) c.betas = j["betas"].get<std::vector<double>>();
  if (j.contains("methods")) {
    c.methods.clear();
    const std::string adapter = j.value("adapter", "");
    for (const auto& name : j["methods"].get<std::vector<std::string>>()) {
      RepairMethod m = parse_method(name);
      if (m.kind == RepairMethod::Kind::External && !adapter.empty())
        m.adapter = adapter_from_string(adapter);
      c.methods.push_back(std::move(m));
    }
  }
  c.k = j.value("K", j.value("k", c.k));
  if (j.contains("solver")) c.solver = solver_config_from_json(j["solver"], c.solver);
  if (j.contains("color_space")) {
    const auto cs = j["color_space"].get<std::string>();
    if (cs == "lab")
      c.color = ColorSpace::Lab;
    else if (cs == "rgb")
      c.color = ColorSpace::Rgb;
    else
      throw DomainError("unknown color space '" + cs + "'");
  }
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", std::string{});
  c.workers = j.value("workers", c.workers);
  c.write_recon = j.value("write_recon", c.write_recon);
  c.validate();
  return c;
}

IngestResult ingest(const DatasetSpec& dataset, std::uint64_t seed) {
  namespace fs = std::filesystem;
  IngestResult out;
  if (!fs::is_directory(dataset.dir)) {
    out.warnings.push_back(dataset.dir.string() + ": not a directory");
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dataset.dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
    return fs::relative(a, dataset.dir).generic_string() < fs::relative(b, dataset.dir).generic_string();
  });
  if (files.empty()) out.warnings.push_back(dataset.dir.string() + ": no images found");

  const std::uint64_t base = splitmix64(seed ^ fnv1a(dataset.name));
  std::uint64_t index = 0;
  for (const auto& file : files) {
    const fs::path rel = fs::relative(file, dataset.dir);
    PuzzleSource src;
    src.group = rel.has_parent_path() ? dataset.name + "/" + rel.parent_path().generic_string()
                                      : dataset.name;
    src.image_id = (rel.parent_path() / rel.stem()).generic_string();
    src.seed = splitmix64(base + ++index);
    try {
      src.image = read_image(file);
    } catch (const ImageIoError& ex) {
      out.warnings.push_back(std::string("skipping ") + ex.what());
      continue;
    }
    if (dataset.grid) {
      src.grid = *dataset.grid;
    } else {
      src.grid = {src.image.height() / dataset.tile_side, src.image.width() / dataset.tile_side};
    }
    if (src.grid.rows < 1 || src.grid.cols < 1 || tile_side_for(src.image, src.grid) < 4) {
      out.warnings.push_back("skipping " + file.string() + ": too small for the requested tiling");
      continue;
    }
    out.sources.push_back(std::move(src));
  }
  return out;
}

PuzzleOutcome run_puzzle(const PuzzleSource& src, double beta, const RepairMethod& method,
                         const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  PuzzleOutcome out;
  ResultRow& row = out.row;
  row.dataset = src.group;
  row.image_id = src.image_id;
  row.beta = beta;
  row.method = method_name(method);

  const PuzzleInstance puzzle = make_puzzle(src.image, src.grid, beta, src.seed, src.image_id);
  PuzzleInstance repaired;
  if (method.kind == RepairMethod::Kind::External) {
    std::lock_guard lock(external_repair_mutex());
    repaired = repair_instance(puzzle, method);
  } else {
    repaired = repair_instance(puzzle, method);
  }

  CompatibilityTable compat;
  if (repaired.tiles.size() < 2) {
    compat = single_piece_table();
  } else {
    const MgcOptions opts{config.color, repaired.erosion_px > 0};
    compat = normalize(dissimilarity_table(repaired.tiles, opts), config.k);
  }
  SolverConfig solver = config.solver;
  solver.seed = splitmix64(src.seed ^ config.solver.seed);
  const SolveReport report = solve(compat, src.grid, solver);

  const Scores s = score(report.final_assignment, puzzle.ground_truth, src.grid);
  row.direct = s.direct;
  row.neighbor = s.neighbor;
  row.perfect = s.perfect;
  row.iterations = report.iterations;
  if (config.write_recon) out.reconstruction = render(repaired.tiles, report.final_assignment, src.grid);
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunResult run(const ExperimentConfig& config, const std::function<void(const ResultRow&)>& progress) {
  namespace fs = std::filesystem;
  config.validate();
  RunResult result;

  std::vector<PuzzleSource> sources;
  for (std::size_t d = 0; d < config.datasets.size(); ++d) {
    IngestResult in = ingest(config.datasets[d], config.seed);
    for (auto& w : in.warnings) result.log.push_back("warning: " + w);
    for (auto& s : in.sources) sources.push_back(std::move(s));
  }

  struct Job {
    std::size_t source;
    double beta;
    std::size_t method;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < sources.size(); ++s)
    for (double b : config.betas)
      for (std::size_t m = 0; m < config.methods.size(); ++m) jobs.push_back({s, b, m});

  const bool write = !config.output_dir.empty();
  if (write && config.write_recon) fs::create_directories(config.output_dir / "recon");

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      const PuzzleSource& src = sources[job.source];
      const RepairMethod& method = config.methods[job.method];
      ResultRow row;
      try {
        PuzzleOutcome o = run_puzzle(src, job.beta, method, config);
        row = std::move(o.row);
        if (write && config.write_recon) {
          const std::string name = sanitize(src.group + "-" + src.image_id) + "_" +
                                   format_beta(job.beta) + "_" + row.method + ".png";
          write_png(config.output_dir / "recon" / name, o.reconstruction);
        }
      } catch (const std::exception& ex) {
        row.dataset = src.group;
        row.image_id = src.image_id;
        row.beta = job.beta;
        row.method = method_name(method);
        row.failed = true;
        row.error = ex.what();
      }
      {
        std::lock_guard lock(log_mutex);
        if (row.failed)
          result.log.push_back("failed: " + row.dataset + " " + row.image_id + " beta=" +
                               format_beta(row.beta) + " method=" + row.method + ": " + row.error);
        if (progress) progress(row);
      }
      rows[idx] = std::move(row);
    }
  };

  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (auto& row : rows) (row.failed ? result.failures : result.rows).push_back(std::move(row));

  if (write) {
    fs::create_directories(config.output_dir);
    std::ofstream(config.output_dir / "results.csv") << results_csv(result.rows);
    nlohmann::json j = results_json(result.rows);
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures)
      failures.push_back({{"dataset", f.dataset},
                          {"image_id", f.image_id},
                          {"beta", f.beta},
                          {"method", f.method},
                          {"error", f.error}});
    std::ofstream(config.output_dir / "results.json")
        << nlohmann::json{{"rows", j}, {"failures", failures}}.dump(2) << '\n';
    if (!result.rows.empty()) std::ofstream(config.output_dir / "summary.txt") << summarize(result.rows).text;
    std::ofstream log(config.output_dir / "run.log");
    for (const auto& line : result.log) log << line << '\n';
  }
  return result;
}

Summary summarize(const std::vector<ResultRow>& rows) {
  struct Acc {
    double direct = 0, neighbor = 0, perfect = 0;
    int n = 0;
    void add(const ResultRow& r) {
      direct += r.direct;
      neighbor += r.neighbor;
      perfect += r.perfect ? 1.0 : 0.0;
      ++n;
    }
  };
  // Groups keep first-appearance order; (beta, method) sorted within.
  std::vector<std::string> group_order;
  std::map<std::tuple<std::string, double, std::string>, Acc> groups;
  std::map<std::pair<double, std::string>, Acc> overall;
  for (const auto& r : rows) {
    if (std::find(group_order.begin(), group_order.end(), r.dataset) == group_order.end())
      group_order.push_back(r.dataset);
    groups[{r.dataset, r.beta, r.method}].add(r);
    overall[{r.beta, r.method}].add(r);
  }

  Summary s;
  auto emit = [&](const std::string& group, double beta, const std::string& method, const Acc& a) {
    s.rows.push_back({group, beta, method, a.direct / a.n, a.neighbor / a.n, a.perfect / a.n, a.n});
  };
  for (const auto& g : group_order)
    for (const auto& [key, acc] : groups)
      if (std::get<0>(key) == g) emit(g, std::get<1>(key), std::get<2>(key), acc);
  for (const auto& [key, acc] : overall) emit("mean", key.first, key.second, acc);

  std::ostringstream t;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %6s %-10s %8s %8s %8s %6s\n", "group", "beta", "method",
                "direct", "neighbor", "perfect", "n");
  t << line;
  s.json = nlohmann::json::array();
  for (const auto& r : s.rows) {
    std::snprintf(line, sizeof line, "%-24s %6.2f %-10s %8.4f %8.4f %8.4f %6d\n", r.group.c_str(), r.beta,
                  r.method.c_str(), r.direct, r.neighbor, r.perfect, r.n);
    t << line;
    s.json.push_back({{"group", r.group},
                      {"beta", r.beta},
                      {"method", r.method},
                      {"direct", r.direct},
                      {"neighbor", r.neighbor},
                      {"perfect", r.perfect},
                      {"n", r.n}});
  }
  s.text = t.str();
  return s;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "dataset,image_id,beta,method,direct,neighbor,perfect,iterations,wall_time\n";
  auto quote = [](const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.4f,%s,%.6f,%.6f,%d,%d,%.4f\n", r.beta, r.method.c_str(), r.direct,
                  r.neighbor, r.perfect ? 1 : 0, r.iterations, r.wall_time);
    out << quote(r.dataset) << ',' << quote(r.image_id) << buf;
  }
  return out.str();
}

nlohmann::json results_json(const std::vector<ResultRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"dataset", r.dataset},
                   {"image_id", r.image_id},
                   {"beta", r.beta},
                   {"method", r.method},
                   {"direct", r.direct},
                   {"neighbor", r.neighbor},
                   {"perfect", r.perfect},
                   {"iterations", r.iterations},
                   {"wall_time", r.wall_time}});
  return out;
}

}  // namespace jigsaw
