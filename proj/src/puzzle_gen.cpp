#include "jigsaw/puzzle_gen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "jigsaw/image_io.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

int tile_side_for(const Image& image, const GridGeometry& g) {
  if (g.rows <= 0 || g.cols <= 0) throw InvalidGeometry("grid must have positive rows and cols");
  return std::min(image.height() / g.rows, image.width() / g.cols);
}

std::vector<Tile> slice_image(const Image& image, const GridGeometry& g) {
  if (g.rows <= 0 || g.cols <= 0) throw InvalidGeometry("grid must have positive rows and cols");
  const int th = image.height() / g.rows;
  const int tw = image.width() / g.cols;
  if (th != tw || th < 1)
    throw InvalidGeometry("tiles would be " + std::to_string(th) + "x" + std::to_string(tw) +
                          " for a " + std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                          " grid on a " + std::to_string(image.height()) + "x" +
                          std::to_string(image.width()) + " image");
  std::vector<Tile> tiles;
  tiles.reserve(g.size());
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      tiles.push_back(Tile{image.crop(r * th, c * tw, th, tw), r * g.cols + c, 0.0, 0});
  return tiles;
}

int erosion_pixels(double beta, int tile_side) {
  if (!(beta >= 0.0 && beta < 0.5)) throw DomainError("beta must lie in [0, 0.5)");
  // The epsilon absorbs representation error, e.g. 0.1 * 20 / 2.
  return static_cast<int>(std::floor(beta * tile_side / 2.0 + 1e-9));
}

std::vector<Tile> erode_tiles(const std::vector<Tile>& tiles, double beta) {
  std::vector<Tile> out;
  out.reserve(tiles.size());
  for (const Tile& t : tiles) {
    const int e = erosion_pixels(beta, t.side());
    if (2 * e >= t.side()) throw DomainError("erosion would consume the whole tile");
    if (beta > 0.0 && (t.erosion_beta > 0.0 || t.erosion_px > 0))
      throw DomainError("tile is already eroded");
    if (e == 0) {
      Tile same = t;
      if (beta > 0.0) same.erosion_beta = beta;
      out.push_back(std::move(same));
      continue;
    }
    out.push_back(Tile{t.pixels.crop(e, e, t.side() - 2 * e, t.side() - 2 * e), t.original_index,
                       beta, e});
  }
  return out;
}

PuzzleInstance shuffle_tiles(std::vector<Tile> tiles, const GridGeometry& g, std::uint64_t seed) {
  if (tiles.empty()) throw DomainError("cannot shuffle an empty tile list");
  if (static_cast<int>(tiles.size()) != g.size())
    throw DomainError("tile count does not match grid size");
  Rng rng(seed);
  const std::vector<int> order = rng.permutation(static_cast<int>(tiles.size()));

  PuzzleInstance p;
  p.geometry = g;
  p.seed = seed;
  p.beta = tiles.front().erosion_beta;
  p.erosion_px = tiles.front().erosion_px;
  p.tile_side = tiles.front().side() + 2 * p.erosion_px;
  std::vector<int> truth(tiles.size());
  p.tiles.reserve(tiles.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    Tile& t = tiles[order[k]];
    truth[k] = t.original_index;
    p.tiles.push_back(std::move(t));
  }
  p.ground_truth = Permutation(std::move(truth));
  return p;
}

Image render(const std::vector<Tile>& tiles, const Permutation& perm, const GridGeometry& g,
             std::array<std::uint8_t, 3> gap_fill) {
  if (tiles.empty()) return {};
  if (perm.size() != static_cast<int>(tiles.size()) || perm.size() != g.size())
    throw DomainError("render: permutation, tiles and grid disagree in size");
  const int e = tiles.front().erosion_px;
  const int cell = tiles.front().side() + 2 * e;
  Image canvas(g.rows * cell, g.cols * cell, gap_fill);
  for (int k = 0; k < perm.size(); ++k) {
    const int pos = perm[k];
    canvas.paste(tiles[k].pixels, (pos / g.cols) * cell + e, (pos % g.cols) * cell + e);
  }
  return canvas;
}

PuzzleInstance make_puzzle(const Image& image, const GridGeometry& g, double beta,
                           std::uint64_t seed, std::string source_image) {
  const int side = tile_side_for(image, g);
  if (side < 1) throw InvalidGeometry("image too small for grid");
  const Image cropped = image.crop(0, 0, side * g.rows, side * g.cols);
  auto tiles = erode_tiles(slice_image(cropped, g), beta);
  PuzzleInstance p = shuffle_tiles(std::move(tiles), g, seed);
  p.beta = beta;
  p.tile_side = side;
  p.source_image = std::move(source_image);
  return p;
}

namespace {

std::string tile_filename(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu.png", k);
  return buf;
}

}  // namespace

void save_bundle(const PuzzleInstance& p, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "tiles");
  for (std::size_t k = 0; k < p.tiles.size(); ++k)
    write_png(dir / "tiles" / tile_filename(k), p.tiles[k].pixels);
  nlohmann::json m;
  m["rows"] = p.geometry.rows;
  m["cols"] = p.geometry.cols;
  m["tile_side"] = p.tile_side;
  m["beta"] = p.beta;
  m["erosion_pixels_per_side"] = p.erosion_px;
  m["seed"] = p.seed;
  m["ground_truth"] = p.ground_truth.mapping();
  m["source_image"] = p.source_image;
  m["prng"] = Rng::kName;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
  if (!out) throw ImageIoError((dir / "manifest.json").string() + ": write failed");
}

PuzzleInstance load_bundle(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ImageIoError((dir / "manifest.json").string() + ": cannot open");
  const nlohmann::json m = nlohmann::json::parse(in);

  PuzzleInstance p;
  p.geometry = {m.at("rows").get<int>(), m.at("cols").get<int>()};
  p.tile_side = m.at("tile_side").get<int>();
  p.beta = m.at("beta").get<double>();
  p.erosion_px = m.at("erosion_pixels_per_side").get<int>();
  p.seed = m.at("seed").get<std::uint64_t>();
  p.source_image = m.value("source_image", std::string{});
  const auto truth = m.at("ground_truth").get<std::vector<int>>();
  if (static_cast<int>(truth.size()) != p.geometry.size())
    throw DomainError("manifest ground_truth length does not match grid");
  p.ground_truth = Permutation(truth);
  p.tiles.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    Tile t{read_image(dir / "tiles" / tile_filename(k)), truth[k], p.beta, p.erosion_px};
    if (t.pixels.height() != t.pixels.width() || t.side() + 2 * p.erosion_px != p.tile_side)
      throw DomainError("tile " + std::to_string(k) + " has unexpected dimensions");
    p.tiles.push_back(std::move(t));
  }
  return p;
}

}  // namespace jigsaw
