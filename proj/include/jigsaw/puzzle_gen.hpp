#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jigsaw/core.hpp"

namespace jigsaw {

struct PuzzleInstance {
  std::vector<Tile> tiles;  // shuffled order
  GridGeometry geometry;
  Permutation ground_truth;  // ground_truth[k] = true position of tiles[k]
  double beta = 0.0;
  int erosion_px = 0;
  int tile_side = 0;  // side before erosion
  std::uint64_t seed = 0;
  std::string source_image;
};

/// Largest square-tile crop of `image` for the grid: side = min(H/rows, W/cols).
int tile_side_for(const Image& image, const GridGeometry& g);

/// Cuts the image into rows*cols square tiles in row-major order. The
/// bottom/right remainder is cropped first; throws InvalidGeometry when the
/// grid cannot produce square tiles of side >= 1.
std::vector<Tile> slice_image(const Image& image, const GridGeometry& g);

/// Pixels removed from each side for a given erosion fraction.
int erosion_pixels(double beta, int tile_side);

/// Removes floor(beta*S/2) pixels from every side of every tile.
std::vector<Tile> erode_tiles(const std::vector<Tile>& tiles, double beta);

PuzzleInstance shuffle_tiles(std::vector<Tile> tiles, const GridGeometry& g, std::uint64_t seed);

/// Pastes tiles[k] at cell perm[k] of a (rows*cell)x(cols*cell) canvas, where
/// cell = tile side + 2 * erosion_px; gutters take `gap_fill`.
Image render(const std::vector<Tile>& tiles, const Permutation& perm, const GridGeometry& g,
             std::array<std::uint8_t, 3> gap_fill = {0, 0, 0});

/// Convenience: slice -> erode -> shuffle.
PuzzleInstance make_puzzle(const Image& image, const GridGeometry& g, double beta,
                           std::uint64_t seed, std::string source_image = {});

/// Bundle directory: tiles/####.png + manifest.json.
void save_bundle(const PuzzleInstance& p, const std::filesystem::path& dir);
PuzzleInstance load_bundle(const std::filesystem::path& dir);

}  // namespace jigsaw
