#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "jigsaw/image_io.hpp"
#include "jigsaw/puzzle_gen.hpp"
#include "jigsaw/synth.hpp"
#include "test_util.hpp"

using namespace jigsaw;
namespace fs = std::filesystem;

using testutil::noise_image;
using testutil::scratch;

TEST_CASE("slice_image geometry") {
  auto t = slice_image(noise_image(216, 216, 1), {3, 3});
  REQUIRE(t.size() == 9);
  for (int k = 0; k < 9; ++k) {
    CHECK(t[k].side() == 72);
    CHECK(t[k].pixels.height() == 72);
    CHECK(t[k].original_index == k);
    CHECK(t[k].erosion_beta == 0.0);
  }
  const Image one = noise_image(72, 72, 2);
  auto single = slice_image(one, {1, 1});
  REQUIRE(single.size() == 1);
  CHECK(single[0].pixels == one);

  auto six = slice_image(noise_image(300, 450, 3), {2, 3});
  REQUIRE(six.size() == 6);
  for (const auto& tile : six) CHECK(tile.side() == 150);

  CHECK_THROWS_AS(slice_image(noise_image(100, 300, 4), {2, 2}), InvalidGeometry);
  CHECK_THROWS_AS(slice_image(noise_image(10, 10, 4), {0, 2}), InvalidGeometry);
}

TEST_CASE("slice keeps pixel content in row-major order") {
  const Image img = noise_image(60, 90, 5);
  auto t = slice_image(img, {2, 3});
  CHECK(t[4].pixels == img.crop(30, 30, 30, 30));
  CHECK(t[2].pixels == img.crop(0, 60, 30, 30));
}

TEST_CASE("erosion amounts") {
  CHECK(erosion_pixels(0.0, 72) == 0);
  CHECK(erosion_pixels(0.14, 72) == 5);
  CHECK(erosion_pixels(0.07, 72) == 2);
  CHECK(erosion_pixels(0.03, 72) == 1);
  CHECK(erosion_pixels(0.10, 72) == 3);
  CHECK(erosion_pixels(0.1, 20) == 1);
  CHECK_THROWS_AS(erosion_pixels(0.5, 72), DomainError);
  CHECK_THROWS_AS(erosion_pixels(-0.01, 72), DomainError);

  auto tiles = slice_image(noise_image(216, 216, 6), {3, 3});
  auto same = erode_tiles(tiles, 0.0);
  for (int k = 0; k < 9; ++k) CHECK(same[k].pixels == tiles[k].pixels);

  auto e5 = erode_tiles(tiles, 0.14);
  for (int k = 0; k < 9; ++k) {
    CHECK(e5[k].side() == 62);
    CHECK(e5[k].erosion_px == 5);
    CHECK(e5[k].erosion_beta == doctest::Approx(0.14));
    CHECK(e5[k].pixels == tiles[k].pixels.crop(5, 5, 62, 62));
  }
  CHECK(erode_tiles(tiles, 0.07)[0].side() == 68);
  CHECK_THROWS_AS(erode_tiles(e5, 0.07), DomainError);
}

TEST_CASE("shuffle is deterministic and a permutation") {
  auto tiles = slice_image(noise_image(90, 90, 7), {3, 3});
  auto a = shuffle_tiles(tiles, {3, 3}, 7);
  auto b = shuffle_tiles(tiles, {3, 3}, 7);
  CHECK(a.ground_truth == b.ground_truth);
  for (int k = 0; k < 9; ++k) {
    CHECK(a.tiles[k].original_index == a.ground_truth[k]);
    CHECK(a.tiles[k].pixels == tiles[a.ground_truth[k]].pixels);
  }
  auto single = shuffle_tiles(slice_image(noise_image(8, 8, 1), {1, 1}), {1, 1}, 3);
  CHECK(single.ground_truth.mapping() == std::vector<int>{0});
  CHECK_THROWS_AS(shuffle_tiles(tiles, {2, 2}, 1), DomainError);
}

TEST_CASE("shuffle is uniform over 10^4 seeds") {
  auto tiles = slice_image(noise_image(9, 9, 8), {3, 3});
  int count[9][9] = {};
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const auto p = shuffle_tiles(tiles, {3, 3}, static_cast<std::uint64_t>(s));
    for (int k = 0; k < 9; ++k) ++count[p.ground_truth[k]][k];
  }
  for (int piece = 0; piece < 9; ++piece)
    for (int slot = 0; slot < 9; ++slot) {
      const double f = static_cast<double>(count[piece][slot]) / draws;
      CHECK(std::abs(f - 1.0 / 9.0) <= 0.02);
    }
}

TEST_CASE("render inverts slicing and shuffling") {
  const Image img = noise_image(120, 80, 9);
  const GridGeometry g{3, 2};
  auto tiles = slice_image(img, g);
  CHECK(render(tiles, Permutation::identity(6), g) == img);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto p = shuffle_tiles(tiles, g, seed);
    CHECK(render(p.tiles, p.ground_truth, g) == img);
  }

  // Eroded: the source with a gutter of gap color around every cell.
  auto eroded = erode_tiles(tiles, 0.14);  // side 40 -> e = 2
  const Image gutters = render(eroded, Permutation::identity(6), g, {7, 8, 9});
  REQUIRE(gutters.height() == 120);
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 80; ++x) {
      const bool inside = y % 40 >= 2 && y % 40 < 38 && x % 40 >= 2 && x % 40 < 38;
      if (inside)
        CHECK(gutters.at(y, x, 1) == img.at(y, x, 1));
      else
        CHECK(gutters.at(y, x, 1) == 8);
    }
}

TEST_CASE("make_puzzle crops a non-divisible image") {
  const Image img = noise_image(220, 217, 10);
  auto p = make_puzzle(img, {3, 3}, 0.07, 5, "x.png");
  CHECK(p.tile_side == 72);
  CHECK(p.erosion_px == 2);
  CHECK(p.tiles.size() == 9);
  CHECK(p.tiles[0].side() == 68);
  CHECK(p.source_image == "x.png");
}

TEST_CASE("bundle round trip") {
  const fs::path dir = scratch("bundle");
  auto p = make_puzzle(synthesize_image(90, 120, SynthKind::Textured, 3), {3, 4}, 0.10, 11, "src.png");
  save_bundle(p, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  auto q = load_bundle(dir);
  CHECK(q.geometry == p.geometry);
  CHECK(q.ground_truth == p.ground_truth);
  CHECK(q.beta == doctest::Approx(p.beta));
  CHECK(q.erosion_px == p.erosion_px);
  CHECK(q.tile_side == p.tile_side);
  CHECK(q.seed == p.seed);
  CHECK(q.source_image == "src.png");
  REQUIRE(q.tiles.size() == p.tiles.size());
  for (std::size_t k = 0; k < p.tiles.size(); ++k) {
    CHECK(q.tiles[k].pixels == p.tiles[k].pixels);
    CHECK(q.tiles[k].original_index == p.tiles[k].original_index);
  }
  fs::remove_all(dir);
}

TEST_CASE("PNG round trip and bad input") {
  const fs::path dir = scratch("png");
  const Image img = noise_image(13, 17, 12);
  write_png(dir / "a.png", img);
  CHECK(read_image(dir / "a.png") == img);
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(read_image(dir / "junk.png"), ImageIoError);
  CHECK_THROWS_AS(read_image(dir / "missing.png"), ImageIoError);
  fs::remove_all(dir);
}
