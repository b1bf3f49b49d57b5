#include <doctest.h>

#include "jigsaw/core.hpp"
#include "jigsaw/rng.hpp"
#include "oracles.hpp"

using namespace jigsaw;

TEST_CASE("neighbor_position examples") {
  const GridGeometry g{3, 3};
  CHECK(neighbor_position(0, Relation::Right, g) == 1);
  CHECK_FALSE(neighbor_position(2, Relation::Right, g).has_value());
  CHECK(neighbor_position(4, Relation::Up, g) == 1);
  CHECK(neighbor_position(4, Relation::Down, g) == 7);
  CHECK(neighbor_position(3, Relation::Left, g) == std::nullopt);
  CHECK_THROWS_AS(neighbor_position(9, Relation::Right, g), DomainError);
  CHECK_THROWS_AS(neighbor_position(-1, Relation::Right, g), DomainError);
}

TEST_CASE("neighbor_position agrees with grid arithmetic and inverts") {
  for (GridGeometry g : {GridGeometry{1, 1}, GridGeometry{1, 4}, GridGeometry{3, 3}, GridGeometry{7, 10}}) {
    for (int l = 0; l < g.size(); ++l)
      for (Relation r : kAllRelations) {
        const auto nb = neighbor_position(l, r, g);
        CHECK(nb.value_or(-1) == oracle::step(l, r, g.rows, g.cols));
        if (nb) CHECK(neighbor_position(*nb, inverse(r), g) == l);
      }
  }
}

TEST_CASE("relations") {
  for (Relation r : kAllRelations) CHECK(inverse(inverse(r)) == r);
  CHECK(inverse(Relation::Right) == Relation::Left);
  CHECK(inverse(Relation::Up) == Relation::Down);
  CHECK(std::string(to_string(Relation::Down)) == "down");
}

TEST_CASE("Permutation validates and inverts") {
  CHECK_THROWS_AS(Permutation({0, 0}), DomainError);
  CHECK_THROWS_AS(Permutation({0, 2}), DomainError);
  const Permutation p({2, 0, 1});
  const auto inv = p.inverse();
  for (int k = 0; k < 3; ++k) CHECK(inv[p[k]] == k);
  CHECK(Permutation::identity(3).mapping() == std::vector<int>{0, 1, 2});
}

TEST_CASE("Image crop, paste and rotation") {
  Image img(2, 3);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) img.at(y, x, 0) = static_cast<std::uint8_t>(10 * y + x);
  const Image rot = img.rotated_cw();
  CHECK(rot.height() == 3);
  CHECK(rot.width() == 2);
  CHECK(rot.at(0, 1, 0) == 0);   // top-left moves to top-right
  CHECK(rot.at(0, 0, 0) == 10);  // bottom-left moves to top-left
  CHECK(rot.rotated_cw().rotated_cw().rotated_cw() == img);
  Image c = img.crop(1, 1, 1, 2);
  CHECK(c.at(0, 0, 0) == 11);
  Image canvas(2, 3);
  canvas.paste(c, 1, 1);
  CHECK(canvas.at(1, 2, 0) == 12);
  CHECK_THROWS(img.crop(1, 1, 2, 2));
}

TEST_CASE("Rng is reproducible and bounded") {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  for (int k = 0; k < 1000; ++k) {
    CHECK(r.uniform_below(7) < 7u);
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  auto p = Rng(3).permutation(10);
  std::sort(p.begin(), p.end());
  for (int k = 0; k < 10; ++k) CHECK(p[k] == k);
}
