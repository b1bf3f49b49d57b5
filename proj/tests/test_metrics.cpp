#include <doctest.h>

#include "jigsaw/metrics.hpp"
#include "jigsaw/rng.hpp"
#include "oracles.hpp"

using namespace jigsaw;

TEST_CASE("direct accuracy") {
  const auto gt = Permutation::identity(9);
  CHECK(direct_accuracy(gt, gt) == 1.0);
  CHECK(direct_accuracy(Permutation({8, 7, 6, 5, 4, 3, 2, 1, 0}), gt) == doctest::Approx(1.0 / 9));
  CHECK(direct_accuracy(Permutation({1, 0, 2, 3, 4, 5, 6, 7, 8}), gt) == doctest::Approx(7.0 / 9));
  CHECK_THROWS_AS(direct_accuracy(Permutation::identity(3), gt), DomainError);
}

TEST_CASE("neighbor accuracy") {
  const GridGeometry g{3, 3};
  const auto gt = Permutation::identity(9);
  CHECK(neighbor_accuracy(gt, gt, g) == 1.0);

  // Columns 0 and 1 swapped as blocks.
  const Permutation swapped({1, 0, 2, 4, 3, 5, 7, 6, 8});
  const double directed = neighbor_accuracy(swapped, gt, g);
  CHECK(directed == doctest::Approx(oracle::neighbor_accuracy(swapped.mapping(), gt.mapping(), 3, 3)));
  CHECK(directed == doctest::Approx(0.5));
  CHECK(neighbor_accuracy(swapped, gt, g, false) == doctest::Approx(0.75));

  CHECK(neighbor_accuracy(Permutation({1, 0}), Permutation::identity(2), {1, 2}) == 0.0);
  CHECK(neighbor_accuracy(Permutation({1, 0}), Permutation::identity(2), {1, 2}, false) == 1.0);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(rng.uniform_below(4));
    const int cols = 1 + static_cast<int>(rng.uniform_below(5));
    const Permutation p(rng.permutation(rows * cols));
    const Permutation t(rng.permutation(rows * cols));
    CHECK(neighbor_accuracy(p, t, {rows, cols}) ==
          doctest::Approx(oracle::neighbor_accuracy(p.mapping(), t.mapping(), rows, cols)));
  }
}

TEST_CASE("perfect and perfect ratio") {
  const auto gt = Permutation::identity(4);
  CHECK(perfect(gt, gt));
  CHECK_FALSE(perfect(Permutation({0, 1, 3, 2}), gt));
  const bool runs[] = {true, false, true, false};
  CHECK(perfect_ratio(runs) == 0.5);
  const auto s = score(gt, gt, {2, 2});
  CHECK(s.direct == 1.0);
  CHECK(s.neighbor == 1.0);
  CHECK(s.perfect);
}
