#pragma once

#include <span>

#include "jigsaw/core.hpp"

namespace jigsaw {

struct Scores {
  double direct = 0.0;
  double neighbor = 0.0;
  bool perfect = false;
};

/// Fraction of pieces at their true position.
double direct_accuracy(const Permutation& p, const Permutation& gt);

/// Fraction of ordered adjacencies (a, b, R) of the true arrangement that
/// also hold in p's arrangement. With `directed = false` each unordered
/// adjacent pair counts once and survives in either orientation.
double neighbor_accuracy(const Permutation& p, const Permutation& gt, const GridGeometry& g,
                         bool directed = true);

bool perfect(const Permutation& p, const Permutation& gt);

Scores score(const Permutation& p, const Permutation& gt, const GridGeometry& g);

/// Share of perfectly solved puzzles.
double perfect_ratio(std::span<const bool> outcomes);

}  // namespace jigsaw
