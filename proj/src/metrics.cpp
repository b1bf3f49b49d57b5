#include "jigsaw/metrics.hpp"

#include <algorithm>

namespace jigsaw {
namespace {

void check_lengths(const Permutation& p, const Permutation& gt) {
  if (p.size() != gt.size()) throw DomainError("permutations differ in length");
}

}  // namespace

double direct_accuracy(const Permutation& p, const Permutation& gt) {
  check_lengths(p, gt);
  if (p.size() == 0) return 1.0;
  int hits = 0;
  for (int i = 0; i < p.size(); ++i) hits += p[i] == gt[i];
  return static_cast<double>(hits) / p.size();
}

double neighbor_accuracy(const Permutation& p, const Permutation& gt, const GridGeometry& g,
                         bool directed) {
  check_lengths(p, gt);
  if (gt.size() != g.size()) throw DomainError("permutation length does not match grid");
  const std::vector<int> truth_at = gt.inverse();
  int total = 0;
  int kept = 0;
  for (int pos = 0; pos < g.size(); ++pos) {
    for (Relation r : kAllRelations) {
      if (!directed && (r == Relation::Left || r == Relation::Up)) continue;
      const auto nb = neighbor_position(pos, r, g);
      if (!nb) continue;
      const int a = truth_at[pos];
      const int b = truth_at[*nb];
      ++total;
      const auto placed = neighbor_position(p[a], r, g);
      bool ok = placed && *placed == p[b];
      if (!ok && !directed) {
        const auto back = neighbor_position(p[b], r, g);
        ok = back && *back == p[a];
      }
      kept += ok;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(kept) / total;
}

bool perfect(const Permutation& p, const Permutation& gt) {
  check_lengths(p, gt);
  return p == gt;
}

Scores score(const Permutation& p, const Permutation& gt, const GridGeometry& g) {
  return {direct_accuracy(p, gt), neighbor_accuracy(p, gt, g), perfect(p, gt)};
}

double perfect_ratio(std::span<const bool> outcomes) {
  if (outcomes.empty()) return 0.0;
  return static_cast<double>(std::count(outcomes.begin(), outcomes.end(), true)) / outcomes.size();
}

}  // namespace jigsaw
