#pragma once

#include <algorithm>
#include <iterator>
#include <random>
#include <vector>

#include "allelic/forest.h"
#include "allelic/offspring_law.h"

namespace allelic::testing {

inline auto l0() -> JointOffspringLaw {
  auto q = Rational{1, 4};
  return table_law({{0, 0, q}, {0, 1, q}, {1, 0, q}, {1, 1, q}});
}

// Random exact law with small support: critical or subcritical, both
// coordinates non-degenerate. Weights are small integers over a common total.
inline auto random_exact_law(std::mt19937_64& rng, std::size_t max_clone = 2, std::size_t max_mutant = 2)
    -> JointOffspringLaw {
  auto pick = std::uniform_int_distribution<int>{0, 4};
  for (;;) {
    auto weights = std::vector<TableEntry>{};
    auto total = 0;
    auto moment = 0;
    auto clone = false;
    auto mutant = false;
    for (auto k = std::size_t{0}; k <= max_clone; ++k) {
      for (auto l = std::size_t{0}; l <= max_mutant; ++l) {
        auto w = k + l == 0 ? 0 : pick(rng);
        if (w == 0) continue;
        weights.push_back({k, l, Rational{w}});
        total += w;
        moment += w * static_cast<int>(k + l);
        clone = clone || k > 0;
        mutant = mutant || l > 0;
      }
    }
    if (!clone || !mutant) continue;
    // Enough mass on (0, 0) to make the mean at most one.
    auto origin = std::max(moment - total, 0) + pick(rng);
    if (origin == 0 && moment > total) continue;
    if (origin > 0) weights.push_back({0, 0, Rational{origin}});
    total += origin;
    for (auto& e : weights) e.probability /= total;
    return table_law(weights);
  }
}

// One tree drawn directly as a planar genealogy, with no reference to the
// walk encoding: each individual's (c, m) is drawn from a small fixed menu
// until the tree closes. Returns the steps in plain label order by building
// labels and sorting them.
struct RawIndividual {
  Label label;
  Step xi;
  std::size_t clone_depth = 0;  // generations since the cluster founder
  Label founder;
};

inline auto random_tree_labels(std::mt19937_64& rng, std::size_t ancestor, std::size_t max_size)
    -> std::vector<RawIndividual> {
  static constexpr Step menu[] = {{0, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 1}};
  auto pick = std::uniform_int_distribution<std::size_t>{0, std::size(menu) - 1};
  auto out = std::vector<RawIndividual>{};
  auto root = Label{ancestor, 0, {}};
  auto queue = std::vector<RawIndividual>{{root, {}, 0, root}};
  for (auto head = std::size_t{0}; head < queue.size(); ++head) {
    auto current = queue[head];
    current.xi = queue.size() >= max_size ? Step{0, 0} : menu[pick(rng)];
    for (std::uint32_t s = 1; s <= current.xi.clones + current.xi.mutants; ++s) {
      auto child = RawIndividual{current.label, {}, current.clone_depth + 1, current.founder};
      child.label.lineage.push_back(s);
      if (s > current.xi.clones) {
        ++child.label.mutations;
        child.clone_depth = 0;
        child.founder = child.label;
      }
      queue.push_back(child);
    }
    out.push_back(current);
  }
  std::ranges::sort(out, [](const auto& a, const auto& b) { return a.label < b.label; });
  return out;
}

inline auto random_forest(std::mt19937_64& rng, std::size_t n_trees, std::size_t max_size)
    -> std::vector<RawIndividual> {
  auto out = std::vector<RawIndividual>{};
  for (auto a = std::size_t{1}; a <= n_trees; ++a) {
    for (auto& r : random_tree_labels(rng, a, max_size)) out.push_back(std::move(r));
  }
  return out;
}

inline auto steps_of(const std::vector<RawIndividual>& forest) -> std::vector<Step> {
  auto steps = std::vector<Step>{};
  for (const auto& r : forest) steps.push_back(r.xi);
  return steps;
}

}  // namespace allelic::testing
