#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <cstdint>
#include <random>
#include <vector>

#include "allelic/forest.h"
#include "allelic/offspring_law.h"

namespace allelic {

// Engine for tree `index` of a run seeded with `seed`. Every tree owns its
// substream, so results do not depend on how trees are spread over workers.
auto substream(std::uint64_t seed, std::uint64_t index) -> std::mt19937_64;

// Uniform on [0, 1) from the top 53 bits; unlike the std distributions this
// is identical on every standard library.
inline auto uniform01(std::mt19937_64& engine) -> double {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Inversion sampler over the cells of a joint law. Mass dropped by truncation
// is redistributed proportionally.
class StepSampler {
 public:
  explicit StepSampler(const JointOffspringLaw& law);

  auto operator()(std::mt19937_64& engine) const -> Step;

 private:
  std::vector<double> cumulative_;
  std::vector<Step> cells_;
};

// Running walk functionals, O(1) memory per step.
class TreeWalker {
 public:
  // Returns true when the step closes the current tree.
  auto push(Step s) -> bool;

  auto size() const -> std::size_t { return size_; }
  auto alleles() const -> std::size_t { return 1 + mutants_; }
  auto clusters_closed() const -> std::size_t { return clusters_; }
  void reset() { *this = TreeWalker{}; }

 private:
  std::int64_t total_level_ = 0;
  std::int64_t clone_level_ = 0;
  std::int64_t clone_low_ = 0;
  std::size_t size_ = 0;
  std::size_t mutants_ = 0;
  std::size_t clusters_ = 0;
};

struct TreeSample {
  std::vector<Step> steps;
  bool complete = false;
};

// One tree from its own substream, stopped after `cap` individuals.
auto sample_tree(const StepSampler& sampler, std::uint64_t seed, std::uint64_t tree_index, std::size_t cap)
    -> TreeSample;

// Trees 0, 1, ... until n_trees are complete or one exceeds the cap; in the
// latter case the partial tree is kept and the result is tagged censored.
auto sample_dfs_sequence(const JointOffspringLaw& law, std::uint64_t seed, std::size_t n_trees,
                         std::size_t max_individuals) -> DfsSequence;

struct SampledForest {
  DfsSequence sequence;                   // complete trees only, in tree-index order
  std::vector<std::size_t> tree_ids;      // substream index of each complete tree
  std::vector<std::size_t> censored_ids;  // trees dropped at the cap
};

// n_trees independent draws spread over `workers` threads. Censored trees are
// reported, never resampled.
auto sample_forest(const JointOffspringLaw& law, std::uint64_t seed, std::size_t n_trees, std::size_t cap,
                   std::size_t workers = 1) -> SampledForest;

// Calls body(begin, end, worker) on contiguous blocks of [0, count).
template <typename Body>
void parallel_blocks(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    body(std::size_t{0}, count, std::size_t{0});
    return;
  }
  auto threads = std::vector<std::thread>{};
  auto errors = std::vector<std::exception_ptr>(workers);
  for (auto w = std::size_t{0}; w < workers; ++w) {
    auto begin = count * w / workers;
    auto end = count * (w + 1) / workers;
    threads.emplace_back([&, begin, end, w] {
      try {
        body(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace allelic
