#include "allelic/sampler.h"

#include <algorithm>

namespace allelic {

auto substream(std::uint64_t seed, std::uint64_t index) -> std::mt19937_64 {
  auto seq = std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64{seq};
}

StepSampler::StepSampler(const JointOffspringLaw& law) {
  const auto& g = law.pmf();
  auto running = 0.0;
  for (auto k = std::size_t{0}; k < g.rows(); ++k) {
    for (auto l = std::size_t{0}; l < g.cols(); ++l) {
      if (g(k, l) <= 0.0) continue;
      running += g(k, l);
      cumulative_.push_back(running);
      cells_.push_back(Step{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l)});
    }
  }
  for (auto& c : cumulative_) c /= running;
  cumulative_.back() = 1.0;
}

auto StepSampler::operator()(std::mt19937_64& engine) const -> Step {
  auto u = uniform01(engine);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return cells_[static_cast<std::size_t>(it - cumulative_.begin())];
}

auto TreeWalker::push(Step s) -> bool {
  ++size_;
  mutants_ += s.mutants;
  total_level_ += static_cast<std::int64_t>(s.total()) - 1;
  clone_level_ += static_cast<std::int64_t>(s.clones) - 1;
  if (clone_level_ < clone_low_) {
    clone_low_ = clone_level_;
    ++clusters_;
  }
  return total_level_ == -1;
}

auto sample_tree(const StepSampler& sampler, std::uint64_t seed, std::uint64_t tree_index, std::size_t cap)
    -> TreeSample {
  auto engine = substream(seed, tree_index);
  auto out = TreeSample{};
  auto level = std::int64_t{0};
  while (out.steps.size() < cap) {
    auto s = sampler(engine);
    out.steps.push_back(s);
    level += static_cast<std::int64_t>(s.total()) - 1;
    if (level == -1) {
      out.complete = true;
      break;
    }
  }
  return out;
}

auto sample_dfs_sequence(const JointOffspringLaw& law, std::uint64_t seed, std::size_t n_trees,
                         std::size_t max_individuals) -> DfsSequence {
  if (max_individuals == 0) fail(Errc::domain_error, "max_individuals must be at least 1");
  auto sampler = StepSampler{law};
  auto seq = DfsSequence{};
  for (auto i = std::size_t{0}; i < n_trees; ++i) {
    auto tree = sample_tree(sampler, seed, i, max_individuals);
    seq.steps.insert(seq.steps.end(), tree.steps.begin(), tree.steps.end());
    if (!tree.complete) {
      seq.censored = true;
      break;
    }
    ++seq.complete_trees;
  }
  return seq;
}

auto sample_forest(const JointOffspringLaw& law, std::uint64_t seed, std::size_t n_trees, std::size_t cap,
                   std::size_t workers) -> SampledForest {
  if (cap == 0) fail(Errc::domain_error, "cap must be at least 1");
  auto sampler = StepSampler{law};
  auto samples = std::vector<TreeSample>(n_trees);
  parallel_blocks(n_trees, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (auto i = begin; i < end; ++i) samples[i] = sample_tree(sampler, seed, i, cap);
  });
  auto forest = SampledForest{};
  for (auto i = std::size_t{0}; i < n_trees; ++i) {
    if (!samples[i].complete) {
      forest.censored_ids.push_back(i);
      continue;
    }
    auto& steps = forest.sequence.steps;
    steps.insert(steps.end(), samples[i].steps.begin(), samples[i].steps.end());
    forest.tree_ids.push_back(i);
    ++forest.sequence.complete_trees;
  }
  return forest;
}

}  // namespace allelic
