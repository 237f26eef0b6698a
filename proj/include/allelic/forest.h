#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "allelic/common.h"

namespace allelic {

// xi_i = (clone-children, mutant-children) of the i-th individual.
struct Step {
  std::uint32_t clones = 0;
  std::uint32_t mutants = 0;

  auto total() const -> std::size_t { return std::size_t{clones} + mutants; }
  friend auto operator<=>(const Step&, const Step&) = default;
};

// Steps in DFS-with-mutations order. A censored sequence ends inside a tree
// that hit the individual cap; its last tree is not counted in complete_trees.
struct DfsSequence {
  std::vector<Step> steps;
  std::size_t complete_trees = 0;
  bool censored = false;
};

enum class Walk { total, clone };

// All n >= 1 at which sum(increments) - n first reaches -1, -2, ... (1-based
// step counts). Never throws; a trailing unfinished excursion is ignored.
auto passage_times(std::span<const Step> steps, Walk walk) -> std::vector<std::size_t>;

// T+_1 < T+_2 < ... ; IncompleteSequence unless the steps end exactly on a boundary.
auto tree_boundaries(std::span<const Step> steps) -> std::vector<std::size_t>;
// First `count` boundaries; IncompleteSequence when fewer exist.
auto tree_boundaries(std::span<const Step> steps, std::size_t count) -> std::vector<std::size_t>;
auto cluster_boundaries(std::span<const Step> steps) -> std::vector<std::size_t>;
auto cluster_boundaries(std::span<const Step> steps, std::size_t count) -> std::vector<std::size_t>;

struct TreeView {
  std::size_t offset = 0;  // 0-based index of the ancestor
  std::size_t size = 0;
  std::span<const Step> steps;
};

auto trees(std::span<const Step> steps) -> std::vector<TreeView>;

struct Cluster {
  std::size_t size = 0;
  std::size_t mutants = 0;  // M_j
  friend auto operator<=>(const Cluster&, const Cluster&) = default;
};

using ClusterSequence = std::vector<Cluster>;

struct AllelicPartition {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> cluster_offsets;   // 0-based index of each cluster's root (mu_j - 1)
  std::vector<std::size_t> alleles_per_tree;  // A_i
  std::vector<std::size_t> cluster_tree;      // tree index of cluster j
  std::vector<std::size_t> tree_first_cluster;

  auto tree_clusters(std::size_t tree) const -> std::span<const Cluster>;
};

// Clusters from the clone walk; A_i from the cluster count inside each tree.
// Throws std::logic_error if T+_i != T^c_{A_1+...+A_i} or A_i != 1 + sum of
// mutants over tree i, which would mean the encoding itself is broken.
auto allelic_partition(std::span<const Step> steps) -> AllelicPartition;

// min{j >= 1 : M_1 + ... + M_j = j - 1}, or 0 if the prefix never hits.
auto bfs_tree_size(std::span<const std::size_t> offspring) -> std::size_t;

struct AllelicForest {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<std::size_t> parent;  // npos for roots
  std::vector<std::size_t> bfs_offspring;
  std::vector<std::size_t> first_child;  // children of j are consecutive in BFS order
  std::vector<std::size_t> tree_sizes;

  auto children(std::size_t node) const -> std::vector<std::size_t>;
};

// Breadth-first decoding of (M_j). InconsistentPartition if the sequence does
// not split into complete trees.
auto allelic_forest(std::span<const std::size_t> offspring) -> AllelicForest;
auto allelic_forest(const AllelicPartition& partition) -> AllelicForest;

// (a, m, s): ancestor rank (1-based), mutation count, lineage. The defaulted
// ordering is the lexicographic order that defines DFS-with-mutations.
struct Label {
  std::size_t ancestor = 1;
  std::size_t mutations = 0;
  std::vector<std::uint32_t> lineage;

  friend auto operator<=>(const Label&, const Label&) = default;
};

auto format_label(const Label& label) -> std::string;
auto parse_label(const std::string& text) -> Label;

struct IndividualRecord {
  std::size_t index = 0;  // DFS-with-mutations rank, 0-based
  Step xi;
  std::size_t tree = 0;
  std::size_t cluster = 0;
  std::size_t generation = 0;
  std::size_t rank = 0;  // position within its generation, 0-based
  Label label;
  bool mutant = false;  // ancestor or mutant-child: root of a cluster
};

// generations[g][n] = xi_{g,n}; within a generation, the children of an
// earlier individual come first and clones precede mutants.
struct GenerationTable {
  std::vector<std::vector<Step>> generations;
  friend auto operator==(const GenerationTable&, const GenerationTable&) -> bool = default;
};

struct GenerationView {
  std::vector<IndividualRecord> records;  // in DFS-with-mutations order
  GenerationTable table;
};

// Inverts the DFS-with-mutations ranking. IncompleteSequence if the steps do
// not end on a tree boundary.
auto generation_view(std::span<const Step> steps) -> GenerationView;

// Ranks the individuals of a generation table by label.
auto dfs_with_mutations(const GenerationTable& table) -> DfsSequence;

// Rebuilds the genealogy from the clusters alone: each slice is a planar tree
// under plain depth-first order, and the mutant-children of cluster j, taken
// in label order, root its children in the breadth-first allelic forest.
auto reconstruct_from_partition(const AllelicPartition& partition,
                                const std::vector<std::vector<Step>>& cluster_steps) -> DfsSequence;

// Splits a sequence into per-cluster slices.
auto cluster_slices(std::span<const Step> steps, const AllelicPartition& partition)
    -> std::vector<std::vector<Step>>;

enum class HeightVariant { genealogical, allelic };

struct HeightPath {
  HeightVariant variant = HeightVariant::genealogical;
  std::vector<std::size_t> values;
};

// Depths of a planar forest given children counts in depth-first order.
auto lukasiewicz_heights(std::span<const std::size_t> child_counts) -> std::vector<std::size_t>;

// genealogical: generations in plain depth-first order, mutations ignored.
// allelic: heights of the forest of clusters, read off the clone counts.
auto height_function(std::span<const Step> steps, HeightVariant variant) -> HeightPath;

// Ranked cluster sizes of one tree; ties keep cluster order.
struct MassPartition {
  std::vector<std::size_t> sizes;
  std::size_t total = 0;

  auto ratios() const -> std::vector<Rational>;
};

auto mass_partition(const TreeView& tree, std::span<const Cluster> clusters) -> MassPartition;
auto mass_partition(std::span<const Cluster> clusters) -> MassPartition;

}  // namespace allelic
