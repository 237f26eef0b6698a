#include "allelic/forest.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace allelic {

auto passage_times(std::span<const Step> steps, Walk walk) -> std::vector<std::size_t> {
  auto out = std::vector<std::size_t>{};
  auto level = std::int64_t{0};
  auto lowest = std::int64_t{0};
  for (auto n = std::size_t{0}; n < steps.size(); ++n) {
    auto inc = walk == Walk::total ? steps[n].total() : std::size_t{steps[n].clones};
    level += static_cast<std::int64_t>(inc) - 1;
    if (level < lowest) {
      // Skip-free: a new minimum is exactly one below the previous one.
      lowest = level;
      out.push_back(n + 1);
    }
  }
  return out;
}

namespace {

auto complete_boundaries(std::span<const Step> steps, Walk walk, const char* what) -> std::vector<std::size_t> {
  if (steps.empty()) fail(Errc::incomplete_sequence, std::string{"no steps to split into "} + what);
  auto times = passage_times(steps, walk);
  if (times.empty() || times.back() != steps.size()) {
    fail(Errc::incomplete_sequence, std::string{"sequence ends inside an unfinished "} + what);
  }
  return times;
}

auto first_boundaries(std::span<const Step> steps, Walk walk, std::size_t count, const char* what)
    -> std::vector<std::size_t> {
  auto times = passage_times(steps, walk);
  if (times.size() < count) {
    fail(Errc::incomplete_sequence, "asked for " + std::to_string(count) + " " + what + ", sequence covers " +
                                        std::to_string(times.size()));
  }
  times.resize(count);
  return times;
}

auto root_label(std::size_t ancestor) -> Label { return Label{ancestor, 0, {}}; }

auto child_label(const Label& parent, const Step& xi, std::uint32_t slot) -> Label {
  auto child = Label{parent.ancestor, parent.mutations + (slot > xi.clones ? 1 : 0), parent.lineage};
  child.lineage.push_back(slot);
  return child;
}

// Plain depth-first order: (a, s) with the mutation count ignored.
auto plain_dfs_less(const Label& x, const Label& y) -> bool {
  if (x.ancestor != y.ancestor) return x.ancestor < y.ancestor;
  return x.lineage < y.lineage;
}

struct Labeled {
  Label label;
  Step xi;
};

// Within one generation, breadth-first order coincides with (a, s) order.
auto table_from_labels(std::vector<Labeled> individuals) -> GenerationTable {
  std::sort(individuals.begin(), individuals.end(), [](const Labeled& x, const Labeled& y) {
    if (x.label.lineage.size() != y.label.lineage.size()) return x.label.lineage.size() < y.label.lineage.size();
    return plain_dfs_less(x.label, y.label);
  });
  auto table = GenerationTable{};
  for (const auto& ind : individuals) {
    auto g = ind.label.lineage.size();
    if (table.generations.size() <= g) table.generations.resize(g + 1);
    table.generations[g].push_back(ind.xi);
  }
  return table;
}

}  // namespace

auto tree_boundaries(std::span<const Step> steps) -> std::vector<std::size_t> {
  return complete_boundaries(steps, Walk::total, "tree");
}

auto tree_boundaries(std::span<const Step> steps, std::size_t count) -> std::vector<std::size_t> {
  return first_boundaries(steps, Walk::total, count, "trees");
}

auto cluster_boundaries(std::span<const Step> steps) -> std::vector<std::size_t> {
  return complete_boundaries(steps, Walk::clone, "cluster");
}

auto cluster_boundaries(std::span<const Step> steps, std::size_t count) -> std::vector<std::size_t> {
  return first_boundaries(steps, Walk::clone, count, "clusters");
}

auto trees(std::span<const Step> steps) -> std::vector<TreeView> {
  auto out = std::vector<TreeView>{};
  auto start = std::size_t{0};
  for (auto end : tree_boundaries(steps)) {
    out.push_back(TreeView{start, end - start, steps.subspan(start, end - start)});
    start = end;
  }
  return out;
}

auto AllelicPartition::tree_clusters(std::size_t tree) const -> std::span<const Cluster> {
  return std::span<const Cluster>{clusters}.subspan(tree_first_cluster.at(tree), alleles_per_tree.at(tree));
}

auto allelic_partition(std::span<const Step> steps) -> AllelicPartition {
  auto tree_ends = tree_boundaries(steps);
  auto cluster_ends = cluster_boundaries(steps);

  auto p = AllelicPartition{};
  auto start = std::size_t{0};
  for (auto end : cluster_ends) {
    auto mutants = std::size_t{0};
    for (auto i = start; i < end; ++i) mutants += steps[i].mutants;
    p.clusters.push_back(Cluster{end - start, mutants});
    p.cluster_offsets.push_back(start);
    start = end;
  }

  auto j = std::size_t{0};
  auto tree_start = std::size_t{0};
  for (auto i = std::size_t{0}; i < tree_ends.size(); ++i) {
    p.tree_first_cluster.push_back(j);
    auto count = std::size_t{0};
    while (j < p.clusters.size() && p.cluster_offsets[j] < tree_ends[i]) {
      p.cluster_tree.push_back(i);
      ++count;
      ++j;
    }
    p.alleles_per_tree.push_back(count);
    if (j == 0 || cluster_ends[j - 1] != tree_ends[i]) {
      throw std::logic_error("tree boundary " + std::to_string(tree_ends[i]) + " is not a cluster boundary");
    }
    auto mutants = std::size_t{0};
    for (auto n = tree_start; n < tree_ends[i]; ++n) mutants += steps[n].mutants;
    if (count != 1 + mutants) {
      throw std::logic_error("tree " + std::to_string(i) + " has " + std::to_string(count) +
                             " clusters but " + std::to_string(mutants) + " mutant-children");
    }
    tree_start = tree_ends[i];
  }
  return p;
}

auto bfs_tree_size(std::span<const std::size_t> offspring) -> std::size_t {
  auto sum = std::size_t{0};
  for (auto j = std::size_t{1}; j <= offspring.size(); ++j) {
    sum += offspring[j - 1];
    if (sum == j - 1) return j;
  }
  return 0;
}

auto AllelicForest::children(std::size_t node) const -> std::vector<std::size_t> {
  auto out = std::vector<std::size_t>(bfs_offspring.at(node));
  std::iota(out.begin(), out.end(), first_child[node]);
  return out;
}

auto allelic_forest(std::span<const std::size_t> offspring) -> AllelicForest {
  auto f = AllelicForest{};
  f.bfs_offspring.assign(offspring.begin(), offspring.end());
  f.parent.assign(offspring.size(), AllelicForest::npos);
  f.first_child.assign(offspring.size(), 0);
  auto start = std::size_t{0};
  while (start < offspring.size()) {
    auto size = bfs_tree_size(offspring.subspan(start));
    if (size == 0) {
      fail(Errc::inconsistent_partition,
           "mutant counts from cluster " + std::to_string(start) + " never close a tree");
    }
    auto next = start + 1;
    for (auto j = start; j < start + size; ++j) {
      f.first_child[j] = next;
      for (auto k = std::size_t{0}; k < offspring[j]; ++k) f.parent[next++] = j;
    }
    f.tree_sizes.push_back(size);
    start += size;
  }
  return f;
}

auto allelic_forest(const AllelicPartition& partition) -> AllelicForest {
  auto offspring = std::vector<std::size_t>{};
  offspring.reserve(partition.clusters.size());
  for (const auto& c : partition.clusters) offspring.push_back(c.mutants);
  auto f = allelic_forest(offspring);
  if (f.tree_sizes != partition.alleles_per_tree) {
    fail(Errc::inconsistent_partition, "allele counts disagree with the breadth-first hitting times");
  }
  return f;
}

auto format_label(const Label& label) -> std::string {
  auto os = std::ostringstream{};
  os << label.ancestor << ':' << label.mutations << ':';
  for (auto i = std::size_t{0}; i < label.lineage.size(); ++i) {
    if (i > 0) os << '.';
    os << label.lineage[i];
  }
  return os.str();
}

auto parse_label(const std::string& text) -> Label {
  auto first = text.find(':');
  auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos) fail(Errc::parse_error, "label '" + text + "' is not a:m:s");
  auto label = Label{};
  try {
    label.ancestor = std::stoull(text.substr(0, first));
    label.mutations = std::stoull(text.substr(first + 1, second - first - 1));
    auto rest = text.substr(second + 1);
    auto is = std::istringstream{rest};
    for (auto part = std::string{}; std::getline(is, part, '.');) {
      label.lineage.push_back(static_cast<std::uint32_t>(std::stoul(part)));
    }
  } catch (const std::logic_error&) {
    fail(Errc::parse_error, "label '" + text + "' is not a:m:s");
  }
  return label;
}

auto generation_view(std::span<const Step> steps) -> GenerationView {
  tree_boundaries(steps);

  struct Pending {
    std::size_t parent;
    bool mutant;
  };
  auto pending = std::map<Label, Pending>{};
  auto view = GenerationView{};
  view.records.reserve(steps.size());
  auto next_ancestor = std::size_t{1};
  auto cluster = std::size_t{0};
  for (auto i = std::size_t{0}; i < steps.size(); ++i) {
    if (pending.empty()) pending.emplace(root_label(next_ancestor++), Pending{AllelicForest::npos, true});
    auto node = pending.extract(pending.begin());
    auto rec = IndividualRecord{};
    rec.index = i;
    rec.xi = steps[i];
    rec.label = std::move(node.key());
    rec.tree = rec.label.ancestor - 1;
    rec.generation = rec.label.lineage.size();
    rec.mutant = node.mapped().mutant;
    if (rec.mutant && i > 0) ++cluster;
    rec.cluster = cluster;
    for (auto slot = std::uint32_t{1}; slot <= steps[i].total(); ++slot) {
      pending.emplace(child_label(rec.label, steps[i], slot), Pending{i, slot > steps[i].clones});
    }
    view.records.push_back(std::move(rec));
  }

  auto order = std::vector<std::size_t>(steps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& lx = view.records[x].label;
    const auto& ly = view.records[y].label;
    if (lx.lineage.size() != ly.lineage.size()) return lx.lineage.size() < ly.lineage.size();
    return plain_dfs_less(lx, ly);
  });
  for (auto idx : order) {
    auto& rec = view.records[idx];
    auto& gens = view.table.generations;
    if (gens.size() <= rec.generation) gens.resize(rec.generation + 1);
    rec.rank = gens[rec.generation].size();
    gens[rec.generation].push_back(rec.xi);
  }
  return view;
}

auto dfs_with_mutations(const GenerationTable& table) -> DfsSequence {
  auto individuals = std::vector<Labeled>{};
  auto labels = std::vector<Label>{};
  if (!table.generations.empty()) {
    for (auto n = std::size_t{0}; n < table.generations[0].size(); ++n) labels.push_back(root_label(n + 1));
  }
  for (auto g = std::size_t{0}; g < table.generations.size(); ++g) {
    const auto& gen = table.generations[g];
    auto next_labels = std::vector<Label>{};
    auto next_size = g + 1 < table.generations.size() ? table.generations[g + 1].size() : std::size_t{0};
    for (auto n = std::size_t{0}; n < gen.size(); ++n) {
      for (auto slot = std::uint32_t{1}; slot <= gen[n].total(); ++slot) {
        next_labels.push_back(child_label(labels[n], gen[n], slot));
      }
      individuals.push_back(Labeled{std::move(labels[n]), gen[n]});
    }
    if (next_labels.size() != next_size) {
      fail(Errc::inconsistent_partition, "generation " + std::to_string(g) + " has " +
                                             std::to_string(next_labels.size()) + " children but generation " +
                                             std::to_string(g + 1) + " has " + std::to_string(next_size) +
                                             " individuals");
    }
    labels = std::move(next_labels);
  }
  std::sort(individuals.begin(), individuals.end(),
            [](const Labeled& x, const Labeled& y) { return x.label < y.label; });
  auto seq = DfsSequence{};
  seq.steps.reserve(individuals.size());
  for (const auto& ind : individuals) seq.steps.push_back(ind.xi);
  seq.complete_trees = table.generations.empty() ? 0 : table.generations[0].size();
  return seq;
}

auto cluster_slices(std::span<const Step> steps, const AllelicPartition& partition)
    -> std::vector<std::vector<Step>> {
  auto out = std::vector<std::vector<Step>>{};
  out.reserve(partition.clusters.size());
  for (auto j = std::size_t{0}; j < partition.clusters.size(); ++j) {
    auto slice = steps.subspan(partition.cluster_offsets[j], partition.clusters[j].size);
    out.emplace_back(slice.begin(), slice.end());
  }
  return out;
}

auto reconstruct_from_partition(const AllelicPartition& partition,
                                const std::vector<std::vector<Step>>& cluster_steps) -> DfsSequence {
  const auto& clusters = partition.clusters;
  if (cluster_steps.size() != clusters.size()) {
    fail(Errc::inconsistent_partition, std::to_string(cluster_steps.size()) + " slices for " +
                                           std::to_string(clusters.size()) + " clusters");
  }
  for (auto j = std::size_t{0}; j < clusters.size(); ++j) {
    const auto& slice = cluster_steps[j];
    auto where = "cluster " + std::to_string(j);
    if (slice.size() != clusters[j].size) fail(Errc::inconsistent_partition, where + ": slice length differs from size");
    auto mutants = std::size_t{0};
    for (const auto& s : slice) mutants += s.mutants;
    if (mutants != clusters[j].mutants) fail(Errc::inconsistent_partition, where + ": mutant count differs from M_j");
    auto hits = passage_times(slice, Walk::clone);
    if (hits.empty() || hits.front() != slice.size()) {
      fail(Errc::inconsistent_partition, where + ": clone steps do not form one planar tree");
    }
  }
  auto forest = allelic_forest(partition);

  auto roots = std::vector<Label>(clusters.size());
  auto tree = std::size_t{0};
  for (auto j = std::size_t{0}; j < clusters.size(); ++j) {
    if (forest.parent[j] == AllelicForest::npos) roots[j] = root_label(++tree);
  }

  auto individuals = std::vector<Labeled>{};
  for (auto j = std::size_t{0}; j < clusters.size(); ++j) {
    const auto& slice = cluster_steps[j];
    // Plain depth-first decoding of the clone tree; the stack holds
    // (individual, clone slots handed out so far).
    auto first = individuals.size();
    auto stack = std::vector<std::pair<std::size_t, std::uint32_t>>{};
    auto founders = std::vector<Label>{};
    for (auto i = std::size_t{0}; i < slice.size(); ++i) {
      while (!stack.empty() && stack.back().second == individuals[stack.back().first].xi.clones) stack.pop_back();
      auto label = Label{};
      if (stack.empty()) {
        label = roots[j];
      } else {
        auto& [parent, used] = stack.back();
        label = child_label(individuals[parent].label, individuals[parent].xi, ++used);
      }
      individuals.push_back(Labeled{std::move(label), slice[i]});
      const auto& me = individuals.back();
      for (auto k = std::uint32_t{1}; k <= me.xi.mutants; ++k) {
        founders.push_back(child_label(me.label, me.xi, me.xi.clones + k));
      }
      stack.emplace_back(first + i, 0);
    }
    std::sort(founders.begin(), founders.end());
    for (auto k = std::size_t{0}; k < founders.size(); ++k) roots[forest.first_child[j] + k] = std::move(founders[k]);
  }
  auto seq = dfs_with_mutations(table_from_labels(std::move(individuals)));
  return seq;
}

auto lukasiewicz_heights(std::span<const std::size_t> child_counts) -> std::vector<std::size_t> {
  auto out = std::vector<std::size_t>{};
  out.reserve(child_counts.size());
  auto stack = std::vector<std::size_t>{};  // children still to visit, per open ancestor
  for (auto c : child_counts) {
    while (!stack.empty() && stack.back() == 0) stack.pop_back();
    out.push_back(stack.size());
    if (!stack.empty()) --stack.back();
    stack.push_back(c);
  }
  return out;
}

auto height_function(std::span<const Step> steps, HeightVariant variant) -> HeightPath {
  auto path = HeightPath{variant, {}};
  if (variant == HeightVariant::allelic) {
    tree_boundaries(steps);
    auto clones = std::vector<std::size_t>{};
    clones.reserve(steps.size());
    for (const auto& s : steps) clones.push_back(s.clones);
    path.values = lukasiewicz_heights(clones);
    return path;
  }
  auto view = generation_view(steps);
  std::sort(view.records.begin(), view.records.end(),
            [](const IndividualRecord& x, const IndividualRecord& y) { return plain_dfs_less(x.label, y.label); });
  path.values.reserve(view.records.size());
  for (const auto& r : view.records) path.values.push_back(r.generation);
  return path;
}

auto MassPartition::ratios() const -> std::vector<Rational> {
  auto out = std::vector<Rational>{};
  out.reserve(sizes.size());
  for (auto s : sizes) out.emplace_back(Rational{s} / Rational{total});
  return out;
}

auto mass_partition(std::span<const Cluster> clusters) -> MassPartition {
  auto m = MassPartition{};
  for (const auto& c : clusters) {
    m.sizes.push_back(c.size);
    m.total += c.size;
  }
  std::stable_sort(m.sizes.begin(), m.sizes.end(), std::greater<>{});
  return m;
}

auto mass_partition(const TreeView& tree, std::span<const Cluster> clusters) -> MassPartition {
  auto m = mass_partition(clusters);
  if (m.total != tree.size) {
    fail(Errc::inconsistent_partition, "cluster sizes sum to " + std::to_string(m.total) + ", tree has " +
                                           std::to_string(tree.size) + " individuals");
  }
  return m;
}

}  // namespace allelic
