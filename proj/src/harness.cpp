#include "allelic/harness.h"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "allelic/exact.h"
#include "allelic/sampler.h"

namespace allelic {

namespace {

struct Cell {
  Step step;
  Rational probability;
};

auto exact_cells(const JointOffspringLaw& law) -> std::vector<Cell> {
  const auto& g = law.exact();
  auto cells = std::vector<Cell>{};
  for (auto k = std::size_t{0}; k < g.rows(); ++k) {
    for (auto l = std::size_t{0}; l < g.cols(); ++l) {
      if (g(k, l) > 0) {
        cells.push_back(Cell{Step{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l)}, g(k, l)});
      }
    }
  }
  return cells;
}

// Depth-first walk over step sequences. `closes` reports the level change of
// a step; a path is finished when its level first reaches -1.
template <typename Increment, typename Leaf>
class SequenceWalker {
 public:
  SequenceWalker(std::vector<Cell> cells, std::size_t max_size, std::size_t budget, Increment inc, Leaf leaf)
      : cells_{std::move(cells)}, max_size_{max_size}, budget_{budget}, inc_{inc}, leaf_{leaf} {}

  void run() { visit(0, Rational{1}); }

 private:
  void visit(std::int64_t level, const Rational& probability) {
    for (const auto& cell : cells_) {
      if (++nodes_ > budget_) {
        fail(Errc::explosion_guard, "enumeration visited more than " + std::to_string(budget_) + " nodes");
      }
      auto next = level + inc_(cell.step);
      // At least next + 1 further individuals are needed to come back down.
      if (path_.size() + 1 + static_cast<std::size_t>(std::max<std::int64_t>(next + 1, 0)) > max_size_) continue;
      path_.push_back(cell.step);
      auto p = probability * cell.probability;
      if (next == -1) {
        leaf_(path_, p);
      } else {
        visit(next, p);
      }
      path_.pop_back();
    }
  }

  std::vector<Cell> cells_;
  std::size_t max_size_;
  std::size_t budget_;
  Increment inc_;
  Leaf leaf_;
  std::vector<Step> path_;
  std::size_t nodes_ = 0;
};

template <typename Increment, typename Leaf>
void walk_sequences(const JointOffspringLaw& law, std::size_t max_size, std::size_t budget, Increment inc,
                    Leaf leaf) {
  auto walker = SequenceWalker<Increment, Leaf>{exact_cells(law), max_size, budget, inc, leaf};
  walker.run();
}

auto normal_cdf(double z) -> double { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void compositions(std::size_t n, std::size_t k, std::vector<std::size_t>& prefix,
                  std::vector<std::vector<std::size_t>>& out) {
  if (k == 0) {
    if (n == 0) out.push_back(prefix);
    return;
  }
  for (auto first = std::size_t{1}; first + (k - 1) <= n; ++first) {
    prefix.push_back(first);
    compositions(n - first, k - 1, prefix, out);
    prefix.pop_back();
  }
}

auto join(const std::vector<std::size_t>& v) -> std::string {
  auto os = std::ostringstream{};
  os << '(';
  for (auto i = std::size_t{0}; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace

auto format_cell(const SizeAlleles& cell) -> std::string {
  return "n=" + std::to_string(cell.first) + ",k=" + std::to_string(cell.second);
}

auto format_clusters(const ClusterSequence& clusters) -> std::string {
  auto os = std::ostringstream{};
  os << '[';
  for (auto i = std::size_t{0}; i < clusters.size(); ++i) {
    os << (i ? "," : "") << '(' << clusters[i].size << ',' << clusters[i].mutants << ')';
  }
  os << ']';
  return os.str();
}

auto EnumeratedDistribution::total() const -> Rational {
  auto sum = Rational{0};
  for (const auto& [key, p] : trees) sum += p;
  return sum;
}

auto EnumeratedDistribution::size_alleles() const -> std::map<SizeAlleles, Rational> {
  auto out = std::map<SizeAlleles, Rational>{};
  for (const auto& [clusters, p] : trees) {
    auto n = std::size_t{0};
    for (const auto& c : clusters) n += c.size;
    out[{n, clusters.size()}] += p;
  }
  return out;
}

auto EnumeratedDistribution::cyclic_sizes(std::size_t n, std::size_t k) const
    -> std::map<std::vector<std::size_t>, Rational> {
  auto out = std::map<std::vector<std::size_t>, Rational>{};
  auto mass = Rational{0};
  for (const auto& [clusters, p] : trees) {
    if (clusters.size() != k) continue;
    auto sizes = std::vector<std::size_t>{};
    for (const auto& c : clusters) sizes.push_back(c.size);
    if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != n) continue;
    mass += p;
    for (auto r = std::size_t{0}; r < k; ++r) {
      out[sizes] += p / Rational{k};
      std::rotate(sizes.begin(), sizes.begin() + 1, sizes.end());
    }
  }
  if (mass == 0) return {};
  for (auto& [key, p] : out) p /= mass;
  return out;
}

auto enumerate_trees(const JointOffspringLaw& law, std::size_t max_size, std::size_t node_budget)
    -> EnumeratedDistribution {
  auto out = EnumeratedDistribution{};
  out.max_size = max_size;
  walk_sequences(
      law, max_size, node_budget, [](const Step& s) { return static_cast<std::int64_t>(s.total()) - 1; },
      [&](const std::vector<Step>& path, const Rational& p) {
        out.trees[allelic_partition(path).clusters] += p;
        ++out.sequences;
      });
  return out;
}

auto enumerate_eve_clusters(const JointOffspringLaw& law, std::size_t max_size, std::size_t node_budget)
    -> std::map<std::pair<std::size_t, std::size_t>, Rational> {
  auto out = std::map<std::pair<std::size_t, std::size_t>, Rational>{};
  walk_sequences(
      law, max_size, node_budget, [](const Step& s) { return static_cast<std::int64_t>(s.clones) - 1; },
      [&](const std::vector<Step>& path, const Rational& p) {
        auto mutants = std::size_t{0};
        for (const auto& s : path) mutants += s.mutants;
        out[{path.size(), mutants}] += p;
      });
  return out;
}

auto MonteCarloCounts::censoring_rate() const -> double {
  return trees == 0 ? 0.0 : static_cast<double>(censored) / static_cast<double>(trees);
}

auto monte_carlo(const JointOffspringLaw& law, const MonteCarloOptions& options) -> MonteCarloCounts {
  auto sampler = StepSampler{law};
  auto workers = std::max<std::size_t>(1, options.workers);
  auto partial = std::vector<MonteCarloCounts>(workers);
  parallel_blocks(options.n_trees, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
    auto& counts = partial[w];
    auto buffer = std::vector<Step>{};
    for (auto i = begin; i < end; ++i) {
      auto engine = substream(options.seed, i);
      auto walker = TreeWalker{};
      auto complete = false;
      buffer.clear();
      while (walker.size() < options.cap) {
        auto s = sampler(engine);
        if (buffer.size() <= options.detail_max_size) buffer.push_back(s);
        if (walker.push(s)) {
          complete = true;
          break;
        }
      }
      ++counts.trees;
      if (!complete) {
        ++counts.censored;
        continue;
      }
      ++counts.size_alleles[{walker.size(), walker.alleles()}];
      if (walker.size() <= options.detail_max_size) {
        auto clusters = allelic_partition(buffer).clusters;
        ++counts.ranked_sizes[mass_partition(clusters).sizes];
        ++counts.structures[std::move(clusters)];
      }
    }
  });
  auto merged = MonteCarloCounts{};
  for (const auto& c : partial) {
    merged.trees += c.trees;
    merged.censored += c.censored;
    for (const auto& [key, v] : c.size_alleles) merged.size_alleles[key] += v;
    for (const auto& [key, v] : c.structures) merged.structures[key] += v;
    for (const auto& [key, v] : c.ranked_sizes) merged.ranked_sizes[key] += v;
  }
  return merged;
}

auto kolmogorov_tail(double lambda) -> double {
  if (lambda < 0.2) return 1.0;
  auto sum = 0.0;
  for (auto j = 1; j <= 100; ++j) {
    auto term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

auto compare(const std::map<std::string, double>& expected, const std::map<std::string, std::uint64_t>& observed,
             std::uint64_t total, const CompareOptions& options) -> ComparisonReport {
  if (total == 0) fail(Errc::empty_observation, "no observations to compare");
  auto report = ComparisonReport{};
  report.total = total;
  auto n = static_cast<double>(total);

  auto mass = 0.0;
  auto counted = std::uint64_t{0};
  for (const auto& [key, p] : expected) {
    auto it = observed.find(key);
    auto obs = it == observed.end() ? std::uint64_t{0} : it->second;
    report.cells.push_back(CellReport{key, p, obs, n * p, 0.0});
    mass += p;
    counted += obs;
  }
  auto other_p = std::max(0.0, 1.0 - mass);
  auto other_obs = total >= counted ? total - counted : std::uint64_t{0};
  if (other_p > 0.0 || other_obs > 0) report.cells.push_back(CellReport{"other", other_p, other_obs, n * other_p, 0.0});

  auto zs = std::vector<double>{};
  for (auto& c : report.cells) {
    auto obs = static_cast<double>(c.observed);
    report.total_variation += 0.5 * std::abs(obs / n - c.probability);
    if (c.probability > 0.0 && c.probability < 1.0) {
      c.z = (obs - c.expected) / std::sqrt(n * c.probability * (1.0 - c.probability));
    } else if (c.probability == 0.0) {
      c.z = c.observed > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    if (c.probability >= options.z_min_probability && c.key != "other") {
      zs.push_back(c.z);
      report.max_abs_z = std::max(report.max_abs_z, std::abs(c.z));
      if (std::abs(c.z) > options.z_limit) {
        report.failures.push_back("cell " + c.key + ": z = " + format_double(c.z));
      }
    } else if (c.probability == 0.0 && c.observed > 0) {
      report.failures.push_back("cell " + c.key + ": observed " + std::to_string(c.observed) +
                                " draws of a zero-probability cell");
    }
  }
  report.total_variation = std::min(report.total_variation, 1.0);

  // Pool every cell below the threshold into one; if the pool is still too
  // small, absorb the smallest remaining cell until it is not.
  auto big = std::vector<std::pair<double, double>>{};  // (expected, observed)
  auto pool = std::pair<double, double>{0.0, 0.0};
  for (const auto& c : report.cells) {
    if (c.expected < options.pool_threshold) {
      pool.first += c.expected;
      pool.second += static_cast<double>(c.observed);
      ++report.pooled_cells;
    } else {
      big.emplace_back(c.expected, static_cast<double>(c.observed));
    }
  }
  std::sort(big.begin(), big.end());
  while (pool.first > 0.0 && pool.first < options.pool_threshold && !big.empty()) {
    pool.first += big.front().first;
    pool.second += big.front().second;
    big.erase(big.begin());
  }
  if (pool.first > 0.0) big.push_back(pool);
  for (const auto& [e, o] : big) report.chi_square += (o - e) * (o - e) / e;
  report.degrees_of_freedom = big.size() > 1 ? big.size() - 1 : 0;
  if (report.degrees_of_freedom > 0) {
    auto dist = boost::math::chi_squared{static_cast<double>(report.degrees_of_freedom)};
    report.p_value = boost::math::cdf(boost::math::complement(dist, report.chi_square));
  }
  if (!(report.p_value > options.alpha)) {
    report.failures.push_back("chi-square " + format_double(report.chi_square) + " on " +
                              std::to_string(report.degrees_of_freedom) + " df, p = " + format_double(report.p_value));
  }

  if (!zs.empty()) {
    std::sort(zs.begin(), zs.end());
    auto m = static_cast<double>(zs.size());
    for (auto i = std::size_t{0}; i < zs.size(); ++i) {
      auto f = normal_cdf(zs[i]);
      report.ks_statistic = std::max({report.ks_statistic, (i + 1) / m - f, f - i / m});
    }
    auto root = std::sqrt(m);
    report.ks_p_value = kolmogorov_tail((root + 0.12 + 0.11 / root) * report.ks_statistic);
    if (!(report.ks_p_value > options.alpha)) {
      report.failures.push_back("z-scores fail the normal KS check, p = " + format_double(report.ks_p_value));
    }
  }
  return report;
}

auto tilted_cluster_asymptotic(const CountDistribution& clone, const std::vector<std::size_t>& probes)
    -> AsymptoticReport {
  auto t = tilt(clone);
  auto report = AsymptoticReport{};
  report.theta = t.theta;
  report.sigma_sq = t.sigma_sq;
  report.limit = 1.0 / std::sqrt(2.0 * std::numbers::pi * t.sigma_sq);
  if (probes.empty()) return report;
  auto top = *std::max_element(probes.begin(), probes.end());
  auto step = tilted_pmf(clone, t, top);

  auto g = std::size_t{0};
  auto first = std::optional<std::size_t>{};
  for (auto j = std::size_t{0}; j < step.size(); ++j) {
    if (step[j] <= 0.0) continue;
    if (!first) {
      first = j;
    } else {
      g = std::gcd(g, j - *first);
    }
  }
  report.periodic = g != 1;

  auto power = step;
  for (auto n = std::size_t{1}; n <= top; ++n) {
    if (n > 1) power = convolve<double>(std::span<const double>{power}, std::span<const double>{step}, top);
    if (std::find(probes.begin(), probes.end(), n) == probes.end()) continue;
    auto p = n - 1 < power.size() ? power[n - 1] / static_cast<double>(n) : 0.0;
    auto scaled = std::pow(static_cast<double>(n), 1.5) * p;
    report.rows.push_back(AsymptoticRow{n, scaled, scaled / report.limit});
  }
  return report;
}

auto tilted_cluster_asymptotic(const JointOffspringLaw& law, const std::vector<std::size_t>& probes)
    -> AsymptoticReport {
  return tilted_cluster_asymptotic(clone_marginal(law), probes);
}

auto drift_probe(const CountDistribution& base, double d, std::size_t n, double t_max, std::uint64_t seed,
                 std::size_t points) -> DriftPath {
  if (n == 0 || !(t_max > 0.0) || !(d >= 0.0)) fail(Errc::domain_error, "drift probe needs n >= 1, t_max > 0, d >= 0");
  auto path = DriftPath{};
  auto n_sq = static_cast<double>(n) * static_cast<double>(n);
  auto horizon = static_cast<std::size_t>(std::floor(t_max * n_sq));
  points = std::max<std::size_t>(points, 2);
  auto marks = std::vector<std::size_t>{};
  for (auto i = std::size_t{0}; i < points; ++i) {
    auto t = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    path.times.push_back(t);
    marks.push_back(std::min(horizon, static_cast<std::size_t>(std::floor(t * n_sq))));
  }
  if (d == 0.0) {
    path.values.assign(points, 0.0);
    return path;
  }

  auto law = from_pruning(base, Rational{d} / Rational{n});
  auto sampler = StepSampler{law};
  auto engine = substream(seed, 0);
  auto mutants = std::size_t{0};
  auto mark = std::size_t{0};
  auto nd = static_cast<double>(n);
  for (auto i = std::size_t{0};; ++i) {
    // On [i, i+1) / n^2 the path is constant while d t moves linearly.
    auto value = static_cast<double>(mutants) / nd;
    while (mark < marks.size() && marks[mark] == i) {
      path.values.push_back(value);
      ++mark;
    }
    auto left = std::abs(value - d * static_cast<double>(i) / n_sq);
    auto right_t = std::min(static_cast<double>(i + 1) / n_sq, t_max);
    auto right = std::abs(value - d * right_t);
    path.sup_deviation = std::max({path.sup_deviation, left, right});
    if (i == horizon) break;
    mutants += sampler(engine).mutants;
  }
  return path;
}

auto conditioned_mass_partitions(const JointOffspringLaw& law, std::size_t n, std::size_t k,
                                 std::size_t n_samples, std::uint64_t seed, std::size_t attempt_budget)
    -> ConditionedPartitions {
  auto feasible = false;
  if (k >= 1 && k <= n) {
    auto table = convolution_power<double>(law, n, formula_box(n));
    feasible = p_tree_size_alleles(table, n, k) > 0.0;
  }
  if (!feasible) {
    fail(Errc::infeasible_condition,
         "P(T = " + std::to_string(n) + ", A = " + std::to_string(k) + ") is zero for this law");
  }
  auto sampler = StepSampler{law};
  auto out = ConditionedPartitions{};
  auto largest = 0.0;
  for (auto i = std::uint64_t{0}; out.samples.size() < n_samples; ++i) {
    if (out.attempts >= attempt_budget) {
      fail(Errc::rejection_budget_exceeded, "accepted " + std::to_string(out.samples.size()) + " of " +
                                                std::to_string(n_samples) + " after " +
                                                std::to_string(out.attempts) + " attempts");
    }
    ++out.attempts;
    auto tree = sample_tree(sampler, seed, i, n);
    if (!tree.complete || tree.steps.size() != n) continue;
    auto mutants = std::size_t{0};
    for (const auto& s : tree.steps) mutants += s.mutants;
    if (1 + mutants != k) continue;
    auto m = mass_partition(allelic_partition(tree.steps).clusters);
    largest += static_cast<double>(m.sizes.front()) / static_cast<double>(m.total);
    ++out.histogram[m.sizes];
    out.samples.push_back(std::move(m));
  }
  if (!out.samples.empty()) out.mean_largest = largest / static_cast<double>(out.samples.size());
  return out;
}

auto check_exact_formulas(const JointOffspringLaw& law, const ExactCheckOptions& options) -> ExactCheckReport {
  auto report = ExactCheckReport{};
  auto top = std::max(options.max_size, options.structure_size);
  auto box = ConvolutionOptions{};
  box.max_clone_index = top - 1;
  auto table = convolution_power<Rational>(law, top, box);
  auto enumerated = enumerate_trees(law, top);
  auto grid = enumerated.size_alleles();

  auto check = [&](std::string what, std::string cell, const Rational& formula, const Rational& seen) {
    ++report.cells_checked;
    if (formula != seen) {
      report.mismatches.push_back(
          ExactMismatch{std::move(what), std::move(cell), format_rational(formula), format_rational(seen)});
    }
  };
  auto lookup = [](const auto& map, const auto& key) {
    auto it = map.find(key);
    return it == map.end() ? Rational{0} : it->second;
  };

  auto dwass = dwass_tree_size_law<Rational>(law, options.max_size);
  for (auto n = std::size_t{1}; n <= options.max_size; ++n) {
    auto row = Rational{0};
    for (auto k = std::size_t{1}; k <= n; ++k) {
      auto formula = p_tree_size_alleles(table, n, k);
      if (options.fault && *options.fault == SizeAlleles{n, k}) formula += Rational{1, 1024};
      check("tree size and alleles", format_cell({n, k}), formula, lookup(grid, SizeAlleles{n, k}));
      row += formula;
    }
    check("tree size marginal", "n=" + std::to_string(n), row, dwass[n]);
  }

  auto eve = enumerate_eve_clusters(law, options.max_size);
  for (auto n = std::size_t{1}; n <= options.max_size; ++n) {
    for (auto l = std::size_t{0}; l <= n * law.mutant_bound(); ++l) {
      check("eve cluster", "n=" + std::to_string(n) + ",l=" + std::to_string(l), p_cluster_size_mutants(table, n, l),
            lookup(eve, std::pair{n, l}));
    }
  }

  for (const auto& [clusters, p] : enumerated.trees) {
    auto n = std::size_t{0};
    auto query = std::vector<std::pair<std::size_t, std::size_t>>{};
    for (const auto& c : clusters) {
      n += c.size;
      query.emplace_back(c.size, c.mutants);
    }
    if (n > options.structure_size) continue;
    check("allelic tree", format_clusters(clusters), p_allelic_tree<Rational>(table, query), p);
  }

  for (auto n = std::size_t{1}; n <= options.structure_size; ++n) {
    for (auto k = std::size_t{1}; k <= n; ++k) {
      if (p_tree_size_alleles(table, n, k) == 0) continue;
      auto freq = enumerated.cyclic_sizes(n, k);
      auto all = std::vector<std::vector<std::size_t>>{};
      auto prefix = std::vector<std::size_t>{};
      compositions(n, k, prefix, all);
      for (const auto& sizes : all) {
        check("cyclic cluster sizes", format_cell({n, k}) + " sizes=" + join(sizes),
              conditional_cluster_sizes<Rational>(table, n, k, sizes), lookup(freq, sizes));
      }
    }
  }
  return report;
}

}  // namespace allelic
