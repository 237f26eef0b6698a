#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "allelic/common.h"
#include "allelic/forest.h"
#include "allelic/offspring_law.h"

namespace allelic {

using SizeAlleles = std::pair<std::size_t, std::size_t>;  // (T+_1, A_1)

inline constexpr std::size_t k_default_enumeration_budget = 50'000'000;

// Exact law of the first tree, restricted to trees of at most max_size
// individuals, keyed by the ordered cluster sequence (|C_j|, M_j).
struct EnumeratedDistribution {
  std::size_t max_size = 0;
  std::map<ClusterSequence, Rational> trees;
  std::size_t sequences = 0;  // step sequences visited at the leaves

  auto total() const -> Rational;
  auto size_alleles() const -> std::map<SizeAlleles, Rational>;
  // Given (n, k), the law of the size vector after a uniform cyclic shift.
  auto cyclic_sizes(std::size_t n, std::size_t k) const -> std::map<std::vector<std::size_t>, Rational>;
};

// Walks every step sequence whose total walk first hits -1 within max_size
// steps. Needs an exact law; ExplosionGuard once node_budget nodes are visited.
auto enumerate_trees(const JointOffspringLaw& law, std::size_t max_size,
                     std::size_t node_budget = k_default_enumeration_budget) -> EnumeratedDistribution;

// Exact law of (|C_1|, M_1) for |C_1| <= max_size, by walking every step
// sequence whose clone walk first hits -1 within max_size steps.
auto enumerate_eve_clusters(const JointOffspringLaw& law, std::size_t max_size,
                            std::size_t node_budget = k_default_enumeration_budget)
    -> std::map<std::pair<std::size_t, std::size_t>, Rational>;

struct MonteCarloOptions {
  std::size_t n_trees = 0;
  std::uint64_t seed = 0;
  std::size_t cap = 100'000;
  std::size_t workers = 1;
  std::size_t detail_max_size = 8;  // trees up to this size also keep their cluster sequence
};

struct MonteCarloCounts {
  std::size_t trees = 0;
  std::size_t censored = 0;
  std::map<SizeAlleles, std::uint64_t> size_alleles;
  std::map<ClusterSequence, std::uint64_t> structures;
  std::map<std::vector<std::size_t>, std::uint64_t> ranked_sizes;  // for detailed trees

  auto censoring_rate() const -> double;
};

// Streams trees from the same substreams as sample_forest; counts do not
// depend on the worker count.
auto monte_carlo(const JointOffspringLaw& law, const MonteCarloOptions& options) -> MonteCarloCounts;

struct CompareOptions {
  double pool_threshold = 5.0;  // minimum expected count per chi-square cell
  double alpha = 1e-3;
  double z_limit = 4.0;
  double z_min_probability = 1e-3;  // cells below this are not z-checked
};

struct CellReport {
  std::string key;
  double probability = 0.0;
  std::uint64_t observed = 0;
  double expected = 0.0;
  double z = 0.0;
};

struct ComparisonReport {
  std::vector<CellReport> cells;  // includes the complementary "other" cell
  std::uint64_t total = 0;
  double total_variation = 0.0;
  double chi_square = 0.0;
  std::size_t degrees_of_freedom = 0;
  std::size_t pooled_cells = 0;
  double p_value = 1.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  double max_abs_z = 0.0;
  double censoring_rate = 0.0;
  std::vector<std::string> failures;

  auto pass() const -> bool { return failures.empty(); }
};

// Expected probabilities against observed counts out of `total` draws. Mass
// and counts outside the expected keys form an "other" cell.
auto compare(const std::map<std::string, double>& expected, const std::map<std::string, std::uint64_t>& observed,
             std::uint64_t total, const CompareOptions& options = {}) -> ComparisonReport;

// P(sup |B| ...) style tail of the Kolmogorov distribution, Q(lambda).
auto kolmogorov_tail(double lambda) -> double;

struct AsymptoticRow {
  std::size_t n = 0;
  double scaled = 0.0;  // n^{3/2} P~(|C_1| = n)
  double ratio = 0.0;   // scaled / limit
};

struct AsymptoticReport {
  double theta = 1.0;
  double sigma_sq = 0.0;
  double limit = 0.0;  // 1 / sqrt(2 pi sigma_sq)
  bool periodic = false;
  std::vector<AsymptoticRow> rows;
};

// P~(|C_1| = n) = P~(xi_1 + ... + xi_n = n - 1) / n under the tilted clone law,
// by exact 1-D convolution.
auto tilted_cluster_asymptotic(const CountDistribution& clone, const std::vector<std::size_t>& probes)
    -> AsymptoticReport;
auto tilted_cluster_asymptotic(const JointOffspringLaw& law, const std::vector<std::size_t>& probes)
    -> AsymptoticReport;

struct DriftPath {
  std::vector<double> times;
  std::vector<double> values;  // n^{-1} (S+ - S^c) at [t n^2]
  double sup_deviation = 0.0;  // sup over [0, t_max] of |value - d t|
};

// Pruning of `base` with p = d / n, gamma_n = n.
auto drift_probe(const CountDistribution& base, double d, std::size_t n, double t_max, std::uint64_t seed,
                 std::size_t points = 101) -> DriftPath;

struct ConditionedPartitions {
  std::vector<MassPartition> samples;
  std::size_t attempts = 0;
  double mean_largest = 0.0;
  std::map<std::vector<std::size_t>, std::uint64_t> histogram;
};

// Rejection sampling of the first tree given T+_1 = n and A_1 = k.
auto conditioned_mass_partitions(const JointOffspringLaw& law, std::size_t n, std::size_t k,
                                 std::size_t n_samples, std::uint64_t seed,
                                 std::size_t attempt_budget = 100'000'000) -> ConditionedPartitions;

struct ExactMismatch {
  std::string what;
  std::string cell;
  std::string formula;
  std::string enumerated;
};

struct ExactCheckOptions {
  std::size_t max_size = 10;       // (T, A) grid and Eve-cluster law
  std::size_t structure_size = 8;  // full cluster sequences and the cyclic law
  // Test hook: adds 1/1024 to the formula value of this (n, k) cell.
  std::optional<SizeAlleles> fault;
};

struct ExactCheckReport {
  std::size_t cells_checked = 0;
  std::vector<ExactMismatch> mismatches;
};

// Enumeration against every closed-form law, exactly.
auto check_exact_formulas(const JointOffspringLaw& law, const ExactCheckOptions& options) -> ExactCheckReport;

auto format_cell(const SizeAlleles& cell) -> std::string;
auto format_clusters(const ClusterSequence& clusters) -> std::string;

}  // namespace allelic
