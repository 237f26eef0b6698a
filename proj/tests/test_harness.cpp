#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "allelic/exact.h"
#include "allelic/harness.h"
#include "support.h"

using namespace allelic;
using allelic::testing::l0;

namespace {

auto expect_error(Errc code, auto&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

auto dirac_origin() -> JointOffspringLaw {
  auto g = Grid<Rational>{1, 1};
  g(0, 0) = 1;
  return JointOffspringLaw{g, Degeneracy::allow};
}

}  // namespace

TEST(Enumerate, DiracOrigin) {
  auto e = enumerate_trees(dirac_origin(), 6);
  ASSERT_EQ(e.trees.size(), 1u);
  EXPECT_EQ(e.trees.begin()->first, (ClusterSequence{{1, 0}}));
  EXPECT_EQ(e.trees.begin()->second, 1);
}

TEST(Enumerate, L0UpToTwo) {
  auto e = enumerate_trees(l0(), 2);
  auto sa = e.size_alleles();
  EXPECT_EQ(sa.size(), 3u);
  EXPECT_EQ(sa.at({1, 1}), Rational(1, 4));
  EXPECT_EQ(sa.at({2, 1}), Rational(1, 16));
  EXPECT_EQ(sa.at({2, 2}), Rational(1, 16));
  EXPECT_EQ(e.total(), Rational(3, 8));
}

// Total enumerated mass against the Dwass tree-size law, and the hitting
// condition on every enumerated mutant sequence.
TEST(Enumerate, MassAndHittingCondition) {
  auto e = enumerate_trees(l0(), 9);
  auto dwass = dwass_tree_size_law<Rational>(l0(), 9);
  auto expected = Rational{0};
  for (auto n = std::size_t{1}; n <= 9; ++n) expected += dwass[n];
  EXPECT_EQ(e.total(), expected);
  for (const auto& [clusters, p] : e.trees) {
    auto m = std::vector<std::size_t>{};
    for (const auto& c : clusters) m.push_back(c.mutants);
    EXPECT_EQ(bfs_tree_size(m), clusters.size());
    EXPECT_GT(p, 0);
  }
}

TEST(Enumerate, NeedsExactLawAndBudget) {
  auto inexact = independent_law(CountDistribution::geometric(Rational{1, 3}), CountDistribution::poisson(0.5));
  EXPECT_THROW(enumerate_trees(inexact, 4), Error);
  expect_error(Errc::explosion_guard, [] { enumerate_trees(l0(), 12, 1000); });
}

TEST(Enumerate, EveClustersMatchFormula) {
  auto eve = enumerate_eve_clusters(l0(), 6);
  auto t = convolution_power<Rational>(l0(), 6);
  for (const auto& [key, p] : eve) EXPECT_EQ(p, p_cluster_size_mutants(t, key.first, key.second));
  EXPECT_EQ(eve.at({2, 1}), Rational(1, 8));
}

TEST(MonteCarlo, DiracOrigin) {
  auto c = monte_carlo(dirac_origin(), MonteCarloOptions{500, 1, 10, 2, 8});
  EXPECT_EQ(c.trees, 500u);
  EXPECT_EQ(c.censored, 0u);
  ASSERT_EQ(c.size_alleles.size(), 1u);
  EXPECT_EQ(c.size_alleles.at({1, 1}), 500u);
}

TEST(MonteCarlo, WorkerCountDoesNotMatter) {
  auto one = monte_carlo(l0(), MonteCarloOptions{5000, 9, 10'000, 1, 8});
  auto eight = monte_carlo(l0(), MonteCarloOptions{5000, 9, 10'000, 8, 8});
  EXPECT_EQ(one.size_alleles, eight.size_alleles);
  EXPECT_EQ(one.structures, eight.structures);
  EXPECT_EQ(one.ranked_sizes, eight.ranked_sizes);
  EXPECT_EQ(one.censored, eight.censored);
}

TEST(Compare, PerfectData) {
  auto expected = std::map<std::string, double>{{"a", 0.5}, {"b", 0.25}, {"c", 0.25}};
  auto observed = std::map<std::string, std::uint64_t>{{"a", 400}, {"b", 200}, {"c", 200}};
  auto r = compare(expected, observed, 800);
  EXPECT_DOUBLE_EQ(r.total_variation, 0.0);
  EXPECT_DOUBLE_EQ(r.chi_square, 0.0);
  EXPECT_TRUE(r.pass());
}

TEST(Compare, DisjointSupports) {
  auto expected = std::map<std::string, double>{{"a", 0.5}, {"b", 0.5}};
  auto observed = std::map<std::string, std::uint64_t>{{"c", 100}};
  auto r = compare(expected, observed, 100);
  EXPECT_DOUBLE_EQ(r.total_variation, 1.0);
  EXPECT_FALSE(r.pass());
}

TEST(Compare, PoolsSmallCellsAndCountsOther) {
  auto expected = std::map<std::string, double>{{"a", 0.9}, {"b", 0.05}, {"c", 0.01}};
  auto observed = std::map<std::string, std::uint64_t>{{"a", 90}, {"b", 5}, {"c", 1}};
  auto r = compare(expected, observed, 100);
  EXPECT_GT(r.pooled_cells, 0u);
  auto other = std::find_if(r.cells.begin(), r.cells.end(), [](const CellReport& c) { return c.key == "other"; });
  ASSERT_NE(other, r.cells.end());
  EXPECT_EQ(other->observed, 4u);
  EXPECT_NEAR(other->probability, 0.04, 1e-15);
  EXPECT_GE(r.total_variation, 0.0);
  EXPECT_LE(r.total_variation, 1.0);
}

TEST(Compare, EmptyObservation) {
  expect_error(Errc::empty_observation, [] { compare({{"a", 1.0}}, {}, 0); });
}

TEST(Compare, KolmogorovTail) {
  EXPECT_NEAR(kolmogorov_tail(1.36), 0.0494, 5e-4);
  EXPECT_NEAR(kolmogorov_tail(1.0), 0.2700, 5e-4);
  EXPECT_DOUBLE_EQ(kolmogorov_tail(0.0), 1.0);
  EXPECT_LT(kolmogorov_tail(3.0), 1e-6);
}

TEST(Compare, DetectsBiasedSampler) {
  // Observed counts drawn from L0's grid with one cell inflated by 20 %.
  auto table = convolution_power<double>(l0(), 12, formula_box(12));
  auto expected = std::map<std::string, double>{};
  auto observed = std::map<std::string, std::uint64_t>{};
  const auto total = std::uint64_t{1'000'000};
  for (auto n = std::size_t{1}; n <= 12; ++n) {
    for (auto k = std::size_t{1}; k <= n; ++k) {
      auto p = p_tree_size_alleles(table, n, k);
      expected[format_cell({n, k})] = p;
      observed[format_cell({n, k})] = static_cast<std::uint64_t>(std::llround(p * double(total)));
    }
  }
  observed[format_cell({3, 2})] = static_cast<std::uint64_t>(std::llround(observed[format_cell({3, 2})] * 1.2));
  auto r = compare(expected, observed, total);
  EXPECT_FALSE(r.pass());
  EXPECT_GT(r.max_abs_z, 4.0);
}

TEST(MonteCarlo, L0GridAgreesWithFormula) {
  auto counts = monte_carlo(l0(), MonteCarloOptions{200'000, 2718, 100'000, 4, 0});
  auto table = convolution_power<double>(l0(), 25, formula_box(25));
  auto expected = std::map<std::string, double>{};
  auto observed = std::map<std::string, std::uint64_t>{};
  for (auto n = std::size_t{1}; n <= 25; ++n) {
    for (auto k = std::size_t{1}; k <= n; ++k) expected[format_cell({n, k})] = p_tree_size_alleles(table, n, k);
  }
  for (const auto& [cell, c] : counts.size_alleles) {
    if (cell.first <= 25) observed[format_cell(cell)] += c;
  }
  auto r = compare(expected, observed, counts.trees);
  for (const auto& f : r.failures) ADD_FAILURE() << f;
  EXPECT_GT(r.p_value, 1e-3);
  EXPECT_LT(counts.censoring_rate(), 0.01);
}

TEST(Asymptotic, GeometricThird) {
  auto r = tilted_cluster_asymptotic(CountDistribution::geometric(Rational{1, 3}), {250, 500, 1000, 2000});
  EXPECT_NEAR(r.theta, 1.5, 1e-10);
  EXPECT_NEAR(r.sigma_sq, 2.0, 1e-10);
  EXPECT_NEAR(r.limit, 1.0 / std::sqrt(4.0 * std::numbers::pi), 1e-12);
  EXPECT_FALSE(r.periodic);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_NEAR(r.rows.back().ratio, 1.0, 0.05);
  for (auto i = std::size_t{1}; i < r.rows.size(); ++i) {
    EXPECT_LT(std::abs(r.rows[i].ratio - 1.0), std::abs(r.rows[i - 1].ratio - 1.0));
  }
}

// Tilted geometric(1/3) is geometric(1/2), whose n-fold sum is negative
// binomial: P(S_n = n - 1) = C(2n - 2, n - 1) 2^{-(2n - 1)}.
TEST(Asymptotic, MatchesNegativeBinomialClosedForm) {
  auto r = tilted_cluster_asymptotic(CountDistribution::geometric(Rational{1, 3}), {1, 2, 10, 100});
  for (const auto& row : r.rows) {
    auto n = static_cast<double>(row.n);
    auto log_p = std::lgamma(2 * n - 1) - 2 * std::lgamma(n) - (2 * n - 1) * std::log(2.0);
    auto expected = std::pow(n, 1.5) * std::exp(log_p) / n;
    EXPECT_NEAR(row.scaled, expected, 1e-12 * std::max(1.0, expected)) << row.n;
  }
}

TEST(Asymptotic, NoTiltForBernoulli) {
  expect_error(Errc::no_tilt_exists,
               [] { tilted_cluster_asymptotic(CountDistribution::bernoulli(Rational{1, 2}), {10}); });
}

TEST(Asymptotic, FlagsPeriodicSupport) {
  auto even = CountDistribution::table(std::vector<Rational>{Rational{3, 4}, 0, Rational{1, 4}});
  EXPECT_TRUE(tilted_cluster_asymptotic(even, {10}).periodic);
}

TEST(Drift, ZeroIntensityIsFlat) {
  auto path = drift_probe(CountDistribution::poisson(1.0), 0.0, 100, 1.0, 3);
  EXPECT_EQ(path.sup_deviation, 0.0);
  for (auto v : path.values) EXPECT_EQ(v, 0.0);
}

TEST(Drift, DeterministicAndStartsAtZero) {
  auto a = drift_probe(CountDistribution::poisson(1.0), 2.0, 100, 1.0, 3);
  auto b = drift_probe(CountDistribution::poisson(1.0), 2.0, 100, 1.0, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.front(), 0.0);
  EXPECT_EQ(a.values.size(), 101u);
}

// The deviation has variance of order d / n: doubling n should roughly halve it.
TEST(Drift, VarianceShrinksWithN) {
  auto variances = std::vector<double>{};
  for (auto n : {100u, 200u, 400u}) {
    auto devs = std::vector<double>{};
    for (auto r = 0u; r < 60; ++r) devs.push_back(drift_probe(CountDistribution::poisson(1.0), 2.0, n, 1.0, 1000 + r).sup_deviation);
    auto mean = std::accumulate(devs.begin(), devs.end(), 0.0) / double(devs.size());
    auto var = 0.0;
    for (auto v : devs) var += (v - mean) * (v - mean);
    variances.push_back(var / double(devs.size() - 1));
  }
  auto slope = std::log2(variances[2] / variances[0]) / 2.0;
  EXPECT_GT(slope, -1.8);
  EXPECT_LT(slope, -0.4);
}

TEST(Conditioned, ForcedPartitions) {
  auto two = conditioned_mass_partitions(l0(), 2, 2, 50, 1);
  for (const auto& m : two.samples) EXPECT_EQ(m.ratios(), (std::vector<Rational>{Rational{1, 2}, Rational{1, 2}}));
  auto three = conditioned_mass_partitions(l0(), 3, 2, 50, 2);
  EXPECT_EQ(three.samples.size(), 50u);
  for (const auto& m : three.samples) EXPECT_EQ(m.ratios(), (std::vector<Rational>{Rational{2, 3}, Rational{1, 3}}));
  EXPECT_NEAR(three.mean_largest, 2.0 / 3.0, 1e-15);
}

TEST(Conditioned, Infeasible) {
  expect_error(Errc::infeasible_condition, [] { conditioned_mass_partitions(l0(), 2, 3, 1, 1); });
  expect_error(Errc::rejection_budget_exceeded, [] { conditioned_mass_partitions(l0(), 9, 5, 100, 1, 50); });
}

// Ranked block sizes under rejection against the conditional cluster-size law summed over the
// orderings that rank to the same multiset.
TEST(Conditioned, HistogramMatchesCyclicLaw) {
  auto n = std::size_t{6};
  auto k = std::size_t{3};
  auto samples = conditioned_mass_partitions(l0(), n, k, 20'000, 77);
  auto e = enumerate_trees(l0(), n);
  auto law = std::map<std::vector<std::size_t>, Rational>{};
  for (const auto& [sizes, p] : e.cyclic_sizes(n, k)) {
    auto ranked = sizes;
    std::ranges::sort(ranked, std::greater<>{});
    law[ranked] += p;
  }
  for (const auto& [ranked, p] : law) {
    auto pd = to_double(p);
    auto observed = double(samples.histogram[ranked]) / 20'000.0;
    EXPECT_NEAR(observed, pd, 5 * std::sqrt(pd * (1 - pd) / 20'000.0) + 1e-12);
  }
}

TEST(ExactCheck, L0PassesAndFaultIsCaught) {
  auto clean = check_exact_formulas(l0(), ExactCheckOptions{7, 6, std::nullopt});
  EXPECT_TRUE(clean.mismatches.empty());
  auto faulty = check_exact_formulas(l0(), ExactCheckOptions{7, 6, SizeAlleles{4, 2}});
  ASSERT_FALSE(faulty.mismatches.empty());
  EXPECT_EQ(faulty.mismatches.front().cell, "n=4,k=2");
}
