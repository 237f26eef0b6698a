#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "allelic/common.h"
#include "allelic/offspring_law.h"

namespace allelic {

// Fraction of the n cyclic shifts of `values` whose partial sums first reach
// -k at step n, where -k is the total. Entries must be >= -1.
auto ballot_probability(std::span<const long> values) -> Rational;

// b / sqrt(2 pi sigma_sq a^3).
auto limit_mass_partition_intensity(double b, double sigma_sq, double a) -> double;

template <typename T>
struct TruncatedLaw {
  std::vector<T> pmf;
  double residual_mass = 0.0;  // 1 - sum(pmf)
};

template <typename T>
struct Estimate {
  T value{};
  double residual_bound = 0.0;
};

enum class AlleleRoute { direct, dwass_on_nu };

// P(T+_1 = n, A_1 = k) = pi^{*n}_{n-k,k-1} / n.
template <typename T>
auto p_tree_size_alleles(const ConvolutionTable<T>& table, std::size_t n, std::size_t k) -> T {
  if (k < 1 || k > n) return T(0);
  return table.at(n, n - k, k - 1) / T(n);
}

// P(|C_1| = n, M_1 = l) = pi^{*n}_{n-1,l} / n.
template <typename T>
auto p_cluster_size_mutants(const ConvolutionTable<T>& table, std::size_t n, std::size_t l) -> T {
  if (n < 1) return T(0);
  return table.at(n, n - 1, l) / T(n);
}

// Product over clusters of pi^{*n_j}_{n_j-1,l_j} / n_j. Every strict prefix
// must keep the breadth-first exploration alive: l_1 + ... + l_j > j - 1.
template <typename T>
auto p_allelic_tree(const ConvolutionTable<T>& table, std::span<const std::pair<std::size_t, std::size_t>> query)
    -> T {
  if (query.empty()) fail(Errc::domain_error, "empty allelic tree query");
  auto prefix = std::size_t{0};
  for (auto j = std::size_t{1}; j < query.size(); ++j) {
    prefix += query[j - 1].second;
    if (prefix <= j - 1) {
      fail(Errc::prefix_condition_violated, "mutant prefix sum " + std::to_string(prefix) + " at cluster " +
                                                std::to_string(j) + " closes the tree early");
    }
  }
  auto value = T(1);
  for (const auto& [n, l] : query) {
    if (n < 1) fail(Errc::domain_error, "cluster sizes must be positive");
    value *= p_cluster_size_mutants(table, n, l);
  }
  return value;
}

// nu_l = sum_{n <= n_max} pi^{*n}_{n-1,l} / n, the law of M_1, with the
// unallocated mass as residual.
template <typename T>
auto mutant_offspring_law(const ConvolutionTable<T>& table) -> TruncatedLaw<T> {
  auto out = TruncatedLaw<T>{};
  auto top = table.max_mutant_index();
  auto total = T(0);
  for (auto n = std::size_t{1}; n <= table.n_max(); ++n) {
    if (n - 1 > table.max_clone_index()) break;
    const auto& g = table.power(n);
    if (n - 1 >= g.rows()) continue;
    auto cols = std::min<std::size_t>(g.cols(), top == static_cast<std::size_t>(-1) ? g.cols() : top + 1);
    if (out.pmf.size() < cols) out.pmf.resize(cols, T(0));
    for (auto l = std::size_t{0}; l < cols; ++l) {
      auto v = g(n - 1, l) / T(n);
      out.pmf[l] += v;
      total += v;
    }
  }
  out.residual_mass = std::max(0.0, to_double(T(1) - total));
  return out;
}

// 1 - P(T+_1 <= n_max), from the (T, A) grid.
template <typename T>
auto tree_size_residual(const ConvolutionTable<T>& table) -> double {
  auto total = T(0);
  for (auto n = std::size_t{1}; n <= table.n_max(); ++n) {
    for (auto k = std::size_t{1}; k <= n; ++k) total += p_tree_size_alleles(table, n, k);
  }
  return std::max(0.0, to_double(T(1) - total));
}

// P(A_1 = k) either as sum_n pi^{*n}_{n-k,k-1}/n or as nu^{*k}_{k-1}/k.
template <typename T>
auto p_num_alleles(const ConvolutionTable<T>& table, std::size_t k, AlleleRoute route) -> Estimate<T> {
  if (k < 1) fail(Errc::domain_error, "allele count must be at least 1");
  auto out = Estimate<T>{};
  if (route == AlleleRoute::direct) {
    for (auto n = k; n <= table.n_max(); ++n) out.value += p_tree_size_alleles(table, n, k);
    out.residual_bound = tree_size_residual(table);
    return out;
  }
  auto nu = mutant_offspring_law(table);
  // Truncating nu by r changes nu^{*k} by at most 1 - (1-r)^k <= k r.
  out.residual_bound = nu.residual_mass;
  if (nu.pmf.empty()) return out;
  auto power = std::vector<T>(nu.pmf.begin(), nu.pmf.begin() + std::min(nu.pmf.size(), k));
  for (auto i = std::size_t{1}; i < k; ++i) {
    power = convolve<T>(std::span<const T>{power}, std::span<const T>{nu.pmf}, k);
  }
  out.value = k - 1 < power.size() ? power[k - 1] / T(k) : T(0);
  return out;
}

// Law of (|C_1|, ..., |C_k|) after a uniform cyclic shift, given T+_1 = n and
// A_1 = k. The sum over mutant compositions runs as a DP over (cluster,
// remaining budget).
template <typename T>
auto conditional_cluster_sizes(const ConvolutionTable<T>& table, std::size_t n, std::size_t k,
                               std::span<const std::size_t> sizes) -> T {
  if (sizes.size() != k) {
    fail(Errc::size_mismatch, std::to_string(sizes.size()) + " sizes for " + std::to_string(k) + " clusters");
  }
  auto sum = std::size_t{0};
  for (auto s : sizes) {
    if (s == 0) fail(Errc::size_mismatch, "cluster sizes must be positive");
    sum += s;
  }
  if (sum != n) fail(Errc::size_mismatch, "sizes sum to " + std::to_string(sum) + ", not " + std::to_string(n));
  auto denominator = k <= n ? table.at(n, n - k, k - 1) : T(0);
  if (denominator == 0) {
    fail(Errc::zero_denominator, "P(T = " + std::to_string(n) + ", A = " + std::to_string(k) + ") is zero");
  }
  // ways[b] = sum over l_j..l_k with total b of the product of cluster weights.
  auto ways = std::vector<T>(k, T(0));
  ways[0] = T(1);
  for (auto j = k; j-- > 0;) {
    auto next = std::vector<T>(k, T(0));
    for (auto b = std::size_t{0}; b < k; ++b) {
      for (auto l = std::size_t{0}; l <= b; ++l) {
        if (ways[b - l] == 0) continue;
        auto w = p_cluster_size_mutants(table, sizes[j], l);
        if (w != 0) next[b] += w * ways[b - l];
      }
    }
    ways = std::move(next);
  }
  return T(n) * ways[k - 1] / (T(k) * denominator);
}

// P(T+_1 = n) = P(xi+_1 + ... + xi+_n = n - 1) / n from the total-children
// marginal alone, n = 1..n_max (index 0 unused).
template <typename T>
auto dwass_tree_size_law(const JointOffspringLaw& law, std::size_t n_max) -> std::vector<T> {
  auto step = marginals<T>(law).total;
  auto out = std::vector<T>(n_max + 1, T(0));
  auto power = std::vector<T>(step.begin(), step.begin() + std::min(step.size(), n_max));
  for (auto n = std::size_t{1}; n <= n_max; ++n) {
    if (n > 1) power = convolve<T>(std::span<const T>{power}, std::span<const T>{step}, n_max);
    out[n] = n - 1 < power.size() ? power[n - 1] / T(n) : T(0);
  }
  return out;
}

}  // namespace allelic
