#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "allelic/common.h"

namespace allelic {

// A law on the nonnegative integers, either a named family with an analytic
// pmf or an explicit finite table. Named families keep their parameters so
// that generating-function sums can run past any truncation point.
class CountDistribution {
 public:
  enum class Family { dirac, bernoulli, binomial, poisson, geometric, table };

  static auto dirac(std::size_t value) -> CountDistribution;
  static auto bernoulli(const Rational& p) -> CountDistribution;
  static auto binomial(std::size_t trials, const Rational& p) -> CountDistribution;
  static auto poisson(double rate) -> CountDistribution;
  // P(j) = (1 - a) a^j, j >= 0.
  static auto geometric(const Rational& a) -> CountDistribution;
  static auto table(std::vector<Rational> probabilities) -> CountDistribution;
  static auto table(std::vector<double> probabilities) -> CountDistribution;

  auto family() const -> Family { return family_; }
  auto name() const -> std::string;
  auto describe() const -> std::string;

  auto pmf(std::size_t j) const -> double;
  // -inf outside the support.
  auto log_pmf(std::size_t j) const -> double;
  auto mean() const -> double;
  auto variance() const -> double;

  auto finite_support() const -> bool;
  // Largest value with positive mass; only meaningful when finite_support().
  auto max_support() const -> std::size_t;
  // Radius of convergence of the generating function E(s^X).
  auto radius() const -> double;

  // Explicit table truncated so that the dropped upper tail is at most eps.
  // Finite-support families are returned whole with zero tail.
  struct Truncation {
    std::vector<double> pmf;
    double tail = 0.0;
  };
  auto truncate(double eps) const -> Truncation;

  // Exact table, available for finite support with rational parameters.
  auto exact_table() const -> std::optional<std::vector<Rational>>;

 private:
  CountDistribution() = default;

  Family family_ = Family::dirac;
  std::size_t trials_ = 0;
  double param_ = 0.0;
  std::optional<Rational> exact_param_;
  std::vector<double> table_;
  std::optional<std::vector<Rational>> exact_table_;
};

// Parses "poisson 1", "geometric 1/3", "bernoulli 0.5", "binomial 2 0.5",
// "dirac 1" or "table 0.25 0.5 0.25".
auto parse_count_distribution(const std::string& text) -> CountDistribution;

}  // namespace allelic
