#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "allelic/common.h"
#include "allelic/count_distribution.h"
#include "allelic/grid.h"

namespace allelic {

inline constexpr double k_default_tail_eps = 1e-12;
inline constexpr double k_mass_tolerance = 1e-12;

struct ValidationReport {
  double total_mass = 0.0;
  double tail_mass = 0.0;
  double mass_deficit = 0.0;  // 1 - total_mass - tail_mass
  double mean_total = 0.0;
  double mean_clone = 0.0;
  double mean_mutant = 0.0;
  bool clone_degenerate = false;
  bool mutant_degenerate = false;
  bool critical = false;
  std::optional<Errc> error;
  std::string message;

  auto ok() const -> bool { return !error.has_value(); }
};

// Non-throwing inspection of a candidate pmf (rows = clone count, cols = mutant count).
auto inspect(const Grid<double>& pmf, double tail_mass = 0.0) -> ValidationReport;
auto inspect(const Grid<Rational>& pmf) -> ValidationReport;

// Same as inspect, but throws Error{report.error} for invalid laws.
auto validate(const Grid<double>& pmf, double tail_mass = 0.0) -> ValidationReport;
auto validate(const Grid<Rational>& pmf) -> ValidationReport;

// Boundary laws such as pi_{0,0} = 1 are useful fixtures but violate the
// standing non-degeneracy assumption; they must be requested explicitly.
enum class Degeneracy { reject, allow };

// Joint law pi_{k,l} of (clone-children, mutant-children). Immutable once built;
// every constructor validates (critical or subcritical, both coordinates non-degenerate).
class JointOffspringLaw {
 public:
  // Floating law; tail_mass is the probability dropped by truncating an unbounded law.
  explicit JointOffspringLaw(Grid<double> pmf, double tail_mass = 0.0,
                             Degeneracy degeneracy = Degeneracy::reject);
  // Exact law; also fills the floating view.
  explicit JointOffspringLaw(Grid<Rational> pmf, Degeneracy degeneracy = Degeneracy::reject);

  auto pmf() const -> const Grid<double>& { return pmf_; }
  auto has_exact() const -> bool { return exact_.has_value(); }
  auto exact() const -> const Grid<Rational>&;

  template <typename T>
  auto grid() const -> const Grid<T>&;

  auto operator()(std::size_t k, std::size_t l) const -> double { return pmf_.at(k, l); }

  auto tail_mass() const -> double { return report_.tail_mass; }
  auto mean_total() const -> double { return report_.mean_total; }
  auto mean_clone() const -> double { return report_.mean_clone; }
  auto mean_mutant() const -> double { return report_.mean_mutant; }
  auto report() const -> const ValidationReport& { return report_; }

  // Largest clone / mutant count with positive mass (support box).
  auto clone_bound() const -> std::size_t { return pmf_.rows() - 1; }
  auto mutant_bound() const -> std::size_t { return pmf_.cols() - 1; }
  auto finite_support() const -> bool { return report_.tail_mass == 0.0; }

  // Analytic clone marginal when the law was built from named families.
  auto clone_family() const -> const std::optional<CountDistribution>& { return clone_family_; }
  auto independent() const -> bool { return independent_; }
  auto description() const -> const std::string& { return description_; }

  auto with_provenance(std::optional<CountDistribution> clone_family, bool independent,
                       std::string description) && -> JointOffspringLaw;

 private:
  Grid<double> pmf_;
  std::optional<Grid<Rational>> exact_;
  ValidationReport report_;
  std::optional<CountDistribution> clone_family_;
  bool independent_ = false;
  std::string description_ = "table";
};

auto validate(const JointOffspringLaw& law) -> ValidationReport;

// pi_{k,l} = P(clone = k) P(mutant = l); unbounded marginals are truncated at eps.
auto independent_law(const CountDistribution& clone, const CountDistribution& mutant,
                     double eps = k_default_tail_eps) -> JointOffspringLaw;

// Given xi = k children drawn from base, each child is a mutant independently
// with probability p: pi_{k,l} = C(k+l,k) (1-p)^k p^l base_{k+l}.
auto from_pruning(const CountDistribution& base, const Rational& p,
                  double eps = k_default_tail_eps) -> JointOffspringLaw;

// Law with the given exact table entries; missing cells are zero.
struct TableEntry {
  std::size_t clones;
  std::size_t mutants;
  Rational probability;
};
auto table_law(const std::vector<TableEntry>& entries, Degeneracy degeneracy = Degeneracy::reject)
    -> JointOffspringLaw;

template <typename T>
struct Marginals {
  std::vector<T> clone;
  std::vector<T> mutant;
  std::vector<T> total;
};

template <typename T>
auto marginals(const JointOffspringLaw& law) -> Marginals<T> {
  const auto& g = law.grid<T>();
  auto m = Marginals<T>{std::vector<T>(g.rows(), T(0)), std::vector<T>(g.cols(), T(0)),
                        std::vector<T>(g.rows() + g.cols() - 1, T(0))};
  for (auto k = std::size_t{0}; k < g.rows(); ++k) {
    for (auto l = std::size_t{0}; l < g.cols(); ++l) {
      const auto& p = g(k, l);
      m.clone[k] += p;
      m.mutant[l] += p;
      m.total[k + l] += p;
    }
  }
  return m;
}

struct ConvolutionOptions {
  // Largest clone / mutant index to keep. Entries inside the box are exact
  // because all steps are nonnegative.
  std::size_t max_clone_index = std::numeric_limits<std::size_t>::max();
  std::size_t max_mutant_index = std::numeric_limits<std::size_t>::max();
  std::size_t memory_cap_bytes = std::size_t{1} << 30;
};

// pi^{*n} for n = 1..n_max.
template <typename T>
class ConvolutionTable {
 public:
  ConvolutionTable(std::vector<Grid<T>> powers, std::size_t step_clone_bound,
                   std::size_t step_mutant_bound, std::size_t max_clone_index,
                   std::size_t max_mutant_index)
      : powers_{std::move(powers)},
        step_clone_bound_{step_clone_bound},
        step_mutant_bound_{step_mutant_bound},
        max_clone_index_{max_clone_index},
        max_mutant_index_{max_mutant_index} {}

  auto n_max() const -> std::size_t { return powers_.size(); }

  auto power(std::size_t n) const -> const Grid<T>& {
    check_n(n);
    return powers_[n - 1];
  }

  // pi^{*n}_{k,l}. Zero outside the natural support; OutOfTable when the
  // entry exists but was cropped away.
  auto at(std::size_t n, std::size_t k, std::size_t l) const -> T {
    check_n(n);
    if (k > n * step_clone_bound_ || l > n * step_mutant_bound_) return T(0);
    if (k > max_clone_index_ || l > max_mutant_index_) {
      fail(Errc::out_of_table, "entry (" + std::to_string(k) + "," + std::to_string(l) +
                                   ") of power " + std::to_string(n) + " lies outside the kept box");
    }
    return powers_[n - 1].at(k, l);
  }

  auto cropped() const -> bool {
    return max_clone_index_ < n_max() * step_clone_bound_ ||
           max_mutant_index_ < n_max() * step_mutant_bound_;
  }
  auto max_clone_index() const -> std::size_t { return max_clone_index_; }
  auto max_mutant_index() const -> std::size_t { return max_mutant_index_; }

 private:
  void check_n(std::size_t n) const {
    if (n == 0 || n > powers_.size()) {
      fail(Errc::out_of_table,
           "power " + std::to_string(n) + " not in table (n_max " + std::to_string(powers_.size()) + ")");
    }
  }

  std::vector<Grid<T>> powers_;
  std::size_t step_clone_bound_;
  std::size_t step_mutant_bound_;
  std::size_t max_clone_index_;
  std::size_t max_mutant_index_;
};

template <typename T>
auto convolution_power(const JointOffspringLaw& law, std::size_t n_max, ConvolutionOptions options = {})
    -> ConvolutionTable<T>;

extern template auto convolution_power<double>(const JointOffspringLaw&, std::size_t, ConvolutionOptions)
    -> ConvolutionTable<double>;
extern template auto convolution_power<Rational>(const JointOffspringLaw&, std::size_t, ConvolutionOptions)
    -> ConvolutionTable<Rational>;

// Box that keeps exactly the entries the allelic-partition formulas read for n <= n_max.
auto formula_box(std::size_t n_max) -> ConvolutionOptions;

struct TiltingResult {
  double theta = 1.0;
  double sigma_sq = 0.0;
  double z_theta = 1.0;
};

// theta > 1 with E(X theta^X) = E(theta^X), found by bisection on the tilted mean.
auto tilt(const CountDistribution& clone) -> TiltingResult;

// Uses the analytic clone marginal when the law carries one, the table otherwise.
auto tilt_clone_marginal(const JointOffspringLaw& law) -> TiltingResult;

// P~(j) = theta^j P(j) / z_theta for j < max_len. Infinite supports stop once the terms
// are decreasing and below eps relative to the accumulated mass.

auto tilted_pmf(const CountDistribution& clone, const TiltingResult& tilt, std::size_t max_len,
                double eps = 1e-17) -> std::vector<double>;

auto clone_marginal(const JointOffspringLaw& law) -> CountDistribution;

}  // namespace allelic
