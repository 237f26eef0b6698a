#include "allelic/offspring_law.h"

#include <cmath>

namespace allelic {

namespace {

template <typename T>
auto trimmed(const Grid<T>& g) -> Grid<T> {
  auto rows = std::size_t{0};
  auto cols = std::size_t{0};
  for (auto k = std::size_t{0}; k < g.rows(); ++k) {
    for (auto l = std::size_t{0}; l < g.cols(); ++l) {
      if (g(k, l) != 0) {
        rows = std::max(rows, k + 1);
        cols = std::max(cols, l + 1);
      }
    }
  }
  auto out = Grid<T>{std::max<std::size_t>(rows, 1), std::max<std::size_t>(cols, 1)};
  for (auto k = std::size_t{0}; k < rows; ++k) {
    for (auto l = std::size_t{0}; l < cols; ++l) out(k, l) = g(k, l);
  }
  return out;
}

template <typename T>
auto inspect_generic(const Grid<T>& pmf, double tail_mass) -> ValidationReport {
  auto r = ValidationReport{};
  r.tail_mass = tail_mass;
  auto set_error = [&](Errc code, std::string msg) {
    if (!r.error) {
      r.error = code;
      r.message = std::move(msg);
    }
  };
  if (pmf.empty()) {
    set_error(Errc::mass_deficit, "empty pmf");
    r.mass_deficit = 1.0;
    return r;
  }
  auto total = T(0);
  auto mean_c = T(0);
  auto mean_m = T(0);
  auto clone_mass = T(0);
  auto mutant_mass = T(0);
  for (auto k = std::size_t{0}; k < pmf.rows(); ++k) {
    for (auto l = std::size_t{0}; l < pmf.cols(); ++l) {
      const auto& p = pmf(k, l);
      if (p < 0) set_error(Errc::invalid_probability, "negative probability at (" + std::to_string(k) + "," +
                                                          std::to_string(l) + ")");
      total += p;
      mean_c += p * T(k);
      mean_m += p * T(l);
      if (k > 0) clone_mass += p;
      if (l > 0) mutant_mass += p;
    }
  }
  r.total_mass = to_double(total);
  r.mean_clone = to_double(mean_c);
  r.mean_mutant = to_double(mean_m);
  r.mean_total = r.mean_clone + r.mean_mutant;
  r.clone_degenerate = clone_mass == 0;
  r.mutant_degenerate = mutant_mass == 0;

  if constexpr (std::is_same_v<T, Rational>) {
    r.mass_deficit = to_double(Rational{1} - total);
    if (total != 1) set_error(Errc::mass_deficit, "exact probabilities sum to " + format_rational(total));
    if (mean_c + mean_m > 1) set_error(Errc::not_subcritical, "mean total offspring " +
                                                                 format_rational(mean_c + mean_m) + " > 1");
    r.critical = mean_c + mean_m == 1;
  } else {
    r.mass_deficit = 1.0 - r.total_mass - tail_mass;
    if (!(std::abs(r.mass_deficit) <= k_mass_tolerance)) {
      set_error(Errc::mass_deficit, "probabilities plus tail differ from 1 by " + format_double(r.mass_deficit));
    }
    if (!(r.mean_total <= 1.0 + k_mass_tolerance)) {
      set_error(Errc::not_subcritical, "mean total offspring " + format_double(r.mean_total) + " > 1");
    }
    r.critical = r.mean_total >= 1.0 - 1e-9;
  }
  if (r.clone_degenerate || r.mutant_degenerate) {
    set_error(Errc::degenerate, r.clone_degenerate ? "clone-children count is identically zero"
                                                   : "mutant-children count is identically zero");
  }
  return r;
}

auto throw_if_invalid(ValidationReport r) -> ValidationReport {
  if (r.error) fail(*r.error, r.message);
  return r;
}

auto construction_check(ValidationReport r, Degeneracy degeneracy) -> ValidationReport {
  if (r.error && *r.error == Errc::degenerate && degeneracy == Degeneracy::allow) {
    r.error.reset();
    r.message.clear();
  }
  return throw_if_invalid(std::move(r));
}

auto log_binomial(std::size_t n, std::size_t k) -> double {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

auto inspect(const Grid<double>& pmf, double tail_mass) -> ValidationReport {
  return inspect_generic(pmf, tail_mass);
}

auto inspect(const Grid<Rational>& pmf) -> ValidationReport { return inspect_generic(pmf, 0.0); }

auto validate(const Grid<double>& pmf, double tail_mass) -> ValidationReport {
  return throw_if_invalid(inspect(pmf, tail_mass));
}

auto validate(const Grid<Rational>& pmf) -> ValidationReport { return throw_if_invalid(inspect(pmf)); }

auto validate(const JointOffspringLaw& law) -> ValidationReport {
  if (law.has_exact()) return validate(law.exact());
  return validate(law.pmf(), law.tail_mass());
}

JointOffspringLaw::JointOffspringLaw(Grid<double> pmf, double tail_mass, Degeneracy degeneracy)
    : pmf_{trimmed(pmf)} {
  if (!(tail_mass >= 0.0)) fail(Errc::invalid_probability, "negative tail mass");
  report_ = construction_check(inspect(pmf_, tail_mass), degeneracy);
}

JointOffspringLaw::JointOffspringLaw(Grid<Rational> pmf, Degeneracy degeneracy)
    : exact_{trimmed(pmf)} {
  report_ = construction_check(inspect(*exact_), degeneracy);
  pmf_ = Grid<double>{exact_->rows(), exact_->cols()};
  for (auto k = std::size_t{0}; k < exact_->rows(); ++k) {
    for (auto l = std::size_t{0}; l < exact_->cols(); ++l) pmf_(k, l) = to_double((*exact_)(k, l));
  }
}

auto JointOffspringLaw::exact() const -> const Grid<Rational>& {
  if (!exact_) fail(Errc::no_exact_form, "law '" + description_ + "' has no exact rational form");
  return *exact_;
}

template <>
auto JointOffspringLaw::grid<double>() const -> const Grid<double>& {
  return pmf_;
}

template <>
auto JointOffspringLaw::grid<Rational>() const -> const Grid<Rational>& {
  return exact();
}

auto JointOffspringLaw::with_provenance(std::optional<CountDistribution> clone_family, bool independent,
                                        std::string description) && -> JointOffspringLaw {
  clone_family_ = std::move(clone_family);
  independent_ = independent;
  description_ = std::move(description);
  return std::move(*this);
}

auto independent_law(const CountDistribution& clone, const CountDistribution& mutant, double eps)
    -> JointOffspringLaw {
  auto description = "independent clone=" + clone.describe() + " mutant=" + mutant.describe();
  auto exact_c = clone.exact_table();
  auto exact_m = mutant.exact_table();
  if (exact_c && exact_m) {
    auto g = Grid<Rational>{exact_c->size(), exact_m->size()};
    for (auto k = std::size_t{0}; k < exact_c->size(); ++k) {
      for (auto l = std::size_t{0}; l < exact_m->size(); ++l) g(k, l) = (*exact_c)[k] * (*exact_m)[l];
    }
    return JointOffspringLaw{std::move(g)}.with_provenance(clone, true, std::move(description));
  }
  auto tc = clone.truncate(eps);
  auto tm = mutant.truncate(eps);
  auto g = Grid<double>{tc.pmf.size(), tm.pmf.size()};
  for (auto k = std::size_t{0}; k < tc.pmf.size(); ++k) {
    for (auto l = std::size_t{0}; l < tm.pmf.size(); ++l) g(k, l) = tc.pmf[k] * tm.pmf[l];
  }
  auto tail = 1.0 - (1.0 - tc.tail) * (1.0 - tm.tail);
  auto mass = g.sum();
  // Keep the recorded tail consistent with the actual summed mass.
  tail = std::max(tail, 1.0 - mass);
  return JointOffspringLaw{std::move(g), tail}.with_provenance(clone, true, std::move(description));
}

auto from_pruning(const CountDistribution& base, const Rational& p, double eps) -> JointOffspringLaw {
  if (p <= 0 || p >= 1) fail(Errc::invalid_probability, "pruning probability " + format_rational(p));
  auto description = "pruning base=" + base.describe() + " p=" + format_rational(p);
  auto clone_family = std::optional<CountDistribution>{};
  auto independent = false;
  if (base.family() == CountDistribution::Family::poisson) {
    // Thinning a Poisson law gives independent Poisson coordinates.
    clone_family = CountDistribution::poisson(base.mean() * (1.0 - to_double(p)));
    independent = true;
  }

  if (auto exact = base.exact_table()) {
    auto top = exact->size();
    auto q = Rational{1} - p;
    auto g = Grid<Rational>{top, top};
    for (auto total = std::size_t{0}; total < top; ++total) {
      if ((*exact)[total] == 0) continue;
      auto coeff = boost::multiprecision::mpz_int{1};
      for (auto l = std::size_t{0}; l <= total; ++l) {
        auto k = total - l;
        auto term = Rational{coeff} * (*exact)[total];
        for (auto i = std::size_t{0}; i < k; ++i) term *= q;
        for (auto i = std::size_t{0}; i < l; ++i) term *= p;
        g(k, l) = term;
        coeff = coeff * (total - l) / (l + 1);
      }
    }
    return JointOffspringLaw{std::move(g)}.with_provenance(clone_family, independent, std::move(description));
  }

  auto t = base.truncate(eps);
  auto pd = to_double(p);
  auto top = t.pmf.size();
  auto g = Grid<double>{top, top};
  for (auto total = std::size_t{0}; total < top; ++total) {
    if (t.pmf[total] == 0.0) continue;
    for (auto l = std::size_t{0}; l <= total; ++l) {
      auto k = total - l;
      g(k, l) = std::exp(log_binomial(total, k) + static_cast<double>(k) * std::log1p(-pd) +
                         static_cast<double>(l) * std::log(pd)) *
                t.pmf[total];
    }
  }
  auto tail = std::max(t.tail, 1.0 - g.sum());
  return JointOffspringLaw{std::move(g), tail}.with_provenance(clone_family, independent, std::move(description));
}

auto table_law(const std::vector<TableEntry>& entries, Degeneracy degeneracy) -> JointOffspringLaw {
  auto rows = std::size_t{1};
  auto cols = std::size_t{1};
  for (const auto& e : entries) {
    rows = std::max(rows, e.clones + 1);
    cols = std::max(cols, e.mutants + 1);
  }
  auto g = Grid<Rational>{rows, cols};
  for (const auto& e : entries) g(e.clones, e.mutants) += e.probability;
  return JointOffspringLaw{std::move(g), degeneracy};
}

auto formula_box(std::size_t n_max) -> ConvolutionOptions {
  auto options = ConvolutionOptions{};
  options.max_clone_index = n_max == 0 ? 0 : n_max - 1;
  options.max_mutant_index = n_max == 0 ? 0 : n_max - 1;
  return options;
}

template <typename T>
auto convolution_power(const JointOffspringLaw& law, std::size_t n_max, ConvolutionOptions options)
    -> ConvolutionTable<T> {
  if (n_max == 0) fail(Errc::domain_error, "n_max must be at least 1");
  const auto& base = law.grid<T>();
  auto kc = law.clone_bound();
  auto km = law.mutant_bound();

  // Footprint estimate; rationals are charged a nominal 64 bytes per entry.
  auto cell_bytes = std::is_same_v<T, Rational> ? std::size_t{64} : sizeof(T);
  auto bytes = std::size_t{0};
  for (auto n = std::size_t{1}; n <= n_max; ++n) {
    auto rows = std::min(n * kc, options.max_clone_index) + 1;
    auto cols = std::min(n * km, options.max_mutant_index) + 1;
    bytes += rows * cols * cell_bytes;
    if (bytes > options.memory_cap_bytes) {
      fail(Errc::budget_exceeded, "convolution table needs more than " +
                                      std::to_string(options.memory_cap_bytes) + " bytes");
    }
  }

  auto rows_cap = options.max_clone_index == std::numeric_limits<std::size_t>::max()
                      ? options.max_clone_index
                      : options.max_clone_index + 1;
  auto cols_cap = options.max_mutant_index == std::numeric_limits<std::size_t>::max()
                      ? options.max_mutant_index
                      : options.max_mutant_index + 1;
  auto first = Grid<T>{std::min(base.rows(), rows_cap), std::min(base.cols(), cols_cap)};
  for (auto k = std::size_t{0}; k < first.rows(); ++k) {
    for (auto l = std::size_t{0}; l < first.cols(); ++l) first(k, l) = base(k, l);
  }
  auto powers = std::vector<Grid<T>>{};
  powers.reserve(n_max);
  powers.push_back(std::move(first));
  for (auto n = std::size_t{2}; n <= n_max; ++n) {
    powers.push_back(convolve(powers.back(), base, rows_cap, cols_cap));
  }
  return ConvolutionTable<T>{std::move(powers), kc, km, options.max_clone_index, options.max_mutant_index};
}

template auto convolution_power<double>(const JointOffspringLaw&, std::size_t, ConvolutionOptions)
    -> ConvolutionTable<double>;
template auto convolution_power<Rational>(const JointOffspringLaw&, std::size_t, ConvolutionOptions)
    -> ConvolutionTable<Rational>;

namespace {

struct TiltedMoments {
  double m0 = 0.0;  // E(theta^X)
  double m1 = 0.0;  // E(X theta^X)
  double m2 = 0.0;  // E(X^2 theta^X)
  bool finite = true;

  auto mean() const -> double { return m1 / m0; }
};

constexpr std::size_t k_max_series_terms = 10'000'000;

auto tilted_moments(const CountDistribution& d, double theta) -> TiltedMoments {
  auto m = TiltedMoments{};
  if (theta >= d.radius()) {
    m.finite = false;
    return m;
  }
  auto log_theta = std::log(theta);
  auto previous = std::numeric_limits<double>::infinity();
  auto last = d.finite_support() ? d.max_support() : k_max_series_terms;
  for (auto j = std::size_t{0}; j <= last; ++j) {
    auto lp = d.log_pmf(j);
    auto term = std::isfinite(lp) ? std::exp(lp + static_cast<double>(j) * log_theta) : 0.0;
    auto x = static_cast<double>(j);
    m.m0 += term;
    m.m1 += x * term;
    m.m2 += x * x * term;
    if (!std::isfinite(m.m2)) {
      m.finite = false;
      return m;
    }
    if (!d.finite_support() && j > 0 && term < previous && x * x * term <= 1e-18 * m.m2) return m;
    previous = term;
  }
  if (!d.finite_support()) m.finite = false;
  return m;
}

}  // namespace

auto tilt(const CountDistribution& clone) -> TiltingResult {
  auto mean_at = [&](double theta) { return tilted_moments(clone, theta); };
  auto at_one = mean_at(1.0);
  if (!at_one.finite || !(at_one.mean() < 1.0)) {
    fail(Errc::no_tilt_exists, "clone marginal " + clone.describe() + " is not strictly subcritical");
  }
  if (clone.finite_support() && clone.max_support() <= 1) {
    fail(Errc::no_tilt_exists, "clone marginal " + clone.describe() +
                                   " is supported by {0,1}; its tilted mean stays below 1");
  }

  auto lo = 1.0;
  auto hi = 0.0;
  auto radius = clone.radius();
  if (std::isinf(radius)) {
    for (auto candidate = 2.0; candidate < 1e300; candidate *= 2.0) {
      auto m = mean_at(candidate);
      if (!m.finite) {
        fail(Errc::divergence_before_criticality, "tilted moments diverge at theta = " + format_double(candidate));
      }
      if (m.mean() >= 1.0) {
        hi = candidate;
        break;
      }
      lo = candidate;
    }
    if (hi == 0.0) fail(Errc::no_tilt_exists, "tilted mean stays below 1");
  } else {
    for (auto step = 1; step <= 60; ++step) {
      auto candidate = 1.0 + (radius - 1.0) * (1.0 - std::ldexp(1.0, -step));
      auto m = mean_at(candidate);
      if (!m.finite) break;
      if (m.mean() >= 1.0) {
        hi = candidate;
        break;
      }
      lo = candidate;
    }
    if (hi == 0.0) {
      fail(Errc::divergence_before_criticality,
           "radius of convergence " + format_double(radius) + " reached before the tilted mean reaches 1");
    }
  }

  for (auto iter = 0; iter < 400 && hi - lo > 1e-13 * hi; ++iter) {
    auto mid = 0.5 * (lo + hi);
    if (mean_at(mid).mean() < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  auto result = TiltingResult{};
  result.theta = 0.5 * (lo + hi);
  auto m = mean_at(result.theta);
  result.z_theta = m.m0;
  result.sigma_sq = m.m2 / m.m0 - 1.0;
  return result;
}

auto clone_marginal(const JointOffspringLaw& law) -> CountDistribution {
  if (law.clone_family()) return *law.clone_family();
  return CountDistribution::table(marginals<double>(law).clone);
}

auto tilt_clone_marginal(const JointOffspringLaw& law) -> TiltingResult { return tilt(clone_marginal(law)); }

auto tilted_pmf(const CountDistribution& clone, const TiltingResult& tilt, std::size_t max_len, double eps)
    -> std::vector<double> {
  auto out = std::vector<double>{};
  auto log_theta = std::log(tilt.theta);
  auto log_z = std::log(tilt.z_theta);
  auto cumulative = 0.0;
  auto last = clone.finite_support() ? std::min(clone.max_support() + 1, max_len) : max_len;
  for (auto j = std::size_t{0}; j < last; ++j) {
    auto lp = clone.log_pmf(j);
    auto p = std::isfinite(lp) ? std::exp(lp + static_cast<double>(j) * log_theta - log_z) : 0.0;
    out.push_back(p);
    cumulative += p;
    // 1 - cumulative cannot resolve eps in double, so stop on small decreasing terms.
    if (!clone.finite_support() && j > 1 && p <= out[j - 1] && p < eps * cumulative) break;
  }
  return out;
}

}  // namespace allelic
