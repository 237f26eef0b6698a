#include "allelic/count_distribution.h"

#include <cmath>
#include <sstream>

namespace allelic {

namespace {

void require_probability(const Rational& p, bool open_interval, const std::string& what) {
  auto bad = open_interval ? (p <= 0 || p >= 1) : (p < 0 || p > 1);
  if (bad) fail(Errc::invalid_probability, what + " parameter " + format_rational(p));
}

auto binomial_coefficient(std::size_t n, std::size_t k) -> double {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace

auto CountDistribution::dirac(std::size_t value) -> CountDistribution {
  auto d = CountDistribution{};
  d.family_ = Family::dirac;
  d.trials_ = value;
  return d;
}

auto CountDistribution::bernoulli(const Rational& p) -> CountDistribution {
  require_probability(p, false, "bernoulli");
  auto d = CountDistribution{};
  d.family_ = Family::bernoulli;
  d.trials_ = 1;
  d.param_ = to_double(p);
  d.exact_param_ = p;
  return d;
}

auto CountDistribution::binomial(std::size_t trials, const Rational& p) -> CountDistribution {
  require_probability(p, false, "binomial");
  auto d = CountDistribution{};
  d.family_ = Family::binomial;
  d.trials_ = trials;
  d.param_ = to_double(p);
  d.exact_param_ = p;
  return d;
}

auto CountDistribution::poisson(double rate) -> CountDistribution {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(Errc::invalid_probability, "poisson rate must be positive");
  }
  auto d = CountDistribution{};
  d.family_ = Family::poisson;
  d.param_ = rate;
  return d;
}

auto CountDistribution::geometric(const Rational& a) -> CountDistribution {
  if (a < 0 || a >= 1) fail(Errc::invalid_probability, "geometric parameter " + format_rational(a));
  auto d = CountDistribution{};
  d.family_ = Family::geometric;
  d.param_ = to_double(a);
  d.exact_param_ = a;
  return d;
}

auto CountDistribution::table(std::vector<Rational> probabilities) -> CountDistribution {
  auto d = CountDistribution{};
  d.family_ = Family::table;
  for (const auto& p : probabilities) {
    if (p < 0) fail(Errc::invalid_probability, "negative table entry " + format_rational(p));
    d.table_.push_back(to_double(p));
  }
  d.exact_table_ = std::move(probabilities);
  return d;
}

auto CountDistribution::table(std::vector<double> probabilities) -> CountDistribution {
  auto d = CountDistribution{};
  d.family_ = Family::table;
  for (auto p : probabilities) {
    if (!(p >= 0.0)) fail(Errc::invalid_probability, "negative table entry");
  }
  d.table_ = std::move(probabilities);
  return d;
}

auto CountDistribution::name() const -> std::string {
  switch (family_) {
    case Family::dirac: return "dirac";
    case Family::bernoulli: return "bernoulli";
    case Family::binomial: return "binomial";
    case Family::poisson: return "poisson";
    case Family::geometric: return "geometric";
    case Family::table: return "table";
  }
  return "?";
}

auto CountDistribution::describe() const -> std::string {
  auto os = std::ostringstream{};
  os << name();
  auto param = [&] {
    return exact_param_ ? format_rational(*exact_param_) : format_double(param_);
  };
  switch (family_) {
    case Family::dirac: os << ' ' << trials_; break;
    case Family::bernoulli: os << ' ' << param(); break;
    case Family::binomial: os << ' ' << trials_ << ' ' << param(); break;
    case Family::poisson: os << ' ' << param(); break;
    case Family::geometric: os << ' ' << param(); break;
    case Family::table:
      if (exact_table_) {
        for (const auto& p : *exact_table_) os << ' ' << format_rational(p);
      } else {
        for (auto p : table_) os << ' ' << format_double(p);
      }
      break;
  }
  return os.str();
}

auto CountDistribution::pmf(std::size_t j) const -> double {
  switch (family_) {
    case Family::dirac:
      return j == trials_ ? 1.0 : 0.0;
    case Family::bernoulli:
      return j == 0 ? 1.0 - param_ : (j == 1 ? param_ : 0.0);
    case Family::binomial: {
      if (j > trials_) return 0.0;
      if (param_ == 0.0) return j == 0 ? 1.0 : 0.0;
      if (param_ == 1.0) return j == trials_ ? 1.0 : 0.0;
      return binomial_coefficient(trials_, j) * std::pow(param_, static_cast<double>(j)) *
             std::pow(1.0 - param_, static_cast<double>(trials_ - j));
    }
    case Family::poisson:
      return std::exp(-param_ + static_cast<double>(j) * std::log(param_) - std::lgamma(j + 1.0));
    case Family::geometric:
      return (1.0 - param_) * std::pow(param_, static_cast<double>(j));
    case Family::table:
      return j < table_.size() ? table_[j] : 0.0;
  }
  return 0.0;
}

auto CountDistribution::log_pmf(std::size_t j) const -> double {
  switch (family_) {
    case Family::poisson:
      return -param_ + static_cast<double>(j) * std::log(param_) - std::lgamma(j + 1.0);
    case Family::geometric:
      if (param_ == 0.0) return j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
      return std::log1p(-param_) + static_cast<double>(j) * std::log(param_);
    default: {
      auto p = pmf(j);
      return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  }
}

auto CountDistribution::mean() const -> double {
  switch (family_) {
    case Family::dirac: return static_cast<double>(trials_);
    case Family::bernoulli: return param_;
    case Family::binomial: return static_cast<double>(trials_) * param_;
    case Family::poisson: return param_;
    case Family::geometric: return param_ / (1.0 - param_);
    case Family::table: {
      auto m = 0.0;
      for (auto j = std::size_t{0}; j < table_.size(); ++j) m += static_cast<double>(j) * table_[j];
      return m;
    }
  }
  return 0.0;
}

auto CountDistribution::variance() const -> double {
  switch (family_) {
    case Family::dirac: return 0.0;
    case Family::bernoulli: return param_ * (1.0 - param_);
    case Family::binomial: return static_cast<double>(trials_) * param_ * (1.0 - param_);
    case Family::poisson: return param_;
    case Family::geometric: return param_ / ((1.0 - param_) * (1.0 - param_));
    case Family::table: {
      auto m = mean();
      auto v = 0.0;
      for (auto j = std::size_t{0}; j < table_.size(); ++j) {
        v += (static_cast<double>(j) - m) * (static_cast<double>(j) - m) * table_[j];
      }
      return v;
    }
  }
  return 0.0;
}

auto CountDistribution::finite_support() const -> bool {
  switch (family_) {
    case Family::poisson: return false;
    case Family::geometric: return param_ == 0.0;
    default: return true;
  }
}

auto CountDistribution::max_support() const -> std::size_t {
  switch (family_) {
    case Family::dirac: return trials_;
    case Family::bernoulli: return param_ > 0.0 ? 1 : 0;
    case Family::binomial: return param_ > 0.0 ? trials_ : 0;
    case Family::table: {
      auto last = std::size_t{0};
      for (auto j = std::size_t{0}; j < table_.size(); ++j) {
        if (table_[j] > 0.0) last = j;
      }
      return last;
    }
    case Family::geometric:
      if (param_ == 0.0) return 0;
      [[fallthrough]];
    case Family::poisson: return std::numeric_limits<std::size_t>::max();
  }
  return 0;
}

auto CountDistribution::radius() const -> double {
  if (family_ == Family::geometric && param_ > 0.0) return 1.0 / param_;
  return std::numeric_limits<double>::infinity();
}

auto CountDistribution::truncate(double eps) const -> Truncation {
  auto out = Truncation{};
  if (finite_support()) {
    auto top = max_support();
    out.pmf.resize(top + 1);
    for (auto j = std::size_t{0}; j <= top; ++j) out.pmf[j] = pmf(j);
    return out;
  }
  if (!(eps > 0.0)) fail(Errc::domain_error, "truncation of an unbounded law needs eps > 0");
  if (family_ == Family::geometric) {
    // Tail beyond J is a^(J+1).
    auto j = std::size_t{0};
    auto tail = param_;
    while (tail > eps) {
      ++j;
      tail *= param_;
    }
    out.pmf.resize(j + 1);
    for (auto i = std::size_t{0}; i <= j; ++i) out.pmf[i] = pmf(i);
    out.tail = tail;
    return out;
  }
  // Poisson: accumulate past the mode until the remaining mass is below eps.
  auto cumulative = 0.0;
  auto j = std::size_t{0};
  for (;; ++j) {
    out.pmf.push_back(pmf(j));
    cumulative += out.pmf.back();
    if (static_cast<double>(j) > param_ && 1.0 - cumulative <= eps) break;
    if (j > 100000) fail(Errc::budget_exceeded, "poisson truncation did not converge");
  }
  out.tail = std::max(0.0, 1.0 - cumulative);
  return out;
}

auto CountDistribution::exact_table() const -> std::optional<std::vector<Rational>> {
  switch (family_) {
    case Family::dirac: {
      auto t = std::vector<Rational>(trials_ + 1, Rational{0});
      t[trials_] = 1;
      return t;
    }
    case Family::bernoulli:
      return std::vector<Rational>{Rational{1} - *exact_param_, *exact_param_};
    case Family::binomial: {
      const auto& p = *exact_param_;
      auto q = Rational{1} - p;
      auto t = std::vector<Rational>(trials_ + 1, Rational{0});
      auto coeff = boost::multiprecision::mpz_int{1};
      for (auto j = std::size_t{0}; j <= trials_; ++j) {
        auto term = Rational{coeff};
        for (auto i = std::size_t{0}; i < j; ++i) term *= p;
        for (auto i = j; i < trials_; ++i) term *= q;
        t[j] = term;
        coeff = coeff * (trials_ - j) / (j + 1);
      }
      return t;
    }
    case Family::geometric:
      if (param_ == 0.0) return std::vector<Rational>{Rational{1}};
      return std::nullopt;
    case Family::poisson:
      return std::nullopt;
    case Family::table:
      return exact_table_;
  }
  return std::nullopt;
}

auto parse_count_distribution(const std::string& text) -> CountDistribution {
  auto is = std::istringstream{text};
  auto name = std::string{};
  is >> name;
  auto words = std::vector<std::string>{};
  for (auto w = std::string{}; is >> w;) words.push_back(w);
  auto need = [&](std::size_t n) {
    if (words.size() != n) {
      fail(Errc::parse_error, "family '" + name + "' expects " + std::to_string(n) + " parameter(s)");
    }
  };
  auto as_count = [&](const std::string& w) {
    auto r = parse_rational(w);
    if (r < 0 || denominator(r) != 1) fail(Errc::parse_error, "expected a count, got '" + w + "'");
    return static_cast<std::size_t>(numerator(r).convert_to<unsigned long long>());
  };
  if (name == "dirac") {
    need(1);
    return CountDistribution::dirac(as_count(words[0]));
  }
  if (name == "bernoulli") {
    need(1);
    return CountDistribution::bernoulli(parse_rational(words[0]));
  }
  if (name == "binomial") {
    need(2);
    return CountDistribution::binomial(as_count(words[0]), parse_rational(words[1]));
  }
  if (name == "poisson") {
    need(1);
    return CountDistribution::poisson(to_double(parse_rational(words[0])));
  }
  if (name == "geometric") {
    need(1);
    return CountDistribution::geometric(parse_rational(words[0]));
  }
  if (name == "table") {
    if (words.empty()) fail(Errc::parse_error, "table needs at least one entry");
    auto t = std::vector<Rational>{};
    for (const auto& w : words) t.push_back(parse_rational(w));
    return CountDistribution::table(std::move(t));
  }
  fail(Errc::parse_error, "unknown family '" + name + "'");
}

}  // namespace allelic
