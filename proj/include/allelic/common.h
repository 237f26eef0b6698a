#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace allelic {

// Exact arithmetic for oracle checks. Expression templates are off so that
// generic code written for double also compiles for Rational.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

enum class Errc {
  not_subcritical,
  degenerate,
  mass_deficit,
  invalid_probability,
  budget_exceeded,
  no_tilt_exists,
  divergence_before_criticality,
  incomplete_sequence,
  inconsistent_partition,
  bad_sum,
  out_of_table,
  prefix_condition_violated,
  zero_denominator,
  size_mismatch,
  domain_error,
  explosion_guard,
  empty_observation,
  infeasible_condition,
  rejection_budget_exceeded,
  no_exact_form,
  parse_error,
  io_error,
};

auto to_string(Errc code) -> std::string_view;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  auto code() const noexcept -> Errc { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

inline auto to_double(double x) -> double { return x; }
inline auto to_double(const Rational& x) -> double { return x.convert_to<double>(); }

// Parses "0.25", "-1.5e-3", "1/3" or "3" into an exact rational.
auto parse_rational(std::string_view text) -> Rational;

auto format_rational(const Rational& x) -> std::string;

// Shortest decimal form that round-trips.
auto format_double(double x) -> std::string;

}  // namespace allelic
