#include "allelic/common.h"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace allelic {

auto to_string(Errc code) -> std::string_view {
  switch (code) {
    case Errc::not_subcritical: return "NotSubcritical";
    case Errc::degenerate: return "Degenerate";
    case Errc::mass_deficit: return "MassDeficit";
    case Errc::invalid_probability: return "InvalidProbability";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::no_tilt_exists: return "NoTiltExists";
    case Errc::divergence_before_criticality: return "DivergenceBeforeCriticality";
    case Errc::incomplete_sequence: return "IncompleteSequence";
    case Errc::inconsistent_partition: return "InconsistentPartition";
    case Errc::bad_sum: return "BadSum";
    case Errc::out_of_table: return "OutOfTable";
    case Errc::prefix_condition_violated: return "PrefixConditionViolated";
    case Errc::zero_denominator: return "ZeroDenominator";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::domain_error: return "DomainError";
    case Errc::explosion_guard: return "ExplosionGuard";
    case Errc::empty_observation: return "EmptyObservation";
    case Errc::infeasible_condition: return "InfeasibleCondition";
    case Errc::rejection_budget_exceeded: return "RejectionBudgetExceeded";
    case Errc::no_exact_form: return "NoExactForm";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error{std::string{to_string(code)} + ": " + what}, code_{code} {}

void fail(Errc code, const std::string& what) { throw Error{code, what}; }

namespace {

auto trim(std::string_view s) -> std::string_view {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

auto parse_decimal(std::string_view text) -> Rational {
  auto s = text;
  auto negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto exponent = 0L;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    auto exp_text = s.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size()) {
      fail(Errc::parse_error, "bad exponent in number '" + std::string{text} + "'");
    }
    s = s.substr(0, e);
  }
  auto digits = std::string{};
  auto seen_point = false;
  auto seen_digit = false;
  for (auto ch : s) {
    if (ch == '.') {
      if (seen_point) fail(Errc::parse_error, "bad number '" + std::string{text} + "'");
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point) --exponent;
    } else {
      fail(Errc::parse_error, "bad number '" + std::string{text} + "'");
    }
  }
  if (!seen_digit) fail(Errc::parse_error, "bad number '" + std::string{text} + "'");

  // A leading zero would make GMP read the digits as octal.
  auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  auto value = Rational{boost::multiprecision::mpz_int{digits}};
  auto ten = Rational{10};
  for (auto i = 0L; i < exponent; ++i) value *= ten;
  for (auto i = exponent; i < 0; ++i) value /= ten;
  return negative ? Rational{-value} : value;
}

}  // namespace

auto parse_rational(std::string_view text) -> Rational {
  auto s = trim(text);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = parse_decimal(trim(s.substr(0, slash)));
    auto den = parse_decimal(trim(s.substr(slash + 1)));
    if (den == 0) fail(Errc::parse_error, "zero denominator in '" + std::string{text} + "'");
    return num / den;
  }
  return parse_decimal(s);
}

auto format_rational(const Rational& x) -> std::string { return x.str(); }

auto format_double(double x) -> std::string {
  char buf[64];
  for (auto precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace allelic
