#include "allelic/exact.h"

#include <cmath>
#include <numbers>

namespace allelic {

auto ballot_probability(std::span<const long> values) -> Rational {
  auto n = values.size();
  auto total = 0L;
  for (auto v : values) {
    if (v < -1) fail(Errc::domain_error, "entries must be at least -1, got " + std::to_string(v));
    total += v;
  }
  auto k = -total;
  if (n == 0 || k < 1 || static_cast<std::size_t>(k) > n) {
    fail(Errc::bad_sum, "sum " + std::to_string(total) + " is not in [-" + std::to_string(n) + ", -1]");
  }
  auto hits = std::size_t{0};
  for (auto shift = std::size_t{0}; shift < n; ++shift) {
    auto partial = 0L;
    auto early = false;
    for (auto i = std::size_t{0}; i + 1 < n; ++i) {
      partial += values[(shift + i) % n];
      if (partial <= -k) {
        early = true;
        break;
      }
    }
    if (!early) ++hits;
  }
  return Rational{hits} / Rational{n};
}

auto limit_mass_partition_intensity(double b, double sigma_sq, double a) -> double {
  if (!(b > 0.0) || !(sigma_sq > 0.0) || !(a > 0.0)) {
    fail(Errc::domain_error, "intensity needs b, sigma_sq, a > 0");
  }
  return b / std::sqrt(2.0 * std::numbers::pi * sigma_sq * a * a * a);
}

}  // namespace allelic
