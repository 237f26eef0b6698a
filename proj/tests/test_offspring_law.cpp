#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "allelic/count_distribution.h"
#include "allelic/offspring_law.h"
#include "support.h"

using namespace allelic;
using allelic::testing::l0;
using allelic::testing::random_exact_law;

namespace {

auto expect_error(Errc code, auto&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

auto poisson_pmf(double rate, std::size_t j) -> double {
  return std::exp(-rate + static_cast<double>(j) * std::log(rate) - std::lgamma(static_cast<double>(j) + 1.0));
}

}  // namespace

TEST(Validate, L0IsCritical) {
  auto law = l0();
  EXPECT_TRUE(law.report().ok());
  EXPECT_DOUBLE_EQ(law.mean_total(), 1.0);
  EXPECT_TRUE(law.report().critical);
  EXPECT_TRUE(law.has_exact());
}

TEST(Validate, Supercritical) {
  auto g = Grid<Rational>{3, 2};
  g(2, 1) = 1;
  EXPECT_EQ(inspect(g).error, Errc::not_subcritical);
  expect_error(Errc::not_subcritical, [&] { JointOffspringLaw{g}; });
}

TEST(Validate, NoMutantsIsDegenerate) {
  auto g = Grid<Rational>{2, 1};
  g(0, 0) = Rational{1, 2};
  g(1, 0) = Rational{1, 2};
  auto r = inspect(g);
  EXPECT_EQ(r.error, Errc::degenerate);
  EXPECT_TRUE(r.mutant_degenerate);
  expect_error(Errc::degenerate, [&] { JointOffspringLaw{g}; });
  EXPECT_NO_THROW(JointOffspringLaw(g, Degeneracy::allow));
}

TEST(Validate, MassDeficitAndNegative) {
  auto g = Grid<double>{2, 2, 0.2};
  EXPECT_EQ(inspect(g).error, Errc::mass_deficit);
  g(0, 0) = -0.1;
  EXPECT_EQ(inspect(g).error, Errc::invalid_probability);
  auto e = Grid<Rational>{2, 2, Rational{1, 4}};
  e(1, 1) = Rational{1, 4} + Rational{1, 1'000'000};
  EXPECT_EQ(inspect(e).error, Errc::mass_deficit);
}

TEST(Validate, TailCountsTowardsMass) {
  auto g = Grid<double>{2, 2, 0.25};
  g(1, 1) = 0.25 - 1e-9;
  EXPECT_EQ(inspect(g).error, Errc::mass_deficit);
  EXPECT_TRUE(inspect(g, 1e-9).ok());
}

TEST(Convolution, L0FirstPowerIsLaw) {
  auto t = convolution_power<Rational>(l0(), 1);
  for (auto k = 0u; k < 2; ++k) {
    for (auto l = 0u; l < 2; ++l) EXPECT_EQ(t.at(1, k, l), Rational(1, 4));
  }
}

TEST(Convolution, L0SecondPowerByHand) {
  auto t = convolution_power<Rational>(l0(), 2);
  EXPECT_EQ(t.at(2, 1, 1), Rational(1, 4));
  EXPECT_EQ(t.at(2, 1, 0), Rational(1, 8));
  EXPECT_EQ(t.at(2, 2, 2), Rational(1, 16));
  EXPECT_EQ(t.at(2, 3, 0), Rational(0));
}

// Oracle: pi^{*n}_{k,l} by summing over every n-tuple of support cells.
TEST(Convolution, MatchesTupleEnumeration) {
  auto rng = std::mt19937_64{101};
  for (auto trial = 0; trial < 20; ++trial) {
    auto law = random_exact_law(rng);
    const auto& g = law.exact();
    auto n_max = std::size_t{4};
    auto table = convolution_power<Rational>(law, n_max);
    for (auto n = std::size_t{1}; n <= n_max; ++n) {
      auto oracle = std::map<std::pair<std::size_t, std::size_t>, Rational>{};
      auto cells = g.rows() * g.cols();
      auto index = std::vector<std::size_t>(n, 0);
      for (;;) {
        auto p = Rational{1};
        auto k = std::size_t{0};
        auto l = std::size_t{0};
        for (auto c : index) {
          p *= g(c / g.cols(), c % g.cols());
          k += c / g.cols();
          l += c % g.cols();
        }
        if (p != 0) oracle[{k, l}] += p;
        auto pos = std::size_t{0};
        while (pos < n && ++index[pos] == cells) index[pos++] = 0;
        if (pos == n) break;
      }
      auto total = Rational{0};
      for (auto k = std::size_t{0}; k <= n * law.clone_bound(); ++k) {
        for (auto l = std::size_t{0}; l <= n * law.mutant_bound(); ++l) {
          auto it = oracle.find({k, l});
          EXPECT_EQ(table.at(n, k, l), it == oracle.end() ? Rational{0} : it->second);
          total += table.at(n, k, l);
        }
      }
      EXPECT_EQ(total, 1);
    }
  }
}

TEST(Convolution, Associativity) {
  auto rng = std::mt19937_64{7};
  for (auto trial = 0; trial < 10; ++trial) {
    auto law = random_exact_law(rng, 3, 2);
    auto n_max = std::size_t{8};
    auto table = convolution_power<double>(law, n_max);
    for (auto a = std::size_t{1}; a < n_max; ++a) {
      for (auto b = std::size_t{1}; a + b <= n_max; ++b) {
        auto direct = convolve(table.power(a), table.power(b));
        const auto& stored = table.power(a + b);
        for (auto k = std::size_t{0}; k < direct.rows(); ++k) {
          for (auto l = std::size_t{0}; l < direct.cols(); ++l) {
            ASSERT_NEAR(stored.at(k, l), direct(k, l), 1e-11) << a << "+" << b;
          }
        }
      }
    }
    for (auto n = std::size_t{1}; n <= n_max; ++n) {
      EXPECT_NEAR(table.power(n).sum(), 1.0, static_cast<double>(n) * 1e-12);
    }
  }
}

TEST(Convolution, CroppedEntriesRefuseToAnswer) {
  auto table = convolution_power<Rational>(l0(), 6, formula_box(6));
  EXPECT_TRUE(table.cropped());
  EXPECT_EQ(table.at(6, 5, 5), table.at(6, 5, 5));
  expect_error(Errc::out_of_table, [&] { table.at(6, 6, 0); });
  EXPECT_EQ(table.at(6, 7, 0), Rational{0});
  expect_error(Errc::out_of_table, [&] { table.at(7, 0, 0); });
}

TEST(Convolution, MemoryCap) {
  auto options = ConvolutionOptions{};
  options.memory_cap_bytes = 1024;
  expect_error(Errc::budget_exceeded, [&] { convolution_power<Rational>(l0(), 50, options); });
}

TEST(Pruning, UnitBaseHalf) {
  auto law = from_pruning(CountDistribution::dirac(1), Rational{1, 2});
  ASSERT_TRUE(law.has_exact());
  EXPECT_EQ(law.exact().at(1, 0), Rational(1, 2));
  EXPECT_EQ(law.exact().at(0, 1), Rational(1, 2));
  auto m = marginals<Rational>(law);
  EXPECT_EQ(m.total, (std::vector<Rational>{0, 1, 0}));
}

TEST(Pruning, ZeroBaseIsDegenerate) {
  expect_error(Errc::degenerate, [] { from_pruning(CountDistribution::dirac(0), Rational{1, 2}); });
}

TEST(Pruning, ProbabilityRange) {
  expect_error(Errc::invalid_probability, [] { from_pruning(CountDistribution::poisson(1.0), Rational{0}); });
  expect_error(Errc::invalid_probability, [] { from_pruning(CountDistribution::poisson(1.0), Rational{1}); });
}

// pi^{*n}_{k,l} = C(k+l,k) (1-p)^k p^l rho^{*n}_{k+l}, with rho^{*n} Poisson(n).
TEST(Pruning, PoissonConvolutionIdentity) {
  auto p = 0.3;
  auto law = from_pruning(CountDistribution::poisson(1.0), Rational{3, 10});
  auto table = convolution_power<double>(law, 6);
  for (auto n = std::size_t{1}; n <= 6; ++n) {
    const auto& g = table.power(n);
    for (auto k = std::size_t{0}; k < g.rows(); ++k) {
      for (auto l = std::size_t{0}; l < g.cols(); ++l) {
        auto binom = std::exp(std::lgamma(double(k + l) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(l) + 1));
        auto expected = binom * std::pow(1 - p, double(k)) * std::pow(p, double(l)) * poisson_pmf(double(n), k + l);
        ASSERT_NEAR(g(k, l), expected, 1e-10) << n << " " << k << " " << l;
      }
    }
  }
}

TEST(Marginals, L0) {
  auto m = marginals<Rational>(l0());
  EXPECT_EQ(m.clone, (std::vector<Rational>{Rational{1, 2}, Rational{1, 2}}));
  EXPECT_EQ(m.mutant, (std::vector<Rational>{Rational{1, 2}, Rational{1, 2}}));
  EXPECT_EQ(m.total, (std::vector<Rational>{Rational{1, 4}, Rational{1, 2}, Rational{1, 4}}));
}

TEST(Marginals, ConsistencyProperty) {
  auto rng = std::mt19937_64{3};
  for (auto trial = 0; trial < 50; ++trial) {
    auto law = random_exact_law(rng, 3, 3);
    auto m = marginals<Rational>(law);
    const auto& g = law.exact();
    auto mean_c = Rational{0};
    auto mean_m = Rational{0};
    for (auto k = std::size_t{0}; k < g.rows(); ++k) {
      auto row = Rational{0};
      for (auto l = std::size_t{0}; l < g.cols(); ++l) row += g(k, l);
      EXPECT_EQ(row, m.clone[k]);
      mean_c += Rational(k) * m.clone[k];
    }
    for (auto l = std::size_t{0}; l < g.cols(); ++l) mean_m += Rational(l) * m.mutant[l];
    auto mean_t = Rational{0};
    for (auto s = std::size_t{0}; s < m.total.size(); ++s) {
      auto diag = Rational{0};
      for (auto k = std::size_t{0}; k <= s && k < g.rows(); ++k) diag += g.at(k, s - k);
      EXPECT_EQ(diag, m.total[s]);
      mean_t += Rational(s) * m.total[s];
    }
    EXPECT_EQ(mean_c + mean_m, mean_t);
    EXPECT_NEAR(law.mean_total(), to_double(mean_t), 1e-15);
  }
}

TEST(Independent, PoissonGeometricTruncation) {
  auto law = independent_law(CountDistribution::geometric(Rational{1, 3}), CountDistribution::poisson(0.4));
  EXPECT_FALSE(law.has_exact());
  EXPECT_LE(law.tail_mass(), 2e-12);
  EXPECT_GT(law.tail_mass(), 0.0);
  EXPECT_NEAR(law.pmf().sum() + law.tail_mass(), 1.0, 1e-14);
  EXPECT_NEAR(law(2, 1), (2.0 / 3.0) / 9.0 * poisson_pmf(0.4, 1), 1e-15);
}

TEST(Tilt, GeometricThirdClosedForm) {
  auto t = tilt(CountDistribution::geometric(Rational{1, 3}));
  EXPECT_NEAR(t.theta, 1.5, 1e-10);
  EXPECT_NEAR(t.sigma_sq, 2.0, 1e-10);
  // E(theta^X) for geometric: (1-a) / (1 - a theta).
  EXPECT_NEAR(t.z_theta, (2.0 / 3.0) / 0.5, 1e-10);
}

TEST(Tilt, GeometricSweep) {
  for (auto [num, den] : {std::pair{1, 5}, std::pair{1, 4}, std::pair{2, 5}}) {
    auto a = double(num) / double(den);
    auto t = tilt(CountDistribution::geometric(Rational{num, den}));
    EXPECT_NEAR(t.theta, 1.0 / (2.0 * a), 1e-10) << a;
    EXPECT_NEAR(t.sigma_sq, 2.0, 1e-9) << a;
  }
}

TEST(Tilt, BernoulliHasNoTilt) {
  expect_error(Errc::no_tilt_exists, [] { tilt(CountDistribution::bernoulli(Rational{1, 2})); });
  expect_error(Errc::no_tilt_exists, [] { tilt_clone_marginal(l0()); });
}

TEST(Tilt, CriticalHasNoTilt) {
  expect_error(Errc::no_tilt_exists, [] { tilt(CountDistribution::geometric(Rational{1, 2})); });
}

TEST(Tilt, ExplicitTiltingHasUnitMean) {
  for (const auto& d : {CountDistribution::binomial(2, Rational{1, 4}), CountDistribution::poisson(0.5),
                        CountDistribution::table(std::vector<Rational>{Rational{5, 8}, Rational{1, 4}, 0,
                                                                       Rational{1, 8}})}) {
    auto t = tilt(d);
    auto pmf = tilted_pmf(d, t, 400);
    auto mass = 0.0;
    auto mean = 0.0;
    auto second = 0.0;
    for (auto j = std::size_t{0}; j < pmf.size(); ++j) {
      mass += pmf[j];
      mean += double(j) * pmf[j];
      second += double(j) * double(j) * pmf[j];
    }
    EXPECT_NEAR(mass, 1.0, 1e-12) << d.describe();
    EXPECT_NEAR(mean, 1.0, 1e-10) << d.describe();
    EXPECT_NEAR(second - mean * mean, t.sigma_sq, 1e-10) << d.describe();
  }
}

TEST(Tilt, BinomialClosedForm) {
  // Tilted Binomial(2, p) is Binomial(2, p theta / (q + p theta)); mean 1 forces p theta = q.
  auto t = tilt(CountDistribution::binomial(2, Rational{1, 4}));
  EXPECT_NEAR(t.theta, 3.0, 1e-10);
  EXPECT_NEAR(t.sigma_sq, 0.5, 1e-10);
}

TEST(CountDistribution, ParseDecimalsWithLeadingZeros) {
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("007"), Rational(7));
  EXPECT_EQ(parse_rational("0.0625"), Rational(1, 16));
  EXPECT_EQ(parse_rational("-0.5e-1"), Rational(-1, 20));
  EXPECT_EQ(parse_rational("0"), Rational(0));
}

TEST(CountDistribution, ParseFamilies) {
  EXPECT_EQ(parse_count_distribution("poisson 1").family(), CountDistribution::Family::poisson);
  EXPECT_EQ(parse_count_distribution("geometric 1/3").family(), CountDistribution::Family::geometric);
  EXPECT_NEAR(parse_count_distribution("binomial 2 0.5").pmf(1), 0.5, 1e-15);
  EXPECT_NEAR(parse_count_distribution("table 0.25 0.5 0.25").mean(), 1.0, 1e-15);
  expect_error(Errc::parse_error, [] { parse_count_distribution("zipf 2"); });
}
