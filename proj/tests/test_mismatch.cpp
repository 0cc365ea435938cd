#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "vrekit/csv.hpp"
#include "vrekit/error.hpp"
#include "vrekit/mismatch.hpp"

using namespace vrekit;
using namespace vrekit::mismatch;

namespace {

SystemSeries random_system(std::mt19937_64& rng, std::size_t countries, std::size_t steps) {
  SystemSeries s{{1986, 2920, steps}, {}};
  for (std::size_t n = 0; n < countries; ++n) {
    const std::string code{static_cast<char>('A' + n / 26), static_cast<char>('A' + n % 26)};
    s.countries.push_back({code, testing_support::uniform(rng, steps, 0.0, 1.0),
                           testing_support::uniform(rng, steps, 0.0, 0.8),
                           testing_support::uniform(rng, steps, 500.0, 1500.0)});
  }
  return s;
}

double mean(const std::vector<double>& v) { return testing_support::oracle_mean(v); }

}  // namespace

TEST(ScenarioDescriptor, Validate) {
  EXPECT_NO_THROW((ScenarioDescriptor{"RCP8.5", "M", 2080, 2099, 0.5, 1.0}.validate()));
  EXPECT_THROW((ScenarioDescriptor{"RCP6.0", "M", 2080, 2099, 0.5, 1.0}.validate()), Error);
  EXPECT_THROW((ScenarioDescriptor{"historical", "M", 1986, 2005, 1.1, 1.0}.validate()), Error);
  EXPECT_THROW((ScenarioDescriptor{"historical", "M", 1986, 2005, 0.5, 0.0}.validate()), Error);
  EXPECT_THROW((ScenarioDescriptor{"historical", "M", 2005, 1986, 0.5, 1.0}.validate()), Error);
}

TEST(Normalization, ConstantSeries) {
  SystemSeries s{{1986, 2920, 4}, {{"DE", {0.25, 0.25, 0.25, 0.25}, {0.1, 0.2, 0.3, 0.4}, {2, 2, 2, 2}}}};
  const auto k = compute_normalization(s);
  ASSERT_EQ(k.countries.size(), 1u);
  EXPECT_EQ(k.countries[0].mean_wind_cf, 0.25);
  EXPECT_NEAR(k.countries[0].mean_solar_cf, 0.25, 1e-15);
  EXPECT_EQ(k.countries[0].mean_load, 2.0);
  EXPECT_EQ(k.load_shares(), std::vector<double>{1.0});
}

TEST(Normalization, HistoricalMeansBecomeOne) {
  std::mt19937_64 rng(1);
  const auto raw = random_system(rng, 6, 2920);
  const auto k = compute_normalization(raw);
  const auto n = normalize(raw, k);
  for (const auto& c : n.countries) {
    EXPECT_NEAR(mean(c.wind_cf), 1.0, 1e-9);
    EXPECT_NEAR(mean(c.solar_cf), 1.0, 1e-9);
    EXPECT_NEAR(mean(c.load), 1.0, 1e-9);
  }
  const auto shares = k.load_shares();
  double total = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    EXPECT_NEAR(shares[i] * (k.countries[0].mean_load / shares[0]), k.countries[i].mean_load, 1e-9);
    total += shares[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Load-weighted historical mean of the mismatch is gamma - 1.
  const auto set = build_mismatch_set(n, shares, 0.3, 1.0);
  EXPECT_NEAR(mean(set.aggregate_delta), 0.0, 1e-9);
}

TEST(Normalization, FutureDataIsNotRenormalized) {
  std::mt19937_64 rng(2);
  const auto hist = random_system(rng, 3, 100);
  auto future = hist;
  for (auto& c : future.countries)
    for (auto& l : c.load) l *= 0.98;
  const auto n = normalize(future, compute_normalization(hist));
  for (const auto& c : n.countries) EXPECT_NEAR(mean(c.load), 0.98, 1e-12);
}

TEST(Normalization, Errors) {
  SystemSeries s{{1986, 2920, 2}, {{"DE", {0.3, 0.2}, {0.0, 0.0}, {1, 1}}}};
  try {
    compute_normalization(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroMean);
  }
  s.countries[0].solar_cf = {0.1, 0.1};
  s.countries[0].load = {0.0, 0.0};
  EXPECT_THROW(compute_normalization(s), Error);
  s.countries[0].load = {1.0};
  EXPECT_THROW(compute_normalization(s), Error);
  std::mt19937_64 rng(3);
  const auto a = random_system(rng, 2, 10);
  auto b = a;
  std::swap(b.countries[0], b.countries[1]);
  EXPECT_THROW(normalize(b, compute_normalization(a)), Error);
}

TEST(Mismatch, Examples) {
  const std::vector<double> one(16, 1.0);
  for (double alpha : {0.0, 0.25, 0.5, 1.0})
    for (double d : mismatch::mismatch(alpha, 1.0, one, one, one)) EXPECT_EQ(d, 0.0);
  std::vector<double> w(64);
  for (std::size_t t = 0; t < w.size(); ++t) w[t] = 1.0 + std::sin(0.3 * static_cast<double>(t));
  const auto d = mismatch::mismatch(1.0, 1.0, w, std::vector<double>(64, 7.0), std::vector<double>(64, 1.0));
  for (std::size_t t = 0; t < w.size(); ++t) EXPECT_NEAR(d[t], std::sin(0.3 * static_cast<double>(t)), 1e-15);
  try {
    mismatch::mismatch(0.5, 1.0, w, one, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AxisMismatch);
  }
}

TEST(Mismatch, AffineInInputs) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w1 = testing_support::uniform(rng, 32, 0, 3), w2 = testing_support::uniform(rng, 32, 0, 3);
    const auto s1 = testing_support::uniform(rng, 32, 0, 3), s2 = testing_support::uniform(rng, 32, 0, 3);
    const auto l1 = testing_support::uniform(rng, 32, 0, 3), l2 = testing_support::uniform(rng, 32, 0, 3);
    const double alpha = testing_support::uniform(rng, 1, 0, 1)[0];
    const double gamma = testing_support::uniform(rng, 1, 0.5, 2)[0];
    const double lam = testing_support::uniform(rng, 1, 0, 1)[0];
    std::vector<double> w(32), s(32), l(32);
    for (std::size_t t = 0; t < 32; ++t) {
      w[t] = lam * w1[t] + (1 - lam) * w2[t];
      s[t] = lam * s1[t] + (1 - lam) * s2[t];
      l[t] = lam * l1[t] + (1 - lam) * l2[t];
    }
    const auto d1 = mismatch::mismatch(alpha, gamma, w1, s1, l1);
    const auto d2 = mismatch::mismatch(alpha, gamma, w2, s2, l2);
    const auto d = mismatch::mismatch(alpha, gamma, w, s, l);
    for (std::size_t t = 0; t < 32; ++t) {
      EXPECT_NEAR(d[t], lam * d1[t] + (1 - lam) * d2[t], 1e-12);
      EXPECT_NEAR(d1[t], gamma * (alpha * w1[t] + (1 - alpha) * s1[t]) - l1[t], 1e-15);
    }
  }
}

TEST(AggregateMismatch, Examples) {
  const std::vector<double> a{1.0, -2.0, 0.5}, b{-1.0, 2.0, -0.5};
  for (double v : aggregate_mismatch({a, b}, std::vector<double>{0.5, 0.5})) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(aggregate_mismatch({a}, std::vector<double>{1.0}), a);
}

TEST(AggregateMismatch, BruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> d;
    for (int n = 0; n < 5; ++n) d.push_back(testing_support::uniform(rng, 64, -2.0, 2.0));
    const auto w = testing_support::random_shares(rng, 5);
    const auto agg = aggregate_mismatch(d, w);
    for (std::size_t t = 0; t < 64; ++t) {
      long double s = 0.0L;
      for (int n = 0; n < 5; ++n) s += static_cast<long double>(w[n]) * d[n][t];
      EXPECT_NEAR(agg[t], static_cast<double>(s), 1e-12);
    }
  }
}

TEST(AggregateMismatch, WeightSumInvalid) {
  const std::vector<double> a{1.0}, b{2.0};
  for (const auto& shares : {std::vector<double>{0.5, 0.4}, std::vector<double>{1.5, -0.5}, std::vector<double>{1.0}}) {
    try {
      aggregate_mismatch({a, b}, shares);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::WeightSumInvalid);
    }
  }
}

TEST(Decompose, Examples) {
  const auto d = decompose(std::vector<double>{1.0, -1.0});
  EXPECT_EQ(d.balancing, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(d.curtailment, (std::vector<double>{1.0, 0.0}));
  const auto z = decompose(std::vector<double>(5, 0.0));
  EXPECT_EQ(z.balancing, std::vector<double>(5, 0.0));
  EXPECT_EQ(z.curtailment, std::vector<double>(5, 0.0));
}

TEST(Decompose, ReconstructionIsExact) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto delta = testing_support::uniform(rng, 256, -3.0, 3.0);
    const auto d = decompose(delta);
    for (std::size_t t = 0; t < delta.size(); ++t) {
      EXPECT_EQ(d.curtailment[t] - d.balancing[t], delta[t]);
      EXPECT_EQ(d.curtailment[t] * d.balancing[t], 0.0);
      EXPECT_GE(d.balancing[t], 0.0);
      EXPECT_GE(d.curtailment[t], 0.0);
    }
  }
}

TEST(MismatchSet, SubadditiveBalancing) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto raw = random_system(rng, 4, 64);
    const auto k = compute_normalization(raw);
    const auto set = build_mismatch_set(normalize(raw, k), k.load_shares(), 0.6, 1.0);
    bool opposite = false;
    bool strict = false;
    for (std::size_t t = 0; t < 64; ++t) {
      double iso = 0.0;
      bool pos = false, neg = false;
      for (std::size_t n = 0; n < 4; ++n) {
        iso += set.shares[n] * set.country_parts[n].balancing[t];
        pos |= set.country_delta[n][t] > 0.0;
        neg |= set.country_delta[n][t] < 0.0;
      }
      EXPECT_LE(set.aggregate_parts.balancing[t], iso + 1e-12);
      if (pos && neg) {
        opposite = true;
        strict |= set.aggregate_parts.balancing[t] < iso - 1e-12;
      }
    }
    if (opposite) EXPECT_TRUE(strict);
  }
}

TEST(MismatchSet, CsvHasCountryAndEuRows) {
  std::mt19937_64 rng(8);
  const auto raw = random_system(rng, 2, 3);
  const auto k = compute_normalization(raw);
  const auto set = build_mismatch_set(normalize(raw, k), k.load_shares(), 0.5, 1.0);
  testing_support::TempDir dir("mismatch");
  write_mismatch_csv(dir / "m.csv", set);
  const auto table = csv::read_table(dir / "m.csv");
  ASSERT_EQ(table.rows.size(), 9u);
  const auto cc = table.column("country");
  const auto cd = table.column("delta");
  int eu = 0;
  for (const auto& row : table.rows) {
    if (row[cc] == "EU") {
      std::size_t t = 0;
      ASSERT_TRUE(csv::parse(row[table.column("time_index")], t));
      double d = 0.0;
      ASSERT_TRUE(csv::parse(row[cd], d));
      EXPECT_EQ(d, set.aggregate_delta[t]);
      ++eu;
    }
  }
  EXPECT_EQ(eu, 3);
}
