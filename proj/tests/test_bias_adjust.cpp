#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "support.hpp"
#include "vrekit/bias_adjust.hpp"
#include "vrekit/error.hpp"

using namespace vrekit;
using namespace vrekit::bias;
using convert::Technology;

namespace {

std::vector<double> weibull_speeds(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::weibull_distribution<double> w(2.0, 7.0);
  std::vector<double> v(n);
  for (auto& x : v) x = w(rng);
  return v;
}

Conversion wind_conversion(const std::vector<double>& hub_speeds) {
  return [&hub_speeds](double s) {
    const convert::WindTurbineModel m;
    std::vector<double> out(hub_speeds.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = convert::wind_capacity_factor(s * hub_speeds[i], m);
    return out;
  };
}

CFHistogram random_histogram(std::mt19937_64& rng, std::size_t bins) {
  auto m = testing_support::uniform(rng, bins, 0.0, 1.0);
  // Occasionally zero a bin to exercise the 0 * ln(0/q) convention.
  m[rng() % bins] = 0.0;
  double s = 0.0;
  for (double x : m) s += x;
  for (auto& x : m) x /= s;
  return {m};
}

}  // namespace

TEST(Histogram, Examples) {
  const std::vector<double> zeros(50, 0.0);
  const auto h0 = histogram(zeros, 2);
  EXPECT_NEAR(h0.mass[0], 1.0, 1e-8);
  EXPECT_NEAR(h0.mass[1], 0.0, 1e-8);
  EXPECT_GT(h0.mass[1], 0.0);
  const auto h1 = histogram(std::vector<double>{0.1, 0.9}, 2);
  EXPECT_NEAR(h1.mass[0], 0.5, 1e-12);
  EXPECT_NEAR(h1.mass[1], 0.5, 1e-12);
}

TEST(Histogram, EdgesAreRightOpenExceptLast) {
  const auto h = histogram(std::vector<double>{0.5, 1.0}, 2, 0.0);
  EXPECT_EQ(h.mass[0], 0.0);
  EXPECT_EQ(h.mass[1], 1.0);
  const auto g = histogram(std::vector<double>{0.0, 0.25, 0.75}, 4, 0.0);
  EXPECT_NEAR(g.mass[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.mass[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(g.mass[2], 0.0);
  EXPECT_NEAR(g.mass[3], 1.0 / 3.0, 1e-15);
}

TEST(Histogram, UniformSampleIsFlat) {
  std::mt19937_64 rng(3);
  const auto v = testing_support::uniform(rng, 10000, 0.0, 1.0);
  const auto h = histogram(v, 10);
  double total = 0.0;
  for (double m : h.mass) {
    EXPECT_NEAR(m, 0.1, 0.05);
    total += m;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Histogram, MassesSumToOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + rng() % 500;
    const auto bins = 2 + rng() % 200;
    const auto h = histogram(testing_support::uniform(rng, n, 0.0, 1.0), bins);
    ASSERT_EQ(h.bin_count(), bins);
    double total = 0.0;
    for (double m : h.mass) {
      EXPECT_GT(m, 0.0);
      total += m;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Histogram, Errors) {
  try {
    histogram(std::vector<double>{}, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
  EXPECT_THROW(histogram(std::vector<double>{0.5}, 1), Error);
  EXPECT_THROW(histogram(std::vector<double>{1.5}, 10), Error);
}

TEST(RelativeEntropy, Examples) {
  const CFHistogram p{{0.5, 0.5}}, q{{0.25, 0.75}};
  EXPECT_NEAR(relative_entropy(p, p), 0.0, 1e-12);
  // 0.5 ln 2 + 0.5 ln(2/3), evaluated at 40 digits.
  EXPECT_NEAR(relative_entropy(p, q), 0.1438410362258904637196095029969137157518, 1e-15);
  EXPECT_NEAR(relative_entropy(p, q), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
}

TEST(RelativeEntropy, ZeroMassContributesNothing) {
  const CFHistogram p{{0.0, 1.0}}, q{{0.5, 0.5}};
  EXPECT_NEAR(relative_entropy(p, q), std::log(2.0), 1e-15);
}

TEST(RelativeEntropy, GibbsInequality) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto bins = 2 + rng() % 50;
    const auto p = random_histogram(rng, bins);
    auto q = random_histogram(rng, bins);
    for (auto& m : q.mass) m = (m + 1e-9) / (1.0 + 1e-9 * static_cast<double>(bins));
    const double d = relative_entropy(p, q);
    EXPECT_GE(d, 0.0);
    long double oracle = 0.0L;
    for (std::size_t k = 0; k < bins; ++k)
      if (p.mass[k] > 0.0) oracle += p.mass[k] * std::log(static_cast<long double>(p.mass[k]) / q.mass[k]);
    EXPECT_NEAR(d, static_cast<double>(oracle), 1e-12);
  }
}

TEST(RelativeEntropy, BinMismatch) {
  try {
    relative_entropy(CFHistogram{{0.5, 0.5}}, CFHistogram{{0.2, 0.3, 0.5}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BinMismatch);
  }
}

TEST(ScaleGrid, DefaultHas151ExactValues) {
  const auto v = ScaleGrid{}.values();
  ASSERT_EQ(v.size(), 151u);
  EXPECT_EQ(v.front(), 0.5);
  EXPECT_EQ(v.back(), 2.0);
  EXPECT_EQ(v[50], 1.0);
  EXPECT_EQ(v[75], 1.25);
  const auto r = ScaleGrid::from_range(0.5, 2.0, 0.01).values();
  EXPECT_EQ(r, v);
}

TEST(FitBiasTransform, SelfMatchGivesOne) {
  const auto u = weibull_speeds(21, 20000);
  const auto conv = wind_conversion(u);
  const auto ref = histogram(conv(1.0));
  const auto t = fit_bias_transform(Technology::Wind, ref, conv);
  EXPECT_EQ(t.scale, 1.0);
  EXPECT_NEAR(t.fitted_divergence, 0.0, 1e-12);
  EXPECT_EQ(t.technology, Technology::Wind);
}

TEST(FitBiasTransform, RecoversPlantedScale) {
  const auto u = weibull_speeds(22, 20000);
  const auto conv = wind_conversion(u);
  const auto ref = histogram(conv(1.25));
  const auto t = fit_bias_transform(Technology::Wind, ref, conv);
  EXPECT_EQ(t.scale, 1.25);
  EXPECT_LE(t.fitted_divergence, t.unadjusted_divergence);
}

TEST(FitBiasTransform, TiesGoNearestOneThenSmaller) {
  const Conversion constant = [](double) { return std::vector<double>(10, 0.3); };
  const auto ref = histogram(std::vector<double>{0.7});
  EXPECT_EQ(fit_bias_transform(Technology::Solar, ref, constant).scale, 1.0);
  EXPECT_EQ(fit_bias_transform(Technology::Solar, ref, constant, {900, 1100, 200, 1000}).scale, 0.9);
  EXPECT_EQ(fit_bias_transform(Technology::Solar, ref, constant, {500, 800, 10, 1000}).scale, 0.8);
  const auto far = fit_bias_transform(Technology::Solar, ref, constant, {1500, 2000, 10, 1000});
  EXPECT_EQ(far.scale, 1.5);
  EXPECT_TRUE(std::isnan(far.unadjusted_divergence));
}

TEST(FitBiasTransform, EmptyGrid) {
  const Conversion constant = [](double) { return std::vector<double>(3, 0.3); };
  try {
    fit_bias_transform(Technology::Wind, histogram(std::vector<double>{0.3}), constant, {1500, 1000, 10, 1000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SearchGridEmpty);
  }
}

TEST(FitBiasTransform, NeverWorseThanUnadjusted) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> shape(1.5, 3.0), scale(4.0, 10.0), planted(0.6, 1.8);
  for (int i = 0; i < 100; ++i) {
    std::weibull_distribution<double> w(shape(rng), scale(rng));
    std::vector<double> u(2000), r(2000);
    for (auto& x : u) x = w(rng);
    const double k = planted(rng);
    for (auto& x : r) x = w(rng) * k;
    const auto conv = wind_conversion(u);
    std::vector<double> ref_cf(r.size());
    const convert::WindTurbineModel m;
    for (std::size_t j = 0; j < r.size(); ++j) ref_cf[j] = convert::wind_capacity_factor(r[j], m);
    const auto t = fit_bias_transform(Technology::Wind, histogram(ref_cf), conv);
    EXPECT_LE(t.fitted_divergence, t.unadjusted_divergence);
    EXPECT_GE(t.scale, 0.5);
    EXPECT_LE(t.scale, 2.0);
    // Deterministic.
    EXPECT_EQ(fit_bias_transform(Technology::Wind, histogram(ref_cf), conv).scale, t.scale);
  }
}

TEST(ApplyBiasTransform, ScaleOneAndDeadBand) {
  const auto u = weibull_speeds(40, 500);
  const auto conv = wind_conversion(u);
  const weather::TimeAxis axis{1986, 2920, 500};
  const auto same = apply_bias_transform({Technology::Wind, 1.0, 0.0, 0.0}, conv, "DE", axis);
  EXPECT_EQ(same.values, conv(1.0));
  EXPECT_EQ(same.country, "DE");

  std::vector<double> slow(100);
  for (std::size_t i = 0; i < slow.size(); ++i) slow[i] = 1.99 * static_cast<double>(i) / 100.0;
  const auto doubled = apply_bias_transform({Technology::Wind, 2.0, 0.0, 0.0}, wind_conversion(slow), "DE",
                                            {1986, 2920, 100});
  for (double cf : doubled.values) EXPECT_EQ(cf, 0.0);
}

TEST(BiasFiles, RoundTrip) {
  testing_support::TempDir dir("bias");
  ReferenceSamples samples;
  samples[{"DE", Technology::Wind}] = {0.0, 0.125, 1.0, 0.3333333333333333};
  samples[{"DE", Technology::Solar}] = {0.2};
  samples[{"FR", Technology::Wind}] = {0.7, 0.1};
  write_reference_samples(dir / "ref.csv", samples);
  ReferenceSamples back;
  load_reference_samples(dir / "ref.csv", back);
  EXPECT_EQ(back, samples);

  // Separate files merge into one map.
  ReferenceSamples wind_only, solar_only, merged;
  wind_only[{"DE", Technology::Wind}] = {0.4};
  solar_only[{"DE", Technology::Solar}] = {0.6};
  write_reference_samples(dir / "w.csv", wind_only);
  write_reference_samples(dir / "s.csv", solar_only);
  load_reference_samples(dir / "w.csv", merged);
  load_reference_samples(dir / "s.csv", merged);
  EXPECT_EQ(merged.size(), 2u);

  const std::vector<TransformRecord> records{{"DE", {Technology::Wind, 1.25, 0.0123456789012345, 0.5}},
                                             {"FR", {Technology::Solar, 0.87, 0.0, 0.0}}};
  write_transforms(dir / "t.csv", records);
  const auto loaded = load_transforms(dir / "t.csv");
  ASSERT_EQ(loaded.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(loaded[i].country, records[i].country);
    EXPECT_EQ(loaded[i].transform.technology, records[i].transform.technology);
    EXPECT_EQ(loaded[i].transform.scale, records[i].transform.scale);
    EXPECT_EQ(loaded[i].transform.fitted_divergence, records[i].transform.fitted_divergence);
  }
}

TEST(BiasFiles, RejectsBadReferenceRows) {
  testing_support::TempDir dir("bias_bad");
  ReferenceSamples into;
  testing_support::write_text(dir / "a.csv", "country,technology,value\nDE,wind,1.2\n");
  try {
    load_reference_samples(dir / "a.csv", into);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRangeValue);
  }
  testing_support::write_text(dir / "b.csv", "country,tech,value\nDE,wind,0.2\n");
  EXPECT_THROW(load_reference_samples(dir / "b.csv", into), Error);
  testing_support::write_text(dir / "c.csv", "country,technology,value\nDE,hydro,0.2\n");
  EXPECT_THROW(load_reference_samples(dir / "c.csv", into), Error);
}
