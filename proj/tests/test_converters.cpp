#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vrekit/converters.hpp"
#include "vrekit/error.hpp"

using namespace vrekit;
using namespace vrekit::convert;
using weather::FieldSeries;
using weather::Variable;

namespace {

/// Random curve satisfying the turbine invariants: CF 0 at the first point,
/// non-decreasing CF values in [0,1], cut-out beyond the last point.
WindTurbineModel random_turbine(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WindTurbineModel m;
  m.power_curve.clear();
  const int n = 4 + static_cast<int>(rng() % 8);
  double speed = 2.0 + 3.0 * u(rng);
  double cf = 0.0;
  m.power_curve.push_back({speed, 0.0});
  for (int i = 1; i < n; ++i) {
    speed += 0.2 + 2.0 * u(rng);
    cf = std::min(1.0, cf + u(rng) * 0.4);
    m.power_curve.push_back({speed, cf});
  }
  m.cut_out_speed = speed + 1.0 + 10.0 * u(rng);
  m.validate();
  return m;
}

double brute_wind(double u, const WindTurbineModel& m) {
  const auto& c = m.power_curve;
  if (u >= m.cut_out_speed || u <= c.front().speed) return 0.0;
  if (u >= c.back().speed) return c.back().cf;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (u <= c[i].speed) return c[i - 1].cf + (c[i].cf - c[i - 1].cf) * (u - c[i - 1].speed) / (c[i].speed - c[i - 1].speed);
  return 0.0;
}

}  // namespace

TEST(HubSpeed, Examples) {
  const WindTurbineModel m;
  EXPECT_EQ(extrapolate_hub_speed(0.0, m), 0.0);
  WindTurbineModel same = m;
  same.hub_height = same.reference_height;
  EXPECT_EQ(extrapolate_hub_speed(7.3, same), 7.3);
  // 8 * 8^0.143, evaluated at 40 digits.
  EXPECT_NEAR(extrapolate_hub_speed(8.0, m), 10.77040055421425831839729594736628449529, 1e-13);
}

TEST(HubSpeed, MonotoneInReferenceSpeed) {
  const WindTurbineModel m;
  double prev = -1.0;
  for (double u = 0.0; u < 40.0; u += 0.37) {
    const double h = extrapolate_hub_speed(u, m);
    EXPECT_GE(h, prev);
    prev = h;
  }
}

TEST(WindCapacityFactor, Examples) {
  const WindTurbineModel m;
  EXPECT_EQ(wind_capacity_factor(0.0, m), 0.0);
  EXPECT_EQ(wind_capacity_factor(13.0, m), 1.0);
  EXPECT_EQ(wind_capacity_factor(26.0, m), 0.0);
  EXPECT_EQ(wind_capacity_factor(25.0, m), 0.0);
  EXPECT_EQ(wind_capacity_factor(24.99, m), 1.0);
  EXPECT_EQ(wind_capacity_factor(4.0, m), 0.0);
  EXPECT_EQ(wind_capacity_factor(3.0, m), 0.0);
  for (const auto& p : m.power_curve) EXPECT_EQ(wind_capacity_factor(p.speed, m), p.cf);
}

TEST(WindCapacityFactor, DefaultCurveShape) {
  const auto curve = WindTurbineModel::default_power_curve();
  ASSERT_EQ(curve.size(), 10u);
  EXPECT_EQ(curve.front().speed, 4.0);
  EXPECT_EQ(curve.back().speed, 13.0);
  EXPECT_EQ(curve.back().cf, 1.0);
  EXPECT_NEAR(curve[4].cf, (512.0 - 64.0) / (2197.0 - 64.0), 1e-15);
}

TEST(WindCapacityFactor, PropertyRandomCurves) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_turbine(rng);
    for (const auto& p : m.power_curve) EXPECT_EQ(wind_capacity_factor(p.speed, m), p.cf);
    double prev = 0.0;
    const double lo = m.power_curve.front().speed;
    const double hi = m.power_curve.back().speed;
    for (int i = 0; i <= 200; ++i) {
      const double u = lo + (hi - lo) * i / 200.0;
      const double cf = wind_capacity_factor(u, m);
      EXPECT_GE(cf, prev - 1e-15);
      prev = cf;
    }
    for (int i = 0; i < 50; ++i) {
      const double u = speed(rng);
      const double cf = wind_capacity_factor(u, m);
      EXPECT_NEAR(cf, brute_wind(u, m), 1e-12);
      EXPECT_GE(cf, 0.0);
      EXPECT_LE(cf, 1.0);
      if (u <= lo || u >= m.cut_out_speed) EXPECT_EQ(cf, 0.0);
    }
  }
}

TEST(WindTurbineModel, ValidateRejectsBadCurves) {
  WindTurbineModel m;
  m.power_curve.resize(3);
  EXPECT_THROW(m.validate(), Error);
  m = WindTurbineModel{};
  std::swap(m.power_curve[2], m.power_curve[3]);
  EXPECT_THROW(m.validate(), Error);
  m = WindTurbineModel{};
  m.power_curve[3].cf = 1.5;
  EXPECT_THROW(m.validate(), Error);
  m = WindTurbineModel{};
  m.cut_out_speed = 12.0;
  EXPECT_THROW(m.validate(), Error);
}

TEST(SolarCapacityFactor, Examples) {
  const SolarPanelModel m;
  EXPECT_EQ(solar_capacity_factor(0.0, 35.0, m), 0.0);
  EXPECT_EQ(solar_capacity_factor(0.0, -20.0, m), 0.0);
  // T_amb = 25 - 0.035 * 1000 puts the cell at 25 degC.
  EXPECT_NEAR(solar_capacity_factor(1000.0, -10.0, m), 1.0, 1e-15);
  // T_cell = 30 + 0.035*800 = 58; 0.8 * (1 - 0.004*33) = 0.6944.
  EXPECT_NEAR(solar_capacity_factor(800.0, 30.0, m), 0.6944, 1e-12);
}

TEST(SolarCapacityFactor, DecreasesWithTemperatureWhileUnclamped) {
  const SolarPanelModel m;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const double g = testing_support::uniform(rng, 1, 1.0, 900.0)[0];
    const double t = testing_support::uniform(rng, 1, -30.0, 45.0)[0];
    EXPECT_LT(solar_capacity_factor(g, t + 0.5, m), solar_capacity_factor(g, t, m));
  }
}

TEST(SolarPanelModel, ValidateRanges) {
  SolarPanelModel m;
  m.temperature_coefficient = 0.001;
  EXPECT_THROW(m.validate(), Error);
  m = SolarPanelModel{};
  m.mounting_coefficient = 0.07;
  EXPECT_THROW(m.validate(), Error);
}

TEST(CountryConversion, SingleCellMatchesPointwise) {
  std::mt19937_64 rng(8);
  const auto grid = testing_support::line_grid(3);
  const weather::TimeAxis axis{1986, 2920, 50};
  const FieldSeries wind(Variable::WindSpeed, grid, axis, testing_support::uniform(rng, 150, 0, 30));
  const WindTurbineModel m;
  const auto cf = convert_wind_cf(wind, {"DE", {{2, 1.0}}}, m);
  EXPECT_EQ(cf.country, "DE");
  EXPECT_EQ(cf.technology, Technology::Wind);
  for (std::size_t t = 0; t < 50; ++t)
    EXPECT_EQ(cf.values[t], wind_capacity_factor(extrapolate_hub_speed(wind.at(t, 2), m), m));
}

TEST(CountryConversion, IdenticalCellsMatchOneCell) {
  std::mt19937_64 rng(9);
  const auto grid = testing_support::line_grid(4);
  const auto g = testing_support::uniform(rng, 30, 0, 1000);
  const auto t = testing_support::uniform(rng, 30, -10, 40);
  std::vector<double> gv, tv;
  for (int c = 0; c < 4; ++c) {
    gv.insert(gv.end(), g.begin(), g.end());
    tv.insert(tv.end(), t.begin(), t.end());
  }
  const weather::TimeAxis axis{1986, 2920, 30};
  const FieldSeries irr(Variable::Irradiance, grid, axis, gv), temp(Variable::Temperature, grid, axis, tv);
  const SolarPanelModel m;
  const auto cf = convert_solar_cf(irr, temp, {"ES", {{0, 0.1}, {1, 0.2}, {2, 0.3}, {3, 0.4}}}, m);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(cf.values[i], solar_capacity_factor(g[i], t[i], m), 1e-15);
}

TEST(CountryConversion, ConvertThenAggregateMatchesBruteForce) {
  std::mt19937_64 rng(10);
  const auto grid = testing_support::line_grid(20);
  const weather::TimeAxis axis{1986, 2920, 100};
  const FieldSeries wind(Variable::WindSpeed, grid, axis, testing_support::uniform(rng, 2000, 0, 25));
  const FieldSeries irr(Variable::Irradiance, grid, axis, testing_support::uniform(rng, 2000, 0, 1100));
  const FieldSeries temp(Variable::Temperature, grid, axis, testing_support::uniform(rng, 2000, -20, 45));
  const auto w = testing_support::random_shares(rng, 20);
  weather::CountryWeights cw{"PL", {}};
  for (std::size_t c = 0; c < 20; ++c) cw.entries.push_back({c, w[c]});
  const WindTurbineModel tm;
  const SolarPanelModel pm;
  const double scale = 1.07;
  const auto wc = convert_wind_cf(wind, cw, tm, scale);
  const auto sc = convert_solar_cf(irr, temp, cw, pm, scale);
  for (std::size_t t = 0; t < 100; ++t) {
    long double ew = 0.0L, es = 0.0L;
    for (std::size_t c = 0; c < 20; ++c) {
      ew += w[c] * brute_wind(wind.at(t, c) * scale * std::pow(8.0, 0.143), tm);
      const double g = irr.at(t, c) * scale;
      const double cell = temp.at(t, c) + 0.035 * g;
      es += w[c] * (g <= 0 ? 0.0 : std::clamp(g / 1000.0 * (1.0 - 0.004 * (cell - 25.0)), 0.0, 1.0));
    }
    EXPECT_TRUE(testing_support::close_rel(wc.values[t], static_cast<double>(ew), 1e-12));
    EXPECT_TRUE(testing_support::close_rel(sc.values[t], static_cast<double>(es), 1e-12));
    EXPECT_GE(wc.values[t], 0.0);
    EXPECT_LE(wc.values[t], 1.0);
    EXPECT_GE(sc.values[t], 0.0);
    EXPECT_LE(sc.values[t], 1.0);
  }
}

TEST(CountryConversion, MismatchedAxesAreRejected) {
  const auto grid = testing_support::line_grid(1);
  const FieldSeries irr(Variable::Irradiance, grid, {1986, 2920, 2}, {1, 2});
  const FieldSeries temp(Variable::Temperature, grid, {1986, 2920, 3}, {1, 2, 3});
  try {
    convert_solar_cf(irr, temp, {"ES", {{0, 1.0}}}, SolarPanelModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AxisMismatch);
  }
  EXPECT_THROW(convert_wind_cf(irr, {"ES", {{0, 1.0}}}, WindTurbineModel{}), Error);
}
