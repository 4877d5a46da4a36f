#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "idss/baselines.hpp"
#include "idss/error.hpp"

namespace idss {
namespace {

BandStack two_band(std::vector<float> green, std::vector<float> nir) {
  const std::size_t n = green.size();
  BandStack s(1, n, default_band_names(13));
  for (std::size_t i = 0; i < n; ++i) {
    s.at(2, 0, i) = green[i];
    s.at(7, 0, i) = nir[i];
  }
  return s;
}

TEST(Ndwi, Examples) {
  const auto idx = ndwi(two_band({0.2f, 0.3f, 0.0f, 0.1f}, {0.2f, 0.1f, 0.0f, 0.3f}));
  EXPECT_EQ(idx.at(0, 0), 0.0f);
  EXPECT_NEAR(*idx.at(0, 1), 0.5, 1e-6);
  EXPECT_FALSE(idx.at(0, 2));
  EXPECT_NEAR(*idx.at(0, 3), -0.5, 1e-6);
}

TEST(Ndwi, InvalidPixelsUndefined) {
  auto s = two_band({0.2f}, {0.1f});
  s.set_valid(0, 0, false);
  EXPECT_FALSE(ndwi(s).at(0, 0));
  EXPECT_EQ(threshold_classify(ndwi(s), 0.0).at(0, 0), ClassId::kInvalid);
}

TEST(Ndwi, MissingBandThrows) {
  BandStack s(1, 1, {"B02", "B03", "B04"});
  EXPECT_THROW(ndwi(s), DimensionError);
}

TEST(Ndwi, PerPixelFormulaRangeAndScaleInvariance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> g(64), n(64);
    for (auto& x : g) x = u(rng);
    for (auto& x : n) x = u(rng);
    const auto idx = ndwi(two_band(g, n));
    std::vector<float> g2(g), n2(n);
    for (auto& x : g2) x *= 3.5f;
    for (auto& x : n2) x *= 3.5f;
    const auto scaled = ndwi(two_band(g2, n2));
    for (std::size_t i = 0; i < 64; ++i) {
      const double want = (static_cast<double>(g[i]) - n[i]) / (static_cast<double>(g[i]) + n[i]);
      ASSERT_TRUE(idx.at(0, i));
      ASSERT_NEAR(*idx.at(0, i), want, 1e-6);
      ASSERT_GE(*idx.at(0, i), -1.0f);
      ASSERT_LE(*idx.at(0, i), 1.0f);
      ASSERT_NEAR(*scaled.at(0, i), *idx.at(0, i), 1e-6);
    }
  }
}

TEST(Threshold, StrictComparisonAtCommonThresholds) {
  IndexMap m{1, 3, {-0.5f, 0.0f, 0.3f}, {1, 1, 1}};
  const auto a = threshold_classify(m, -0.22);
  EXPECT_EQ(a.at(0, 0), ClassId::kLand);
  EXPECT_EQ(a.at(0, 1), ClassId::kWater);
  EXPECT_EQ(a.at(0, 2), ClassId::kWater);
  const auto b = threshold_classify(m, 0.0);
  EXPECT_EQ(b.at(0, 0), ClassId::kLand);
  EXPECT_EQ(b.at(0, 1), ClassId::kLand);  // strictly greater
  EXPECT_EQ(b.at(0, 2), ClassId::kWater);
}

TEST(Threshold, MatchesPerPixelOracleAndIsMonotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int trial = 0; trial < 100; ++trial) {
    IndexMap m{4, 5, std::vector<float>(20), std::vector<std::uint8_t>(20, 1)};
    for (auto& v : m.values) v = rng() % 5 == 0 ? -0.22f : u(rng);
    m.valid[rng() % 20] = 0;
    for (const double t : {-0.22, 0.0, static_cast<double>(u(rng))}) {
      const auto labels = threshold_classify(m, t);
      for (std::size_t i = 0; i < 20; ++i) {
        const ClassId want = !m.valid[i] ? ClassId::kInvalid
                             : static_cast<double>(m.values[i]) > t ? ClassId::kWater
                                                                   : ClassId::kLand;
        ASSERT_EQ(labels.labels()[i], want);
      }
    }
    // Raising the threshold never turns land into water.
    const double lo = u(rng), hi = lo + 0.3;
    const auto a = threshold_classify(m, lo), b = threshold_classify(m, hi);
    for (std::size_t i = 0; i < 20; ++i) {
      if (b.labels()[i] == ClassId::kWater) ASSERT_EQ(a.labels()[i], ClassId::kWater);
    }
  }
}

TEST(IndexToStack, SingleNamedBand) {
  IndexMap m{1, 2, {0.25f, 0.0f}, {1, 0}};
  const auto s = index_to_stack(m);
  EXPECT_EQ(s.band_names(), std::vector<std::string>{"NDWI"});
  EXPECT_EQ(s.at(0, 0, 0), 0.25f);
  EXPECT_FALSE(s.valid(0, 1));
}

}  // namespace
}  // namespace idss
