#include <gtest/gtest.h>

#include <random>

#include "trajexit/lr_planner.hpp"

namespace trajexit {
namespace {

/// Boxes with an exact geometric-mean size (square boxes).
std::vector<BBoxRecord> corpus(std::size_t small, std::size_t medium, std::size_t large) {
  std::vector<BBoxRecord> out;
  for (std::size_t i = 0; i < small; ++i) out.push_back({"s" + std::to_string(i), "Boat", 12, 12 + double(i % 7)});
  for (std::size_t i = 0; i < medium; ++i) out.push_back({"m" + std::to_string(i), "ASV", 32 + double(i % 60), 40});
  for (std::size_t i = 0; i < large; ++i) out.push_back({"l" + std::to_string(i), "Boat", 96 + double(i % 50), 120});
  return out;
}

TEST(SizeMetric, GeometricMean) {
  EXPECT_EQ(size_metric(32, 32), 32.0);
  EXPECT_EQ(size_metric(16, 64), 32.0);
  EXPECT_NEAR(size_metric(100, 50), 70.7107, 1e-4);
  EXPECT_THROW(size_metric(0, 5), InputError);
  EXPECT_THROW(size_metric(5, -1), InputError);
}

TEST(Categorize, LeftInclusiveBoundaries) {
  const ScaleThresholds th;
  EXPECT_EQ(categorize(31.9, th), ScaleCategory::Small);
  EXPECT_EQ(categorize(32.0, th), ScaleCategory::Medium);
  EXPECT_EQ(categorize(95.999, th), ScaleCategory::Medium);
  EXPECT_EQ(categorize(96.0, th), ScaleCategory::Large);
}

TEST(Categorize, PartitionsForRandomThresholds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lo(1, 50), gap(1, 100), m(0.1, 300);
  for (int i = 0; i < 500; ++i) {
    ScaleThresholds th{lo(rng), 0};
    th.medium_max = th.small_max + gap(rng);
    const double x = m(rng);
    const auto c = categorize(x, th);
    const int hits = int(x < th.small_max) + int(x >= th.small_max && x < th.medium_max) + int(x >= th.medium_max);
    EXPECT_EQ(hits, 1);
    EXPECT_EQ(c == ScaleCategory::Small, x < th.small_max);
    EXPECT_EQ(c == ScaleCategory::Large, x >= th.medium_max);
  }
}

TEST(Compose, TableComposition) {
  const auto comp = compose(corpus(316, 767, 427), ScaleThresholds{});
  EXPECT_EQ(comp.total(), 1510u);
  EXPECT_EQ(comp[ScaleCategory::Small].count, 316u);
  EXPECT_EQ(comp[ScaleCategory::Medium].count, 767u);
  EXPECT_EQ(comp[ScaleCategory::Large].count, 427u);
  EXPECT_NEAR(comp[ScaleCategory::Small].fraction, 0.2093, 5e-5);
  EXPECT_NEAR(comp[ScaleCategory::Medium].fraction, 0.5079, 5e-5);
  EXPECT_NEAR(comp[ScaleCategory::Large].fraction, 0.2828, 5e-5);
  EXPECT_NEAR(comp[ScaleCategory::Small].ratio, 0.618, 5e-4);
  EXPECT_EQ(comp[ScaleCategory::Medium].ratio, 1.0);
  EXPECT_NEAR(comp[ScaleCategory::Large].ratio, 0.390, 5e-4);
}

TEST(Compose, SingleCategory) {
  const auto comp = compose_counts({0, 12, 0}, kDefaultScaleWeights);
  EXPECT_EQ(comp[ScaleCategory::Medium].fraction, 1.0);
  EXPECT_EQ(comp[ScaleCategory::Medium].ratio, 1.0);
  EXPECT_EQ(comp[ScaleCategory::Small].ratio, 0.0);
  EXPECT_EQ(comp[ScaleCategory::Large].ratio, 0.0);
}

TEST(Compose, UniformIsAllOnes) {
  const auto comp = compose_counts({5, 5, 5}, {1.0, 1.0, 1.0});
  for (const auto& c : comp.categories) EXPECT_EQ(c.ratio, 1.0);
}

TEST(Compose, Errors) {
  EXPECT_THROW(compose({}, ScaleThresholds{}), InputError);
  EXPECT_THROW(compose_counts({1, 1, 1}, {1.0, 0.0, 1.0}), InputError);
  EXPECT_THROW(compose_counts({1, 1, 1}, kDefaultScaleWeights, {50, 40}), InputError);
}

TEST(Compose, ScaleInvariantAndSingleMaximum) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int i = 0; i < 300; ++i) {
    const std::array<std::size_t, 3> counts = {rng() % 500, rng() % 500, 1 + rng() % 500};
    const ScaleWeights weights = {w(rng), w(rng), w(rng)};
    const std::size_t factor = 1 + rng() % 9;
    const auto a = compose_counts(counts, weights);
    const auto b = compose_counts({counts[0] * factor, counts[1] * factor, counts[2] * factor}, weights);
    int ones = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(a.categories[k].ratio, b.categories[k].ratio, 1e-12);
      EXPECT_LE(a.categories[k].ratio, 1.0);
      ones += a.categories[k].ratio == 1.0;
    }
    EXPECT_GE(ones, 1);
  }
}

TEST(Schedule, TableLearningRates) {
  const auto comp = compose_counts({316, 767, 427}, kDefaultScaleWeights);
  const auto s = schedule(comp, 1e-3);
  EXPECT_NEAR(s.eta(Head::P3), 6.18e-4, 1e-6);
  EXPECT_NEAR(s.eta(Head::P4), 1.00e-3, 1e-6);
  EXPECT_NEAR(s.eta(Head::P5), 3.90e-4, 1e-6);
  EXPECT_EQ(s.eta_neck, 0.8 * 1e-3);
  EXPECT_EQ(s.eta(Head::P4), s.eta0);
  EXPECT_TRUE(s.floored.empty());
}

TEST(Schedule, Uniform) {
  const auto s = schedule(compose_counts({3, 3, 3}, {1, 1, 1}), 2e-3);
  for (Head h : kAllHeads) EXPECT_EQ(s.eta(h), 2e-3);
  EXPECT_DOUBLE_EQ(s.eta_neck, 1.6e-3);
}

TEST(Schedule, EmptyCategoryFloor) {
  const auto s = schedule(compose_counts({0, 10, 10}, kDefaultScaleWeights), 1e-3);
  EXPECT_DOUBLE_EQ(s.eta(Head::P3), 1e-5);
  ASSERT_EQ(s.floored.size(), 1u);
  EXPECT_EQ(s.floored[0], Head::P3);
}

TEST(Schedule, LinearInBaseRate) {
  const auto comp = compose_counts({316, 767, 427}, kDefaultScaleWeights);
  const auto a = schedule(comp, 1e-3), b = schedule(comp, 2e-3);
  for (Head h : kAllHeads) EXPECT_EQ(b.eta(h), 2 * a.eta(h));
  EXPECT_EQ(b.eta_neck, 2 * a.eta_neck);
  EXPECT_THROW(schedule(comp, 0.0), InputError);
}

TEST(Schedule, JsonAndTable) {
  const auto comp = compose_counts({316, 767, 427}, kDefaultScaleWeights);
  const auto s = schedule(comp, 1e-3);
  const auto j = to_json(comp, s);
  EXPECT_EQ(j["backbone"], "unspecified");
  EXPECT_EQ(j["categories"]["medium"]["count"], 767);
  EXPECT_EQ(j["eta_neck"].get<double>(), 8e-4);

  const std::string table = format_lr_table(comp, s);
  EXPECT_EQ(table,
            "Component    Size range        Instances  f_k (%)  omega_k  r_k            eta\n"
            "Small (P3)   s < 32px          316        20.93    1.5      0.618          6.18e-04\n"
            "Medium (P4)  32 <= s < 96px    767        50.79    1.0      1.000          1.00e-03\n"
            "Large (P5)   s >= 96px         427        28.28    0.7      0.390          3.90e-04\n"
            "Neck         ---               ---        ---      ---      0.800 (fixed)  8.00e-04\n");
}

}  // namespace
}  // namespace trajexit
