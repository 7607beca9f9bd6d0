#include "lanepareto/cost.h"

#include <cmath>

#include <gtest/gtest.h>

#include "json.hpp"
#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

TEST(StepCostTest, HandValues) {
  CostWeights w;
  const TickCost c = StepCost({2.0, 20.0, 25.0, LeaderGap{3.0, 10.0}}, w);
  EXPECT_DOUBLE_EQ(c.comfort, 2.0);
  EXPECT_DOUBLE_EQ(c.efficiency, 5.0);
  EXPECT_NEAR(c.safety, 9.0 + 1.0 / (100.0 + 1e-6), 1e-12);
}

TEST(StepCostTest, OpeningGapDropsClosingTerm) {
  CostWeights w;
  const TickCost c = StepCost({0.0, 25.0, 25.0, LeaderGap{-1.0, 10.0}}, w);
  EXPECT_EQ(c.comfort, 0.0);
  EXPECT_EQ(c.efficiency, 0.0);
  EXPECT_NEAR(c.safety, 0.01, 1e-9);
}

TEST(StepCostTest, NoLeaderMeansNoSafetyCost) {
  const TickCost c = StepCost({1.0, 25.0, 30.0, std::nullopt}, CostWeights{});
  EXPECT_EQ(c.safety, 0.0);
}

TEST(AggregateTest, SingleTickWithUnitWeightsAndDefaultNormalizers) {
  CostWeights w;
  w.comfort = w.efficiency = w.safety = 1.0;
  const std::vector<TickCost> series{{8.0, 25.0, 0.5}};
  EXPECT_NEAR(AggregateJlc(series, w), 3.0, 1e-12);
}

TEST(AggregateTest, SumsOverTicks) {
  CostWeights w;  // thirds
  const std::vector<TickCost> series{{8.0, 0.0, 0.0}, {8.0, 0.0, 0.0}};
  EXPECT_NEAR(AggregateJlc(series, w), 2.0 / 3.0, 1e-12);
}

TEST(FollowerWeightsTest, ProportionalToSpeedOverRootDistance) {
  const std::vector<FollowerOffset> f{{4.0, 4.0}, {2.0, 16.0}};
  // sigma = 4/2 = 2 and 2/4 = 0.5.
  const auto w = FollowerWeights(f);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w[0], 0.8, 1e-12);
  EXPECT_NEAR(w[1], 0.2, 1e-12);
}

TEST(FollowerWeightsTest, AllZeroSpeedDifferencesAreUniform) {
  const std::vector<FollowerOffset> f{{0.0, 10.0}, {0.0, 20.0}, {0.0, 30.0}};
  for (double w : FollowerWeights(f)) EXPECT_NEAR(w, 1.0 / 3.0, 1e-12);
}

TEST(FollowerWeightsTest, NonPositiveDistanceThrows) {
  const std::vector<FollowerOffset> f{{1.0, 0.0}};
  EXPECT_THROW(FollowerWeights(f), Error);
}

TEST(AggregateTest, JtfWeightsEachFollower) {
  CostWeights w;
  w.comfort = 1.0;
  w.efficiency = w.safety = 0.0;
  const std::vector<std::vector<TickCost>> series{{{8.0, 0, 0}}, {{16.0, 0, 0}}};
  const std::vector<double> weights{0.25, 0.75};
  EXPECT_NEAR(AggregateJtf(series, weights, w), 0.25 * 1.0 + 0.75 * 2.0, 1e-12);
}

TEST(AggregateTest, JtfRejectsMismatchedInputs) {
  CostWeights w;
  const std::vector<std::vector<TickCost>> series{{{1, 1, 1}}, {{1, 1, 1}, {1, 1, 1}}};
  EXPECT_THROW(AggregateJtf(series, std::vector<double>{0.5, 0.5}, w), Error);
  EXPECT_THROW(AggregateJtf(series, std::vector<double>{1.0}, w), Error);
}

TEST(ValidateTest, ZeroNormalizerNamesField) {
  CostWeights w;
  w.safety_norm = 0.0;
  try {
    Validate(w);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "normalizers.safety");
  }
}

TEST(BreakdownTest, JsonCarriesAggregates) {
  CostBreakdown b;
  b.j_lc = 1.5;
  b.j_tf = 2.5;
  b.lane_changer.series = {{1, 2, 3}};
  const auto j = nlohmann::json::parse(CostBreakdownToJson(b));
  EXPECT_DOUBLE_EQ(j["J_LC"].get<double>(), 1.5);
  EXPECT_DOUBLE_EQ(j["J_TF"].get<double>(), 2.5);
}

}  // namespace
}  // namespace lanepareto
