/*
 * Copyright 2026 The outcome-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "outcome_audit/simulate.hpp"

#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace outcome_audit {
namespace {

TEST(Simulate, DeterministicInConfig) {
  const auto cfg = oracles::two_group_classification(200, 42, 0.1);
  const Dataset a = simulate(cfg);
  const Dataset b = simulate(cfg);
  EXPECT_EQ(a, b);

  auto cfg2 = cfg;
  cfg2.seed = 43;
  EXPECT_NE(simulate(cfg2), a);
}

TEST(Simulate, ZeroQueriesRejected) {
  auto cfg = oracles::two_group_classification(1, 1);
  cfg.n_queries = 0;
  EXPECT_THROW(simulate(cfg), ConfigError);
}

TEST(Simulate, SharesMustSumToOne) {
  auto cfg = oracles::two_group_classification(1, 1);
  cfg.groups[0].share = 0.7;
  EXPECT_THROW(simulate(cfg), ConfigError);
}

TEST(Simulate, EmptyGroupsRejected) {
  ScenarioConfig cfg;
  cfg.n_queries = 1;
  EXPECT_THROW(simulate(cfg), ConfigError);
}

TEST(Simulate, ClassificationDatasetIsValid) {
  const Dataset d = simulate(oracles::two_group_classification(500, 7, 0.1));
  EXPECT_TRUE(validate_dataset(d).empty());
  for (const auto& r : d.records)
    EXPECT_EQ(r.treated, r.score >= *d.threshold);
}

TEST(Simulate, RankingDatasetIsValidAndConserving) {
  const Dataset d = simulate(oracles::two_group_ranking(300, 11, 0.0, 8));
  EXPECT_TRUE(validate_dataset(d).empty());

  std::map<std::string, std::vector<int>> ranks;
  std::map<std::string, int> treated_count;
  for (const auto& r : d.records) {
    if (!r.treated) {
      EXPECT_FALSE(r.rank.has_value());
      continue;
    }
    ranks[r.query_id].push_back(*r.rank);
    ++treated_count[r.query_id];
  }
  for (auto& [q, rs] : ranks) {
    std::sort(rs.begin(), rs.end());
    ASSERT_GE(rs.size(), 1u);
    ASSERT_LE(rs.size(), 8u);
    for (std::size_t i = 0; i < rs.size(); ++i)
      EXPECT_EQ(rs[i], static_cast<int>(i) + 1);
  }
}

TEST(Simulate, RankingOrdersByDescendingScore) {
  const Dataset d = simulate(oracles::two_group_ranking(100, 3, 0.0, 6));
  std::map<std::string, std::vector<const AuditRecord*>> impressed;
  for (const auto& r : d.records)
    if (r.treated) impressed[r.query_id].push_back(&r);
  for (auto& [q, rs] : impressed) {
    std::sort(rs.begin(), rs.end(),
              [](const AuditRecord* a, const AuditRecord* b) { return *a->rank < *b->rank; });
    for (std::size_t i = 1; i < rs.size(); ++i)
      EXPECT_GE(rs[i - 1]->score, rs[i]->score);
  }
}

// Under a calibrated scorer with Bernoulli outcomes and the first demo
// fixture's qualification mix, the hired groups' mean outcomes converge to
// 3/4 and 47/60.
TEST(Simulate, HiredGroupMeansMatchExactMixture) {
  ScenarioConfig cfg;
  cfg.groups = {
      {"O", 0.5,
       {QualificationDistribution::Discrete{
           {{0.2, 6}, {0.4, 6}, {0.6, 2}, {0.8, 1}, {1.0, 1}}}}},
      {"X", 0.5,
       {QualificationDistribution::Discrete{
           {{0.2, 2}, {0.4, 2}, {0.6, 4}, {0.8, 5}, {1.0, 3}}}}},
  };
  cfg.viewer = {};  // Bernoulli in q
  cfg.allocation = ClassificationAllocation{0.6, 10};
  cfg.n_queries = 20000;
  cfg.seed = 1234;
  const Dataset d = simulate(cfg);

  std::map<int, std::vector<double>> outcomes;
  for (const auto& r : d.records)
    if (r.treated) outcomes[r.group].push_back(*r.outcome);
  const auto o = oracles::mean_se(outcomes[0]);
  const auto x = oracles::mean_se(outcomes[1]);
  EXPECT_NEAR(o.mean, 0.75, 3.0 * o.se);
  EXPECT_NEAR(x.mean, 9.4 / 12.0, 3.0 * x.se);
}

// Planted shift: group B is scored q - 0.1, so at any score bin its mean
// outcome exceeds the others' by 0.1 (analytically E[Y | s, B] = s + 0.1).
// Monte-Carlo oracle at one million records, 3-sigma tolerance.
TEST(Simulate, GroupShiftGapMatchesAnalyticValue) {
  ScenarioConfig cfg;
  cfg.groups = {{"A", 0.5, {QualificationDistribution::Uniform{0.2, 0.9}}},
                {"B", 0.5, {QualificationDistribution::Uniform{0.2, 0.9}}}};
  cfg.scorer.spec = ScorerSpec::GroupShift{{{"B", 0.1}}};
  cfg.viewer = {};
  cfg.allocation = ClassificationAllocation{0.0, 10};  // everyone treated
  cfg.n_queries = 100000;
  cfg.seed = 99;
  const Dataset d = simulate(cfg);
  ASSERT_EQ(d.records.size(), 1000000u);

  // Fixed-width score bins away from the clamp region.
  for (double lo = 0.2; lo < 0.7; lo += 0.1) {
    std::vector<double> ya, yb;
    for (const auto& r : d.records) {
      if (r.score < lo || r.score >= lo + 0.1) continue;
      (r.group == 0 ? ya : yb).push_back(*r.outcome);
    }
    ASSERT_GT(ya.size(), 1000u);
    ASSERT_GT(yb.size(), 1000u);
    const auto a = oracles::mean_se(ya);
    const auto b = oracles::mean_se(yb);
    const double se = std::sqrt(a.se * a.se + b.se * b.se);
    EXPECT_NEAR(b.mean - a.mean, 0.1, 3.0 * se) << "bin starting at " << lo;
  }
}

TEST(CheckFosd, BernoulliDominates) {
  ViewerSpec v;  // bernoulli
  const std::vector<double> grid = {0.2, 0.5, 0.9};
  EXPECT_TRUE(check_fosd(v, grid));
}

TEST(CheckFosd, ThresholdDominates) {
  ViewerSpec v;
  v.spec = ViewerSpec::ThresholdQ{0.6};
  const std::vector<double> grid = {0.0, 0.3, 0.59, 0.6, 0.61, 1.0};
  EXPECT_TRUE(check_fosd(v, grid));
}

// A decreasing apply probability breaks dominance: P(Y = 0) rises with q.
// Direct CDF comparison on one violating pair is the oracle.
TEST(CheckFosd, DecreasingApplyProbabilityFails) {
  ViewerSpec v;
  v.spec = ViewerSpec::ThreeLevel{{0.9, -0.8}, {0.2, 0.6}, 0.3};
  const double q1 = 0.3, q2 = 0.7;
  EXPECT_GT(v.cdf(0.0, q2), v.cdf(0.0, q1));  // violation exists at y = 0
  const std::vector<double> grid = {q1, q2};
  EXPECT_FALSE(check_fosd(v, grid));
}

TEST(CheckFosd, ShippedThreeLevelDefaultsDominate) {
  ViewerSpec v;
  v.spec = ViewerSpec::ThreeLevel{};
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[static_cast<std::size_t>(i)] = i / 100.0;
  EXPECT_TRUE(check_fosd(v, grid));
}

TEST(Simulate, ScoresAndQualificationsStayInUnitInterval) {
  ScenarioConfig cfg;
  cfg.groups = {{"A", 0.4, {QualificationDistribution::Beta{2.0, 5.0}}},
                {"B", 0.6, {QualificationDistribution::Uniform{0.0, 1.0}}}};
  cfg.scorer.spec = ScorerSpec::NoisyCalibrated{0.3};
  cfg.viewer.spec = ViewerSpec::ThreeLevel{};
  cfg.allocation = ClassificationAllocation{0.5, 5};
  cfg.n_queries = 2000;
  cfg.seed = 5;
  const Dataset d = simulate(cfg);
  EXPECT_TRUE(validate_dataset(d).empty());
  for (const auto& r : d.records) {
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
    EXPECT_GE(*r.true_qualification, 0.0);
    EXPECT_LE(*r.true_qualification, 1.0);
  }
  EXPECT_EQ(d.outcome_domain, OutcomeDomain::three_level);
  ASSERT_TRUE(d.objective_alpha.has_value());
}

// Calibration property: with a calibrated scorer and Bernoulli outcomes,
// within-decile group outcome gaps vanish. At n = 10^6 at least 95% of
// (decile, seed) cells must sit within 3 standard errors of zero.
TEST(Simulate, CalibrationPropertyAcrossDeciles) {
  int cells = 0, within = 0;
  for (const std::uint64_t seed : {21u, 22u, 23u}) {
    ScenarioConfig cfg;
    cfg.groups = {{"A", 0.5, {QualificationDistribution::Uniform{0.0, 1.0}}},
                  {"B", 0.5, {QualificationDistribution::Uniform{0.0, 1.0}}}};
    cfg.viewer = {};
    cfg.allocation = ClassificationAllocation{0.0, 10};
    cfg.n_queries = 100000;
    cfg.seed = seed;
    const Dataset d = simulate(cfg);
    for (int b = 0; b < 10; ++b) {
      const double lo = b / 10.0;
      const double hi = lo + 0.1;
      std::vector<double> ya, yb;
      for (const auto& r : d.records) {
        if (r.score < lo || (b < 9 ? r.score >= hi : r.score > hi)) continue;
        (r.group == 0 ? ya : yb).push_back(*r.outcome);
      }
      const auto a = oracles::mean_se(ya);
      const auto bb = oracles::mean_se(yb);
      const double se = std::sqrt(a.se * a.se + bb.se * bb.se);
      ++cells;
      if (std::fabs(a.mean - bb.mean) <= 3.0 * se) ++within;
    }
  }
  EXPECT_GE(within, static_cast<int>(0.95 * cells));
}

}  // namespace
}  // namespace outcome_audit
