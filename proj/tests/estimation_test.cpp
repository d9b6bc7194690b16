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

#include "outcome_audit/ols.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "outcome_audit/rng.hpp"
#include "oracles.hpp"

namespace outcome_audit {
namespace {

DesignSpec one_group_design(bool score_control = true) {
  DesignSpec spec;
  spec.reference_group = 0;
  spec.include_score_control = score_control;
  return spec;
}

TEST(FitOls, ExactLinearFit) {
  std::vector<ObsRow> rows;
  for (const double s : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95})
    rows.push_back({0.2 + 0.5 * s, 0, s});
  const RegressionFit fit = fit_ols(rows, one_group_design());
  EXPECT_NEAR(fit.coefficient("intercept"), 0.2, 1e-12);
  EXPECT_NEAR(fit.coefficient("score"), 0.5, 1e-12);
  EXPECT_NEAR(fit.residual_variance, 0.0, 1e-20);
}

// Five-row system solved independently through explicit normal equations.
TEST(FitOls, MatchesHandNormalEquationsOnToySystem) {
  const std::vector<ObsRow> rows = {
      {1.0, 0, 0.2}, {0.0, 1, 0.4}, {1.0, 0, 0.5}, {1.0, 1, 0.7}, {0.0, 0, 0.9},
  };
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};
  const RegressionFit fit = fit_ols(rows, spec);

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& r : rows) {
    x.push_back({1.0, r.group == 1 ? 1.0 : 0.0, r.score});
    y.push_back(r.response);
  }
  const auto beta = oracles::brute_force_ols(x, y);
  EXPECT_NEAR(fit.coefficient("intercept"), beta[0], 1e-12);
  EXPECT_NEAR(fit.coefficient("group:B"), beta[1], 1e-12);
  EXPECT_NEAR(fit.coefficient("score"), beta[2], 1e-12);
}

TEST(FitOls, MatchesBruteForceOnRandomDesigns) {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 10 + static_cast<int>(rng.next_int(0, 40));
    const int n_groups = 1 + static_cast<int>(rng.next_int(0, 3));
    const bool with_score = rng.next_bernoulli(0.8);

    std::vector<ObsRow> rows;
    bool group_seen[4] = {false, false, false, false};
    for (int i = 0; i < n; ++i) {
      ObsRow r;
      r.group = static_cast<int>(rng.next_int(0, n_groups - 1));
      group_seen[r.group] = true;
      r.score = rng.next_double();
      r.response = rng.next_double() + 0.3 * r.score + 0.1 * r.group;
      rows.push_back(r);
    }
    bool all_present = true;
    for (int g = 0; g < n_groups; ++g) all_present = all_present && group_seen[g];
    if (!all_present) continue;

    DesignSpec spec;
    spec.reference_group = 0;
    for (int g = 1; g < n_groups; ++g) spec.dummies.push_back({g, "g" + std::to_string(g)});
    spec.include_score_control = with_score;

    RegressionFit fit;
    try {
      fit = fit_ols(rows, spec);
    } catch (const SingularDesignError&) {
      continue;  // a random degenerate draw; covered by the singularity test
    }

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto& r : rows) {
      std::vector<double> row = {1.0};
      for (int g = 1; g < n_groups; ++g) row.push_back(r.group == g ? 1.0 : 0.0);
      if (with_score) row.push_back(r.score);
      x.push_back(std::move(row));
      y.push_back(r.response);
    }
    const auto beta = oracles::brute_force_ols(x, y);
    for (std::size_t j = 0; j < beta.size(); ++j)
      EXPECT_NEAR(fit.terms[j].coefficient, beta[j], 1e-10) << "rep " << rep;

    // Residual orthogonality: max |X'e| <= 1e-8 * n with centered response.
    double mean_y = 0.0;
    for (const double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    for (std::size_t j = 0; j < beta.size(); ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double fitv = 0.0;
        for (std::size_t k = 0; k < beta.size(); ++k)
          fitv += x[i][k] * fit.terms[k].coefficient;
        dot += x[i][j] * ((y[i] - mean_y) - (fitv - mean_y));
      }
      EXPECT_LE(std::fabs(dot), 1e-8 * n);
    }
  }
}

TEST(FitOls, ScaleEquivariance) {
  Rng rng(7);
  std::vector<ObsRow> rows;
  for (int i = 0; i < 200; ++i) {
    ObsRow r;
    r.group = static_cast<int>(rng.next_int(0, 1));
    r.score = rng.next_double();
    r.response = rng.next_double();
    rows.push_back(r);
  }
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};

  for (const auto cov : {CovarianceEstimator::hc1, CovarianceEstimator::classical}) {
    spec.covariance = cov;
    const RegressionFit base = fit_ols(rows, spec);
    auto scaled_rows = rows;
    const double c = 3.7;
    for (auto& r : scaled_rows) r.response *= c;
    const RegressionFit scaled = fit_ols(scaled_rows, spec);
    for (std::size_t j = 0; j < base.terms.size(); ++j) {
      EXPECT_NEAR(scaled.terms[j].coefficient, c * base.terms[j].coefficient, 1e-9);
      EXPECT_NEAR(scaled.terms[j].standard_error, c * base.terms[j].standard_error, 1e-9);
      EXPECT_NEAR(scaled.terms[j].t_statistic, base.terms[j].t_statistic, 1e-8);
      EXPECT_NEAR(scaled.terms[j].p_value, base.terms[j].p_value, 1e-10);
    }
  }
}

// Re-parameterizing the contrast (new reference group) must not move the
// fitted values.
TEST(FitOls, ReferenceShiftLeavesFittedValuesUnchanged) {
  Rng rng(11);
  std::vector<ObsRow> rows;
  for (int i = 0; i < 300; ++i) {
    ObsRow r;
    r.group = static_cast<int>(rng.next_int(0, 2));
    r.score = rng.next_double();
    r.response = rng.next_double() + 0.2 * r.group;
    rows.push_back(r);
  }
  DesignSpec ref_a;
  ref_a.reference_group = 0;
  ref_a.dummies = {{1, "B"}, {2, "C"}};
  DesignSpec ref_b;
  ref_b.reference_group = 1;
  ref_b.dummies = {{0, "A"}, {2, "C"}};

  const RegressionFit fa = fit_ols(rows, ref_a);
  const RegressionFit fb = fit_ols(rows, ref_b);

  const auto fitted = [](const RegressionFit& f, const ObsRow& r,
                         const std::map<int, std::string>& dummy_names) {
    double v = f.coefficient("intercept") + f.coefficient("score") * r.score;
    const auto it = dummy_names.find(r.group);
    if (it != dummy_names.end()) v += f.coefficient("group:" + it->second);
    return v;
  };
  const std::map<int, std::string> names_a = {{1, "B"}, {2, "C"}};
  const std::map<int, std::string> names_b = {{0, "A"}, {2, "C"}};
  for (const auto& r : rows)
    EXPECT_NEAR(fitted(fa, r, names_a), fitted(fb, r, names_b), 1e-10);

  // And the dummy-shift identity itself: new beta_A = -old beta_B.
  EXPECT_NEAR(fb.coefficient("group:A"), -fa.coefficient("group:B"), 1e-10);
}

TEST(FitOls, SingularDesignNamesCollinearColumn) {
  std::vector<ObsRow> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({0.5, 0, i / 50.0});
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};  // group B never appears -> zero column
  try {
    fit_ols(rows, spec);
    FAIL() << "expected SingularDesignError";
  } catch (const SingularDesignError& e) {
    ASSERT_EQ(e.collinear_terms.size(), 1u);
    EXPECT_EQ(e.collinear_terms[0], "group:B");
  }
}

TEST(FitOls, ConstantScoreIsCollinearWithIntercept) {
  std::vector<ObsRow> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({i % 2 ? 1.0 : 0.0, i % 2, 0.5});
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};
  EXPECT_THROW(fit_ols(rows, spec), SingularDesignError);
}

TEST(FitOls, TooFewObservations) {
  std::vector<ObsRow> rows = {{1.0, 0, 0.1}, {0.0, 0, 0.2}};
  EXPECT_THROW(fit_ols(rows, one_group_design()), DataError);
}

TEST(WaldTest, NullExactlyTrueGivesPOne) {
  RegressionFit fit;
  fit.terms = {{"group:B", 0.0, 0.1, 0.0, 1.0}};
  const WaldResult r = wald_test(fit, "group:B", 0.05);
  EXPECT_EQ(r.verdict, TestVerdict::fail_to_reject);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

// Boundary behavior: p(1.96) is a hair below 0.05, p(1.95) a hair above;
// rejection requires p strictly below the level, so a p exactly at the
// level fails to reject.
TEST(WaldTest, NormalQuantileBoundary) {
  const auto make_fit = [](double t) {
    RegressionFit fit;
    fit.terms = {{"group:B", t * 0.01, 0.01, t, detail::two_sided_normal_p(t)}};
    return fit;
  };
  const WaldResult at_196 = wald_test(make_fit(1.96), "group:B", 0.05);
  EXPECT_NEAR(at_196.p_value, 0.05, 5e-4);
  EXPECT_EQ(at_196.verdict, TestVerdict::reject);  // 0.049996 < 0.05

  const WaldResult at_195 = wald_test(make_fit(1.95), "group:B", 0.05);
  EXPECT_EQ(at_195.verdict, TestVerdict::fail_to_reject);  // 0.051 >= 0.05

  // Strictness: testing exactly at the achieved p fails to reject.
  const RegressionFit f = make_fit(1.7);
  const WaldResult strict = wald_test(f, "group:B", f.terms[0].p_value);
  EXPECT_EQ(strict.verdict, TestVerdict::fail_to_reject);
}

TEST(WaldTest, UnknownTermThrows) {
  RegressionFit fit;
  fit.terms = {{"intercept", 1.0, 0.1, 10.0, 0.0}};
  EXPECT_THROW(wald_test(fit, "group:Z", 0.05), DataError);
}

TEST(FitOls, PValuesAlwaysInUnitInterval) {
  Rng rng(31);
  std::vector<ObsRow> rows;
  for (int i = 0; i < 500; ++i) {
    ObsRow r;
    r.group = static_cast<int>(rng.next_int(0, 1));
    r.score = rng.next_double();
    r.response = rng.next_bernoulli(r.score) ? 1.0 : 0.0;
    rows.push_back(r);
  }
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};
  const RegressionFit fit = fit_ols(rows, spec);
  for (const auto& t : fit.terms) {
    EXPECT_GE(t.p_value, 0.0);
    EXPECT_LE(t.p_value, 1.0);
    if (t.standard_error > 0.0) {
      EXPECT_NEAR(t.t_statistic, t.coefficient / t.standard_error, 1e-12);
    }
  }
}

// Planted-gap recovery: one simulated decile, coefficient within 3 SE of
// the analytic 0.1.
TEST(FitOls, RecoversPlantedGroupGap) {
  const Dataset d = simulate(oracles::two_group_classification(10000, 77, 0.1));
  std::vector<ObsRow> rows;
  for (const auto& r : d.records) {
    if (!r.treated || r.score >= 0.54) continue;  // scores in [0.5, 0.54)
    rows.push_back({*r.outcome, r.group, r.score});
  }
  ASSERT_GT(rows.size(), 500u);
  DesignSpec spec;
  spec.reference_group = 0;
  spec.dummies = {{1, "B"}};
  const RegressionFit fit = fit_ols(rows, spec);
  const auto& term = fit.at("group:B");
  EXPECT_NEAR(term.coefficient, 0.1, 3.0 * term.standard_error);
}

TEST(FitOls, Hc1AndClassicalDifferUnderHeteroskedasticity) {
  Rng rng(13);
  std::vector<ObsRow> rows;
  for (int i = 0; i < 4000; ++i) {
    ObsRow r;
    r.group = 0;
    r.score = rng.next_double();
    r.response = rng.next_bernoulli(r.score) ? 1.0 : 0.0;  // Var = s(1-s)
    rows.push_back(r);
  }
  DesignSpec hc1 = one_group_design();
  DesignSpec classical = one_group_design();
  classical.covariance = CovarianceEstimator::classical;
  const double se_hc1 = fit_ols(rows, hc1).at("score").standard_error;
  const double se_cl = fit_ols(rows, classical).at("score").standard_error;
  EXPECT_GT(std::fabs(se_hc1 - se_cl) / se_cl, 0.01);
}

}  // namespace
}  // namespace outcome_audit
