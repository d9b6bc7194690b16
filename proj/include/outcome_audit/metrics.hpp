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

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "outcome_audit/audit.hpp"
#include "outcome_audit/binning.hpp"
#include "outcome_audit/errors.hpp"
#include "outcome_audit/rational.hpp"
#include "outcome_audit/simulate.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

// ---------------------------------------------------------------------------
// Metric verdicts
// ---------------------------------------------------------------------------

struct MetricDetailRow {
  std::string statistic;  // "precision", "total_variation", "coefficient"
  std::string group;
  std::string group_b;                  // second group for pairwise stats
  std::optional<double> outcome_value;  // conditioning value, if any
  std::optional<int> bin_index;
  double value = 0.0;

  bool operator==(const MetricDetailRow&) const = default;
};

struct MetricVerdict {
  std::string metric;  // "outcome_test" | "equalized_odds" | "group_precision"
  bool fair = true;
  double tolerance = 0.0;
  std::vector<MetricDetailRow> detail;
  std::vector<std::string> notes;

  bool operator==(const MetricVerdict&) const = default;
};

// ---------------------------------------------------------------------------
// Group precision
// ---------------------------------------------------------------------------

// Per-group mean realized outcome among treated records. This is the
// expected-outcome generalization of binary precision: with binary outcomes
// it is exactly sum(Y) / sum(T). Pass binarize_threshold to recover the
// classical binary variant on graded outcomes. Groups with no treated
// records are absent from the result.
inline std::map<std::string, double> group_precision(
    const Dataset& d, std::optional<double> binarize_threshold = std::nullopt) {
  std::map<std::string, std::pair<double, std::int64_t>> acc;
  for (const auto& r : d.records) {
    if (!r.treated) continue;
    if (!r.outcome) throw DataError("group_precision: treated record '" + r.record_id +
                                    "' has no outcome");
    double y = *r.outcome;
    if (binarize_threshold) y = y >= *binarize_threshold ? 1.0 : 0.0;
    auto& a = acc[d.group_label(r.group)];
    a.first += y;
    a.second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [label, a] : acc)
    out[label] = a.first / static_cast<double>(a.second);
  return out;
}

inline MetricVerdict group_precision_verdict(const Dataset& d, double tolerance) {
  MetricVerdict v;
  v.metric = "group_precision";
  v.tolerance = tolerance;
  const auto precisions = group_precision(d);
  for (const auto& [label, p] : precisions)
    v.detail.push_back({"precision", label, "", std::nullopt, std::nullopt, p});
  double max_gap = 0.0;
  for (auto i = precisions.begin(); i != precisions.end(); ++i)
    for (auto j = std::next(i); j != precisions.end(); ++j)
      max_gap = std::max(max_gap, std::fabs(i->second - j->second));
  v.fair = max_gap <= tolerance;
  if (precisions.size() < 2) {
    v.fair = true;
    v.notes.push_back("fewer than two groups with treated records; trivially equal");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Equalized odds
// ---------------------------------------------------------------------------

// Checks score independence of group conditional on the realized outcome.
// Outcomes are binarized at 0.5 (graded objectives collapse to whether the
// full-credit outcome was realized); scores are histogrammed over shared
// quantile bins, and the verdict compares per-group score distributions by
// total-variation distance at each outcome value.
inline MetricVerdict equalized_odds_check(const Dataset& d, int n_score_bins,
                                          double tolerance) {
  if (n_score_bins < 2) throw ConfigError("equalized_odds_check: n_score_bins must be >= 2");
  MetricVerdict v;
  v.metric = "equalized_odds";
  v.tolerance = tolerance;

  struct Obs {
    double score;
    int group;
    int y;
  };
  std::vector<Obs> obs;
  std::vector<double> scores;
  for (const auto& r : d.records) {
    if (!r.treated) continue;
    if (!r.outcome) throw DataError("equalized_odds_check: treated record '" +
                                    r.record_id + "' has no outcome");
    obs.push_back({r.score, r.group, *r.outcome >= 0.5 ? 1 : 0});
    scores.push_back(r.score);
  }
  if (obs.empty()) {
    v.notes.push_back("no treated records; trivially fair");
    return v;
  }
  std::sort(scores.begin(), scores.end());
  const std::vector<double> cuts = detail::quantile_cuts(scores, n_score_bins);
  const std::size_t n_bins = cuts.size() + 1;
  const auto bin_of = [&cuts](double s) {
    std::size_t b = 0;
    for (const double c : cuts)
      if (s >= c) ++b;
    return b;
  };

  // histograms[outcome][group] -> per-bin counts
  std::map<int, std::map<int, std::vector<std::int64_t>>> hist;
  for (const Obs& o : obs) {
    auto& h = hist[o.y][o.group];
    if (h.empty()) h.assign(n_bins, 0);
    ++h[bin_of(o.score)];
  }

  std::set<int> groups_with_treated;
  for (const Obs& o : obs) groups_with_treated.insert(o.group);

  double max_tv = 0.0;
  bool any_comparison = false;
  for (const auto& [y, groups] : hist) {
    for (const int g : groups_with_treated)
      if (!groups.count(g))
        v.notes.push_back("group '" + d.group_label(g) + "' unrepresented at outcome " +
                          std::to_string(y) + "; comparison skipped");
    for (auto i = groups.begin(); i != groups.end(); ++i)
      for (auto j = std::next(i); j != groups.end(); ++j) {
        std::int64_t ni = 0, nj = 0;
        for (const auto c : i->second) ni += c;
        for (const auto c : j->second) nj += c;
        double tv = 0.0;
        for (std::size_t b = 0; b < n_bins; ++b)
          tv += std::fabs(static_cast<double>(i->second[b]) / static_cast<double>(ni) -
                          static_cast<double>(j->second[b]) / static_cast<double>(nj));
        tv *= 0.5;
        max_tv = std::max(max_tv, tv);
        any_comparison = true;
        v.detail.push_back({"total_variation", d.group_label(i->first),
                            d.group_label(j->first), static_cast<double>(y),
                            std::nullopt, tv});
      }
  }
  if (!any_comparison)
    v.notes.push_back("no outcome value is shared by two groups; trivially fair");
  v.fair = max_tv <= tolerance;
  return v;
}

// ---------------------------------------------------------------------------
// Built-in demo fixtures: average vs marginal outcomes under a transparent
// hiring rule
// ---------------------------------------------------------------------------

enum class DemoFixture { fig1, fig2, fig3 };

inline const char* to_string(DemoFixture f) {
  switch (f) {
    case DemoFixture::fig1: return "fig1";
    case DemoFixture::fig2: return "fig2";
    default: return "fig3";
  }
}

inline std::optional<DemoFixture> demo_fixture_from_string(const std::string& s) {
  if (s == "fig1") return DemoFixture::fig1;
  if (s == "fig2") return DemoFixture::fig2;
  if (s == "fig3") return DemoFixture::fig3;
  return std::nullopt;
}

struct DemoMassPoint {
  int q_tenths = 0;  // qualification as tenths, e.g. 6 -> q = 0.6
  int mass = 0;
  bool hired = false;

  bool operator==(const DemoMassPoint&) const = default;
};

struct DemoGroupResult {
  std::string group;
  std::vector<DemoMassPoint> masses;
  Rational hired_conditional_mean;  // E(Y | hired, group)
  Rational marginal_outcome;        // expected outcome at the group's hiring bar
  Rational hiring_bar;              // lowest hired qualification

  bool operator==(const DemoGroupResult&) const = default;
};

struct DemoReport {
  std::string fixture;
  std::string description;
  std::vector<DemoGroupResult> groups;

  bool operator==(const DemoReport&) const = default;
};

// Exact arithmetic over unit-mass fixtures. Outcomes are Bernoulli in the
// true qualification, so a hired subgroup's expected outcome is its mean
// qualification and the marginal outcome equals the hiring bar itself.
// fig1/fig2 share one uniform hiring rule (bar 0.6 for everyone) under two
// different qualification distributions: group averages move, margins do
// not. fig3 applies a biased rule (bar 0.4 for O, 0.8 for X): the margins
// expose it.
inline DemoReport infra_marginality_demo(DemoFixture fixture) {
  DemoReport rep;
  rep.fixture = to_string(fixture);

  const auto make_group = [](std::string label, std::vector<DemoMassPoint> masses) {
    DemoGroupResult g;
    g.group = std::move(label);
    g.masses = std::move(masses);
    std::int64_t weighted = 0, total = 0, bar = 11;
    for (const auto& m : g.masses) {
      if (!m.hired) continue;
      weighted += static_cast<std::int64_t>(m.q_tenths) * m.mass;
      total += m.mass;
      bar = std::min<std::int64_t>(bar, m.q_tenths);
    }
    g.hired_conditional_mean = Rational::of(weighted, 10 * total);
    g.hiring_bar = Rational::of(bar, 10);
    g.marginal_outcome = g.hiring_bar;
    return g;
  };

  switch (fixture) {
    case DemoFixture::fig1:
      rep.description =
          "uniform hiring bar 0.6; groups differ in qualification mix";
      rep.groups = {
          make_group("O", {{2, 6, false}, {4, 6, false}, {6, 2, true}, {8, 1, true}, {10, 1, true}}),
          make_group("X", {{2, 2, false}, {4, 2, false}, {6, 4, true}, {8, 5, true}, {10, 3, true}}),
      };
      break;
    case DemoFixture::fig2:
      rep.description =
          "same uniform bar 0.6; X shifted toward higher qualifications";
      rep.groups = {
          make_group("O", {{2, 6, false}, {4, 6, false}, {6, 2, true}, {8, 1, true}, {10, 1, true}}),
          make_group("X", {{2, 2, false}, {4, 2, false}, {6, 3, true}, {8, 4, true}, {10, 5, true}}),
      };
      break;
    case DemoFixture::fig3:
      rep.description = "biased rule: bar 0.4 for O but 0.8 for X";
      rep.groups = {
          make_group("O", {{2, 6, false}, {4, 6, true}, {6, 2, true}, {8, 1, true}, {10, 1, true}}),
          make_group("X", {{2, 2, false}, {4, 2, false}, {6, 4, false}, {8, 5, true}, {10, 3, true}}),
      };
      break;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Counterexample fixtures for the rival metrics
// ---------------------------------------------------------------------------

namespace fixtures {

namespace detail_fx {

inline void append_mass(Dataset& d, const std::string& group_label, int group,
                        double score, double qualification, bool treated,
                        std::optional<double> outcome, int copies) {
  for (int c = 0; c < copies; ++c) {
    AuditRecord r;
    r.record_id = group_label + "-" + std::to_string(d.records.size());
    r.query_id = "q0";
    r.group = group;
    r.score = score;
    r.treated = treated;
    r.outcome = outcome;
    r.true_qualification = qualification;
    d.records.push_back(std::move(r));
  }
}

}  // namespace detail_fx

// Calibrated scorer, threshold 0.6, groups with different qualification
// mixes. Precision differs between groups (47/60 vs 3/4) even though the
// scorer treats equal qualifications identically: the metric false-alarms.
// Outcomes record the expected value q directly so the numbers are exact.
inline Dataset precision_false_positive_dataset() {
  Dataset d;
  d.kind = DatasetKind::classification;
  d.threshold = 0.6;
  d.outcome_domain = OutcomeDomain::continuous;
  d.groups = {{"O", 0}, {"X", 1}};
  using detail_fx::append_mass;
  append_mass(d, "O", 0, 0.2, 0.2, false, std::nullopt, 5);
  append_mass(d, "O", 0, 0.4, 0.4, false, std::nullopt, 5);
  append_mass(d, "O", 0, 0.6, 0.6, true, 0.6, 2);
  append_mass(d, "O", 0, 0.8, 0.8, true, 0.8, 1);
  append_mass(d, "O", 0, 1.0, 1.0, true, 1.0, 1);
  append_mass(d, "X", 1, 0.4, 0.4, false, std::nullopt, 2);
  append_mass(d, "X", 1, 0.6, 0.6, true, 0.6, 4);
  append_mass(d, "X", 1, 0.8, 0.8, true, 0.8, 5);
  append_mass(d, "X", 1, 1.0, 1.0, true, 1.0, 3);
  return d;
}

// Group X is under-scored by 0.2, yet the qualification mixes offset so
// both groups show precision 0.9: the metric misses real bias.
inline Dataset precision_false_negative_dataset() {
  Dataset d;
  d.kind = DatasetKind::classification;
  d.threshold = 0.6;
  d.outcome_domain = OutcomeDomain::continuous;
  d.groups = {{"O", 0}, {"X", 1}};
  using detail_fx::append_mass;
  append_mass(d, "O", 0, 0.4, 0.4, false, std::nullopt, 3);
  append_mass(d, "O", 0, 0.5, 0.5, false, std::nullopt, 2);
  append_mass(d, "O", 0, 0.6, 0.6, true, 0.6, 1);
  append_mass(d, "O", 0, 0.8, 0.8, true, 0.8, 1);
  append_mass(d, "O", 0, 1.0, 1.0, true, 1.0, 4);
  append_mass(d, "X", 1, 0.2, 0.4, false, std::nullopt, 2);   // s = q - 0.2
  append_mass(d, "X", 1, 0.4, 0.6, false, std::nullopt, 3);
  append_mass(d, "X", 1, 0.6, 0.8, true, 0.8, 3);
  append_mass(d, "X", 1, 0.8, 1.0, true, 1.0, 3);
  return d;
}

// Statistical (sampled) versions of the fixtures above, for running the
// full detection machinery at scale.

inline ScenarioConfig precision_false_positive_scenario(std::int64_t n_queries,
                                                        std::uint64_t seed,
                                                        int candidates_per_query = 10) {
  ScenarioConfig cfg;
  cfg.groups = {
      {"O", 0.5,
       {QualificationDistribution::Discrete{
           {{0.2, 5}, {0.4, 5}, {0.6, 2}, {0.8, 1}, {1.0, 1}}}}},
      {"X", 0.5,
       {QualificationDistribution::Discrete{{{0.4, 2}, {0.6, 4}, {0.8, 5}, {1.0, 3}}}}},
  };
  cfg.scorer = {};  // calibrated
  cfg.viewer = {};  // Bernoulli in q
  cfg.allocation = ClassificationAllocation{0.6, candidates_per_query};
  cfg.n_queries = n_queries;
  cfg.seed = seed;
  return cfg;
}

inline ScenarioConfig precision_false_negative_scenario(std::int64_t n_queries,
                                                        std::uint64_t seed,
                                                        int candidates_per_query = 10) {
  ScenarioConfig cfg;
  cfg.groups = {
      {"O", 0.5,
       {QualificationDistribution::Discrete{
           {{0.4, 3}, {0.5, 2}, {0.6, 1}, {0.8, 1}, {1.0, 4}}}}},
      {"X", 0.5,
       {QualificationDistribution::Discrete{{{0.4, 2}, {0.6, 3}, {0.8, 3}, {1.0, 3}}}}},
  };
  cfg.scorer.spec = ScorerSpec::GroupShift{{{"X", 0.2}}};
  cfg.viewer = {};  // Bernoulli in q
  cfg.allocation = ClassificationAllocation{0.6, candidates_per_query};
  cfg.n_queries = n_queries;
  cfg.seed = seed;
  return cfg;
}

// Calibrated ranking scorer with a deterministic positive response above
// qualification 0.6 and group-specific qualification mixes. Fair by
// construction, but score distributions conditional on the outcome differ
// across groups, so the independence check false-alarms.
inline ScenarioConfig equalized_odds_false_positive_scenario(
    std::int64_t n_queries, std::uint64_t seed, int candidates_per_query = 10) {
  ScenarioConfig cfg;
  cfg.groups = {
      {"O", 0.5,
       {QualificationDistribution::Discrete{{{0.4, 2}, {0.7, 2}, {0.9, 1}}}}},
      {"X", 0.5,
       {QualificationDistribution::Discrete{{{0.4, 1}, {0.7, 1}, {0.9, 3}}}}},
  };
  cfg.scorer = {};  // calibrated
  cfg.viewer.spec = ViewerSpec::ThresholdQ{0.6};
  cfg.allocation =
      RankingAllocation{candidates_per_query,
                        ScrollDepth{ScrollDepth::Fixed{candidates_per_query}}};
  cfg.n_queries = n_queries;
  cfg.seed = seed;
  return cfg;
}

// Identical qualification mixes but the scorer is inverted for group X:
// plainly biased, yet the score-given-outcome distributions stay within a
// small total-variation distance of each other, so the independence check
// calls it fair. The two-point mix keeps that distance at exactly 0.05
// while leaving a per-bin outcome gap of 0.05, which the marginal test
// detects with overwhelming power at audit sample sizes.
inline ScenarioConfig equalized_odds_false_negative_scenario(
    std::int64_t n_queries, std::uint64_t seed, int candidates_per_query = 10) {
  ScenarioConfig cfg;
  cfg.groups = {
      {"O", 0.5, {QualificationDistribution::Discrete{{{0.475, 1}, {0.525, 1}}}}},
      {"X", 0.5, {QualificationDistribution::Discrete{{{0.475, 1}, {0.525, 1}}}}},
  };
  cfg.scorer.spec = ScorerSpec::InvertedForGroup{"X"};
  cfg.viewer = {};  // Bernoulli in q
  cfg.allocation =
      RankingAllocation{candidates_per_query,
                        ScrollDepth{ScrollDepth::Fixed{candidates_per_query}}};
  cfg.n_queries = n_queries;
  cfg.seed = seed;
  return cfg;
}

}  // namespace fixtures

// ---------------------------------------------------------------------------
// Side-by-side comparison
// ---------------------------------------------------------------------------

struct MetricParams {
  int equalized_odds_bins = 10;
  double equalized_odds_tolerance = 0.10;
  double precision_tolerance = 0.015;
};

// Runs the marginal outcome test and both rival metrics on one dataset and
// returns the three verdicts side by side.
inline std::vector<MetricVerdict> compare_metrics(const Dataset& d,
                                                  const AuditParams& audit_params,
                                                  const MetricParams& metric_params) {
  std::vector<MetricVerdict> out;

  MetricVerdict ot;
  ot.metric = "outcome_test";
  ot.tolerance = audit_params.level;  // significance level plays the tolerance role
  const AuditReport report = d.kind == DatasetKind::classification
                                 ? audit_classification(d, audit_params)
                                 : audit_ranking(d, audit_params);
  ot.fair = report.overall_verdict == TestVerdict::fail_to_reject;
  for (const auto& ba : report.bins) {
    const bool counted = d.kind == DatasetKind::ranking ||
                         (report.marginal_bin_index &&
                          ba.bin.index == *report.marginal_bin_index);
    if (!counted) continue;
    for (const auto& t : ba.tests) {
      ot.detail.push_back({"coefficient", t.group, report.reference_group,
                           std::nullopt, ba.bin.index, t.coefficient});
      ot.detail.push_back({"p_value", t.group, report.reference_group, std::nullopt,
                           ba.bin.index, t.p_value});
    }
  }
  if (report.kind == DatasetKind::ranking)
    ot.notes.push_back("verdict uses per-bin tests at the stated level; see audit "
                       "report for Bonferroni-adjusted companion");
  out.push_back(std::move(ot));

  out.push_back(equalized_odds_check(d, metric_params.equalized_odds_bins,
                                     metric_params.equalized_odds_tolerance));
  out.push_back(group_precision_verdict(d, metric_params.precision_tolerance));
  return out;
}

}  // namespace outcome_audit
