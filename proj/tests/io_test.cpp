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

#include <sstream>

#include <gtest/gtest.h>

#include "outcome_audit/config.hpp"
#include "outcome_audit/csv.hpp"
#include "outcome_audit/json_io.hpp"
#include "outcome_audit/tables.hpp"
#include "oracles.hpp"

namespace outcome_audit {
namespace {

TEST(IngestDataset, ThreeLineFileYieldsThreeRecords) {
  const std::string csv =
      "record_id,query_id,group,score,treated,outcome,rank,true_qualification\n"
      "r0,q0,A,0.7,true,1,,\n"
      "r1,q0,B,0.65,true,0,,\n"
      "r2,q0,A,0.3,false,,,\n";
  std::istringstream is(csv);
  IngestOptions opts;
  opts.kind = DatasetKind::classification;
  opts.threshold = 0.6;
  const Dataset d = ingest_dataset(is, opts);
  ASSERT_EQ(d.records.size(), 3u);
  EXPECT_EQ(d.records[0].record_id, "r0");
  EXPECT_EQ(d.group_label(d.records[1].group), "B");
  EXPECT_FALSE(d.records[2].treated);
  EXPECT_FALSE(d.records[2].outcome.has_value());
}

TEST(IngestDataset, UntreatedWithOutcomeNamesLine) {
  const std::string csv =
      "record_id,query_id,group,score,treated,outcome,rank,true_qualification\n"
      "r0,q0,A,0.7,true,1,,\n"
      "r1,q0,B,0.3,false,0.5,,\n";
  std::istringstream is(csv);
  IngestOptions opts;
  opts.kind = DatasetKind::classification;
  opts.threshold = 0.6;
  try {
    ingest_dataset(is, opts);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos);
    EXPECT_NE(msg.find("outcome"), std::string::npos);
  }
}

TEST(IngestDataset, MissingAndUnknownColumns) {
  {
    std::istringstream is("record_id,query_id,group,score,treated,outcome,rank\nr0,q,A,0.5,false,,\n");
    EXPECT_THROW(ingest_dataset(is, {}), DataError);  // missing true_qualification
  }
  {
    std::istringstream is(
        "record_id,query_id,group,score,treated,outcome,rank,true_qualification,extra\n");
    EXPECT_THROW(ingest_dataset(is, {}), DataError);  // unknown column
  }
  {
    std::istringstream is("");
    EXPECT_THROW(ingest_dataset(is, {}), DataError);  // no header at all
  }
}

TEST(IngestDataset, UnparsableNumberNamesLine) {
  const std::string csv =
      "record_id,query_id,group,score,treated,outcome,rank,true_qualification\n"
      "r0,q0,A,zero point five,false,,,\n";
  std::istringstream is(csv);
  IngestOptions opts;
  opts.kind = DatasetKind::ranking;
  try {
    ingest_dataset(is, opts);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos);
    EXPECT_NE(msg.find("score"), std::string::npos);
  }
}

TEST(IngestDataset, ThresholdInferenceIsNoted) {
  const std::string csv =
      "record_id,query_id,group,score,treated,outcome,rank,true_qualification\n"
      "r0,q0,A,0.7,true,1,,\n"
      "r1,q0,B,0.61,true,0,,\n"
      "r2,q0,A,0.3,false,,,\n";
  std::istringstream is(csv);
  std::vector<std::string> notes;
  IngestOptions opts;
  opts.kind = DatasetKind::classification;
  opts.notes = &notes;
  const Dataset d = ingest_dataset(is, opts);
  ASSERT_TRUE(d.threshold.has_value());
  EXPECT_DOUBLE_EQ(*d.threshold, 0.61);
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NE(notes[0].find("inferred"), std::string::npos);
}

// Serialize-then-parse reproduces the dataset field for field, across
// kinds, scorers, and viewers.
TEST(DatasetRoundTrip, SimulatedDatasetsSurviveExactly) {
  std::vector<ScenarioConfig> cfgs;
  cfgs.push_back(oracles::two_group_classification(300, 1, 0.1));
  cfgs.push_back(oracles::two_group_ranking(200, 2, 0.0, 7));
  {
    auto cfg = oracles::two_group_classification(200, 3);
    cfg.viewer.spec = ViewerSpec::ThreeLevel{};
    cfgs.push_back(cfg);
  }
  {
    auto cfg = oracles::two_group_ranking(150, 4, 0.0, 5);
    cfg.scorer.spec = ScorerSpec::NoisyCalibrated{0.15};
    cfg.viewer.spec = ViewerSpec::ThresholdQ{0.55};
    cfgs.push_back(cfg);
  }
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const Dataset d = simulate(cfgs[i]);
    std::ostringstream os;
    emit_dataset(d, os);
    std::istringstream is(os.str());
    const Dataset back = ingest_dataset(is, {});
    EXPECT_EQ(d, back) << "config " << i;
  }
}

TEST(DatasetRoundTrip, QuotedFieldsSurvive) {
  Dataset d;
  d.kind = DatasetKind::classification;
  d.threshold = 0.5;
  d.outcome_domain = OutcomeDomain::binary;
  d.groups = {{"group, with comma", 0}, {"B\"quoted\"", 1}};
  d.records = {
      {"r,0", "q\"x\"", 0, 0.7, true, 1.0, std::nullopt, std::nullopt},
      {"r1", "q0", 1, 0.8, true, 0.0, std::nullopt, std::nullopt},
  };
  ASSERT_TRUE(validate_dataset(d).empty());
  std::ostringstream os;
  emit_dataset(d, os);
  std::istringstream is(os.str());
  EXPECT_EQ(ingest_dataset(is, {}), d);
}

TEST(ReportJson, AuditReportRoundTripsExactly) {
  const Dataset d = simulate(oracles::two_group_classification(4000, 21, 0.1));
  AuditParams p;
  p.reference_group = "A";
  const AuditReport r = audit_classification(d, p);
  const AuditReport back = audit_report_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(r, back);
}

// Degenerate bins produce zero standard errors and infinite t-statistics;
// those must survive serialization too.
TEST(ReportJson, DegenerateStatisticsRoundTrip) {
  const Dataset d = simulate(fixtures::equalized_odds_false_positive_scenario(2000, 31));
  AuditParams p;
  p.reference_group = "O";
  const AuditReport r = audit_ranking(d, p);
  bool saw_infinite = false;
  for (const auto& ba : r.bins) {
    if (!ba.fit) continue;
    for (const auto& t : ba.fit->terms)
      saw_infinite = saw_infinite || std::isinf(t.t_statistic);
  }
  EXPECT_TRUE(saw_infinite);  // deterministic outcomes give exact fits
  const AuditReport back = audit_report_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(r, back);
}

TEST(ReportJson, CounterfactualSummaryRoundTrips) {
  const Dataset d = simulate(oracles::two_group_classification(2000, 41, 0.1));
  AuditParams p;
  p.reference_group = "A";
  const AuditReport r = audit_classification(d, p);
  const CounterfactualSummary s =
      reallocate_classification(d, predict_corrected(d, r));
  const CounterfactualSummary back =
      counterfactual_summary_from_json(json::parse(to_json(s).dump()));
  EXPECT_EQ(s, back);
}

TEST(Config, UnknownKeysAreRejectedEverywhere) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"outputt": {}})"), Subcommand::demo),
               ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"audit": {"bins": 5}})"), Subcommand::audit),
               ConfigError);
  EXPECT_THROW(
      parse_scenario(json::parse(
          R"({"groups": [], "scorer": {"type": "calibrated", "oops": 1},
              "viewer": {"type": "bernoulli_q"},
              "allocation": {"type": "classification", "threshold": 0.5, "candidates_per_query": 4},
              "n_queries": 1, "seed": 0})")),
      ConfigError);
}

TEST(Config, ScenarioParsesAndSimulates) {
  const auto j = json::parse(R"({
    "scenario": {
      "groups": [
        {"label": "A", "share": 0.5, "qualification": {"type": "uniform", "lo": 0.0, "hi": 1.0}},
        {"label": "B", "share": 0.5, "qualification": {"type": "discrete", "mass": [[0.4, 1], [0.8, 3]]}}
      ],
      "scorer": {"type": "group_shift", "deltas": {"B": 0.1}},
      "viewer": {"type": "three_level", "apply": {"offset": 0.1, "slope": 0.8},
                 "attention": {"offset": 0.2, "slope": 0.6}, "alpha": 0.3},
      "allocation": {"type": "ranking", "candidates_per_query": 6,
                     "scroll_depth": {"type": "uniform", "lo": 1, "hi": 6}},
      "n_queries": 50,
      "seed": 12
    },
    "audit": {"n_bins": 8, "reference": "A", "level": 0.1, "covariance": "classical"},
    "output": {"format": "json"}
  })");
  const RunConfig cfg = parse_run_config(j, Subcommand::simulate);
  ASSERT_TRUE(cfg.scenario.has_value());
  EXPECT_EQ(cfg.audit.n_bins, 8);
  EXPECT_EQ(cfg.audit.covariance, CovarianceEstimator::classical);
  EXPECT_EQ(cfg.format, OutputFormat::json);
  const Dataset d = simulate(*cfg.scenario);
  EXPECT_TRUE(validate_dataset(d).empty());
  EXPECT_EQ(d.kind, DatasetKind::ranking);
  EXPECT_EQ(d.outcome_domain, OutcomeDomain::three_level);
}

TEST(RenderTable, ZeroDeltaSummaryShowsZeroPercentRows) {
  CounterfactualSummary s;
  s.kind = DatasetKind::classification;
  s.n_before = {{"A", 100}, {"B", 50}};
  s.n_after = {{"A", 100}, {"B", 50}};
  s.n_pct_delta = {{"A", 0.0}, {"B", 0.0}};
  s.y_before = 40.0;
  s.y_after = 40.0;
  s.y_pct_delta = 0.0;
  std::ostringstream os;
  render_table(s, os);
  const std::string text = os.str();
  std::size_t zero_rows = 0;
  for (std::size_t pos = text.find("0.0%"); pos != std::string::npos;
       pos = text.find("0.0%", pos + 1))
    ++zero_rows;
  EXPECT_GE(zero_rows, 2u);  // one per group
}

TEST(Config, BadEnumValuesAreConfigErrors) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"output": {"format": "xml"}})"),
                                Subcommand::demo),
               ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"input": {"path": "x", "kind": "both"}})"),
                                Subcommand::audit),
               ConfigError);
}

}  // namespace
}  // namespace outcome_audit
