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

#include "outcome_audit/binning.hpp"
#include "outcome_audit/errors.hpp"
#include "outcome_audit/ols.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

struct AuditParams {
  int n_bins = 10;
  std::string reference_group;  // empty -> first group of the dataset
  double level = 0.05;
  CovarianceEstimator covariance = CovarianceEstimator::hc1;
};

// Wald test of one group dummy within one bin. A positive significant
// coefficient means the group realizes better outcomes than the reference
// at equal scores, i.e. the algorithm under-predicts that group.
struct GroupTest {
  std::string group;
  double coefficient = 0.0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double p_value_bonferroni = 1.0;
  bool reject = false;
  bool low_power = false;  // fewer than 30 group records in the bin

  bool operator==(const GroupTest&) const = default;
};

struct BinAudit {
  ScoreBin bin;
  std::int64_t n_rows = 0;
  std::map<std::string, std::int64_t> group_counts;
  double mean_outcome = 0.0;
  bool fitted = false;
  std::string failure;  // nonempty when the bin could not be fitted
  // The score control is dropped when scores are constant within the bin
  // (discrete score distributions); a constant column would be collinear
  // with the intercept and controls for no variation anyway.
  bool score_control_dropped = false;
  std::optional<RegressionFit> fit;
  std::vector<GroupTest> tests;
  bool rejects = false;
  std::vector<std::string> disadvantaged_groups;

  bool operator==(const BinAudit&) const = default;
};

struct AuditReport {
  DatasetKind kind = DatasetKind::classification;
  int n_bins = 10;
  std::string reference_group;
  double level = 0.05;
  CovarianceEstimator covariance = CovarianceEstimator::hc1;
  double support_lo = 0.0;
  double support_hi = 0.0;
  std::int64_t excluded_off_support = 0;
  std::vector<BinAudit> bins;
  std::optional<int> marginal_bin_index;        // classification
  std::optional<TestVerdict> marginal_verdict;  // classification
  TestVerdict overall_verdict = TestVerdict::fail_to_reject;
  // Companion verdict with Bonferroni-adjusted p-values. Ranking audits
  // test every bin on the common support, so both the raw per-bin verdict
  // and a multiplicity-adjusted one are reported.
  TestVerdict overall_verdict_bonferroni = TestVerdict::fail_to_reject;
  int n_tested_bins = 0;
  bool non_monotonic_outcomes = false;  // classification sanity warning

  bool operator==(const AuditReport&) const = default;
};

namespace detail {

inline int resolve_reference_group(const Dataset& d, const std::string& label) {
  if (d.groups.empty()) throw DataError("audit: dataset declares no groups");
  if (label.empty()) return d.groups.front().index;
  const auto idx = d.group_index(label);
  if (!idx) throw ConfigError("audit: unknown reference group '" + label + "'");
  return *idx;
}

inline AuditReport run_audit(const Dataset& d, const AuditParams& params) {
  AuditReport report;
  report.kind = d.kind;
  report.n_bins = params.n_bins;
  report.level = params.level;
  report.covariance = params.covariance;

  const int reference = resolve_reference_group(d, params.reference_group);
  report.reference_group = d.group_label(reference);

  const BinnedDataset binned = bin_scores(d, params.n_bins);
  report.support_lo = binned.support_lo;
  report.support_hi = binned.support_hi;
  report.excluded_off_support = binned.excluded_off_support;

  // Dummy columns: every group with binned records, except the reference,
  // in dataset group order (so reports are stable across runs).
  std::set<int> present;
  for (std::size_t i = 0; i < d.records.size(); ++i)
    if (binned.assignment[i] >= 0) present.insert(d.records[i].group);
  if (!present.count(reference))
    throw DataError("audit: reference group '" + report.reference_group +
                    "' has no binned records");
  std::vector<std::pair<int, std::string>> dummies;
  for (const auto& g : d.groups)
    if (g.index != reference && present.count(g.index))
      dummies.emplace_back(g.index, g.label);
  if (dummies.empty())
    throw DataError("audit: only one group present among binned records");

  std::vector<std::vector<ObsRow>> rows(binned.bins.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const int b = binned.assignment[i];
    if (b < 0) continue;
    rows[static_cast<std::size_t>(b)].push_back(
        {*d.records[i].outcome, d.records[i].group, d.records[i].score});
  }

  for (std::size_t b = 0; b < binned.bins.size(); ++b) {
    BinAudit ba;
    ba.bin = binned.bins[b];
    ba.n_rows = static_cast<std::int64_t>(rows[b].size());
    double outcome_sum = 0.0;
    double score_min = std::numeric_limits<double>::infinity();
    double score_max = -score_min;
    std::map<int, std::int64_t> counts;
    for (const ObsRow& r : rows[b]) {
      outcome_sum += r.response;
      score_min = std::min(score_min, r.score);
      score_max = std::max(score_max, r.score);
      ++counts[r.group];
    }
    ba.mean_outcome = ba.n_rows > 0 ? outcome_sum / static_cast<double>(ba.n_rows) : 0.0;
    for (const auto& g : d.groups)
      if (counts.count(g.index)) ba.group_counts[g.label] = counts[g.index];

    if (ba.n_rows == 0) {
      ba.failure = "empty bin";
    } else if (!counts.count(reference)) {
      ba.failure = "reference group '" + report.reference_group + "' absent from bin";
    } else {
      DesignSpec spec;
      spec.reference_group = reference;
      spec.dummies = dummies;
      spec.include_score_control = score_max - score_min > 1e-12;
      spec.covariance = params.covariance;
      ba.score_control_dropped = !spec.include_score_control;
      try {
        ba.fit = fit_ols(rows[b], spec);
        ba.fitted = true;
      } catch (const SingularDesignError& e) {
        ba.failure = e.what();
      } catch (const DataError& e) {
        ba.failure = e.what();
      }
    }

    if (ba.fitted) {
      for (const auto& [gidx, glabel] : dummies) {
        const TermEstimate& est = ba.fit->at("group:" + glabel);
        GroupTest t;
        t.group = glabel;
        t.coefficient = est.coefficient;
        t.standard_error = est.standard_error;
        t.t_statistic = est.t_statistic;
        t.p_value = est.p_value;
        t.reject = est.p_value < params.level;
        const auto it = counts.find(gidx);
        t.low_power = it == counts.end() || it->second < 30;
        if (t.reject && t.coefficient > 0.0) ba.disadvantaged_groups.push_back(glabel);
        ba.rejects = ba.rejects || t.reject;
        ba.tests.push_back(std::move(t));
      }
    }
    report.bins.push_back(std::move(ba));
  }

  if (d.kind == DatasetKind::classification) {
    report.marginal_bin_index = 0;
    report.n_tested_bins = 1;  // only the marginal bin decides the verdict
  } else {
    int fitted = 0;
    for (const auto& ba : report.bins) fitted += ba.fitted ? 1 : 0;
    report.n_tested_bins = fitted;
  }

  const int n_tests = std::max(1, report.n_tested_bins);
  for (auto& ba : report.bins)
    for (auto& t : ba.tests)
      t.p_value_bonferroni = std::min(1.0, t.p_value * static_cast<double>(n_tests));

  return report;
}

}  // namespace detail

// Bias test for a classification (thresholded treatment) dataset. Fits the
// group-gap specification on every treated score decile; the fairness
// verdict comes from the marginal decile alone -- the outcomes of the least
// qualified candidates to receive treatment trace the effective bar each
// group is held to. Non-marginal fits are reported as context.
inline AuditReport audit_classification(const Dataset& d, const AuditParams& params) {
  if (d.kind != DatasetKind::classification)
    throw DataError("audit_classification requires a classification dataset");
  AuditReport report = detail::run_audit(d, params);

  const BinAudit& marginal = report.bins.front();
  if (!marginal.fitted)
    throw DataError("audit_classification: marginal bin [" +
                    std::to_string(marginal.bin.lower) + ", " +
                    std::to_string(marginal.bin.upper) + ") failed: " + marginal.failure);
  report.marginal_verdict =
      marginal.rejects ? TestVerdict::reject : TestVerdict::fail_to_reject;
  report.overall_verdict = *report.marginal_verdict;
  report.overall_verdict_bonferroni = *report.marginal_verdict;

  // Mean outcomes should rise with the score bin; a violation means the
  // score is not outcome-monotone, which is a modeling problem upstream of
  // any fairness question, so it is surfaced as a warning.
  for (std::size_t b = 1; b < report.bins.size(); ++b)
    if (report.bins[b].n_rows > 0 && report.bins[b - 1].n_rows > 0 &&
        report.bins[b].mean_outcome < report.bins[b - 1].mean_outcome - 1e-12)
      report.non_monotonic_outcomes = true;

  return report;
}

// Bias test for a ranking (impression slots) dataset. Every score decile of
// the common support is a margin, so the group-gap specification is fitted
// and tested on each; the overall verdict rejects if any bin rejects, with
// a Bonferroni-adjusted companion verdict for the multiplicity-minded.
// Bins that cannot be fitted (e.g. a group absent) are flagged, not fatal.
inline AuditReport audit_ranking(const Dataset& d, const AuditParams& params) {
  if (d.kind != DatasetKind::ranking)
    throw DataError("audit_ranking requires a ranking dataset");
  AuditReport report = detail::run_audit(d, params);

  bool any = false;
  bool any_adjusted = false;
  for (const auto& ba : report.bins)
    for (const auto& t : ba.tests) {
      any = any || t.reject;
      any_adjusted = any_adjusted || t.p_value_bonferroni < params.level;
    }
  report.overall_verdict = any ? TestVerdict::reject : TestVerdict::fail_to_reject;
  report.overall_verdict_bonferroni =
      any_adjusted ? TestVerdict::reject : TestVerdict::fail_to_reject;
  return report;
}

}  // namespace outcome_audit
