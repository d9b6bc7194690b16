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

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "outcome_audit/audit.hpp"
#include "outcome_audit/counterfactual.hpp"
#include "outcome_audit/errors.hpp"
#include "outcome_audit/metrics.hpp"

namespace outcome_audit {

using json = nlohmann::json;

namespace detail {

// JSON has no literal for non-finite numbers; degenerate bins can produce
// infinite t-statistics (zero standard error), so those are encoded as
// strings and decoded back.
inline json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double jnum_get(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw DataError("unexpected numeric string '" + s + "' in report JSON");
  }
  return j.get<double>();
}

inline CovarianceEstimator covariance_from_string(const std::string& s) {
  if (s == "classical") return CovarianceEstimator::classical;
  if (s == "hc1") return CovarianceEstimator::hc1;
  throw DataError("unknown covariance estimator '" + s + "'");
}

inline TestVerdict verdict_from_string(const std::string& s) {
  if (s == "reject") return TestVerdict::reject;
  if (s == "fail_to_reject") return TestVerdict::fail_to_reject;
  throw DataError("unknown verdict '" + s + "'");
}

inline DatasetKind kind_from_string(const std::string& s) {
  if (s == "classification") return DatasetKind::classification;
  if (s == "ranking") return DatasetKind::ranking;
  throw DataError("unknown dataset kind '" + s + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// AuditReport <-> JSON
// ---------------------------------------------------------------------------

inline json to_json(const RegressionFit& fit) {
  json terms = json::array();
  for (const auto& t : fit.terms)
    terms.push_back({{"term", t.term},
                     {"coefficient", detail::jnum(t.coefficient)},
                     {"standard_error", detail::jnum(t.standard_error)},
                     {"t_statistic", detail::jnum(t.t_statistic)},
                     {"p_value", detail::jnum(t.p_value)}});
  return {{"terms", std::move(terms)},
          {"n_observations", fit.n_observations},
          {"residual_variance", detail::jnum(fit.residual_variance)},
          {"covariance_estimator", to_string(fit.covariance_estimator)}};
}

inline RegressionFit regression_fit_from_json(const json& j) {
  RegressionFit fit;
  fit.n_observations = j.at("n_observations").get<std::int64_t>();
  fit.residual_variance = detail::jnum_get(j.at("residual_variance"));
  fit.covariance_estimator =
      detail::covariance_from_string(j.at("covariance_estimator").get<std::string>());
  for (const auto& t : j.at("terms")) {
    TermEstimate e;
    e.term = t.at("term").get<std::string>();
    e.coefficient = detail::jnum_get(t.at("coefficient"));
    e.standard_error = detail::jnum_get(t.at("standard_error"));
    e.t_statistic = detail::jnum_get(t.at("t_statistic"));
    e.p_value = detail::jnum_get(t.at("p_value"));
    fit.terms.push_back(std::move(e));
  }
  return fit;
}

inline json to_json(const AuditReport& r) {
  json bins = json::array();
  for (const auto& ba : r.bins) {
    json tests = json::array();
    for (const auto& t : ba.tests)
      tests.push_back({{"group", t.group},
                       {"coefficient", detail::jnum(t.coefficient)},
                       {"standard_error", detail::jnum(t.standard_error)},
                       {"t_statistic", detail::jnum(t.t_statistic)},
                       {"p_value", detail::jnum(t.p_value)},
                       {"p_value_bonferroni", detail::jnum(t.p_value_bonferroni)},
                       {"reject", t.reject},
                       {"low_power", t.low_power}});
    json jb = {{"index", ba.bin.index},
               {"lower", detail::jnum(ba.bin.lower)},
               {"upper", detail::jnum(ba.bin.upper)},
               {"is_marginal", ba.bin.is_marginal},
               {"n", ba.n_rows},
               {"group_counts", ba.group_counts},
               {"mean_outcome", detail::jnum(ba.mean_outcome)},
               {"fitted", ba.fitted},
               {"score_control_dropped", ba.score_control_dropped},
               {"rejects", ba.rejects},
               {"disadvantaged_groups", ba.disadvantaged_groups},
               {"tests", std::move(tests)}};
    if (!ba.failure.empty()) jb["failure"] = ba.failure;
    if (ba.fit) jb["fit"] = to_json(*ba.fit);
    bins.push_back(std::move(jb));
  }
  json j = {{"kind", to_string(r.kind)},
            {"n_bins", r.n_bins},
            {"reference_group", r.reference_group},
            {"level", detail::jnum(r.level)},
            {"covariance_estimator", to_string(r.covariance)},
            {"support", {{"lo", detail::jnum(r.support_lo)}, {"hi", detail::jnum(r.support_hi)}}},
            {"excluded_off_support", r.excluded_off_support},
            {"overall_verdict", to_string(r.overall_verdict)},
            {"overall_verdict_bonferroni", to_string(r.overall_verdict_bonferroni)},
            {"n_tested_bins", r.n_tested_bins},
            {"non_monotonic_outcomes", r.non_monotonic_outcomes},
            {"bins", std::move(bins)}};
  if (r.marginal_bin_index) j["marginal_bin_index"] = *r.marginal_bin_index;
  if (r.marginal_verdict) j["marginal_verdict"] = to_string(*r.marginal_verdict);
  return j;
}

inline AuditReport audit_report_from_json(const json& j) {
  AuditReport r;
  r.kind = detail::kind_from_string(j.at("kind").get<std::string>());
  r.n_bins = j.at("n_bins").get<int>();
  r.reference_group = j.at("reference_group").get<std::string>();
  r.level = detail::jnum_get(j.at("level"));
  r.covariance =
      detail::covariance_from_string(j.at("covariance_estimator").get<std::string>());
  r.support_lo = detail::jnum_get(j.at("support").at("lo"));
  r.support_hi = detail::jnum_get(j.at("support").at("hi"));
  r.excluded_off_support = j.at("excluded_off_support").get<std::int64_t>();
  r.overall_verdict =
      detail::verdict_from_string(j.at("overall_verdict").get<std::string>());
  r.overall_verdict_bonferroni = detail::verdict_from_string(
      j.at("overall_verdict_bonferroni").get<std::string>());
  r.n_tested_bins = j.at("n_tested_bins").get<int>();
  r.non_monotonic_outcomes = j.at("non_monotonic_outcomes").get<bool>();
  if (j.contains("marginal_bin_index"))
    r.marginal_bin_index = j.at("marginal_bin_index").get<int>();
  if (j.contains("marginal_verdict"))
    r.marginal_verdict =
        detail::verdict_from_string(j.at("marginal_verdict").get<std::string>());
  for (const auto& jb : j.at("bins")) {
    BinAudit ba;
    ba.bin.index = jb.at("index").get<int>();
    ba.bin.lower = detail::jnum_get(jb.at("lower"));
    ba.bin.upper = detail::jnum_get(jb.at("upper"));
    ba.bin.is_marginal = jb.at("is_marginal").get<bool>();
    ba.n_rows = jb.at("n").get<std::int64_t>();
    ba.group_counts =
        jb.at("group_counts").get<std::map<std::string, std::int64_t>>();
    ba.mean_outcome = detail::jnum_get(jb.at("mean_outcome"));
    ba.fitted = jb.at("fitted").get<bool>();
    ba.score_control_dropped = jb.at("score_control_dropped").get<bool>();
    ba.rejects = jb.at("rejects").get<bool>();
    ba.disadvantaged_groups =
        jb.at("disadvantaged_groups").get<std::vector<std::string>>();
    if (jb.contains("failure")) ba.failure = jb.at("failure").get<std::string>();
    if (jb.contains("fit")) ba.fit = regression_fit_from_json(jb.at("fit"));
    for (const auto& jt : jb.at("tests")) {
      GroupTest t;
      t.group = jt.at("group").get<std::string>();
      t.coefficient = detail::jnum_get(jt.at("coefficient"));
      t.standard_error = detail::jnum_get(jt.at("standard_error"));
      t.t_statistic = detail::jnum_get(jt.at("t_statistic"));
      t.p_value = detail::jnum_get(jt.at("p_value"));
      t.p_value_bonferroni = detail::jnum_get(jt.at("p_value_bonferroni"));
      t.reject = jt.at("reject").get<bool>();
      t.low_power = jt.at("low_power").get<bool>();
      ba.tests.push_back(std::move(t));
    }
    r.bins.push_back(std::move(ba));
  }
  return r;
}

// ---------------------------------------------------------------------------
// CounterfactualSummary -> JSON
// ---------------------------------------------------------------------------

inline json to_json(const CounterfactualSummary& s) {
  json pct = json::object();
  for (const auto& [g, v] : s.n_pct_delta)
    pct[g] = v ? json(detail::jnum(*v)) : json(nullptr);
  json j = {{"kind", to_string(s.kind)},
            {"per_group_n_before", s.n_before},
            {"per_group_n_after", s.n_after},
            {"per_group_n_pct_delta", std::move(pct)},
            {"n_flagged_records", s.n_flagged}};
  if (s.y_before) j["y_before"] = detail::jnum(*s.y_before);
  if (s.y_after) j["y_after"] = detail::jnum(*s.y_after);
  if (s.y_pct_delta) j["y_pct_delta"] = detail::jnum(*s.y_pct_delta);
  if (s.kind == DatasetKind::ranking) {
    json before = json::object(), after = json::object(), delta = json::object();
    for (const auto& [g, v] : s.mean_rank_before) before[g] = detail::jnum(v);
    for (const auto& [g, v] : s.mean_rank_after) after[g] = detail::jnum(v);
    for (const auto& [g, v] : s.mean_rank_delta) delta[g] = detail::jnum(v);
    j["per_group_mean_rank_before"] = std::move(before);
    j["per_group_mean_rank_after"] = std::move(after);
    j["per_group_mean_rank_delta"] = std::move(delta);
  }
  return j;
}

inline CounterfactualSummary counterfactual_summary_from_json(const json& j) {
  CounterfactualSummary s;
  s.kind = detail::kind_from_string(j.at("kind").get<std::string>());
  s.n_before = j.at("per_group_n_before").get<std::map<std::string, std::int64_t>>();
  s.n_after = j.at("per_group_n_after").get<std::map<std::string, std::int64_t>>();
  for (const auto& [g, v] : j.at("per_group_n_pct_delta").items())
    s.n_pct_delta[g] = v.is_null() ? std::optional<double>{} : detail::jnum_get(v);
  s.n_flagged = j.at("n_flagged_records").get<std::int64_t>();
  if (j.contains("y_before")) s.y_before = detail::jnum_get(j.at("y_before"));
  if (j.contains("y_after")) s.y_after = detail::jnum_get(j.at("y_after"));
  if (j.contains("y_pct_delta")) s.y_pct_delta = detail::jnum_get(j.at("y_pct_delta"));
  if (j.contains("per_group_mean_rank_before")) {
    for (const auto& [g, v] : j.at("per_group_mean_rank_before").items())
      s.mean_rank_before[g] = detail::jnum_get(v);
    for (const auto& [g, v] : j.at("per_group_mean_rank_after").items())
      s.mean_rank_after[g] = detail::jnum_get(v);
    for (const auto& [g, v] : j.at("per_group_mean_rank_delta").items())
      s.mean_rank_delta[g] = detail::jnum_get(v);
  }
  return s;
}

// ---------------------------------------------------------------------------
// MetricVerdict / DemoReport -> JSON
// ---------------------------------------------------------------------------

inline json to_json(const MetricVerdict& v) {
  json detail_rows = json::array();
  for (const auto& row : v.detail) {
    json jr = {{"statistic", row.statistic}, {"group", row.group},
               {"value", detail::jnum(row.value)}};
    if (!row.group_b.empty()) jr["group_b"] = row.group_b;
    if (row.outcome_value) jr["outcome_value"] = detail::jnum(*row.outcome_value);
    if (row.bin_index) jr["bin_index"] = *row.bin_index;
    detail_rows.push_back(std::move(jr));
  }
  return {{"metric", v.metric},
          {"fair", v.fair},
          {"tolerance", detail::jnum(v.tolerance)},
          {"detail", std::move(detail_rows)},
          {"notes", v.notes}};
}

inline json to_json(const std::vector<MetricVerdict>& verdicts) {
  json arr = json::array();
  for (const auto& v : verdicts) arr.push_back(to_json(v));
  return {{"metrics", std::move(arr)}};
}

inline json to_json(const DemoReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    json masses = json::array();
    for (const auto& m : g.masses)
      masses.push_back({{"q", m.q_tenths / 10.0}, {"mass", m.mass}, {"hired", m.hired}});
    groups.push_back(
        {{"group", g.group},
         {"hired_conditional_mean",
          {{"value", g.hired_conditional_mean.value()},
           {"display", g.hired_conditional_mean.to_display()}}},
         {"marginal_outcome",
          {{"value", g.marginal_outcome.value()}, {"display", g.marginal_outcome.to_display()}}},
         {"hiring_bar",
          {{"value", g.hiring_bar.value()}, {"display", g.hiring_bar.to_display()}}},
         {"masses", std::move(masses)}});
  }
  return {{"fixture", r.fixture}, {"description", r.description}, {"groups", std::move(groups)}};
}

}  // namespace outcome_audit
