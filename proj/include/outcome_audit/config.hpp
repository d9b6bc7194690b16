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

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "outcome_audit/audit.hpp"
#include "outcome_audit/errors.hpp"
#include "outcome_audit/metrics.hpp"
#include "outcome_audit/simulate.hpp"

namespace outcome_audit {

enum class Subcommand { simulate, audit, counterfactual, compare_metrics, demo };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::simulate: return "simulate";
    case Subcommand::audit: return "audit";
    case Subcommand::counterfactual: return "counterfactual";
    case Subcommand::compare_metrics: return "compare-metrics";
    default: return "demo";
  }
}

enum class OutputFormat { json, csv, table };

inline OutputFormat output_format_from_string(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "table") return OutputFormat::table;
  throw ConfigError("unknown output format '" + s + "' (expected json|csv|table)");
}

struct InputSpec {
  std::string path;
  std::optional<DatasetKind> kind;
  std::optional<double> threshold;
  std::optional<double> objective_alpha;
  std::optional<OutcomeDomain> outcome_domain;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::demo;
  std::optional<ScenarioConfig> scenario;
  AuditParams audit;
  MetricParams metrics;
  std::optional<InputSpec> input;
  std::string out_path;  // empty -> stdout
  OutputFormat format = OutputFormat::table;
  std::string demo_fixture = "all";
};

namespace detail {

// Unknown keys are configuration errors: a typo must fail fast, not be
// silently ignored.
inline void check_keys(const nlohmann::json& j,
                       std::initializer_list<std::string_view> allowed,
                       const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

inline double get_number(const nlohmann::json& j, const char* key,
                         const std::string& context) {
  if (!j.at(key).is_number())
    throw ConfigError(context + ": '" + std::string(key) + "' must be a number");
  return j.at(key).get<double>();
}

inline QualificationDistribution parse_qualification(const nlohmann::json& j,
                                                     const std::string& context) {
  const std::string type = j.at("type").get<std::string>();
  QualificationDistribution q;
  if (type == "discrete") {
    check_keys(j, {"type", "mass"}, context);
    QualificationDistribution::Discrete d;
    for (const auto& pair : j.at("mass")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ConfigError(context + ": discrete mass entries must be [q, weight] pairs");
      d.mass.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    q.spec = std::move(d);
  } else if (type == "beta") {
    check_keys(j, {"type", "shape1", "shape2"}, context);
    q.spec = QualificationDistribution::Beta{get_number(j, "shape1", context),
                                             get_number(j, "shape2", context)};
  } else if (type == "uniform") {
    check_keys(j, {"type", "lo", "hi"}, context);
    q.spec = QualificationDistribution::Uniform{get_number(j, "lo", context),
                                                get_number(j, "hi", context)};
  } else {
    throw ConfigError(context + ": unknown qualification type '" + type + "'");
  }
  return q;
}

inline ScorerSpec parse_scorer(const nlohmann::json& j, const std::string& context) {
  const std::string type = j.at("type").get<std::string>();
  ScorerSpec s;
  if (type == "calibrated") {
    check_keys(j, {"type"}, context);
    s.spec = ScorerSpec::Calibrated{};
  } else if (type == "group_shift") {
    check_keys(j, {"type", "deltas"}, context);
    ScorerSpec::GroupShift gs;
    for (const auto& [label, delta] : j.at("deltas").items())
      gs.deltas[label] = delta.get<double>();
    s.spec = std::move(gs);
  } else if (type == "inverted_for_group") {
    check_keys(j, {"type", "group"}, context);
    s.spec = ScorerSpec::InvertedForGroup{j.at("group").get<std::string>()};
  } else if (type == "noisy_calibrated") {
    check_keys(j, {"type", "sigma"}, context);
    s.spec = ScorerSpec::NoisyCalibrated{get_number(j, "sigma", context)};
  } else {
    throw ConfigError(context + ": unknown scorer type '" + type + "'");
  }
  return s;
}

inline LinearProb parse_linear_prob(const nlohmann::json& j, const std::string& context) {
  check_keys(j, {"offset", "slope"}, context);
  return {get_number(j, "offset", context), get_number(j, "slope", context)};
}

inline ViewerSpec parse_viewer(const nlohmann::json& j, const std::string& context) {
  const std::string type = j.at("type").get<std::string>();
  ViewerSpec v;
  if (type == "bernoulli_q") {
    check_keys(j, {"type"}, context);
    v.spec = ViewerSpec::BernoulliQ{};
  } else if (type == "threshold_q") {
    check_keys(j, {"type", "tau"}, context);
    v.spec = ViewerSpec::ThresholdQ{get_number(j, "tau", context)};
  } else if (type == "three_level") {
    check_keys(j, {"type", "apply", "attention", "alpha"}, context);
    v.spec = ViewerSpec::ThreeLevel{
        parse_linear_prob(j.at("apply"), context + ".apply"),
        parse_linear_prob(j.at("attention"), context + ".attention"),
        get_number(j, "alpha", context)};
  } else {
    throw ConfigError(context + ": unknown viewer type '" + type + "'");
  }
  return v;
}

inline ScrollDepth parse_scroll_depth(const nlohmann::json& j, const std::string& context) {
  const std::string type = j.at("type").get<std::string>();
  ScrollDepth s;
  if (type == "fixed") {
    check_keys(j, {"type", "depth"}, context);
    s.spec = ScrollDepth::Fixed{j.at("depth").get<int>()};
  } else if (type == "uniform") {
    check_keys(j, {"type", "lo", "hi"}, context);
    s.spec = ScrollDepth::UniformDepth{j.at("lo").get<int>(), j.at("hi").get<int>()};
  } else {
    throw ConfigError(context + ": unknown scroll_depth type '" + type + "'");
  }
  return s;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::check_keys;
  check_keys(j, {"groups", "scorer", "viewer", "allocation", "n_queries", "seed"},
             "scenario");
  ScenarioConfig cfg;
  for (const auto& jg : j.at("groups")) {
    check_keys(jg, {"label", "share", "qualification"}, "scenario.groups[]");
    GroupSpec g;
    g.label = jg.at("label").get<std::string>();
    g.share = jg.at("share").get<double>();
    g.qualification = detail::parse_qualification(
        jg.at("qualification"), "scenario.groups['" + g.label + "'].qualification");
    cfg.groups.push_back(std::move(g));
  }
  cfg.scorer = detail::parse_scorer(j.at("scorer"), "scenario.scorer");
  cfg.viewer = detail::parse_viewer(j.at("viewer"), "scenario.viewer");

  const auto& ja = j.at("allocation");
  const std::string alloc_type = ja.at("type").get<std::string>();
  if (alloc_type == "classification") {
    check_keys(ja, {"type", "threshold", "candidates_per_query"}, "scenario.allocation");
    cfg.allocation = ClassificationAllocation{
        detail::get_number(ja, "threshold", "scenario.allocation"),
        ja.at("candidates_per_query").get<int>()};
  } else if (alloc_type == "ranking") {
    check_keys(ja, {"type", "candidates_per_query", "scroll_depth"}, "scenario.allocation");
    RankingAllocation ra;
    ra.candidates_per_query = ja.at("candidates_per_query").get<int>();
    if (ja.contains("scroll_depth"))
      ra.scroll_depth =
          detail::parse_scroll_depth(ja.at("scroll_depth"), "scenario.allocation.scroll_depth");
    else
      ra.scroll_depth.spec = ScrollDepth::UniformDepth{1, ra.candidates_per_query};
    cfg.allocation = std::move(ra);
  } else {
    throw ConfigError("scenario.allocation: unknown type '" + alloc_type + "'");
  }
  if (j.contains("n_queries")) cfg.n_queries = j.at("n_queries").get<std::int64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline RunConfig parse_run_config(const nlohmann::json& j, Subcommand subcommand) {
  using detail::check_keys;
  check_keys(j, {"scenario", "audit", "metrics", "input", "output", "demo"}, "config");

  RunConfig cfg;
  cfg.subcommand = subcommand;
  if (j.contains("scenario")) cfg.scenario = parse_scenario(j.at("scenario"));

  if (j.contains("audit")) {
    const auto& ja = j.at("audit");
    check_keys(ja, {"n_bins", "reference", "level", "covariance"}, "audit");
    if (ja.contains("n_bins")) cfg.audit.n_bins = ja.at("n_bins").get<int>();
    if (ja.contains("reference"))
      cfg.audit.reference_group = ja.at("reference").get<std::string>();
    if (ja.contains("level")) cfg.audit.level = ja.at("level").get<double>();
    if (ja.contains("covariance")) {
      const std::string c = ja.at("covariance").get<std::string>();
      if (c == "classical")
        cfg.audit.covariance = CovarianceEstimator::classical;
      else if (c == "hc1")
        cfg.audit.covariance = CovarianceEstimator::hc1;
      else
        throw ConfigError("audit.covariance: unknown estimator '" + c + "'");
    }
  }

  if (j.contains("metrics")) {
    const auto& jm = j.at("metrics");
    check_keys(jm,
               {"equalized_odds_bins", "equalized_odds_tolerance", "precision_tolerance"},
               "metrics");
    if (jm.contains("equalized_odds_bins"))
      cfg.metrics.equalized_odds_bins = jm.at("equalized_odds_bins").get<int>();
    if (jm.contains("equalized_odds_tolerance"))
      cfg.metrics.equalized_odds_tolerance =
          jm.at("equalized_odds_tolerance").get<double>();
    if (jm.contains("precision_tolerance"))
      cfg.metrics.precision_tolerance = jm.at("precision_tolerance").get<double>();
  }

  if (j.contains("input")) {
    const auto& ji = j.at("input");
    check_keys(ji, {"path", "kind", "threshold", "objective_alpha", "outcome_domain"},
               "input");
    InputSpec in;
    in.path = ji.at("path").get<std::string>();
    if (ji.contains("kind")) {
      const std::string k = ji.at("kind").get<std::string>();
      if (k == "classification")
        in.kind = DatasetKind::classification;
      else if (k == "ranking")
        in.kind = DatasetKind::ranking;
      else
        throw ConfigError("input.kind: unknown kind '" + k + "'");
    }
    if (ji.contains("threshold")) in.threshold = ji.at("threshold").get<double>();
    if (ji.contains("objective_alpha"))
      in.objective_alpha = ji.at("objective_alpha").get<double>();
    if (ji.contains("outcome_domain")) {
      const std::string dstr = ji.at("outcome_domain").get<std::string>();
      if (dstr == "binary")
        in.outcome_domain = OutcomeDomain::binary;
      else if (dstr == "three_level")
        in.outcome_domain = OutcomeDomain::three_level;
      else if (dstr == "continuous")
        in.outcome_domain = OutcomeDomain::continuous;
      else
        throw ConfigError("input.outcome_domain: unknown domain '" + dstr + "'");
    }
    cfg.input = std::move(in);
  }

  if (j.contains("output")) {
    const auto& jo = j.at("output");
    check_keys(jo, {"path", "format"}, "output");
    if (jo.contains("path")) cfg.out_path = jo.at("path").get<std::string>();
    if (jo.contains("format"))
      cfg.format = output_format_from_string(jo.at("format").get<std::string>());
  }

  if (j.contains("demo")) {
    const auto& jd = j.at("demo");
    check_keys(jd, {"fixture"}, "demo");
    if (jd.contains("fixture")) cfg.demo_fixture = jd.at("fixture").get<std::string>();
  }

  return cfg;
}

}  // namespace outcome_audit
