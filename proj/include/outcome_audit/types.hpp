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
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "outcome_audit/errors.hpp"

namespace outcome_audit {

enum class DatasetKind { classification, ranking };

// Domain the realized outcome lives in. `continuous` admits any value in
// [0, 1] and is the default (it also covers fixtures that record expected
// outcomes directly); `binary` is {0, 1}; `three_level` is {0, alpha, 1}
// for a two-stage objective with partial credit alpha.
enum class OutcomeDomain { continuous, binary, three_level };

inline const char* to_string(DatasetKind k) {
  return k == DatasetKind::classification ? "classification" : "ranking";
}

inline const char* to_string(OutcomeDomain d) {
  switch (d) {
    case OutcomeDomain::binary: return "binary";
    case OutcomeDomain::three_level: return "three_level";
    default: return "continuous";
  }
}

// One protected group. Groups within a dataset are mutually exclusive and
// collectively exhaustive: every record carries exactly one group index.
struct GroupId {
  std::string label;
  int index = 0;

  bool operator==(const GroupId&) const = default;
};

// One scored candidate-query pair.
//   score     the algorithm's prediction of the outcome, in [0, 1]
//   treated   whether the opportunity was granted (notified / impressed)
//   outcome   realized outcome; observed if and only if treated
//   rank      1-based slot within the query (ranking datasets, treated only)
//   true_qualification  simulation ground truth; absent in real audit logs
struct AuditRecord {
  std::string record_id;
  std::string query_id;
  int group = 0;  // index into Dataset::groups
  double score = 0.0;
  bool treated = false;
  std::optional<double> outcome;
  std::optional<double> true_qualification;
  std::optional<int> rank;

  bool operator==(const AuditRecord&) const = default;
};

struct Dataset {
  DatasetKind kind = DatasetKind::classification;
  std::vector<GroupId> groups;
  std::vector<AuditRecord> records;
  std::optional<double> threshold;        // classification score cutoff
  std::optional<double> objective_alpha;  // partial-credit level, if any
  OutcomeDomain outcome_domain = OutcomeDomain::continuous;

  bool operator==(const Dataset&) const = default;

  std::optional<int> group_index(const std::string& label) const {
    for (const auto& g : groups)
      if (g.label == label) return g.index;
    return std::nullopt;
  }

  const std::string& group_label(int index) const {
    return groups.at(static_cast<std::size_t>(index)).label;
  }
};

// A broken invariant found by validate_dataset. record_id is empty for
// dataset-level problems (and for per-query rank problems, which name the
// query in the message instead).
struct Violation {
  std::string record_id;
  std::string message;

  bool operator==(const Violation&) const = default;
};

namespace detail {

inline bool in_unit_interval(double x) {
  return std::isfinite(x) && x >= 0.0 && x <= 1.0;
}

inline bool outcome_in_domain(double y, OutcomeDomain domain,
                              std::optional<double> alpha) {
  constexpr double kTol = 1e-12;
  switch (domain) {
    case OutcomeDomain::binary:
      return std::fabs(y) <= kTol || std::fabs(y - 1.0) <= kTol;
    case OutcomeDomain::three_level:
      return std::fabs(y) <= kTol || std::fabs(y - 1.0) <= kTol ||
             (alpha && std::fabs(y - *alpha) <= kTol);
    default:
      return in_unit_interval(y);
  }
}

}  // namespace detail

// Total validation: never throws, returns one entry per broken invariant.
// An empty result means the dataset satisfies every structural invariant.
inline std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  const auto add = [&out](std::string id, std::string msg) {
    out.push_back({std::move(id), std::move(msg)});
  };

  {
    std::set<std::string> labels;
    for (const auto& g : d.groups) {
      if (!labels.insert(g.label).second)
        add("", "duplicate group label '" + g.label + "'");
    }
  }
  if (d.groups.empty()) add("", "dataset declares no groups");

  if (d.objective_alpha && !(std::isfinite(*d.objective_alpha) &&
                             *d.objective_alpha > 0.0 && *d.objective_alpha < 1.0))
    add("", "objective_alpha must lie strictly inside (0, 1)");
  if (d.outcome_domain == OutcomeDomain::three_level && !d.objective_alpha)
    add("", "three_level outcome domain requires objective_alpha");

  if (d.kind == DatasetKind::classification && !d.threshold)
    add("", "classification dataset must carry a score threshold");
  if (d.kind == DatasetKind::ranking && d.threshold)
    add("", "ranking dataset must not carry a score threshold");

  std::set<std::string> seen_ids;
  // query -> ranks of treated records, plus treated-without-rank flag
  std::map<std::string, std::vector<int>> query_ranks;
  for (const auto& r : d.records) {
    if (!seen_ids.insert(r.record_id).second)
      add(r.record_id, "duplicate record_id");
    if (r.group < 0 || r.group >= static_cast<int>(d.groups.size()))
      add(r.record_id, "group index out of range");
    if (!detail::in_unit_interval(r.score))
      add(r.record_id, "score outside [0, 1]");
    if (r.outcome.has_value() != r.treated)
      add(r.record_id, r.treated ? "treated record missing outcome"
                                 : "untreated record carries an outcome");
    if (r.treated && r.outcome &&
        !detail::outcome_in_domain(*r.outcome, d.outcome_domain, d.objective_alpha))
      add(r.record_id, std::string("outcome outside declared domain ") +
                           to_string(d.outcome_domain));
    if (r.true_qualification && !detail::in_unit_interval(*r.true_qualification))
      add(r.record_id, "true_qualification outside [0, 1]");

    if (d.kind == DatasetKind::classification) {
      if (r.rank) add(r.record_id, "rank present in a classification dataset");
      if (d.threshold && r.treated && r.score < *d.threshold)
        add(r.record_id, "treated record scores below the threshold");
    } else {
      if (r.rank && !r.treated)
        add(r.record_id, "untreated record carries a rank");
      if (r.treated && !r.rank)
        add(r.record_id, "treated ranking record missing rank");
      if (r.rank && *r.rank < 1) add(r.record_id, "rank must be positive");
      if (r.treated && r.rank) query_ranks[r.query_id].push_back(*r.rank);
    }
  }

  // Within each query the treated ranks must be exactly 1..K.
  for (auto& [query, ranks] : query_ranks) {
    std::sort(ranks.begin(), ranks.end());
    bool contiguous = true;
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (ranks[i] != static_cast<int>(i) + 1) contiguous = false;
    if (!contiguous)
      add("", "query " + query + ": treated ranks are not a contiguous prefix 1.." +
                  std::to_string(ranks.size()));
  }

  return out;
}

}  // namespace outcome_audit
