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
#include "outcome_audit/errors.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

// Bias-corrected outcome predictions, parallel to Dataset::records.
// A record has no prediction when it never needed one (unimpressed ranking
// records) or when its bin's fit failed / it lies off the common support;
// the latter are counted as flagged and keep their original allocation.
struct CorrectedPredictions {
  std::vector<std::optional<double>> yhat;
  std::int64_t n_flagged = 0;
  // Classification: records more than one marginal-bin-width below the
  // threshold still receive the marginal bin's fit (the nearest estimate
  // available), but the extrapolation distance is worth counting.
  std::int64_t n_far_below_threshold = 0;
};

namespace detail {

inline std::optional<double> fitted_value(const BinAudit& ba,
                                          const std::string& group_label,
                                          const std::string& reference_label,
                                          double score) {
  if (!ba.fitted) return std::nullopt;
  const RegressionFit& fit = *ba.fit;
  double v = fit.coefficient("intercept");
  if (group_label != reference_label) {
    const TermEstimate* g = fit.find("group:" + group_label);
    if (!g) return std::nullopt;  // group was not identifiable in this design
    v += g->coefficient;
  }
  if (!ba.score_control_dropped) v += fit.coefficient("score") * score;
  return v;
}

}  // namespace detail

// Predicted outcomes with the estimated group gaps folded in: each record
// gets the fitted value of its score bin's regression. Classification
// records scored below the threshold (never treated, so never binned)
// borrow the marginal bin's fit, the closest available margin.
inline CorrectedPredictions predict_corrected(const Dataset& d,
                                              const AuditReport& report) {
  CorrectedPredictions out;
  out.yhat.assign(d.records.size(), std::nullopt);

  const bool classification = d.kind == DatasetKind::classification;
  if (report.kind != d.kind)
    throw DataError("predict_corrected: report kind does not match dataset");
  if (report.bins.empty()) throw DataError("predict_corrected: report has no bins");

  double marginal_width = 0.0;
  if (classification) {
    const ScoreBin& m = report.bins.front().bin;
    marginal_width = m.upper - m.lower;
  }
  std::vector<ScoreBin> bins_only;
  bins_only.reserve(report.bins.size());
  for (const auto& ba : report.bins) bins_only.push_back(ba.bin);

  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const AuditRecord& r = d.records[i];
    int bin = -1;
    if (classification) {
      bin = bin_index_for_score(bins_only, r.score);
      if (bin < 0) {
        // Below the binned support: use the marginal bin.
        bin = report.marginal_bin_index.value_or(0);
        if (d.threshold && r.score < *d.threshold - marginal_width)
          ++out.n_far_below_threshold;
      }
    } else {
      if (!r.treated) continue;  // only impressed records are re-ranked
      bin = bin_index_for_score(bins_only, r.score);
      if (bin < 0) {
        ++out.n_flagged;  // off the common support
        continue;
      }
    }

    const auto v = detail::fitted_value(report.bins[static_cast<std::size_t>(bin)],
                                        d.group_label(r.group),
                                        report.reference_group, r.score);
    if (v) {
      out.yhat[i] = *v;
    } else {
      ++out.n_flagged;
    }
  }
  return out;
}

// Product-metric deltas between the observed allocation and the
// bias-corrected counterfactual.
struct CounterfactualSummary {
  DatasetKind kind = DatasetKind::classification;
  std::map<std::string, std::int64_t> n_before;  // treated count per group
  std::map<std::string, std::int64_t> n_after;
  std::map<std::string, std::optional<double>> n_pct_delta;
  std::optional<double> y_before;     // classification: total realized outcome
  std::optional<double> y_after;      // classification: total predicted outcome
  std::optional<double> y_pct_delta;
  std::map<std::string, double> mean_rank_before;  // ranking only
  std::map<std::string, double> mean_rank_after;
  std::map<std::string, double> mean_rank_delta;
  std::int64_t n_flagged = 0;

  bool operator==(const CounterfactualSummary&) const = default;
};

namespace detail {

// Sort key for counterfactual selection: highest prediction first, ties by
// higher original score, then record_id for full determinism.
struct SelectionOrder {
  const Dataset* d;
  const CorrectedPredictions* preds;

  bool operator()(std::size_t a, std::size_t b) const {
    const double ya = *preds->yhat[a];
    const double yb = *preds->yhat[b];
    if (ya != yb) return ya > yb;
    if (d->records[a].score != d->records[b].score)
      return d->records[a].score > d->records[b].score;
    return d->records[a].record_id < d->records[b].record_id;
  }
};

inline std::map<std::string, std::vector<std::size_t>> by_query(const Dataset& d) {
  std::map<std::string, std::vector<std::size_t>> queries;
  for (std::size_t i = 0; i < d.records.size(); ++i)
    queries[d.records[i].query_id].push_back(i);
  return queries;
}

}  // namespace detail

// Counterfactual notification reallocation for classification datasets.
// Holding each job's notification count fixed, notifications go to the
// records with the highest corrected predictions among the candidates that
// were originally scored for that job. Records without a usable prediction
// keep their original status and are never promoted. When cf_treated is
// given it receives the record-level counterfactual treatment assignment,
// parallel to d.records.
inline CounterfactualSummary reallocate_classification(
    const Dataset& d, const CorrectedPredictions& preds,
    std::vector<char>* cf_treated = nullptr) {
  if (d.kind != DatasetKind::classification)
    throw DataError("reallocate_classification requires a classification dataset");
  if (cf_treated) cf_treated->assign(d.records.size(), 0);

  CounterfactualSummary s;
  s.kind = DatasetKind::classification;
  s.n_flagged = preds.n_flagged;
  for (const auto& g : d.groups) {
    s.n_before[g.label] = 0;
    s.n_after[g.label] = 0;
  }

  double y_before = 0.0;
  double y_after = 0.0;
  for (const auto& [query, indices] : detail::by_query(d)) {
    std::vector<std::size_t> pool;
    std::int64_t n_slots = 0;
    for (const std::size_t i : indices) {
      const AuditRecord& r = d.records[i];
      if (r.treated) {
        ++n_slots;
        s.n_before[d.group_label(r.group)] += 1;
        y_before += r.outcome.value_or(0.0);
        if (!preds.yhat[i]) {
          // Flagged but already treated: retains the notification.
          s.n_after[d.group_label(r.group)] += 1;
          y_after += r.outcome.value_or(0.0);
          if (cf_treated) (*cf_treated)[i] = 1;
          --n_slots;  // slot already spoken for
          continue;
        }
      }
      if (preds.yhat[i]) pool.push_back(i);
    }
    if (n_slots <= 0) continue;
    const auto k = static_cast<std::size_t>(n_slots);
    if (pool.size() < k)
      throw DataError("reallocate_classification: query " + query +
                      " has fewer predictable candidates than notification slots");
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k),
                      pool.end(), detail::SelectionOrder{&d, &preds});
    for (std::size_t p = 0; p < k; ++p) {
      const std::size_t i = pool[p];
      s.n_after[d.group_label(d.records[i].group)] += 1;
      y_after += *preds.yhat[i];
      if (cf_treated) (*cf_treated)[i] = 1;
    }
  }

  for (const auto& g : d.groups) {
    const std::int64_t before = s.n_before[g.label];
    const std::int64_t after = s.n_after[g.label];
    if (before > 0)
      s.n_pct_delta[g.label] =
          100.0 * static_cast<double>(after - before) / static_cast<double>(before);
    else
      s.n_pct_delta[g.label] = std::nullopt;
  }
  s.y_before = y_before;
  s.y_after = y_after;
  if (y_before != 0.0)
    s.y_pct_delta = 100.0 * (y_after - y_before) / y_before;
  return s;
}

// Counterfactual re-ranking for ranking datasets. Within each query the
// originally impressed candidates are re-ordered by corrected prediction
// over the same rank slots; the summary reports each group's average rank
// before and after. Records without predictions keep their original slots.
// When new_ranks is given it receives the record-level counterfactual
// ranks, parallel to d.records (empty for unimpressed records).
inline CounterfactualSummary rerank_ranking(
    const Dataset& d, const CorrectedPredictions& preds,
    std::vector<std::optional<int>>* new_ranks = nullptr) {
  if (d.kind != DatasetKind::ranking)
    throw DataError("rerank_ranking requires a ranking dataset");
  if (new_ranks) new_ranks->assign(d.records.size(), std::nullopt);

  CounterfactualSummary s;
  s.kind = DatasetKind::ranking;
  s.n_flagged = preds.n_flagged;

  std::map<std::string, std::pair<double, std::int64_t>> before;  // sum, count
  std::map<std::string, double> after_sum;

  for (const auto& [query, indices] : detail::by_query(d)) {
    std::vector<std::size_t> movers;
    std::vector<int> free_slots;
    for (const std::size_t i : indices) {
      const AuditRecord& r = d.records[i];
      if (!r.treated || !r.rank) continue;
      const std::string& label = d.group_label(r.group);
      auto& acc = before[label];
      acc.first += *r.rank;
      acc.second += 1;
      s.n_before[label] += 1;
      if (preds.yhat[i]) {
        movers.push_back(i);
        free_slots.push_back(*r.rank);
      } else {
        after_sum[label] += *r.rank;  // keeps its slot
        if (new_ranks) (*new_ranks)[i] = *r.rank;
      }
    }
    std::sort(movers.begin(), movers.end(), detail::SelectionOrder{&d, &preds});
    std::sort(free_slots.begin(), free_slots.end());
    for (std::size_t p = 0; p < movers.size(); ++p) {
      after_sum[d.group_label(d.records[movers[p]].group)] += free_slots[p];
      if (new_ranks) (*new_ranks)[movers[p]] = free_slots[p];
    }
  }

  for (const auto& [label, acc] : before) {
    const double n = static_cast<double>(acc.second);
    s.n_after[label] = acc.second;  // impression counts are unchanged
    s.mean_rank_before[label] = acc.first / n;
    s.mean_rank_after[label] = after_sum[label] / n;
    s.mean_rank_delta[label] = s.mean_rank_after[label] - s.mean_rank_before[label];
    s.n_pct_delta[label] = 0.0;
  }
  return s;
}

}  // namespace outcome_audit
