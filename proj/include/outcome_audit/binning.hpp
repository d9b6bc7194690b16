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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "outcome_audit/errors.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

// One score bin. Bins partition the binned range into half-open intervals
// [lower, upper); the top bin is closed at its upper edge. In a
// classification audit exactly one bin (the lowest treated bin) is marginal.
struct ScoreBin {
  int index = 0;
  double lower = 0.0;
  double upper = 0.0;
  bool is_marginal = false;

  bool operator==(const ScoreBin&) const = default;
};

namespace detail {

// Empirical quantile cut points over a sorted sample. Cuts are placed at
// sample values so that membership depends only on score order; when a tie
// block straddles a nominal boundary, the cut moves to the next distinct
// value, i.e. boundary ties land in the lower bin.
inline std::vector<double> quantile_cuts(const std::vector<double>& sorted,
                                         int n_bins) {
  const std::size_t n = sorted.size();
  std::vector<double> cuts;
  if (n == 0) return cuts;
  const double lo = sorted.front();
  for (int k = 1; k < n_bins; ++k) {
    const std::size_t b = (n * static_cast<std::size_t>(k)) / static_cast<std::size_t>(n_bins);
    if (b == 0 || b >= n) continue;
    double cut;
    if (sorted[b - 1] < sorted[b]) {
      cut = sorted[b];
    } else {
      const auto it = std::upper_bound(sorted.begin() + static_cast<std::ptrdiff_t>(b),
                                       sorted.end(), sorted[b]);
      if (it == sorted.end()) continue;  // tie block runs to the top
      cut = *it;
    }
    // A cut equal to the maximum is legitimate: the tied block at the top
    // forms its own (single-valued, closed) bin.
    if (cut <= lo) continue;
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }
  return cuts;
}

}  // namespace detail

// Bin membership for a score given the report's bins. Returns -1 when the
// score lies outside the binned support.
inline int bin_index_for_score(std::span<const ScoreBin> bins, double score) {
  if (bins.empty()) return -1;
  if (score < bins.front().lower || score > bins.back().upper) return -1;
  int idx = 0;
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (score >= bins[i].lower) idx = static_cast<int>(i);
  return idx;
}

struct BinnedDataset {
  std::vector<ScoreBin> bins;
  // Parallel to Dataset::records; -1 for records that were not binned
  // (untreated, or treated but outside the common support).
  std::vector<int> assignment;
  double support_lo = 0.0;
  double support_hi = 0.0;
  std::int64_t excluded_off_support = 0;
};

// Quantile-bins the treated records' scores.
//
// classification: bins cover [min, max] of treated scores; the lowest bin
// is the marginal one (the treated scores sit just above the threshold).
// ranking: bins cover the common support -- the intersection across groups
// of each group's [min, max] impressed score range; impressed records
// outside it are excluded and counted.
inline BinnedDataset bin_scores(const Dataset& d, int n_bins) {
  if (n_bins < 2) throw ConfigError("bin_scores: n_bins must be >= 2");

  std::vector<std::size_t> treated;
  for (std::size_t i = 0; i < d.records.size(); ++i)
    if (d.records[i].treated) treated.push_back(i);
  if (treated.empty()) throw DataError("bin_scores: no treated records");

  {
    std::set<int> seen;
    for (const std::size_t i : treated) seen.insert(d.records[i].group);
    if (seen.size() < 2)
      throw DataError("bin_scores: treated records span fewer than two groups");
  }

  BinnedDataset out;
  if (d.kind == DatasetKind::ranking) {
    // Common support: every group must overlap every other.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::map<int, std::pair<double, double>> range;
    for (const std::size_t i : treated) {
      auto [it, fresh] = range.try_emplace(d.records[i].group, d.records[i].score,
                                           d.records[i].score);
      if (!fresh) {
        it->second.first = std::min(it->second.first, d.records[i].score);
        it->second.second = std::max(it->second.second, d.records[i].score);
      }
    }
    for (const auto& [g, mm] : range) {
      lo = std::max(lo, mm.first);
      hi = std::min(hi, mm.second);
    }
    if (lo > hi) throw DataError("bin_scores: groups share no common score support");
    for (const auto& [g, mm] : range) {
      bool inside = false;
      for (const std::size_t i : treated)
        if (d.records[i].group == g && d.records[i].score >= lo &&
            d.records[i].score <= hi) {
          inside = true;
          break;
        }
      if (!inside)
        throw DataError("bin_scores: group '" + d.group_label(g) +
                        "' has no treated records inside the common support");
    }
    out.support_lo = lo;
    out.support_hi = hi;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const std::size_t i : treated) {
      lo = std::min(lo, d.records[i].score);
      hi = std::max(hi, d.records[i].score);
    }
    out.support_lo = lo;
    out.support_hi = hi;
  }

  std::vector<double> scores;
  scores.reserve(treated.size());
  for (const std::size_t i : treated) {
    const double s = d.records[i].score;
    if (s < out.support_lo || s > out.support_hi) {
      ++out.excluded_off_support;
      continue;
    }
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end());

  const std::vector<double> cuts = detail::quantile_cuts(scores, n_bins);
  const int n_actual = static_cast<int>(cuts.size()) + 1;
  for (int b = 0; b < n_actual; ++b) {
    ScoreBin bin;
    bin.index = b;
    bin.lower = b == 0 ? out.support_lo : cuts[static_cast<std::size_t>(b) - 1];
    bin.upper = b == n_actual - 1 ? out.support_hi : cuts[static_cast<std::size_t>(b)];
    bin.is_marginal = d.kind == DatasetKind::classification && b == 0;
    out.bins.push_back(bin);
  }

  out.assignment.assign(d.records.size(), -1);
  for (const std::size_t i : treated) {
    const double s = d.records[i].score;
    if (s < out.support_lo || s > out.support_hi) continue;
    out.assignment[i] = bin_index_for_score(out.bins, s);
  }
  return out;
}

}  // namespace outcome_audit
