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

#include <cstdio>
#include <ostream>
#include <string>

#include "outcome_audit/audit.hpp"
#include "outcome_audit/counterfactual.hpp"
#include "outcome_audit/metrics.hpp"

namespace outcome_audit {

namespace detail {

template <typename... Args>
std::string strf(const char* fmt, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

}  // namespace detail

// Per-decile coefficient table: one row per (bin, non-reference group) with
// the estimated outcome gap relative to the reference group, its standard
// error, and the test result.
inline void render_table(const AuditReport& r, std::ostream& os) {
  os << "outcome audit (" << to_string(r.kind) << ")\n";
  os << "reference group: " << r.reference_group << "   level: " << r.level
     << "   covariance: " << to_string(r.covariance) << "   requested bins: " << r.n_bins
     << "\n";
  os << detail::strf("score support: [%.6g, %.6g]   excluded off support: %lld\n",
                     r.support_lo, r.support_hi,
                     static_cast<long long>(r.excluded_off_support));
  os << "standard errors are record-level (not clustered by query)\n";
  if (r.kind == DatasetKind::classification) {
    os << "verdict (marginal bin): "
       << (r.marginal_verdict ? to_string(*r.marginal_verdict) : "n/a") << "\n";
    if (r.non_monotonic_outcomes)
      os << "warning: mean outcomes are not monotone across score bins; the score "
            "itself misorders outcomes\n";
  } else {
    os << "verdict (any bin rejects): " << to_string(r.overall_verdict)
       << "   bonferroni-adjusted: " << to_string(r.overall_verdict_bonferroni) << "\n";
  }
  os << "\n";
  os << detail::strf("%-4s %-22s %8s  %-8s %12s %12s %9s %11s  %s\n", "bin", "range", "n",
                     "group", "gap", "std.err", "t", "p", "flags");
  for (const auto& ba : r.bins) {
    const std::string range =
        detail::strf("[%.6g, %.6g%c", ba.bin.lower, ba.bin.upper,
                     ba.bin.index + 1 == static_cast<int>(r.bins.size()) ? ']' : ')');
    const std::string bin_label =
        detail::strf("%d%s", ba.bin.index, ba.bin.is_marginal ? "*" : "");
    if (!ba.fitted) {
      os << detail::strf("%-4s %-22s %8lld  %s\n", bin_label.c_str(), range.c_str(),
                         static_cast<long long>(ba.n_rows),
                         ("not fitted: " + ba.failure).c_str());
      continue;
    }
    bool first = true;
    for (const auto& t : ba.tests) {
      std::string flags;
      if (t.reject) flags += "reject ";
      if (t.low_power) flags += "low-power ";
      if (ba.score_control_dropped && first) flags += "no-score-control ";
      os << detail::strf("%-4s %-22s %8lld  %-8s %+12.6f %12.6f %9.3f %11.4g  %s\n",
                         first ? bin_label.c_str() : "", first ? range.c_str() : "",
                         static_cast<long long>(first ? ba.n_rows : ba.n_rows),
                         t.group.c_str(), t.coefficient, t.standard_error, t.t_statistic,
                         t.p_value, flags.c_str());
      first = false;
    }
  }
  if (r.kind == DatasetKind::classification)
    os << "\n(* marginal bin: lowest treated scores; decides the verdict)\n";
}

inline void render_table(const CounterfactualSummary& s, std::ostream& os) {
  if (s.kind == DatasetKind::classification) {
    os << "counterfactual notification reallocation (classification)\n\n";
    os << detail::strf("%-8s %14s %14s %10s\n", "group", "notifications",
                       "corrected", "change");
    for (const auto& [g, before] : s.n_before) {
      const auto after = s.n_after.at(g);
      const auto& pct = s.n_pct_delta.at(g);
      os << detail::strf("%-8s %14lld %14lld %10s\n", g.c_str(),
                         static_cast<long long>(before), static_cast<long long>(after),
                         pct ? detail::strf("%+.1f%%", *pct).c_str() : "n/a");
    }
    os << "\n";
    if (s.y_before)
      os << detail::strf("total realized outcome: %.6g\n", *s.y_before);
    if (s.y_after)
      os << detail::strf("total predicted outcome after correction: %.6g\n", *s.y_after);
    if (s.y_pct_delta)
      os << detail::strf("outcome change: %+.4f%%\n", *s.y_pct_delta);
  } else {
    os << "counterfactual re-ranking (ranking)\n\n";
    os << detail::strf("%-8s %12s %12s %14s %10s\n", "group", "impressions",
                       "mean rank", "corrected rank", "delta");
    for (const auto& [g, before] : s.mean_rank_before) {
      os << detail::strf("%-8s %12lld %12.4f %14.4f %+10.4f\n", g.c_str(),
                         static_cast<long long>(s.n_before.at(g)), before,
                         s.mean_rank_after.at(g), s.mean_rank_delta.at(g));
    }
  }
  if (s.n_flagged > 0)
    os << detail::strf("\nflagged records kept at original allocation (no usable fit): %lld\n",
                       static_cast<long long>(s.n_flagged));
}

inline void render_table(const DemoReport& r, std::ostream& os) {
  os << "demo " << r.fixture << ": " << r.description << "\n\n";
  os << detail::strf("%-8s %-12s %-28s %-18s %s\n", "group", "hired/total",
                     "mean outcome | hired", "marginal outcome", "hiring bar");
  for (const auto& g : r.groups) {
    int hired = 0, total = 0;
    for (const auto& m : g.masses) {
      total += m.mass;
      if (m.hired) hired += m.mass;
    }
    os << detail::strf("%-8s %-12s %-28s %-18s %s\n", g.group.c_str(),
                       detail::strf("%d/%d", hired, total).c_str(),
                       g.hired_conditional_mean.to_display().c_str(),
                       g.marginal_outcome.to_display().c_str(),
                       g.hiring_bar.to_display().c_str());
  }
  os << "\nqualification masses (q:count, * = hired):\n";
  for (const auto& g : r.groups) {
    os << "  " << g.group << ":";
    for (const auto& m : g.masses)
      os << detail::strf(" %.1f:%d%s", m.q_tenths / 10.0, m.mass, m.hired ? "*" : "");
    os << "\n";
  }
}

inline void render_table(const std::vector<MetricVerdict>& verdicts, std::ostream& os) {
  os << "fairness metric comparison\n\n";
  os << detail::strf("%-16s %-8s %-10s\n", "metric", "verdict", "tolerance");
  for (const auto& v : verdicts)
    os << detail::strf("%-16s %-8s %-10g\n", v.metric.c_str(),
                       v.fair ? "fair" : "unfair", v.tolerance);
  os << "\ndetail:\n";
  for (const auto& v : verdicts) {
    for (const auto& row : v.detail) {
      os << "  " << v.metric << ": " << row.statistic << " " << row.group;
      if (!row.group_b.empty()) os << " vs " << row.group_b;
      if (row.outcome_value) os << detail::strf(" | outcome=%g", *row.outcome_value);
      if (row.bin_index) os << detail::strf(" | bin=%d", *row.bin_index);
      os << detail::strf(" = %.6g\n", row.value);
    }
    for (const auto& n : v.notes) os << "  " << v.metric << ": note: " << n << "\n";
  }
}

}  // namespace outcome_audit
