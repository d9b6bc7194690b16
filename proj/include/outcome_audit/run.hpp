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

#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "outcome_audit/config.hpp"
#include "outcome_audit/counterfactual.hpp"
#include "outcome_audit/csv.hpp"
#include "outcome_audit/json_io.hpp"
#include "outcome_audit/tables.hpp"

namespace outcome_audit {

namespace detail {

// Output sink resolved before any computation runs, so path problems fail
// fast instead of after minutes of simulation.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }

  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

inline std::string audit_report_to_csv(const AuditReport& r) {
  std::string out =
      "bin,lower,upper,is_marginal,n,group,coefficient,standard_error,"
      "t_statistic,p_value,p_value_bonferroni,reject,low_power,failure\n";
  for (const auto& ba : r.bins) {
    if (!ba.fitted) {
      out += std::to_string(ba.bin.index) + "," + format_double(ba.bin.lower) + "," +
             format_double(ba.bin.upper) + "," + (ba.bin.is_marginal ? "true" : "false") +
             "," + std::to_string(ba.n_rows) + ",,,,,,,,," + csv_escape(ba.failure) + "\n";
      continue;
    }
    for (const auto& t : ba.tests) {
      out += std::to_string(ba.bin.index) + "," + format_double(ba.bin.lower) + "," +
             format_double(ba.bin.upper) + "," + (ba.bin.is_marginal ? "true" : "false") +
             "," + std::to_string(ba.n_rows) + "," + csv_escape(t.group) + "," +
             format_double(t.coefficient) + "," + format_double(t.standard_error) + "," +
             format_double(t.t_statistic) + "," + format_double(t.p_value) + "," +
             format_double(t.p_value_bonferroni) + "," + (t.reject ? "true" : "false") +
             "," + (t.low_power ? "true" : "false") + ",\n";
    }
  }
  return out;
}

inline std::string summary_to_csv(const CounterfactualSummary& s) {
  std::string out;
  if (s.y_before) out += "#meta y_before=" + format_double(*s.y_before) + "\n";
  if (s.y_after) out += "#meta y_after=" + format_double(*s.y_after) + "\n";
  if (s.y_pct_delta) out += "#meta y_pct_delta=" + format_double(*s.y_pct_delta) + "\n";
  out += "group,n_before,n_after,n_pct_delta,mean_rank_before,mean_rank_after,mean_rank_delta\n";
  for (const auto& [g, before] : s.n_before) {
    out += csv_escape(g) + "," + std::to_string(before) + "," +
           std::to_string(s.n_after.at(g)) + ",";
    if (const auto& pct = s.n_pct_delta.at(g)) out += format_double(*pct);
    out += ",";
    if (s.mean_rank_before.count(g)) out += format_double(s.mean_rank_before.at(g));
    out += ",";
    if (s.mean_rank_after.count(g)) out += format_double(s.mean_rank_after.at(g));
    out += ",";
    if (s.mean_rank_delta.count(g)) out += format_double(s.mean_rank_delta.at(g));
    out += "\n";
  }
  return out;
}

inline std::string metrics_to_csv(const std::vector<MetricVerdict>& verdicts) {
  std::string out =
      "metric,fair,tolerance,statistic,group,group_b,outcome_value,bin_index,value\n";
  for (const auto& v : verdicts)
    for (const auto& row : v.detail) {
      out += csv_escape(v.metric) + "," + (v.fair ? "true" : "false") + "," +
             format_double(v.tolerance) + "," + csv_escape(row.statistic) + "," +
             csv_escape(row.group) + "," + csv_escape(row.group_b) + ",";
      if (row.outcome_value) out += format_double(*row.outcome_value);
      out += ",";
      if (row.bin_index) out += std::to_string(*row.bin_index);
      out += "," + format_double(row.value) + "\n";
    }
  return out;
}

inline std::string demos_to_csv(const std::vector<DemoReport>& reports) {
  std::string out = "fixture,group,hired_conditional_mean,marginal_outcome,hiring_bar\n";
  for (const auto& r : reports)
    for (const auto& g : r.groups)
      out += r.fixture + "," + csv_escape(g.group) + "," +
             format_double(g.hired_conditional_mean.value()) + "," +
             format_double(g.marginal_outcome.value()) + "," +
             format_double(g.hiring_bar.value()) + "\n";
  return out;
}

inline Dataset load_input(const RunConfig& cfg, std::vector<std::string>* notes) {
  if (!cfg.input || cfg.input->path.empty())
    throw ConfigError(std::string(to_string(cfg.subcommand)) +
                      " requires input.path (or --input)");
  IngestOptions opts;
  opts.kind = cfg.input->kind;
  opts.threshold = cfg.input->threshold;
  opts.objective_alpha = cfg.input->objective_alpha;
  opts.outcome_domain = cfg.input->outcome_domain;
  opts.notes = notes;
  return ingest_dataset_file(cfg.input->path, opts);
}

}  // namespace detail

// Executes one configured pipeline. Writes the primary artifact to
// cfg.out_path (stdout when empty) and returns ingest/processing notes for
// the caller to surface. Deterministic: a fixed config yields byte-identical
// output.
inline std::vector<std::string> run(const RunConfig& cfg, std::ostream& out_fallback) {
  std::vector<std::string> notes;

  switch (cfg.subcommand) {
    case Subcommand::simulate: {
      if (!cfg.scenario) throw ConfigError("simulate requires a scenario");
      detail::OutputSink sink(cfg.out_path, out_fallback);
      const Dataset d = simulate(*cfg.scenario);
      emit_dataset(d, sink.stream());
      break;
    }
    case Subcommand::audit: {
      const Dataset d = detail::load_input(cfg, &notes);
      detail::OutputSink sink(cfg.out_path, out_fallback);
      const AuditReport report = d.kind == DatasetKind::classification
                                     ? audit_classification(d, cfg.audit)
                                     : audit_ranking(d, cfg.audit);
      switch (cfg.format) {
        case OutputFormat::json: sink.stream() << to_json(report).dump(2) << "\n"; break;
        case OutputFormat::csv: sink.stream() << detail::audit_report_to_csv(report); break;
        case OutputFormat::table: render_table(report, sink.stream()); break;
      }
      break;
    }
    case Subcommand::counterfactual: {
      const Dataset d = detail::load_input(cfg, &notes);
      detail::OutputSink sink(cfg.out_path, out_fallback);
      const AuditReport report = d.kind == DatasetKind::classification
                                     ? audit_classification(d, cfg.audit)
                                     : audit_ranking(d, cfg.audit);
      const CorrectedPredictions preds = predict_corrected(d, report);
      const CounterfactualSummary summary = d.kind == DatasetKind::classification
                                                ? reallocate_classification(d, preds)
                                                : rerank_ranking(d, preds);
      if (preds.n_far_below_threshold > 0)
        notes.push_back(std::to_string(preds.n_far_below_threshold) +
                        " records sit more than one marginal-bin width below the "
                        "threshold; their predictions extrapolate the marginal fit");
      switch (cfg.format) {
        case OutputFormat::json: sink.stream() << to_json(summary).dump(2) << "\n"; break;
        case OutputFormat::csv: sink.stream() << detail::summary_to_csv(summary); break;
        case OutputFormat::table: render_table(summary, sink.stream()); break;
      }
      break;
    }
    case Subcommand::compare_metrics: {
      const Dataset d = detail::load_input(cfg, &notes);
      detail::OutputSink sink(cfg.out_path, out_fallback);
      const auto verdicts = compare_metrics(d, cfg.audit, cfg.metrics);
      switch (cfg.format) {
        case OutputFormat::json: sink.stream() << to_json(verdicts).dump(2) << "\n"; break;
        case OutputFormat::csv: sink.stream() << detail::metrics_to_csv(verdicts); break;
        case OutputFormat::table: render_table(verdicts, sink.stream()); break;
      }
      break;
    }
    case Subcommand::demo: {
      detail::OutputSink sink(cfg.out_path, out_fallback);
      std::vector<DemoReport> reports;
      if (cfg.demo_fixture == "all") {
        reports.push_back(infra_marginality_demo(DemoFixture::fig1));
        reports.push_back(infra_marginality_demo(DemoFixture::fig2));
        reports.push_back(infra_marginality_demo(DemoFixture::fig3));
      } else {
        const auto fixture = demo_fixture_from_string(cfg.demo_fixture);
        if (!fixture)
          throw ConfigError("unknown demo fixture '" + cfg.demo_fixture +
                            "' (expected fig1|fig2|fig3|all)");
        reports.push_back(infra_marginality_demo(*fixture));
      }
      switch (cfg.format) {
        case OutputFormat::json: {
          json arr = json::array();
          for (const auto& r : reports) arr.push_back(to_json(r));
          sink.stream() << (reports.size() == 1 ? to_json(reports.front()) : json{{"demos", arr}})
                               .dump(2)
                        << "\n";
          break;
        }
        case OutputFormat::csv: sink.stream() << detail::demos_to_csv(reports); break;
        case OutputFormat::table:
          for (std::size_t i = 0; i < reports.size(); ++i) {
            if (i > 0) sink.stream() << "\n";
            render_table(reports[i], sink.stream());
          }
          break;
      }
      break;
    }
  }
  return notes;
}

}  // namespace outcome_audit
