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

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "outcome_audit/errors.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

namespace detail {

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_split(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_double_field(const std::string& s, const char* column, int line_no) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw DataError("line " + std::to_string(line_no) + ": cannot parse " + column +
                    " value '" + s + "'");
  return v;
}

}  // namespace detail

// Dataset CSV layout: optional "#meta key=value" lines carrying the
// dataset-level fields, then a header row, then one row per record with
// columns record_id, query_id, group, score, treated, outcome, rank,
// true_qualification (the last three empty where absent).
inline void emit_dataset(const Dataset& d, std::ostream& os) {
  os << "#meta kind=" << to_string(d.kind) << "\n";
  {
    std::string labels;
    for (std::size_t i = 0; i < d.groups.size(); ++i) {
      if (i > 0) labels += ',';
      labels += detail::csv_escape(d.groups[i].label);
    }
    os << "#meta groups=" << labels << "\n";
  }
  if (d.threshold) os << "#meta threshold=" << detail::format_double(*d.threshold) << "\n";
  if (d.objective_alpha)
    os << "#meta objective_alpha=" << detail::format_double(*d.objective_alpha) << "\n";
  os << "#meta outcome_domain=" << to_string(d.outcome_domain) << "\n";
  os << "record_id,query_id,group,score,treated,outcome,rank,true_qualification\n";
  for (const auto& r : d.records) {
    os << detail::csv_escape(r.record_id) << ',' << detail::csv_escape(r.query_id)
       << ',' << detail::csv_escape(d.group_label(r.group)) << ','
       << detail::format_double(r.score) << ',' << (r.treated ? "true" : "false") << ',';
    if (r.outcome) os << detail::format_double(*r.outcome);
    os << ',';
    if (r.rank) os << *r.rank;
    os << ',';
    if (r.true_qualification) os << detail::format_double(*r.true_qualification);
    os << '\n';
  }
}

inline void emit_dataset_file(const Dataset& d, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  emit_dataset(d, os);
}

struct IngestOptions {
  std::optional<DatasetKind> kind;  // overrides any #meta kind
  std::optional<double> threshold;
  std::optional<double> objective_alpha;
  std::optional<OutcomeDomain> outcome_domain;
  std::vector<std::string>* notes = nullptr;  // optional sink for ingest notes
};

// Parses and validates a dataset CSV. Any invariant violation aborts with
// the offending line numbers.
inline Dataset ingest_dataset(std::istream& is, const IngestOptions& opts = {}) {
  Dataset d;
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::map<std::string, int> column;
  std::vector<int> record_lines;
  std::map<std::string, int> group_of_label;

  const auto note = [&opts](const std::string& msg) {
    if (opts.notes) opts.notes->push_back(msg);
  };

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#meta ", 0) == 0) {
      const std::string body = line.substr(6);
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw DataError("line " + std::to_string(line_no) + ": malformed #meta line");
      meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (line[0] == '#') continue;

    if (header.empty()) {
      header = detail::csv_split(line, line_no);
      static const std::vector<std::string> kColumns = {
          "record_id", "query_id",      "group", "score",
          "treated",   "outcome",       "rank",  "true_qualification"};
      for (std::size_t i = 0; i < header.size(); ++i) {
        bool known = false;
        for (const auto& c : kColumns) known = known || c == header[i];
        if (!known)
          throw DataError("line " + std::to_string(line_no) + ": unknown column '" +
                          header[i] + "'");
        if (column.count(header[i]))
          throw DataError("line " + std::to_string(line_no) + ": duplicate column '" +
                          header[i] + "'");
        column[header[i]] = static_cast<int>(i);
      }
      for (const auto& c : kColumns)
        if (!column.count(c))
          throw DataError("line " + std::to_string(line_no) + ": missing column '" + c + "'");
      continue;
    }

    const auto fields = detail::csv_split(line, line_no);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    const auto field = [&](const char* name) -> const std::string& {
      return fields[static_cast<std::size_t>(column.at(name))];
    };

    AuditRecord r;
    r.record_id = field("record_id");
    r.query_id = field("query_id");
    const std::string& group_label = field("group");
    const auto it = group_of_label.find(group_label);
    if (it != group_of_label.end()) {
      r.group = it->second;
    } else {
      r.group = static_cast<int>(d.groups.size());
      group_of_label[group_label] = r.group;
      d.groups.push_back({group_label, r.group});
    }
    r.score = detail::parse_double_field(field("score"), "score", line_no);
    const std::string& treated = field("treated");
    if (treated == "true" || treated == "1")
      r.treated = true;
    else if (treated == "false" || treated == "0")
      r.treated = false;
    else
      throw DataError("line " + std::to_string(line_no) + ": cannot parse treated value '" +
                      treated + "'");
    if (!field("outcome").empty())
      r.outcome = detail::parse_double_field(field("outcome"), "outcome", line_no);
    if (!field("rank").empty())
      r.rank = static_cast<int>(
          detail::parse_double_field(field("rank"), "rank", line_no));
    if (!field("true_qualification").empty())
      r.true_qualification = detail::parse_double_field(field("true_qualification"),
                                                        "true_qualification", line_no);
    d.records.push_back(std::move(r));
    record_lines.push_back(line_no);
  }

  if (header.empty()) throw DataError("no header row found");

  // Group declaration order from #meta wins over first-appearance order.
  if (meta.count("groups")) {
    const auto labels = detail::csv_split(meta["groups"], 0);
    std::map<std::string, int> declared;
    for (std::size_t i = 0; i < labels.size(); ++i)
      declared[labels[i]] = static_cast<int>(i);
    for (const auto& g : d.groups)
      if (!declared.count(g.label))
        throw DataError("record group '" + g.label + "' missing from #meta groups");
    std::vector<GroupId> groups;
    for (std::size_t i = 0; i < labels.size(); ++i)
      groups.push_back({labels[i], static_cast<int>(i)});
    for (auto& r : d.records) r.group = declared.at(d.groups[static_cast<std::size_t>(r.group)].label);
    d.groups = std::move(groups);
  }

  if (opts.kind) {
    d.kind = *opts.kind;
    if (meta.count("kind") && meta["kind"] != to_string(d.kind))
      note("requested kind overrides #meta kind=" + meta["kind"]);
  } else if (meta.count("kind")) {
    if (meta["kind"] == "classification")
      d.kind = DatasetKind::classification;
    else if (meta["kind"] == "ranking")
      d.kind = DatasetKind::ranking;
    else
      throw DataError("unknown #meta kind '" + meta["kind"] + "'");
  } else {
    throw DataError("dataset kind not declared: pass it explicitly or add '#meta kind='");
  }

  if (opts.threshold)
    d.threshold = *opts.threshold;
  else if (meta.count("threshold"))
    d.threshold = detail::parse_double_field(meta["threshold"], "threshold", 0);
  if (opts.objective_alpha)
    d.objective_alpha = *opts.objective_alpha;
  else if (meta.count("objective_alpha"))
    d.objective_alpha =
        detail::parse_double_field(meta["objective_alpha"], "objective_alpha", 0);
  if (opts.outcome_domain) {
    d.outcome_domain = *opts.outcome_domain;
  } else if (meta.count("outcome_domain")) {
    const std::string& dom = meta["outcome_domain"];
    if (dom == "binary")
      d.outcome_domain = OutcomeDomain::binary;
    else if (dom == "three_level")
      d.outcome_domain = OutcomeDomain::three_level;
    else if (dom == "continuous")
      d.outcome_domain = OutcomeDomain::continuous;
    else
      throw DataError("unknown #meta outcome_domain '" + dom + "'");
  }

  if (d.kind == DatasetKind::classification && !d.threshold) {
    double lo = 1.0;
    bool any = false;
    for (const auto& r : d.records)
      if (r.treated) {
        lo = std::min(lo, r.score);
        any = true;
      }
    if (any) {
      d.threshold = lo;
      note("threshold not declared; inferred " + detail::format_double(lo) +
           " from the lowest treated score");
    }
  }

  const auto violations = validate_dataset(d);
  if (!violations.empty()) {
    std::map<std::string, int> line_of_record;
    for (std::size_t i = 0; i < d.records.size(); ++i)
      line_of_record.emplace(d.records[i].record_id, record_lines[i]);
    std::string msg = "dataset failed validation (" +
                      std::to_string(violations.size()) + " violation" +
                      (violations.size() == 1 ? "" : "s") + "):";
    std::size_t shown = 0;
    for (const auto& v : violations) {
      if (shown++ == 5) {
        msg += " ...";
        break;
      }
      msg += "\n  ";
      const auto lit = line_of_record.find(v.record_id);
      if (!v.record_id.empty() && lit != line_of_record.end())
        msg += "line " + std::to_string(lit->second) + " (" + v.record_id + "): ";
      msg += v.message;
    }
    throw DataError(msg);
  }
  return d;
}

inline Dataset ingest_dataset_file(const std::string& path, const IngestOptions& opts = {}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "' for reading");
  try {
    return ingest_dataset(is, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace outcome_audit
