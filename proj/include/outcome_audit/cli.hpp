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
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "outcome_audit/run.hpp"

namespace outcome_audit {

namespace detail {

inline std::string sanitize_status(std::string s) {
  for (char& c : s)
    if (c == '"' || c == '\n' || c == '\r') c = '\'';
  return s;
}

inline void print_status(const std::string& status, const std::string& subcommand,
                         const std::string& message = "") {
  std::cerr << "outcome-audit: status=" << status;
  if (!subcommand.empty()) std::cerr << " subcommand=" << subcommand;
  if (!message.empty()) std::cerr << " message=\"" << sanitize_status(message) << "\"";
  std::cerr << "\n";
}

struct CliFlags {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string reference;
  std::string input_path;
  std::string input_kind;
  std::string fixture;
  std::uint64_t seed = 0;
  int bins = 0;
  double level = 0.0;
  double threshold = 0.0;
};

inline void add_common_options(CLI::App* sub, CliFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON run configuration file");
  sub->add_option("--out", flags.out_path, "output path (default: stdout)");
  sub->add_option("--format", flags.format, "output format: json|csv|table");
  sub->add_option("--seed", flags.seed, "override the scenario seed");
  sub->add_option("--bins", flags.bins, "number of score bins");
  sub->add_option("--level", flags.level, "significance level");
  sub->add_option("--reference", flags.reference, "reference group label");
  sub->add_option("--input", flags.input_path, "input dataset CSV");
  sub->add_option("--kind", flags.input_kind, "input dataset kind: classification|ranking");
  sub->add_option("--threshold", flags.threshold, "classification score threshold");
}

inline RunConfig build_run_config(const CLI::App& sub, const CliFlags& flags,
                                  Subcommand subcommand) {
  nlohmann::json j = nlohmann::json::object();
  if (!flags.config_path.empty()) {
    std::ifstream is(flags.config_path);
    if (!is) throw ConfigError("cannot open config file '" + flags.config_path + "'");
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + flags.config_path + "': " + e.what());
    }
  }

  RunConfig cfg;
  try {
    cfg = parse_run_config(j, subcommand);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // Command-line flags override config file values.
  if (sub.count("--out")) cfg.out_path = flags.out_path;
  if (sub.count("--format")) cfg.format = output_format_from_string(flags.format);
  if (sub.count("--seed")) {
    if (!cfg.scenario) throw ConfigError("--seed requires a scenario in the config");
    cfg.scenario->seed = flags.seed;
  }
  if (sub.count("--bins")) cfg.audit.n_bins = flags.bins;
  if (sub.count("--level")) cfg.audit.level = flags.level;
  if (sub.count("--reference")) cfg.audit.reference_group = flags.reference;
  if (sub.count("--input")) {
    if (!cfg.input) cfg.input = InputSpec{};
    cfg.input->path = flags.input_path;
  }
  if (sub.count("--kind")) {
    if (!cfg.input) cfg.input = InputSpec{};
    if (flags.input_kind == "classification")
      cfg.input->kind = DatasetKind::classification;
    else if (flags.input_kind == "ranking")
      cfg.input->kind = DatasetKind::ranking;
    else
      throw ConfigError("--kind: unknown kind '" + flags.input_kind + "'");
  }
  if (sub.count("--threshold")) {
    if (!cfg.input) cfg.input = InputSpec{};
    cfg.input->threshold = flags.threshold;
  }
  if (!flags.fixture.empty()) cfg.demo_fixture = flags.fixture;
  return cfg;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"bias audit toolkit for scoring and ranking recommenders"};
  app.require_subcommand(1);

  detail::CliFlags flags;
  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic audit dataset");
  CLI::App* audit = app.add_subcommand("audit", "run the marginal outcome test");
  CLI::App* cf = app.add_subcommand(
      "counterfactual", "audit, then quantify bias via corrected reallocation");
  CLI::App* cmp = app.add_subcommand(
      "compare-metrics", "outcome test vs equalized odds vs group precision");
  CLI::App* demo = app.add_subcommand(
      "demo", "built-in worked examples of average vs marginal outcomes");
  for (CLI::App* sub : {sim, audit, cf, cmp, demo})
    detail::add_common_options(sub, flags);
  demo->add_option("fixture", flags.fixture, "fig1|fig2|fig3|all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) {
      detail::print_status("ok", "");
      return 0;
    }
    detail::print_status("config-error", "", e.what());
    return 2;
  }

  Subcommand subcommand = Subcommand::demo;
  CLI::App* sub = demo;
  if (sim->parsed()) {
    subcommand = Subcommand::simulate;
    sub = sim;
  } else if (audit->parsed()) {
    subcommand = Subcommand::audit;
    sub = audit;
  } else if (cf->parsed()) {
    subcommand = Subcommand::counterfactual;
    sub = cf;
  } else if (cmp->parsed()) {
    subcommand = Subcommand::compare_metrics;
    sub = cmp;
  }
  const std::string name = to_string(subcommand);

  try {
    const RunConfig cfg = detail::build_run_config(*sub, flags, subcommand);
    const auto notes = run(cfg, std::cout);
    for (const auto& n : notes) std::cerr << "outcome-audit: note: " << n << "\n";
    detail::print_status("ok", name);
    return 0;
  } catch (const ConfigError& e) {
    detail::print_status("config-error", name, e.what());
    return 2;
  } catch (const Error& e) {
    detail::print_status("data-error", name, e.what());
    return 1;
  } catch (const std::exception& e) {
    detail::print_status("error", name, e.what());
    return 1;
  }
}

}  // namespace outcome_audit
