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
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "outcome_audit/errors.hpp"
#include "outcome_audit/rng.hpp"
#include "outcome_audit/types.hpp"

namespace outcome_audit {

namespace detail {

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 boosted through
// the Gamma(shape + 1) identity.
inline double sample_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double u = std::max(rng.next_double(), 1e-300);
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.next_gaussian();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = std::max(rng.next_double(), 1e-300);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Qualification distributions
// ---------------------------------------------------------------------------

struct QualificationDistribution {
  struct Discrete {
    std::vector<std::pair<double, double>> mass;  // (q, weight)
  };
  struct Beta {
    double shape1 = 1.0;
    double shape2 = 1.0;
  };
  struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
  };

  std::variant<Discrete, Beta, Uniform> spec = Uniform{};

  double sample(Rng& rng) const {
    if (const auto* d = std::get_if<Discrete>(&spec)) {
      double total = 0.0;
      for (const auto& [q, w] : d->mass) total += w;
      double u = rng.next_double() * total;
      for (const auto& [q, w] : d->mass) {
        u -= w;
        if (u < 0.0) return q;
      }
      return d->mass.back().first;
    }
    if (const auto* b = std::get_if<Beta>(&spec)) {
      const double x = detail::sample_gamma(rng, b->shape1);
      const double y = detail::sample_gamma(rng, b->shape2);
      return x / (x + y);
    }
    const auto& u = std::get<Uniform>(spec);
    return u.lo + (u.hi - u.lo) * rng.next_double();
  }
};

// ---------------------------------------------------------------------------
// Scorers
// ---------------------------------------------------------------------------

// How the simulated algorithm maps a candidate's true qualification to a
// score. `calibrated` is the unbiased scorer; the others plant specific,
// analytically known biases for power and sign tests.
struct ScorerSpec {
  struct Calibrated {};
  struct GroupShift {
    std::map<std::string, double> deltas;  // group label -> subtracted shift
  };
  struct InvertedForGroup {
    std::string group;
  };
  struct NoisyCalibrated {
    double sigma = 0.0;
  };

  std::variant<Calibrated, GroupShift, InvertedForGroup, NoisyCalibrated> spec =
      Calibrated{};

  double score(double q, const std::string& group_label, Rng& rng) const {
    if (std::holds_alternative<Calibrated>(spec)) return q;
    if (const auto* g = std::get_if<GroupShift>(&spec)) {
      const auto it = g->deltas.find(group_label);
      const double delta = it == g->deltas.end() ? 0.0 : it->second;
      return detail::clamp01(q - delta);
    }
    if (const auto* inv = std::get_if<InvertedForGroup>(&spec))
      return inv->group == group_label ? 1.0 - q : q;
    const auto& n = std::get<NoisyCalibrated>(spec);
    return detail::clamp01(q + n.sigma * rng.next_gaussian());
  }
};

// ---------------------------------------------------------------------------
// Viewer behavior (outcome model)
// ---------------------------------------------------------------------------

// Probability as an affine ramp in q, clamped to [0, 1]. A non-negative
// slope keeps the induced outcome distribution stochastically increasing
// in qualification.
struct LinearProb {
  double offset = 0.0;
  double slope = 1.0;

  double operator()(double q) const { return detail::clamp01(offset + slope * q); }
};

// How the treated candidate's realized outcome is drawn from the true
// qualification. The three-level variant models a two-stage response
// (act, then receive follow-up attention) with partial credit alpha.
struct ViewerSpec {
  struct BernoulliQ {};
  struct ThresholdQ {
    double tau = 0.5;
  };
  struct ThreeLevel {
    LinearProb apply_prob{0.1, 0.8};
    LinearProb attention_prob{0.2, 0.6};
    double alpha = 0.3;
  };

  std::variant<BernoulliQ, ThresholdQ, ThreeLevel> spec = BernoulliQ{};

  double draw(double q, Rng& rng) const {
    if (std::holds_alternative<BernoulliQ>(spec))
      return rng.next_bernoulli(q) ? 1.0 : 0.0;
    if (const auto* t = std::get_if<ThresholdQ>(&spec))
      return q >= t->tau ? 1.0 : 0.0;
    const auto& tl = std::get<ThreeLevel>(spec);
    if (!rng.next_bernoulli(tl.apply_prob(q))) return 0.0;
    return rng.next_bernoulli(tl.attention_prob(q)) ? 1.0 : tl.alpha;
  }

  // P(Y <= y | q), exact. Outcomes are discrete in every family, so the
  // CDF is a step function over support().
  double cdf(double y, double q) const {
    if (y < 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    if (std::holds_alternative<BernoulliQ>(spec)) return 1.0 - q;
    if (const auto* t = std::get_if<ThresholdQ>(&spec))
      return q >= t->tau ? 0.0 : 1.0;
    const auto& tl = std::get<ThreeLevel>(spec);
    const double a = tl.apply_prob(q);
    if (y < tl.alpha) return 1.0 - a;
    return 1.0 - a * tl.attention_prob(q);
  }

  std::vector<double> support() const {
    if (const auto* tl = std::get_if<ThreeLevel>(&spec))
      return {0.0, tl->alpha, 1.0};
    return {0.0, 1.0};
  }

  OutcomeDomain domain() const {
    return std::holds_alternative<ThreeLevel>(spec) ? OutcomeDomain::three_level
                                                    : OutcomeDomain::binary;
  }

  std::optional<double> alpha() const {
    if (const auto* tl = std::get_if<ThreeLevel>(&spec)) return tl->alpha;
    return std::nullopt;
  }
};

// True iff, for every adjacent pair q1 < q2 on the grid, the outcome
// distribution at q2 first-order stochastically dominates the one at q1:
// CDF(y; q2) <= CDF(y; q1) everywhere on the outcome support.
inline bool check_fosd(const ViewerSpec& viewer, std::span<const double> q_grid) {
  const auto support = viewer.support();
  for (std::size_t i = 0; i + 1 < q_grid.size(); ++i) {
    const double q1 = q_grid[i];
    const double q2 = q_grid[i + 1];
    for (const double y : support)
      if (viewer.cdf(y, q2) > viewer.cdf(y, q1) + 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Allocation rules
// ---------------------------------------------------------------------------

// Distribution of how far the viewer scrolls, i.e. how many of a query's
// candidates get impressed.
struct ScrollDepth {
  struct Fixed {
    int depth = 1;
  };
  struct UniformDepth {
    int lo = 1;
    int hi = 1;
  };

  std::variant<Fixed, UniformDepth> spec = Fixed{};

  int sample(Rng& rng, int n_candidates) const {
    int depth;
    if (const auto* f = std::get_if<Fixed>(&spec)) {
      depth = f->depth;
    } else {
      const auto& u = std::get<UniformDepth>(spec);
      depth = static_cast<int>(rng.next_int(u.lo, u.hi));
    }
    return std::max(1, std::min(depth, n_candidates));
  }
};

struct ClassificationAllocation {
  double threshold = 0.5;       // treat iff score >= threshold
  int candidates_per_query = 1;  // scored candidates per job
};

struct RankingAllocation {
  int candidates_per_query = 1;
  ScrollDepth scroll_depth{ScrollDepth::UniformDepth{1, 1}};
};

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct GroupSpec {
  std::string label;
  double share = 0.0;  // population share; shares sum to 1
  QualificationDistribution qualification;
};

struct ScenarioConfig {
  std::vector<GroupSpec> groups;
  ScorerSpec scorer;
  ViewerSpec viewer;
  std::variant<ClassificationAllocation, RankingAllocation> allocation =
      ClassificationAllocation{};
  std::int64_t n_queries = 1;
  std::uint64_t seed = 0;
};

inline void validate_scenario(const ScenarioConfig& cfg) {
  const auto fail = [](const std::string& msg) { throw ConfigError("scenario: " + msg); };

  if (cfg.groups.empty()) fail("at least one group is required");
  double share_sum = 0.0;
  std::set<std::string> labels;
  for (const auto& g : cfg.groups) {
    if (g.label.empty()) fail("group labels must be nonempty");
    if (!labels.insert(g.label).second) fail("duplicate group label '" + g.label + "'");
    if (!(std::isfinite(g.share) && g.share > 0.0)) fail("group shares must be positive");
    share_sum += g.share;
    if (const auto* d = std::get_if<QualificationDistribution::Discrete>(
            &g.qualification.spec)) {
      if (d->mass.empty()) fail("discrete qualification needs at least one mass point");
      for (const auto& [q, w] : d->mass) {
        if (!detail::in_unit_interval(q)) fail("discrete qualification values must lie in [0, 1]");
        if (!(std::isfinite(w) && w > 0.0)) fail("discrete masses must be positive and finite");
      }
    } else if (const auto* b = std::get_if<QualificationDistribution::Beta>(
                   &g.qualification.spec)) {
      if (!(b->shape1 > 0.0 && b->shape2 > 0.0 && std::isfinite(b->shape1) &&
            std::isfinite(b->shape2)))
        fail("beta shapes must be positive and finite");
    } else {
      const auto& u = std::get<QualificationDistribution::Uniform>(g.qualification.spec);
      if (!(0.0 <= u.lo && u.lo <= u.hi && u.hi <= 1.0))
        fail("uniform qualification support must satisfy 0 <= lo <= hi <= 1");
    }
  }
  if (std::fabs(share_sum - 1.0) > 1e-9) fail("group shares must sum to 1");

  if (const auto* inv = std::get_if<ScorerSpec::InvertedForGroup>(&cfg.scorer.spec)) {
    if (!labels.count(inv->group)) fail("inverted_for_group names unknown group '" + inv->group + "'");
  } else if (const auto* gs = std::get_if<ScorerSpec::GroupShift>(&cfg.scorer.spec)) {
    for (const auto& [label, delta] : gs->deltas) {
      if (!labels.count(label)) fail("group_shift names unknown group '" + label + "'");
      if (!std::isfinite(delta)) fail("group_shift deltas must be finite");
    }
  } else if (const auto* n = std::get_if<ScorerSpec::NoisyCalibrated>(&cfg.scorer.spec)) {
    if (!(std::isfinite(n->sigma) && n->sigma >= 0.0)) fail("noise sigma must be non-negative");
  }

  if (const auto* t = std::get_if<ViewerSpec::ThresholdQ>(&cfg.viewer.spec)) {
    if (!detail::in_unit_interval(t->tau)) fail("viewer threshold must lie in [0, 1]");
  } else if (const auto* tl = std::get_if<ViewerSpec::ThreeLevel>(&cfg.viewer.spec)) {
    if (!(tl->alpha > 0.0 && tl->alpha < 1.0)) fail("three_level alpha must lie in (0, 1)");
  }

  if (const auto* c = std::get_if<ClassificationAllocation>(&cfg.allocation)) {
    if (!detail::in_unit_interval(c->threshold)) fail("allocation threshold must lie in [0, 1]");
    if (c->candidates_per_query < 1) fail("candidates_per_query must be >= 1");
  } else {
    const auto& r = std::get<RankingAllocation>(cfg.allocation);
    if (r.candidates_per_query < 1) fail("candidates_per_query must be >= 1");
    if (const auto* f = std::get_if<ScrollDepth::Fixed>(&r.scroll_depth.spec)) {
      if (f->depth < 1) fail("scroll depth must be >= 1");
    } else {
      const auto& u = std::get<ScrollDepth::UniformDepth>(r.scroll_depth.spec);
      if (!(1 <= u.lo && u.lo <= u.hi)) fail("scroll depth range must satisfy 1 <= lo <= hi");
    }
  }

  if (cfg.n_queries < 1) fail("n_queries must be >= 1");
}

namespace detail {

inline int sample_group(const std::vector<GroupSpec>& groups, Rng& rng) {
  double u = rng.next_double();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    u -= groups[i].share;
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(groups.size()) - 1;
}

}  // namespace detail

// Generates a synthetic marketplace dataset. Purely a function of cfg:
// identical configs (including the seed) produce bit-identical datasets.
// Each query draws from its own substream, so query order is immaterial.
inline Dataset simulate(const ScenarioConfig& cfg) {
  validate_scenario(cfg);

  Dataset d;
  d.outcome_domain = cfg.viewer.domain();
  d.objective_alpha = cfg.viewer.alpha();
  for (std::size_t i = 0; i < cfg.groups.size(); ++i)
    d.groups.push_back({cfg.groups[i].label, static_cast<int>(i)});

  const bool is_classification =
      std::holds_alternative<ClassificationAllocation>(cfg.allocation);
  if (is_classification) {
    const auto& alloc = std::get<ClassificationAllocation>(cfg.allocation);
    d.kind = DatasetKind::classification;
    d.threshold = alloc.threshold;
    d.records.reserve(static_cast<std::size_t>(cfg.n_queries) *
                      static_cast<std::size_t>(alloc.candidates_per_query));

    for (std::int64_t j = 0; j < cfg.n_queries; ++j) {
      Rng rng = substream(cfg.seed, static_cast<std::uint64_t>(j));
      const std::string query_id = "q" + std::to_string(j);
      for (int c = 0; c < alloc.candidates_per_query; ++c) {
        AuditRecord rec;
        rec.record_id = query_id + "-c" + std::to_string(c);
        rec.query_id = query_id;
        rec.group = detail::sample_group(cfg.groups, rng);
        const double q = cfg.groups[static_cast<std::size_t>(rec.group)]
                             .qualification.sample(rng);
        rec.true_qualification = q;
        rec.score = cfg.scorer.score(q, cfg.groups[static_cast<std::size_t>(rec.group)].label, rng);
        rec.treated = rec.score >= alloc.threshold;
        if (rec.treated) rec.outcome = cfg.viewer.draw(q, rng);
        d.records.push_back(std::move(rec));
      }
    }
    return d;
  }

  const auto& alloc = std::get<RankingAllocation>(cfg.allocation);
  d.kind = DatasetKind::ranking;
  d.records.reserve(static_cast<std::size_t>(cfg.n_queries) *
                    static_cast<std::size_t>(alloc.candidates_per_query));

  struct Candidate {
    int index;
    double score;
    std::uint64_t tiebreak;
  };

  for (std::int64_t j = 0; j < cfg.n_queries; ++j) {
    Rng rng = substream(cfg.seed, static_cast<std::uint64_t>(j));
    const std::string query_id = "q" + std::to_string(j);
    const std::size_t base = d.records.size();

    std::vector<Candidate> order;
    order.reserve(static_cast<std::size_t>(alloc.candidates_per_query));
    std::vector<double> quals(static_cast<std::size_t>(alloc.candidates_per_query));
    for (int c = 0; c < alloc.candidates_per_query; ++c) {
      AuditRecord rec;
      rec.record_id = query_id + "-c" + std::to_string(c);
      rec.query_id = query_id;
      rec.group = detail::sample_group(cfg.groups, rng);
      const double q = cfg.groups[static_cast<std::size_t>(rec.group)]
                           .qualification.sample(rng);
      quals[static_cast<std::size_t>(c)] = q;
      rec.true_qualification = q;
      rec.score = cfg.scorer.score(q, cfg.groups[static_cast<std::size_t>(rec.group)].label, rng);
      // Equal scores are ordered by a per-candidate random draw.
      order.push_back({c, rec.score, rng.next_u64()});
      d.records.push_back(std::move(rec));
    }

    std::sort(order.begin(), order.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.tiebreak != b.tiebreak) return a.tiebreak < b.tiebreak;
      return a.index < b.index;
    });

    const int depth = alloc.scroll_depth.sample(rng, alloc.candidates_per_query);
    for (int pos = 0; pos < depth; ++pos) {
      AuditRecord& rec = d.records[base + static_cast<std::size_t>(order[static_cast<std::size_t>(pos)].index)];
      rec.treated = true;
      rec.rank = pos + 1;
      rec.outcome = cfg.viewer.draw(
          quals[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)].index)], rng);
    }
  }
  return d;
}

}  // namespace outcome_audit
