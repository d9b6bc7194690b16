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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "outcome_audit/errors.hpp"

namespace outcome_audit {

enum class CovarianceEstimator { classical, hc1 };

inline const char* to_string(CovarianceEstimator c) {
  return c == CovarianceEstimator::classical ? "classical" : "hc1";
}

// One observation of the score-bin regression: realized outcome, group
// index, and the score itself.
struct ObsRow {
  double response = 0.0;
  int group = 0;
  double score = 0.0;
};

// Design of the group-gap regression: outcome on an intercept, one dummy
// per non-reference group, and (optionally) the score as a linear control
// for within-bin score variation.
struct DesignSpec {
  int reference_group = 0;
  // (group index, term label) per dummy column, reference excluded.
  std::vector<std::pair<int, std::string>> dummies;
  bool include_score_control = true;
  CovarianceEstimator covariance = CovarianceEstimator::hc1;
};

struct TermEstimate {
  std::string term;
  double coefficient = 0.0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;

  bool operator==(const TermEstimate&) const = default;
};

struct RegressionFit {
  std::vector<TermEstimate> terms;
  std::int64_t n_observations = 0;
  double residual_variance = 0.0;
  CovarianceEstimator covariance_estimator = CovarianceEstimator::hc1;

  bool operator==(const RegressionFit&) const = default;

  const TermEstimate* find(std::string_view term) const {
    for (const auto& t : terms)
      if (t.term == term) return &t;
    return nullptr;
  }

  const TermEstimate& at(std::string_view term) const {
    const TermEstimate* t = find(term);
    if (!t) throw DataError("unknown regression term '" + std::string(term) + "'");
    return *t;
  }

  double coefficient(std::string_view term) const { return at(term).coefficient; }
};

enum class TestVerdict { reject, fail_to_reject };

inline const char* to_string(TestVerdict v) {
  return v == TestVerdict::reject ? "reject" : "fail_to_reject";
}

struct WaldResult {
  TestVerdict verdict = TestVerdict::fail_to_reject;
  double p_value = 1.0;
  double statistic = 0.0;
};

namespace detail {

// Two-sided p-value under the standard normal approximation.
inline double two_sided_normal_p(double t) {
  return std::erfc(std::fabs(t) / std::sqrt(2.0));
}

// Dense column-major matrix helpers for the small regression designs used
// here (p is the number of model terms, typically <= 6).
class OlsSolver {
 public:
  OlsSolver(std::size_t n, std::size_t p) : n_(n), p_(p), a_(n * p), x_(n * p) {}

  double& design(std::size_t i, std::size_t j) { return x_[j * n_ + i]; }

  // Factorizes, solves, and fills coefficients + covariance. Throws
  // SingularDesignError naming the unidentifiable columns.
  void solve(std::span<const double> y, const std::vector<std::string>& names,
             CovarianceEstimator cov_kind, std::vector<double>& beta,
             std::vector<double>& se, double& sigma2) {
    a_ = x_;  // factor a working copy, keep x_ for residuals and HC1
    perm_.resize(p_);
    for (std::size_t j = 0; j < p_; ++j) perm_[j] = j;
    taus_.assign(p_, 0.0);
    vs_.assign(p_, {});

    double tol = 0.0;
    for (std::size_t k = 0; k < p_; ++k) {
      // Column pivot on the remaining norms.
      std::size_t best = k;
      double best_norm2 = -1.0;
      for (std::size_t j = k; j < p_; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n_; ++i) s += col(j)[i] * col(j)[i];
        if (s > best_norm2) {
          best_norm2 = s;
          best = j;
        }
      }
      if (best != k) {
        for (std::size_t i = 0; i < n_; ++i) std::swap(col(k)[i], col(best)[i]);
        std::swap(perm_[k], perm_[best]);
      }

      const double norm = std::sqrt(std::max(0.0, best_norm2));
      if (k == 0)
        tol = std::numeric_limits<double>::epsilon() *
              static_cast<double>(std::max(n_, p_)) * std::max(norm, 1.0);
      if (norm <= tol) {
        std::vector<std::string> collinear;
        for (std::size_t j = k; j < p_; ++j) collinear.push_back(names[perm_[j]]);
        std::string msg = "singular design: cannot identify";
        for (const auto& c : collinear) msg += " '" + c + "'";
        throw SingularDesignError(msg, std::move(collinear));
      }

      // Householder reflector for column k.
      const double akk = col(k)[k];
      const double alpha = akk >= 0.0 ? -norm : norm;
      std::vector<double> v(n_ - k);
      v[0] = akk - alpha;
      for (std::size_t i = k + 1; i < n_; ++i) v[i - k] = col(k)[i];
      double vtv = 0.0;
      for (const double vi : v) vtv += vi * vi;
      const double tau = vtv > 0.0 ? 2.0 / vtv : 0.0;
      col(k)[k] = alpha;
      for (std::size_t i = k + 1; i < n_; ++i) col(k)[i] = 0.0;
      for (std::size_t j = k + 1; j < p_; ++j) {
        double w = 0.0;
        for (std::size_t i = k; i < n_; ++i) w += v[i - k] * col(j)[i];
        w *= tau;
        for (std::size_t i = k; i < n_; ++i) col(j)[i] -= w * v[i - k];
      }
      vs_[k] = std::move(v);
      taus_[k] = tau;
    }

    // Q'y, then back-substitution over R.
    std::vector<double> qty(y.begin(), y.end());
    for (std::size_t k = 0; k < p_; ++k) {
      double w = 0.0;
      for (std::size_t i = k; i < n_; ++i) w += vs_[k][i - k] * qty[i];
      w *= taus_[k];
      for (std::size_t i = k; i < n_; ++i) qty[i] -= w * vs_[k][i - k];
    }
    std::vector<double> bp(p_);
    for (std::size_t k = p_; k-- > 0;) {
      double s = qty[k];
      for (std::size_t j = k + 1; j < p_; ++j) s -= col(j)[k] * bp[j];
      bp[k] = s / col(k)[k];
    }
    beta.assign(p_, 0.0);
    for (std::size_t k = 0; k < p_; ++k) beta[perm_[k]] = bp[k];

    // Residuals against the pristine design.
    std::vector<double> resid(n_);
    double rss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double fit = 0.0;
      for (std::size_t j = 0; j < p_; ++j) fit += x_[j * n_ + i] * beta[j];
      resid[i] = y[i] - fit;
      rss += resid[i] * resid[i];
    }
    sigma2 = rss / static_cast<double>(n_ - p_);

    // (X'X)^-1 = P Rinv Rinv' P'.
    std::vector<double> rinv(p_ * p_, 0.0);  // upper triangular, column-major p x p
    for (std::size_t j = p_; j-- > 0;) {
      rinv[j * p_ + j] = 1.0 / col(j)[j];
      for (std::size_t i = j; i-- > 0;) {
        double s = 0.0;
        for (std::size_t k = i + 1; k <= j; ++k) s += col(k)[i] * rinv[j * p_ + k];
        rinv[j * p_ + i] = -s / col(i)[i];
      }
    }
    std::vector<double> xtx_inv(p_ * p_, 0.0);  // unpivoted
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < p_; ++j) {
        double s = 0.0;
        for (std::size_t k = std::max(i, j); k < p_; ++k)
          s += rinv[k * p_ + i] * rinv[k * p_ + j];
        xtx_inv[perm_[i] * p_ + perm_[j]] = s;
      }

    std::vector<double> cov(p_ * p_, 0.0);
    if (cov_kind == CovarianceEstimator::classical) {
      for (std::size_t i = 0; i < p_ * p_; ++i) cov[i] = sigma2 * xtx_inv[i];
    } else {
      // HC1 sandwich: (X'X)^-1 [sum e_i^2 x_i x_i'] (X'X)^-1 * n/(n-p).
      std::vector<double> meat(p_ * p_, 0.0);
      for (std::size_t i = 0; i < n_; ++i) {
        const double e2 = resid[i] * resid[i];
        for (std::size_t a = 0; a < p_; ++a) {
          const double xa = x_[a * n_ + i] * e2;
          for (std::size_t b = 0; b < p_; ++b) meat[a * p_ + b] += xa * x_[b * n_ + i];
        }
      }
      const double scale = static_cast<double>(n_) / static_cast<double>(n_ - p_);
      std::vector<double> tmp(p_ * p_, 0.0);
      for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j < p_; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < p_; ++k) s += xtx_inv[i * p_ + k] * meat[k * p_ + j];
          tmp[i * p_ + j] = s;
        }
      for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j < p_; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < p_; ++k) s += tmp[i * p_ + k] * xtx_inv[k * p_ + j];
          cov[i * p_ + j] = scale * s;
        }
    }

    se.assign(p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j)
      se[j] = std::sqrt(std::max(0.0, cov[j * p_ + j]));
  }

 private:
  double* col(std::size_t j) { return a_.data() + j * n_; }

  std::size_t n_, p_;
  std::vector<double> a_;   // factored copy
  std::vector<double> x_;   // pristine design
  std::vector<std::size_t> perm_;
  std::vector<double> taus_;
  std::vector<std::vector<double>> vs_;
};

}  // namespace detail

// Least-squares fit of the group-gap specification. Coefficients solve the
// normal equations (residuals orthogonal to every design column); standard
// errors are classical or HC1 per spec.covariance; p-values use the normal
// approximation, which is appropriate for the bin sizes audits run at.
inline RegressionFit fit_ols(std::span<const ObsRow> rows, const DesignSpec& spec) {
  const std::size_t n = rows.size();
  const std::size_t p = 1 + spec.dummies.size() + (spec.include_score_control ? 1 : 0);
  if (n <= p)
    throw DataError("fit_ols: " + std::to_string(n) + " observations cannot identify " +
                    std::to_string(p) + " parameters");
  for (const auto& [g, label] : spec.dummies)
    if (g == spec.reference_group)
      throw ConfigError("fit_ols: dummy '" + label + "' duplicates the reference group");

  std::vector<std::string> names;
  names.reserve(p);
  names.emplace_back("intercept");
  for (const auto& [g, label] : spec.dummies) names.push_back("group:" + label);
  if (spec.include_score_control) names.emplace_back("score");

  detail::OlsSolver solver(n, p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rows[i].response;
    solver.design(i, 0) = 1.0;
    for (std::size_t dj = 0; dj < spec.dummies.size(); ++dj)
      solver.design(i, 1 + dj) = rows[i].group == spec.dummies[dj].first ? 1.0 : 0.0;
    if (spec.include_score_control) solver.design(i, p - 1) = rows[i].score;
  }

  std::vector<double> beta, se;
  double sigma2 = 0.0;
  solver.solve(y, names, spec.covariance, beta, se, sigma2);

  RegressionFit fit;
  fit.n_observations = static_cast<std::int64_t>(n);
  fit.residual_variance = sigma2;
  fit.covariance_estimator = spec.covariance;
  for (std::size_t j = 0; j < p; ++j) {
    TermEstimate t;
    t.term = names[j];
    t.coefficient = beta[j];
    t.standard_error = se[j];
    if (se[j] > 0.0) {
      t.t_statistic = beta[j] / se[j];
      t.p_value = detail::two_sided_normal_p(t.t_statistic);
    } else if (beta[j] == 0.0) {
      t.t_statistic = 0.0;
      t.p_value = 1.0;  // the null is exactly true
    } else {
      t.t_statistic = beta[j] > 0.0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
      t.p_value = 0.0;
    }
    fit.terms.push_back(std::move(t));
  }
  return fit;
}

// Two-sided Wald test of H0: coefficient == 0. Rejects iff p < level
// (strictly; a statistic exactly at the critical value fails to reject).
inline WaldResult wald_test(const RegressionFit& fit, std::string_view term,
                            double level) {
  const TermEstimate& t = fit.at(term);
  WaldResult r;
  r.statistic = t.t_statistic;
  r.p_value = t.p_value;
  r.verdict = t.p_value < level ? TestVerdict::reject : TestVerdict::fail_to_reject;
  return r;
}

}  // namespace outcome_audit
