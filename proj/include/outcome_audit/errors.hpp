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

#include <stdexcept>
#include <string>
#include <vector>

namespace outcome_audit {

// Base of all toolkit errors. CLI maps ConfigError to exit code 2 and
// every other Error (data problems, degenerate designs) to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration: malformed config file, unknown keys, bad
// scenario parameters, missing subcommand inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid or degenerate data: invariant violations on ingest, datasets
// that cannot support the requested analysis.
class DataError : public Error {
 public:
  using Error::Error;
};

// A regression design matrix is rank deficient. Carries the names of the
// columns that could not be identified (e.g. a group dummy that is zero
// everywhere because the group is absent from the score bin).
class SingularDesignError : public DataError {
 public:
  SingularDesignError(const std::string& message,
                      std::vector<std::string> collinear)
      : DataError(message), collinear_terms(std::move(collinear)) {}

  std::vector<std::string> collinear_terms;
};

}  // namespace outcome_audit
