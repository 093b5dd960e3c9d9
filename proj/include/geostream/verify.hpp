/*
 * Copyright 2026 The geostream Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "geostream/model.hpp"
#include "geostream/stream_index.hpp"

namespace geostream {

struct VerifyConfig {
  std::uint64_t seed = 1;
  std::size_t instances = 1000;      ///< oracle-equivalence instances
  std::size_t dominance_pairs = 200; ///< (index, query) pairs per tree index
  std::size_t max_images = 500;
  std::size_t max_query_words = 20;
  std::vector<IndexKind> indexes{IndexKind::hiq, IndexKind::ifa, IndexKind::stvii};
  SpatialDomain domain;
  ScoringConfig scoring;
  double tolerance = 1e-9;
};

struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  [[nodiscard]] bool passed() const noexcept { return cases > 0 && failures == 0; }
};

/// Random streams with random window settings; every index must return the
/// brute-force ranking over its live window.
[[nodiscard]] SuiteReport verify_oracle_equivalence(const VerifyConfig& cfg);
/// Every node the best-first loop visits must bound each image below it.
[[nodiscard]] SuiteReport verify_dominance(const VerifyConfig& cfg);

}  // namespace geostream
