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

#include "geostream/engine.hpp"

namespace geostream {

std::vector<ResultEntry> brute_force_oracle(const Query& q, std::span<const GeoTemporalImage> images,
                                            const ScoreParams& params) {
  validate_query(q);
  std::vector<ResultEntry> all;
  if (images.empty()) return all;
  const QueryScorer scorer(q, params);
  for (const auto& img : images) {
    if (scorer.shares_word(img)) all.push_back({img.id, scorer.score(img)});
  }
  std::sort(all.begin(), all.end(), ranks_before);
  if (all.size() > q.k) all.resize(q.k);
  return all;
}

}  // namespace geostream
