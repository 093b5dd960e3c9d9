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
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "geostream/engine.hpp"
#include "geostream/model.hpp"

namespace geostream {

struct IfaConfig {
  SpatialDomain domain;
  ScoringConfig scoring;
};

/// Inverted File Append: one posting list per visual word, kept in
/// ascending (timestamp, id) order so stream arrivals are plain appends.
/// Queries have no early termination and score every candidate.
class IfaIndex {
 public:
  struct Posting {
    Timestamp t_c;
    ImageId id;
    const GeoTemporalImage* image;
  };

  explicit IfaIndex(IfaConfig cfg);

  IfaIndex(const IfaIndex&) = delete;
  IfaIndex& operator=(const IfaIndex&) = delete;

  /// Throws DataError on a duplicate id, DomainError outside the domain.
  void insert(GeoTemporalImage img);
  /// Removes every image with t_c < cutoff; returns how many were removed.
  std::size_t expire(Timestamp cutoff);

  [[nodiscard]] SearchResult search(const Query& q) const;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] CorpusStats stats() const;
  [[nodiscard]] std::vector<GeoTemporalImage> live_images() const;
  /// Copy of the posting list of `word` (empty when the word is unknown).
  [[nodiscard]] std::vector<Posting> posting_list(VisualWordId word) const;
  [[nodiscard]] std::size_t list_count() const;
  [[nodiscard]] std::size_t storage_bytes() const;

 private:
  IfaConfig cfg_;
  absl::flat_hash_map<std::uint32_t, std::deque<Posting>> lists_;
  std::unordered_map<ImageId, GeoTemporalImage> store_;
  std::deque<std::pair<Timestamp, ImageId>> arrival_;  // ascending
  CorpusStats stats_;
  mutable std::shared_mutex mutex_;
};

}  // namespace geostream
