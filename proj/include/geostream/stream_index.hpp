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
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "geostream/engine.hpp"
#include "geostream/hiq.hpp"
#include "geostream/ifa.hpp"
#include "geostream/model.hpp"
#include "geostream/stvii.hpp"

namespace geostream {

enum class IndexKind { hiq, ifa, stvii };

inline constexpr IndexKind kAllIndexes[] = {IndexKind::hiq, IndexKind::ifa, IndexKind::stvii};

[[nodiscard]] std::string_view to_string(IndexKind kind) noexcept;
[[nodiscard]] std::optional<IndexKind> parse_index_kind(std::string_view name) noexcept;

/// Settings shared by every index kind. The STVII time normalization
/// spans the whole window.
struct IndexOptions {
  ScoringConfig scoring;
  SpatialDomain domain;
  Timestamp segment_span = 3600;
  std::size_t window = 24;
  std::size_t capacity = 100;
  std::size_t max_depth = 16;

  [[nodiscard]] HiqConfig hiq() const;
  [[nodiscard]] IfaConfig ifa() const;
  [[nodiscard]] StviiConfig stvii() const;
  void validate() const;
};

/// Tracks the sliding window the way HIQ segments it: the head is the slice
/// holding the newest arrival and at most `window` slices stay live.
class WindowClock {
 public:
  WindowClock(Timestamp span, std::size_t window) : span_(span), window_(window) {}

  /// Returns true when the head slice moved forward.
  bool advance(Timestamp now);
  /// Moves the head one slice past the current one even if `now` is inside it.
  void roll(Timestamp now);
  [[nodiscard]] std::optional<Timestamp> start() const;
  [[nodiscard]] std::optional<Timestamp> head_end() const;
  [[nodiscard]] Timestamp align(Timestamp t) const noexcept;

 private:
  void move_head(Timestamp head);

  Timestamp span_;
  std::size_t window_;
  std::optional<Timestamp> head_;
  Timestamp first_ = 0;
};

/// One of the three indexes behind a single streaming interface. All kinds
/// keep exactly the same live window, so their answers agree.
class StreamIndex {
 public:
  StreamIndex(IndexKind kind, const IndexOptions& options);

  [[nodiscard]] IndexKind kind() const noexcept { return kind_; }

  /// Throws LateArrivalError for arrivals older than the window.
  void insert(GeoTemporalImage img);
  /// Rolls the window forward so it covers `now`; returns images expired.
  std::size_t advance(Timestamp now);
  /// Opens a new head slice unconditionally; returns images expired.
  std::size_t roll(Timestamp now);

  [[nodiscard]] SearchResult search(const Query& q) const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t node_count() const;
  [[nodiscard]] std::size_t storage_bytes() const;
  [[nodiscard]] CorpusStats stats() const;
  [[nodiscard]] std::vector<GeoTemporalImage> live_images() const;
  [[nodiscard]] std::optional<Timestamp> window_start() const { return clock_.start(); }

  [[nodiscard]] const HiqIndex* hiq() const noexcept;
  [[nodiscard]] const IfaIndex* ifa() const noexcept;
  [[nodiscard]] const StviiIndex* stvii() const noexcept;

 private:
  std::size_t expire_baseline();

  IndexKind kind_;
  WindowClock clock_;
  std::variant<std::unique_ptr<HiqIndex>, std::unique_ptr<IfaIndex>, std::unique_ptr<StviiIndex>> impl_;
};

}  // namespace geostream
