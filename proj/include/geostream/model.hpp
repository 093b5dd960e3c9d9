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

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace geostream {

using ImageId = std::uint64_t;
using Timestamp = std::int64_t;

/// Dense id into the visual vocabulary.
struct VisualWordId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(VisualWordId, VisualWordId) = default;
};

struct WordCount {
  VisualWordId word;
  std::uint32_t tf = 0;

  friend constexpr bool operator==(const WordCount&, const WordCount&) = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Closed axis-aligned rectangle in (lat, lon) degrees.
struct GeoRect {
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;

  [[nodiscard]] bool contains(GeoPoint p) const noexcept {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }

  friend constexpr bool operator==(const GeoRect&, const GeoRect&) = default;
};

/// The space images live in. Distances are planar on raw degrees.
struct SpatialDomain {
  double min_lat = -90.0;
  double max_lat = 90.0;
  double min_lon = -180.0;
  double max_lon = 180.0;

  [[nodiscard]] GeoRect rect() const noexcept { return {min_lat, max_lat, min_lon, max_lon}; }
  [[nodiscard]] bool contains(GeoPoint p) const noexcept { return rect().contains(p); }
  /// Largest possible distance inside the domain.
  [[nodiscard]] double diagonal() const noexcept;

  /// Throws ConfigError unless both axes have positive extent.
  void validate() const;
};

/// A geo-tagged, timestamped image described by a bag of visual words.
struct GeoTemporalImage {
  ImageId id = 0;
  GeoPoint loc;
  Timestamp t_c = 0;
  /// Strictly ascending by word, every tf > 0.
  std::vector<WordCount> psi;

  /// Total term count (sum of tf).
  [[nodiscard]] std::uint64_t term_count() const noexcept;
  /// tf of `word`, 0 when absent.
  [[nodiscard]] std::uint32_t tf(VisualWordId word) const noexcept;

  friend bool operator==(const GeoTemporalImage&, const GeoTemporalImage&) = default;
};

/// Throws DataError on a malformed bag of words, DomainError when loc is outside.
void validate_image(const GeoTemporalImage& img, const SpatialDomain& domain);

struct Weights {
  double spatial = 1.0 / 3.0;
  double visual = 1.0 / 3.0;
  double temporal = 1.0 / 3.0;

  friend constexpr bool operator==(const Weights&, const Weights&) = default;
};

struct Query {
  /// Strictly ascending word ids.
  std::vector<VisualWordId> psi;
  GeoPoint loc;
  Timestamp t = 0;
  std::uint32_t k = 10;
  Weights weights;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Throws ConfigError for a bad weight triple, ArgumentError for the rest.
void validate_query(const Query& q);

/// Per-word corpus statistics over the live image set.
///
/// Besides the corpus term counts this keeps, for every word, a histogram of
/// the in-image frequencies tf/|psi| of the live images holding it, so the
/// maximum survives removals exactly.
class CorpusStats {
 public:
  void add(const GeoTemporalImage& img);
  /// Throws InvalidStateError if `img` was never added.
  void remove(const GeoTemporalImage& img);

  [[nodiscard]] std::uint64_t total_terms() const noexcept { return total_terms_; }
  [[nodiscard]] std::size_t image_count() const noexcept { return images_; }
  [[nodiscard]] std::uint64_t corpus_tf(VisualWordId word) const noexcept;
  /// Highest tf/|psi| among live images holding `word`.
  [[nodiscard]] std::optional<double> max_frequency(VisualWordId word) const noexcept;
  [[nodiscard]] std::size_t distinct_words() const noexcept;
  [[nodiscard]] std::size_t storage_bytes() const noexcept;

  friend bool operator==(const CorpusStats& a, const CorpusStats& b) noexcept;

  template <typename Range>
  static CorpusStats recompute(const Range& images) {
    CorpusStats s;
    for (const auto& img : images) s.add(img);
    return s;
  }

 private:
  struct WordEntry {
    std::uint64_t corpus_tf = 0;
    // ascending by frequency, counts > 0
    std::vector<std::pair<double, std::uint32_t>> frequencies;
  };

  std::vector<WordEntry> words_;
  std::uint64_t total_terms_ = 0;
  std::size_t images_ = 0;
};

struct ScoringConfig {
  double xi = 0.5;          ///< language-model smoothing, in [0, 1)
  double decay_base = 2.0;  ///< recency decay base, > 1
  double time_unit = 3600.0;

  void validate() const;
};

struct ScoreParams {
  ScoringConfig scoring;
  SpatialDomain domain;
  const CorpusStats* stats = nullptr;
};

/// Lower is better for every component.
struct ScoreBreakdown {
  double spatial = 0.0;
  double visual = 0.0;
  double temporal = 0.0;
  double total = 0.0;

  friend constexpr bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

/// tf/|psi| as used everywhere a frequency is stored or compared.
[[nodiscard]] inline double term_frequency(std::uint64_t tf, std::uint64_t total) noexcept {
  return static_cast<double>(tf) / static_cast<double>(total);
}

/// Euclidean distance from `p` to the closest point of `r` (0 inside).
[[nodiscard]] double min_distance(GeoPoint p, const GeoRect& r) noexcept;
[[nodiscard]] double distance(GeoPoint a, GeoPoint b) noexcept;

[[nodiscard]] double spatial_proximity(GeoPoint query, GeoPoint loc, const SpatialDomain& domain);
[[nodiscard]] double visual_weight(VisualWordId word, const GeoTemporalImage& img,
                                   const ScoreParams& params);
[[nodiscard]] double visual_relevance(const Query& q, const GeoTemporalImage& img,
                                      const ScoreParams& params);
[[nodiscard]] double temporal_recency(const Query& q, Timestamp t_c, const ScoreParams& params);
[[nodiscard]] ScoreBreakdown combined_score(const Query& q, const GeoTemporalImage& img,
                                            const ScoreParams& params);

/// Bound computed for an index node.
struct NodeBound {
  double value = 0.0;
  /// False when no image below the node can share a query word.
  bool has_query_word = false;
};

/// Query-specific scoring state, built once per query against a corpus snapshot.
///
/// Image scores and node bounds go through the same arithmetic, with node
/// maxima substituted for image values, so a bound never exceeds the score of
/// an image it covers (no rounding slack needed).
class QueryScorer {
 public:
  /// Validates `q`; the stats must outlive the scorer.
  QueryScorer(const Query& q, const ScoreParams& params);

  [[nodiscard]] const Query& query() const noexcept { return query_; }
  [[nodiscard]] const ScoreParams& params() const noexcept { return params_; }

  /// Query words present in the live corpus, ascending.
  [[nodiscard]] std::span<const VisualWordId> active_words() const noexcept { return words_; }

  [[nodiscard]] bool shares_word(const GeoTemporalImage& img) const noexcept;

  [[nodiscard]] double spatial(GeoPoint loc) const noexcept;
  [[nodiscard]] double visual(const GeoTemporalImage& img) const noexcept;
  [[nodiscard]] double temporal(Timestamp t_c) const noexcept;
  [[nodiscard]] double combine(double spatial, double visual, double temporal) const noexcept;
  [[nodiscard]] ScoreBreakdown score(const GeoTemporalImage& img) const noexcept;

  /// Lower bound over every image inside `rect` that is no newer than `t_max`
  /// and whose word frequencies do not exceed `max_freq(word)` (nullopt: word
  /// absent below the node).
  template <typename MaxFrequency>
  [[nodiscard]] NodeBound bound(const GeoRect& rect, Timestamp t_max,
                                MaxFrequency&& max_freq) const {
    bool any = false;
    const double v = visual_from([&](std::size_t, VisualWordId w) {
      const std::optional<double> f = max_freq(w);
      if (!f) return 0.0;
      any = true;
      return *f;
    });
    const double s = min_distance(query_.loc, rect) / diagonal_;
    return {combine(s, v, temporal(t_max)), any};
  }

 private:
  template <typename FreqOf>
  [[nodiscard]] double visual_from(FreqOf&& freq_of) const noexcept;

  Query query_;
  ScoreParams params_;
  std::vector<VisualWordId> words_;
  std::vector<double> floors_;
  double log_gamma_ = 0.0;
  double diagonal_ = 1.0;
  double log_decay_ = 0.0;
};

template <typename FreqOf>
double QueryScorer::visual_from(FreqOf&& freq_of) const noexcept {
  // Products of many small weights underflow; work with log sums instead.
  const double keep = 1.0 - params_.scoring.xi;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    log_sum += std::log(keep * freq_of(i, words_[i]) + floors_[i]);
  }
  return std::clamp(1.0 - std::exp(log_sum - log_gamma_), 0.0, 1.0);
}

}  // namespace geostream
