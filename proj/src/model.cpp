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

#include "geostream/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geostream/errors.hpp"

namespace geostream {

double SpatialDomain::diagonal() const noexcept {
  const double dlat = max_lat - min_lat;
  const double dlon = max_lon - min_lon;
  return std::sqrt(dlat * dlat + dlon * dlon);
}

void SpatialDomain::validate() const {
  if (!(max_lat > min_lat) || !(max_lon > min_lon)) {
    throw ConfigError("spatial domain must have positive extent on both axes");
  }
}

std::uint64_t GeoTemporalImage::term_count() const noexcept {
  std::uint64_t n = 0;
  for (const auto& wc : psi) n += wc.tf;
  return n;
}

std::uint32_t GeoTemporalImage::tf(VisualWordId word) const noexcept {
  auto it = std::lower_bound(psi.begin(), psi.end(), word,
                             [](const WordCount& wc, VisualWordId w) { return wc.word < w; });
  return it != psi.end() && it->word == word ? it->tf : 0;
}

void validate_image(const GeoTemporalImage& img, const SpatialDomain& domain) {
  if (img.psi.empty()) {
    throw DataError("image " + std::to_string(img.id) + " has no visual words");
  }
  for (std::size_t i = 0; i < img.psi.size(); ++i) {
    if (img.psi[i].tf == 0) {
      throw DataError("image " + std::to_string(img.id) + " has a zero term count");
    }
    if (i > 0 && !(img.psi[i - 1].word < img.psi[i].word)) {
      throw DataError("image " + std::to_string(img.id) + " words are not strictly ascending");
    }
  }
  if (!domain.contains(img.loc)) {
    throw DomainError("image " + std::to_string(img.id) + " lies outside the spatial domain");
  }
}

void validate_query(const Query& q) {
  const Weights& w = q.weights;
  if (!(w.spatial > 0.0) || !(w.visual > 0.0) || !(w.temporal > 0.0)) {
    throw ConfigError("query weights must all be positive");
  }
  if (std::abs(w.spatial + w.visual + w.temporal - 1.0) > 1e-12) {
    throw ConfigError("query weights must sum to 1");
  }
  if (q.k == 0) throw ArgumentError("k must be at least 1");
  if (q.psi.empty()) throw ArgumentError("query has no visual words");
  for (std::size_t i = 1; i < q.psi.size(); ++i) {
    if (!(q.psi[i - 1] < q.psi[i])) {
      throw ArgumentError("query words must be strictly ascending");
    }
  }
}

// CorpusStats ----------------------------------------------------------------

void CorpusStats::add(const GeoTemporalImage& img) {
  const std::uint64_t len = img.term_count();
  for (const auto& wc : img.psi) {
    if (wc.word.value >= words_.size()) words_.resize(std::size_t{wc.word.value} + 1);
    WordEntry& e = words_[wc.word.value];
    e.corpus_tf += wc.tf;
    const double f = term_frequency(wc.tf, len);
    auto it = std::lower_bound(e.frequencies.begin(), e.frequencies.end(), f,
                               [](const auto& p, double v) { return p.first < v; });
    if (it != e.frequencies.end() && it->first == f) {
      ++it->second;
    } else {
      e.frequencies.insert(it, {f, 1});
    }
  }
  total_terms_ += len;
  ++images_;
}

void CorpusStats::remove(const GeoTemporalImage& img) {
  const std::uint64_t len = img.term_count();
  if (images_ == 0 || len > total_terms_) {
    throw InvalidStateError("removing an image that is not in the corpus");
  }
  for (const auto& wc : img.psi) {
    if (wc.word.value >= words_.size() || words_[wc.word.value].corpus_tf < wc.tf) {
      throw InvalidStateError("removing an image that is not in the corpus");
    }
    WordEntry& e = words_[wc.word.value];
    const double f = term_frequency(wc.tf, len);
    auto it = std::lower_bound(e.frequencies.begin(), e.frequencies.end(), f,
                               [](const auto& p, double v) { return p.first < v; });
    if (it == e.frequencies.end() || it->first != f) {
      throw InvalidStateError("removing an image that is not in the corpus");
    }
    e.corpus_tf -= wc.tf;
    if (--it->second == 0) e.frequencies.erase(it);
  }
  total_terms_ -= len;
  --images_;
}

std::uint64_t CorpusStats::corpus_tf(VisualWordId word) const noexcept {
  return word.value < words_.size() ? words_[word.value].corpus_tf : 0;
}

std::optional<double> CorpusStats::max_frequency(VisualWordId word) const noexcept {
  if (word.value >= words_.size() || words_[word.value].frequencies.empty()) return std::nullopt;
  return words_[word.value].frequencies.back().first;
}

std::size_t CorpusStats::distinct_words() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      words_.begin(), words_.end(), [](const WordEntry& e) { return e.corpus_tf > 0; }));
}

std::size_t CorpusStats::storage_bytes() const noexcept {
  std::size_t bytes = sizeof(CorpusStats) + words_.capacity() * sizeof(WordEntry);
  for (const auto& e : words_) bytes += e.frequencies.capacity() * sizeof(e.frequencies[0]);
  return bytes;
}

bool operator==(const CorpusStats& a, const CorpusStats& b) noexcept {
  if (a.total_terms_ != b.total_terms_ || a.images_ != b.images_) return false;
  const std::size_t n = std::max(a.words_.size(), b.words_.size());
  static const CorpusStats::WordEntry empty{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = i < a.words_.size() ? a.words_[i] : empty;
    const auto& y = i < b.words_.size() ? b.words_[i] : empty;
    if (x.corpus_tf != y.corpus_tf || x.frequencies != y.frequencies) return false;
  }
  return true;
}

void ScoringConfig::validate() const {
  if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError("xi must lie in [0, 1)");
  if (!(decay_base > 1.0)) throw ConfigError("decay base must exceed 1");
  if (!(time_unit > 0.0)) throw ConfigError("time unit must be positive");
}

// Scoring --------------------------------------------------------------------

double distance(GeoPoint a, GeoPoint b) noexcept {
  const double dlat = a.lat - b.lat;
  const double dlon = a.lon - b.lon;
  return std::sqrt(dlat * dlat + dlon * dlon);
}

double min_distance(GeoPoint p, const GeoRect& r) noexcept {
  // Same subtraction form as distance() so the bound never exceeds it.
  double dlat = 0.0;
  if (p.lat < r.min_lat) dlat = p.lat - r.min_lat; else if (p.lat > r.max_lat) dlat = p.lat - r.max_lat;
  double dlon = 0.0;
  if (p.lon < r.min_lon) dlon = p.lon - r.min_lon; else if (p.lon > r.max_lon) dlon = p.lon - r.max_lon;
  return std::sqrt(dlat * dlat + dlon * dlon);
}

double spatial_proximity(GeoPoint query, GeoPoint loc, const SpatialDomain& domain) {
  if (!domain.contains(query) || !domain.contains(loc)) {
    throw DomainError("spatial proximity requested for a point outside the domain");
  }
  return distance(query, loc) / domain.diagonal();
}

namespace {

double smoothing_floor(VisualWordId word, const ScoreParams& params) {
  return params.scoring.xi * term_frequency(params.stats->corpus_tf(word), params.stats->total_terms());
}

const CorpusStats& require_stats(const ScoreParams& params) {
  if (params.stats == nullptr || params.stats->total_terms() == 0) {
    throw InvalidStateError("scoring needs a non-empty corpus");
  }
  return *params.stats;
}

}  // namespace

double visual_weight(VisualWordId word, const GeoTemporalImage& img, const ScoreParams& params) {
  require_stats(params);
  const std::uint64_t len = img.term_count();
  if (len == 0) throw InvalidStateError("image has no terms");
  return (1.0 - params.scoring.xi) * term_frequency(img.tf(word), len) + smoothing_floor(word, params);
}

double visual_relevance(const Query& q, const GeoTemporalImage& img, const ScoreParams& params) {
  return QueryScorer(q, params).visual(img);
}

double temporal_recency(const Query& q, Timestamp t_c, const ScoreParams& params) {
  const Timestamp age = std::max<Timestamp>(q.t - t_c, 0);
  return -std::expm1(-(static_cast<double>(age) / params.scoring.time_unit) *
                     std::log(params.scoring.decay_base));
}

ScoreBreakdown combined_score(const Query& q, const GeoTemporalImage& img, const ScoreParams& params) {
  return QueryScorer(q, params).score(img);
}

// QueryScorer ----------------------------------------------------------------

QueryScorer::QueryScorer(const Query& q, const ScoreParams& params) : query_(q), params_(params) {
  validate_query(q);
  params.scoring.validate();
  params.domain.validate();
  const CorpusStats& stats = require_stats(params);
  diagonal_ = params.domain.diagonal();
  log_decay_ = std::log(params.scoring.decay_base);
  const double keep = 1.0 - params.scoring.xi;
  words_.reserve(q.psi.size());
  floors_.reserve(q.psi.size());
  // A word absent from the live corpus contributes the same factor to every
  // image and to the normalizer, so it drops out of the ratio.
  for (VisualWordId w : q.psi) {
    const std::optional<double> max_f = stats.max_frequency(w);
    if (!max_f) continue;
    const double floor = smoothing_floor(w, params);
    words_.push_back(w);
    floors_.push_back(floor);
    log_gamma_ += std::log(keep * *max_f + floor);
  }
}

bool QueryScorer::shares_word(const GeoTemporalImage& img) const noexcept {
  auto a = query_.psi.begin();
  auto b = img.psi.begin();
  while (a != query_.psi.end() && b != img.psi.end()) {
    if (*a < b->word) {
      ++a;
    } else if (b->word < *a) {
      ++b;
    } else {
      return true;
    }
  }
  return false;
}

double QueryScorer::spatial(GeoPoint loc) const noexcept { return distance(query_.loc, loc) / diagonal_; }

double QueryScorer::visual(const GeoTemporalImage& img) const noexcept {
  const double len = static_cast<double>(img.term_count());
  auto it = img.psi.begin();
  return visual_from([&](std::size_t, VisualWordId w) {
    while (it != img.psi.end() && it->word < w) ++it;
    if (it == img.psi.end() || it->word != w) return 0.0;
    return static_cast<double>(it->tf) / len;
  });
}

double QueryScorer::temporal(Timestamp t_c) const noexcept {
  const Timestamp age = std::max<Timestamp>(query_.t - t_c, 0);
  return -std::expm1(-(static_cast<double>(age) / params_.scoring.time_unit) * log_decay_);
}

double QueryScorer::combine(double spatial, double visual, double temporal) const noexcept {
  const Weights& w = query_.weights;
  return w.spatial * spatial + w.visual * visual + w.temporal * temporal;
}

ScoreBreakdown QueryScorer::score(const GeoTemporalImage& img) const noexcept {
  ScoreBreakdown b;
  b.spatial = spatial(img.loc);
  b.visual = visual(img);
  b.temporal = temporal(img.t_c);
  b.total = combine(b.spatial, b.visual, b.temporal);
  return b;
}

}  // namespace geostream
