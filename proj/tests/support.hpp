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

// Shared helpers for the test suites: random instances and a scoring
// reference that evaluates the ranking formulas directly (plain products, no
// incremental statistics) so it stays independent of the library's scorer.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "geostream/engine.hpp"
#include "geostream/model.hpp"

namespace geostream::testing {

inline GeoTemporalImage random_image(std::mt19937_64& rng, ImageId id, const SpatialDomain& d,
                                     std::uint32_t vocab, Timestamp t_lo, Timestamp t_hi,
                                     std::size_t max_words = 6) {
  GeoTemporalImage img;
  img.id = id;
  img.loc.lat = std::uniform_real_distribution<double>(d.min_lat, d.max_lat)(rng);
  img.loc.lon = std::uniform_real_distribution<double>(d.min_lon, d.max_lon)(rng);
  // a few exact-boundary coordinates exercise quadrant tie rules
  if (rng() % 16 == 0) img.loc.lat = d.min_lat + (d.max_lat - d.min_lat) / 2;
  if (rng() % 16 == 0) img.loc.lon = d.max_lon;
  img.t_c = std::uniform_int_distribution<Timestamp>(t_lo, t_hi)(rng);
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_words)(rng);
  std::map<std::uint32_t, std::uint32_t> bag;
  for (std::size_t i = 0; i < n; ++i) {
    bag[std::uniform_int_distribution<std::uint32_t>(0, vocab - 1)(rng)] +=
        std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
  }
  for (const auto& [w, tf] : bag) img.psi.push_back({VisualWordId{w}, tf});
  return img;
}

inline Weights random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  const double s = a + b + c;
  Weights w{a / s, b / s, 0.0};
  w.temporal = 1.0 - w.spatial - w.visual;
  return w;
}

inline Query random_query(std::mt19937_64& rng, const SpatialDomain& d, std::uint32_t vocab,
                          std::size_t max_words, Timestamp t, std::uint32_t k) {
  Query q;
  q.loc.lat = std::uniform_real_distribution<double>(d.min_lat, d.max_lat)(rng);
  q.loc.lon = std::uniform_real_distribution<double>(d.min_lon, d.max_lon)(rng);
  q.t = t;
  q.k = k;
  q.weights = random_weights(rng);
  std::set<std::uint32_t> words;
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_words)(rng);
  while (words.size() < n) words.insert(std::uniform_int_distribution<std::uint32_t>(0, vocab - 1)(rng));
  for (auto w : words) q.psi.push_back(VisualWordId{w});
  return q;
}

/// Direct evaluation of the ranking function over an explicit live set.
struct ReferenceScorer {
  ScoringConfig scoring;
  SpatialDomain domain;
  std::vector<GeoTemporalImage> live;

  [[nodiscard]] double weight(std::uint32_t word, const GeoTemporalImage& img) const {
    double corpus_tf = 0, total = 0;
    for (const auto& o : live) {
      for (const auto& wc : o.psi) {
        total += wc.tf;
        if (wc.word.value == word) corpus_tf += wc.tf;
      }
    }
    double tf = 0, len = 0;
    for (const auto& wc : img.psi) {
      len += wc.tf;
      if (wc.word.value == word) tf = wc.tf;
    }
    return (1 - scoring.xi) * tf / len + scoring.xi * corpus_tf / total;
  }

  [[nodiscard]] bool in_corpus(std::uint32_t word) const {
    for (const auto& o : live) {
      for (const auto& wc : o.psi) {
        if (wc.word.value == word) return true;
      }
    }
    return false;
  }

  [[nodiscard]] double visual(const Query& q, const GeoTemporalImage& img) const {
    double num = 1, den = 1;
    for (VisualWordId v : q.psi) {
      if (!in_corpus(v.value)) continue;
      double best = 0;
      for (const auto& o : live) best = std::max(best, weight(v.value, o));
      num *= weight(v.value, img);
      den *= best;
    }
    return std::clamp(1 - num / den, 0.0, 1.0);
  }

  [[nodiscard]] double spatial(const Query& q, const GeoTemporalImage& img) const {
    const double dmax = std::hypot(domain.max_lat - domain.min_lat, domain.max_lon - domain.min_lon);
    return std::hypot(q.loc.lat - img.loc.lat, q.loc.lon - img.loc.lon) / dmax;
  }

  [[nodiscard]] double temporal(const Query& q, const GeoTemporalImage& img) const {
    const double age = std::max<double>(static_cast<double>(q.t - img.t_c), 0.0);
    return 1 - std::pow(scoring.decay_base, -age / scoring.time_unit);
  }

  [[nodiscard]] double total(const Query& q, const GeoTemporalImage& img) const {
    return q.weights.spatial * spatial(q, img) + q.weights.visual * visual(q, img) +
           q.weights.temporal * temporal(q, img);
  }
};

inline std::vector<ImageId> ids_of(const std::vector<ResultEntry>& rs) {
  std::vector<ImageId> ids;
  for (const auto& r : rs) ids.push_back(r.id);
  return ids;
}

/// Same ids in the same order, totals within `tol`.
inline bool same_results(const std::vector<ResultEntry>& a, const std::vector<ResultEntry>& b,
                         double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || std::abs(a[i].score.total - b[i].score.total) > tol) return false;
  }
  return true;
}

}  // namespace geostream::testing
