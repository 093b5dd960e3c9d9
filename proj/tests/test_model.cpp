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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "geostream/errors.hpp"
#include "geostream/model.hpp"
#include "support.hpp"

using namespace geostream;

namespace {

GeoTemporalImage make_image(ImageId id, GeoPoint loc, Timestamp t, std::vector<WordCount> psi) {
  return {id, loc, t, std::move(psi)};
}

WordCount wc(std::uint32_t w, std::uint32_t tf) { return {VisualWordId{w}, tf}; }

const SpatialDomain kSquare{0, 100, 0, 100};

}  // namespace

TEST_CASE("spatial proximity") {
  CHECK(spatial_proximity({0, 0}, {0, 0}, kSquare) == 0.0);
  CHECK(spatial_proximity({0, 0}, {100, 100}, kSquare) == doctest::Approx(1.0).epsilon(1e-15));
  // 3-4-5 triangle over the diagonal of the square
  const double expected = std::hypot(3.0, 4.0) / std::hypot(100.0, 100.0);
  CHECK(expected == doctest::Approx(0.0353553).epsilon(1e-6));
  CHECK(spatial_proximity({0, 0}, {3, 4}, kSquare) == doctest::Approx(expected).epsilon(1e-15));
  CHECK_THROWS_AS((void)spatial_proximity({0, 0}, {101, 4}, kSquare), DomainError);
  CHECK_THROWS_AS((void)spatial_proximity({-1, 0}, {1, 4}, kSquare), DomainError);
}

TEST_CASE("min distance to a rectangle") {
  const GeoRect r{10, 20, 10, 20};
  CHECK(min_distance({15, 15}, r) == 0.0);
  CHECK(min_distance({10, 20}, r) == 0.0);
  CHECK(min_distance({5, 15}, r) == 5.0);
  CHECK(min_distance({23, 24}, r) == 5.0);
}

TEST_CASE("visual weight") {
  CorpusStats stats;
  // word 7: corpus tf 100 out of 1000 terms
  const auto a = make_image(1, {1, 1}, 0, {wc(3, 8), wc(7, 2)});
  const auto b = make_image(2, {1, 1}, 0, {wc(5, 892), wc(7, 98)});
  stats.add(a);
  stats.add(b);
  REQUIRE(stats.total_terms() == 1000);
  REQUIRE(stats.corpus_tf(VisualWordId{7}) == 100);

  ScoreParams p{{0.2, 2.0, 3600.0}, kSquare, &stats};
  CHECK(visual_weight(VisualWordId{7}, a, p) == doctest::Approx(0.8 * 0.2 + 0.2 * 0.1).epsilon(1e-15));
  CHECK(visual_weight(VisualWordId{7}, a, p) == doctest::Approx(0.18).epsilon(1e-12));

  SUBCASE("no smoothing is the in-image frequency") {
    const auto c = make_image(3, {1, 1}, 0, {wc(7, 5), wc(8, 5)});
    p.scoring.xi = 0.0;
    CHECK(visual_weight(VisualWordId{7}, c, p) == 0.5);
  }
  SUBCASE("full smoothing ignores the image") {
    p.scoring.xi = 1.0;
    CHECK(visual_weight(VisualWordId{7}, a, p) == doctest::Approx(0.1));
    CHECK(visual_weight(VisualWordId{7}, b, p) == doctest::Approx(0.1));
  }
  SUBCASE("absent word gets the smoothing floor") {
    CHECK(visual_weight(VisualWordId{5}, a, p) == doctest::Approx(0.2 * 0.892));
  }
  SUBCASE("empty corpus is an error") {
    CorpusStats empty;
    ScoreParams e{{0.2, 2.0, 3600.0}, kSquare, &empty};
    CHECK_THROWS_AS((void)visual_weight(VisualWordId{7}, a, e), InvalidStateError);
  }
  SUBCASE("image without terms is an error") {
    const GeoTemporalImage blank{9, {1, 1}, 0, {}};
    CHECK_THROWS_AS((void)visual_weight(VisualWordId{7}, blank, p), InvalidStateError);
  }
}

TEST_CASE("visual relevance") {
  CorpusStats stats;
  // without smoothing: image a weighs 0.5 and 0.2, corpus maxima are 0.5 and 0.4
  const auto a = make_image(1, {1, 1}, 0, {wc(1, 5), wc(2, 2), wc(3, 3)});
  const auto b = make_image(2, {1, 1}, 0, {wc(2, 2), wc(4, 3)});
  stats.add(a);
  stats.add(b);
  const ScoreParams p{{0.0, 2.0, 3600.0}, kSquare, &stats};

  Query q;
  q.psi = {VisualWordId{1}, VisualWordId{2}};
  CHECK(visual_relevance(q, a, p) == doctest::Approx(0.5).epsilon(1e-12));

  q.psi = {VisualWordId{1}};
  CHECK(visual_relevance(q, a, p) == 0.0);

  SUBCASE("words unknown to the corpus cancel out") {
    q.psi = {VisualWordId{1}, VisualWordId{2}, VisualWordId{99}};
    CHECK(visual_relevance(q, a, p) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("smoothing floor only") {
    const ScoreParams s{{0.3, 2.0, 3600.0}, kSquare, &stats};
    const auto c = make_image(3, {1, 1}, 0, {wc(9, 4)});
    stats.add(c);
    q.psi = {VisualWordId{1}, VisualWordId{4}};
    const double v = visual_relevance(q, c, s);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    testing::ReferenceScorer ref{s.scoring, kSquare, {a, b, c}};
    CHECK(v == doctest::Approx(ref.visual(q, c)).epsilon(1e-12));
  }
}

TEST_CASE("temporal recency") {
  CorpusStats stats;
  const ScoreParams p{{0.5, 2.0, 3600.0}, kSquare, &stats};
  Query q;
  q.t = 10'000;
  CHECK(temporal_recency(q, 10'000, p) == 0.0);
  CHECK(temporal_recency(q, 10'000 - 3600, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(temporal_recency(q, 20'000, p) == 0.0);  // newer than the query: age 0
  double prev = 0.0;
  for (Timestamp age = 0; age < 500'000; age += 997) {
    const double c = temporal_recency(q, q.t - age, p);
    CHECK(c >= prev);
    CHECK(c <= 1.0);
    if (age < 3600 * 40) CHECK(c < 1.0);
    prev = c;
  }
  CHECK(temporal_recency(q, q.t - 3600 * 200, p) == doctest::Approx(1.0));
}

TEST_CASE("combined score") {
  CorpusStats stats;
  const auto a = make_image(1, {3, 4}, 0, {wc(1, 5), wc(2, 2), wc(3, 3)});
  const auto b = make_image(2, {50, 50}, 3600, {wc(2, 2), wc(4, 3)});
  stats.add(a);
  stats.add(b);
  const ScoreParams p{{0.0, 2.0, 3600.0}, kSquare, &stats};
  Query q;
  q.psi = {VisualWordId{1}, VisualWordId{2}};
  q.loc = {0, 0};
  q.t = 3600;
  q.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};

  const ScoreBreakdown s = combined_score(q, a, p);
  CHECK(s.spatial == doctest::Approx(0.0353553).epsilon(1e-6));
  CHECK(s.visual == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.temporal == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.total == doctest::Approx(0.3451184).epsilon(1e-6));
  CHECK(std::abs(s.total - (s.spatial + s.visual + s.temporal) / 3) < 1e-12);

  SUBCASE("all components vanish") {
    const auto best = make_image(3, {0, 0}, 3600, {wc(1, 1), wc(2, 1)});
    stats.add(best);
    const ScoreBreakdown z = combined_score(q, best, p);
    CHECK(z.total == 0.0);
  }
  SUBCASE("near-degenerate weights approach the spatial term") {
    q.weights = {1.0 - 2e-9, 1e-9, 1e-9};
    const ScoreBreakdown d = combined_score(q, a, p);
    CHECK(d.total == doctest::Approx(d.spatial).epsilon(1e-8));
  }
  SUBCASE("bad weights") {
    q.weights = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS((void)combined_score(q, a, p), ConfigError);
    q.weights = {0.5, 0.5, 0.1};
    CHECK_THROWS_AS((void)combined_score(q, a, p), ConfigError);
  }
}

TEST_CASE("query validation") {
  Query q;
  q.psi = {VisualWordId{1}};
  CHECK_NOTHROW(validate_query(q));
  q.k = 0;
  CHECK_THROWS_AS(validate_query(q), ArgumentError);
  q.k = 1;
  q.psi = {};
  CHECK_THROWS_AS(validate_query(q), ArgumentError);
  q.psi = {VisualWordId{2}, VisualWordId{2}};
  CHECK_THROWS_AS(validate_query(q), ArgumentError);
}

TEST_CASE("image validation") {
  CHECK_NOTHROW(validate_image(make_image(1, {5, 5}, 0, {wc(1, 1)}), kSquare));
  CHECK_THROWS_AS(validate_image(make_image(1, {5, 5}, 0, {}), kSquare), DataError);
  CHECK_THROWS_AS(validate_image(make_image(1, {5, 5}, 0, {wc(2, 1), wc(1, 1)}), kSquare), DataError);
  CHECK_THROWS_AS(validate_image(make_image(1, {5, 5}, 0, {wc(2, 0)}), kSquare), DataError);
  CHECK_THROWS_AS(validate_image(make_image(1, {500, 5}, 0, {wc(2, 1)}), kSquare), DomainError);
}

TEST_CASE("corpus stats track removals exactly") {
  std::mt19937_64 rng(7);
  std::vector<GeoTemporalImage> images;
  for (ImageId i = 0; i < 300; ++i) images.push_back(testing::random_image(rng, i, kSquare, 30, 0, 100));
  CorpusStats stats;
  for (const auto& img : images) stats.add(img);
  for (std::size_t i = 0; i < images.size(); i += 3) stats.remove(images[i]);
  std::vector<GeoTemporalImage> rest;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (i % 3 != 0) rest.push_back(images[i]);
  }
  const CorpusStats fresh = CorpusStats::recompute(rest);
  CHECK(stats == fresh);
  for (std::uint32_t w = 0; w < 30; ++w) {
    std::optional<double> best;
    for (const auto& img : rest) {
      if (auto tf = img.tf(VisualWordId{w})) {
        const double f = term_frequency(tf, img.term_count());
        if (!best || f > *best) best = f;
      }
    }
    CHECK(stats.max_frequency(VisualWordId{w}) == best);
  }
  CHECK_THROWS_AS(stats.remove(images[0]), InvalidStateError);
}

TEST_CASE("scoring properties on random inputs") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 40; ++round) {
    std::vector<GeoTemporalImage> images;
    for (ImageId i = 0; i < 25; ++i) {
      images.push_back(testing::random_image(rng, i, kSquare, 12, 0, 50'000));
    }
    const CorpusStats stats = CorpusStats::recompute(images);
    const double xi = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    const ScoreParams p{{xi, 1.5 + round * 0.1, 3600.0}, kSquare, &stats};
    const Query q = testing::random_query(rng, kSquare, 12, 5, 40'000, 5);
    const testing::ReferenceScorer ref{p.scoring, kSquare, images};
    const QueryScorer scorer(q, p);
    for (const auto& img : images) {
      const ScoreBreakdown s = scorer.score(img);
      CHECK(s.spatial >= 0.0);
      CHECK(s.spatial <= 1.0);
      CHECK(s.visual >= 0.0);
      CHECK(s.visual <= 1.0);
      CHECK(s.temporal >= 0.0);
      CHECK(s.temporal <= 1.0);
      CHECK(s.total >= 0.0);
      CHECK(s.total <= 1.0);
      CHECK(std::abs(s.total - ref.total(q, img)) < 1e-12);
      // pure: identical inputs give bit-identical outputs
      CHECK(combined_score(q, img, p) == s);
      // linear in each component
      const double delta = 0.125;
      CHECK(std::abs(scorer.combine(s.spatial + delta, s.visual, s.temporal) - s.total -
                     q.weights.spatial * delta) < 1e-12);
      CHECK(std::abs(scorer.combine(s.spatial, s.visual + delta, s.temporal) - s.total -
                     q.weights.visual * delta) < 1e-12);
      CHECK(std::abs(scorer.combine(s.spatial, s.visual, s.temporal + delta) - s.total -
                     q.weights.temporal * delta) < 1e-12);
    }
  }
}

TEST_CASE("visual weight grows with tf and relevance falls with weight") {
  CorpusStats stats;
  const auto other = make_image(1, {1, 1}, 0, {wc(1, 3), wc(2, 9)});
  stats.add(other);
  const ScoreParams p{{0.4, 2.0, 3600.0}, kSquare, &stats};
  Query q;
  q.psi = {VisualWordId{1}, VisualWordId{2}};
  double prev_w = -1.0;
  double prev_v = 2.0;
  for (std::uint32_t tf = 1; tf < 12; ++tf) {
    const auto img = make_image(2, {1, 1}, 0, {wc(1, tf), wc(5, 12 - tf)});
    const double w = visual_weight(VisualWordId{1}, img, p);
    CHECK(w > prev_w);
    prev_w = w;
    const double v = QueryScorer(q, p).visual(img);
    CHECK(v <= prev_v);
    prev_v = v;
  }
}
