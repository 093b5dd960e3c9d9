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

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "geostream/errors.hpp"
#include "geostream/hiq.hpp"
#include "geostream/ifa.hpp"
#include "geostream/stvii.hpp"
#include "support.hpp"

using namespace geostream;

namespace {

const SpatialDomain kSquare{0, 100, 0, 100};

StviiConfig stvii_config(std::size_t capacity) {
  StviiConfig cfg;
  cfg.capacity = capacity;
  cfg.time_span = 10'000;
  cfg.domain = kSquare;
  return cfg;
}

// Containment, fill, inverted-file maxima and uniform leaf depth.
void audit(const RTreeNode& n, const StviiConfig& cfg, bool is_root, std::size_t depth,
           std::set<std::size_t>& leaf_depths) {
  if (!is_root) {
    CHECK(n.fanout() >= cfg.min_fill());
  }
  CHECK(n.fanout() <= cfg.capacity);
  absl::flat_hash_map<std::uint32_t, double> best;
  for_each_image(n, [&](const GeoTemporalImage& img) {
    CHECK(n.mbr().contains(Box3::point(img)));
    for (const auto& wc : img.psi) {
      double& f = best[wc.word.value];
      f = std::max(f, term_frequency(wc.tf, img.term_count()));
    }
  });
  CHECK(n.vocabulary_size() == best.size());
  for (const auto& [w, f] : best) CHECK(n.max_frequency(VisualWordId{w}) == f);
  if (n.is_leaf()) {
    leaf_depths.insert(depth);
    if (!n.empty()) {
      Box3 tight = Box3::point(n.entries().front());
      for (const auto& e : n.entries()) tight.expand(Box3::point(e));
      CHECK(n.mbr() == tight);
    }
    return;
  }
  Box3 tight = n.children().front()->mbr();
  for (const auto& c : n.children()) {
    CHECK(n.mbr().contains(c->mbr()));
    tight.expand(c->mbr());
    audit(*c, cfg, false, depth + 1, leaf_depths);
  }
  CHECK(n.mbr() == tight);
}

void audit(const StviiIndex& index) {
  auto view = index.read();
  std::set<std::size_t> depths;
  audit(view.root(), index.config(), true, 0, depths);
  CHECK(depths.size() == 1);
}

}  // namespace

// IFA ---------------------------------------------------------------------------

TEST_CASE("ifa insertion") {
  IfaIndex ifa({kSquare, {}});
  ifa.insert({1, {1, 1}, 10, {{VisualWordId{1}, 1}, {VisualWordId{2}, 2}, {VisualWordId{3}, 1}}});
  CHECK(ifa.list_count() == 3);
  for (std::uint32_t w = 1; w <= 3; ++w) CHECK(ifa.posting_list(VisualWordId{w}).size() == 1);
  ifa.insert({2, {1, 1}, 20, {{VisualWordId{2}, 1}}});
  const auto list = ifa.posting_list(VisualWordId{2});
  REQUIRE(list.size() == 2);
  CHECK(list[0].id == 1);
  CHECK(list[1].id == 2);
  CHECK_THROWS_AS(ifa.insert({2, {1, 1}, 30, {{VisualWordId{2}, 1}}}), DataError);
  CHECK_THROWS_AS(ifa.insert({3, {-1, 1}, 30, {{VisualWordId{2}, 1}}}), DomainError);
  CHECK(ifa.size() == 2);
}

TEST_CASE("ifa posting lists stay sorted under late arrivals") {
  std::mt19937_64 rng(4);
  IfaIndex ifa({kSquare, {}});
  for (ImageId i = 0; i < 1000; ++i) {
    // mostly increasing time with occasional stragglers
    const Timestamp t = static_cast<Timestamp>(i) - (rng() % 10 == 0 ? 50 : 0);
    ifa.insert(testing::random_image(rng, i, kSquare, 50, t, t));
  }
  for (std::uint32_t w = 0; w < 50; ++w) {
    const auto list = ifa.posting_list(VisualWordId{w});
    CHECK(std::is_sorted(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.t_c < b.t_c || (a.t_c == b.t_c && a.id < b.id);
    }));
    for (const auto& p : list) CHECK(p.image->tf(VisualWordId{w}) > 0);
  }
}

TEST_CASE("ifa search") {
  IfaIndex ifa({kSquare, {}});
  Query q;
  q.psi = {VisualWordId{1}};
  CHECK(ifa.search(q).entries.empty());
  ifa.insert({5, {1, 1}, 10, {{VisualWordId{2}, 1}}});
  CHECK(ifa.search(q).entries.empty());
  ifa.insert({6, {2, 2}, 10, {{VisualWordId{1}, 1}}});
  const auto res = ifa.search(q);
  REQUIRE(res.entries.size() == 1);
  CHECK(res.entries[0].id == 6);
  CHECK(res.stats.images_scored == 1);
}

TEST_CASE("ifa expiry") {
  std::mt19937_64 rng(8);
  IfaIndex empty({kSquare, {}});
  CHECK(empty.expire(100) == 0);

  IfaIndex ifa({kSquare, {}});
  std::vector<GeoTemporalImage> images;
  for (ImageId i = 0; i < 400; ++i) {
    images.push_back(testing::random_image(rng, i, kSquare, 30, 0, 1000));
    ifa.insert(images.back());
  }
  CHECK(ifa.expire(500) == static_cast<std::size_t>(std::count_if(
                               images.begin(), images.end(), [](const auto& img) { return img.t_c < 500; })));
  std::vector<GeoTemporalImage> rest;
  for (const auto& img : images) {
    if (img.t_c >= 500) rest.push_back(img);
  }
  std::vector<ImageId> want, got;
  for (const auto& img : rest) want.push_back(img.id);
  for (const auto& img : ifa.live_images()) got.push_back(img.id);
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  CHECK(got == want);
  CHECK(ifa.stats() == CorpusStats::recompute(rest));
  for (std::uint32_t w = 0; w < 30; ++w) {
    for (const auto& p : ifa.posting_list(VisualWordId{w})) CHECK(p.t_c >= 500);
  }
  CHECK(ifa.expire(10'000) == rest.size());
  CHECK(ifa.size() == 0);
  CHECK(ifa.list_count() == 0);
}

TEST_CASE("ifa matches the oracle") {
  std::mt19937_64 rng(15);
  for (int round = 0; round < 100; ++round) {
    IfaIndex ifa({kSquare, {}});
    std::vector<GeoTemporalImage> images;
    const auto n = std::uniform_int_distribution<ImageId>(1, 120)(rng);
    for (ImageId i = 0; i < n; ++i) {
      images.push_back(testing::random_image(rng, i, kSquare, 25, 0, 20'000));
      ifa.insert(images.back());
    }
    const CorpusStats stats = ifa.stats();
    const ScoreParams p{ScoringConfig{}, kSquare, &stats};
    const Query q = testing::random_query(rng, kSquare, 25, 6, 20'000, 1 + round % 10);
    const auto got = ifa.search(q);
    CHECK(testing::same_results(got.entries, brute_force_oracle(q, images, p)));
    const QueryScorer scorer(q, p);
    std::size_t candidates = 0;
    for (const auto& img : images) candidates += scorer.shares_word(img);
    CHECK(got.stats.images_scored == candidates);
  }
}

// STVII -------------------------------------------------------------------------

TEST_CASE("stvii first insert and forced split") {
  StviiIndex tree(stvii_config(4));
  const GeoTemporalImage first{1, {10, 20}, 30, {{VisualWordId{1}, 1}}};
  tree.insert(first);
  {
    auto view = tree.read();
    CHECK(view.root().is_leaf());
    CHECK(view.root().mbr() == Box3::point(first));
  }
  for (ImageId i = 2; i <= 5; ++i) tree.insert({i, {10.0 + i, 20.0 + i}, 30 + Timestamp(i), {{VisualWordId{1}, 1}}});
  auto view = tree.read();
  REQUIRE_FALSE(view.root().is_leaf());
  CHECK(view.root().children().size() == 2);
  for (const auto& c : view.root().children()) CHECK(c->fanout() >= tree.config().min_fill());
  CHECK(tree.config().min_fill() == 2);
  CHECK_THROWS_AS(tree.insert({9, {10, 200}, 0, {{VisualWordId{1}, 1}}}), DomainError);
}

TEST_CASE("stvii structure after many inserts") {
  std::mt19937_64 rng(6);
  StviiIndex tree(stvii_config(8));
  for (ImageId i = 0; i < 1000; ++i) tree.insert(testing::random_image(rng, i, kSquare, 40, 0, 9999));
  CHECK(tree.size() == 1000);
  CHECK(tree.height() >= 3);
  audit(tree);
  CHECK(tree.stats() == CorpusStats::recompute(tree.live_images()));
}

TEST_CASE("stvii expiry condenses and reinserts") {
  std::mt19937_64 rng(12);
  StviiIndex tree(stvii_config(5));
  std::vector<GeoTemporalImage> images;
  for (ImageId i = 0; i < 600; ++i) {
    images.push_back(testing::random_image(rng, i, kSquare, 20, Timestamp(i * 10), Timestamp(i * 10 + 30)));
    tree.insert(images.back());
  }
  for (Timestamp cutoff : {500, 2000, 4100, 5980}) {
    const std::size_t want = static_cast<std::size_t>(std::count_if(images.begin(), images.end(), [&](const auto& img) {
      return img.t_c < cutoff;
    }));
    std::erase_if(images, [&](const auto& img) { return img.t_c < cutoff; });
    CHECK(tree.expire(cutoff) == want);
    CHECK(tree.size() == images.size());
    audit(tree);
    CHECK(tree.stats() == CorpusStats::recompute(images));
  }
  CHECK(tree.expire(1'000'000) == images.size());
  CHECK(tree.size() == 0);
  CHECK(tree.node_count() == 1);
}

TEST_CASE("stvii bound examples and dominance") {
  StviiIndex tree(stvii_config(4));
  tree.insert({1, {20, 20}, 1000, {{VisualWordId{1}, 2}}});
  tree.insert({2, {30, 30}, 900, {{VisualWordId{1}, 1}, {VisualWordId{2}, 1}}});
  {
    auto view = tree.read();
    Query q;
    q.psi = {VisualWordId{1}};
    q.loc = {25, 25};
    q.t = 1000;
    CHECK(stvii_mind(q, view.root(), view.params()) == 0.0);
    q.psi = {VisualWordId{7}};
    const QueryScorer s(Query{{VisualWordId{1}, VisualWordId{7}}, {25, 25}, 1000, 1, {}}, view.params());
    CHECK(node_bound(s, view.root()).has_query_word);
  }

  std::mt19937_64 rng(31);
  for (int round = 0; round < 20; ++round) {
    StviiIndex t(stvii_config(3 + round % 6));
    for (ImageId i = 0; i < 150; ++i) t.insert(testing::random_image(rng, i, kSquare, 15, 0, 9999));
    auto view = t.read();
    for (int qi = 0; qi < 10; ++qi) {
      const Query q = testing::random_query(rng, kSquare, 15, 5, 12'000, 3);
      const QueryScorer scorer(q, view.params());
      std::function<void(const RTreeNode&)> walk = [&](const RTreeNode& n) {
        const double b = stvii_mind(q, n, view.params());
        for_each_image(n, [&](const GeoTemporalImage& img) { CHECK(b <= scorer.score(img).total); });
        for (const auto& c : n.children()) walk(*c);
      };
      walk(view.root());
    }
  }
}

TEST_CASE("stvii and hiq agree with the oracle") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 100; ++round) {
    StviiIndex tree(stvii_config(2 + round % 9));
    HiqConfig hcfg;
    hcfg.capacity = 1 + round % 7;
    hcfg.segment_span = 5000;
    hcfg.domain = kSquare;
    HiqIndex hiq(hcfg);
    std::vector<GeoTemporalImage> images;
    const auto n = std::uniform_int_distribution<ImageId>(1, 200)(rng);
    for (ImageId i = 0; i < n; ++i) {
      images.push_back(testing::random_image(rng, i, kSquare, 25, 0, 20'000));
    }
    std::sort(images.begin(), images.end(), [](const auto& a, const auto& b) { return a.t_c < b.t_c; });
    for (const auto& img : images) {
      tree.insert(img);
      hiq.insert(img);
    }
    const CorpusStats stats = tree.stats();
    const ScoreParams p{ScoringConfig{}, kSquare, &stats};
    const Query q = testing::random_query(rng, kSquare, 25, 6, 20'000, 1 + round % 10);
    const auto want = brute_force_oracle(q, images, p);
    CHECK(testing::same_results(tree.search(q).entries, want));
    CHECK(testing::same_results(hiq.search(q).entries, want));
  }
}
