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

#include "geostream/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "geostream/engine.hpp"

namespace geostream {

namespace {

struct Instance {
  IndexOptions options;
  std::vector<GeoTemporalImage> stream;
  Query query;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

GeoPoint random_point(std::mt19937_64& rng, const SpatialDomain& d) {
  // boundaries get extra weight: they exercise quadrant ties
  auto coord = [&](double lo, double hi) {
    const auto r = rng() % 10;
    if (r == 0) return lo;
    if (r == 1) return hi;
    if (r == 2) return lo + (hi - lo) / 2;
    return uniform(rng, lo, hi);
  };
  return {coord(d.min_lat, d.max_lat), coord(d.min_lon, d.max_lon)};
}

Instance make_instance(std::mt19937_64& rng, const VerifyConfig& cfg) {
  Instance inst;
  inst.options.domain = cfg.domain;
  inst.options.scoring = cfg.scoring;
  inst.options.capacity = pick(rng, 2, 12);
  inst.options.segment_span = static_cast<Timestamp>(pick(rng, 50, 2000));
  const std::size_t windows[] = {1, 3, 24};
  inst.options.window = windows[rng() % 3];
  inst.options.max_depth = pick(rng, 3, 16);

  const std::size_t n = pick(rng, 1, cfg.max_images);
  const auto vocab = static_cast<std::uint32_t>(pick(rng, 3, 80));
  const Timestamp base = static_cast<Timestamp>(pick(rng, 0, 100'000)) - 50'000;
  Timestamp t = base;
  for (std::size_t i = 0; i < n; ++i) {
    t += static_cast<Timestamp>(pick(rng, 0, 3 * static_cast<std::size_t>(inst.options.segment_span) / 10));
    GeoTemporalImage img;
    img.id = (static_cast<ImageId>(i) * 2654435761ULL) % 1'000'003ULL;
    img.loc = random_point(rng, cfg.domain);
    img.t_c = t;
    const std::size_t words = pick(rng, 1, 8);
    std::vector<std::uint32_t> ws;
    for (std::size_t j = 0; j < words; ++j) ws.push_back(static_cast<std::uint32_t>(rng() % vocab));
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    for (auto w : ws) img.psi.push_back({VisualWordId{w}, static_cast<std::uint32_t>(pick(rng, 1, 4))});
    inst.stream.push_back(std::move(img));
  }

  Query& q = inst.query;
  const std::size_t qwords = pick(rng, 1, std::min<std::size_t>(cfg.max_query_words, vocab + 3));
  std::vector<std::uint32_t> ws;
  for (std::size_t j = 0; j < qwords; ++j) ws.push_back(static_cast<std::uint32_t>(rng() % (vocab + 3)));
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  for (auto w : ws) q.psi.push_back(VisualWordId{w});
  q.loc = random_point(rng, cfg.domain);
  q.t = t + static_cast<Timestamp>(pick(rng, 0, 5000));
  const std::uint32_t ks[] = {1, 5, 10};
  q.k = ks[rng() % 3];
  const double a = uniform(rng, 0.02, 1), b = uniform(rng, 0.02, 1), c = uniform(rng, 0.02, 1);
  q.weights = {a / (a + b + c), b / (a + b + c), 0};
  q.weights.temporal = 1.0 - q.weights.spatial - q.weights.visual;
  return inst;
}

void note_failure(SuiteReport& r, const std::string& what) {
  if (r.failures++ == 0) r.first_failure = what;
}

template <typename NodeRef>
struct DominanceAudit {
  const QueryScorer* scorer;
  double tolerance;
  std::size_t visited_nodes = 0;
  std::size_t violations = 0;

  void visited(NodeRef node, double bound) {
    ++visited_nodes;
    double lowest = std::numeric_limits<double>::infinity();
    for_each_image(*node, [&](const GeoTemporalImage& img) { lowest = std::min(lowest, scorer->score(img).total); });
    if (bound > lowest + tolerance) ++violations;
  }
  void pruned(double) {}
  void threshold(double) {}
};

template <typename View>
bool audit_dominance(const View& view, const Query& q, double tolerance) {
  const ScoreParams params = view.params();
  if (params.stats->total_terms() == 0) return true;
  const QueryScorer scorer(q, params);
  DominanceAudit<typename View::NodeRef> audit{&scorer, tolerance};
  (void)top_k_search(q, view, audit);
  return audit.violations == 0;
}

}  // namespace

SuiteReport verify_oracle_equivalence(const VerifyConfig& cfg) {
  SuiteReport report{"oracle equivalence"};
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const Instance inst = make_instance(rng, cfg);
    for (IndexKind kind : cfg.indexes) {
      StreamIndex idx(kind, inst.options);
      for (const auto& img : inst.stream) idx.insert(img);
      const auto live = idx.live_images();
      const CorpusStats stats = CorpusStats::recompute(live);
      const ScoreParams params{cfg.scoring, cfg.domain, &stats};
      const auto want = brute_force_oracle(inst.query, live, params);
      const auto got = idx.search(inst.query).entries;
      ++report.cases;
      bool ok = got.size() == want.size();
      for (std::size_t j = 0; ok && j < got.size(); ++j) {
        ok = got[j].id == want[j].id && std::abs(got[j].score.total - want[j].score.total) <= cfg.tolerance;
      }
      if (!ok) {
        std::ostringstream msg;
        msg << "instance " << i << " index " << to_string(kind) << ": got " << got.size() << " results, want "
            << want.size();
        note_failure(report, msg.str());
      }
    }
  }
  return report;
}

SuiteReport verify_dominance(const VerifyConfig& cfg) {
  SuiteReport report{"bound dominance"};
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (IndexKind kind : {IndexKind::hiq, IndexKind::stvii}) {
    if (std::find(cfg.indexes.begin(), cfg.indexes.end(), kind) == cfg.indexes.end()) continue;
    for (std::size_t i = 0; i < cfg.dominance_pairs; ++i) {
      const Instance inst = make_instance(rng, cfg);
      StreamIndex idx(kind, inst.options);
      for (const auto& img : inst.stream) idx.insert(img);
      bool ok = true;
      if (kind == IndexKind::hiq) {
        ok = audit_dominance(idx.hiq()->read(), inst.query, cfg.tolerance);
      } else {
        ok = audit_dominance(idx.stvii()->read(), inst.query, cfg.tolerance);
      }
      ++report.cases;
      if (!ok) note_failure(report, "pair " + std::to_string(i) + " index " + std::string(to_string(kind)));
    }
  }
  return report;
}

}  // namespace geostream
