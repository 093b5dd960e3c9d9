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

#include "geostream/ifa.hpp"

#include <algorithm>
#include <string>

#include "geostream/errors.hpp"

namespace geostream {

namespace {

bool posting_before(const IfaIndex::Posting& a, const IfaIndex::Posting& b) {
  return a.t_c < b.t_c || (a.t_c == b.t_c && a.id < b.id);
}

}  // namespace

IfaIndex::IfaIndex(IfaConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.domain.validate();
  cfg_.scoring.validate();
}

void IfaIndex::insert(GeoTemporalImage img) {
  validate_image(img, cfg_.domain);
  std::unique_lock lock(mutex_);
  if (store_.contains(img.id)) {
    throw DataError("duplicate image id " + std::to_string(img.id));
  }
  const auto [it, inserted] = store_.emplace(img.id, std::move(img));
  const GeoTemporalImage& stored = it->second;
  stats_.add(stored);

  const Posting p{stored.t_c, stored.id, &stored};
  for (const auto& wc : stored.psi) {
    auto& list = lists_[wc.word.value];
    if (list.empty() || !posting_before(p, list.back())) {
      list.push_back(p);
    } else {
      list.insert(std::upper_bound(list.begin(), list.end(), p, posting_before), p);
    }
  }
  const std::pair<Timestamp, ImageId> key{stored.t_c, stored.id};
  if (arrival_.empty() || arrival_.back() < key) {
    arrival_.push_back(key);
  } else {
    arrival_.insert(std::upper_bound(arrival_.begin(), arrival_.end(), key), key);
  }
}

std::size_t IfaIndex::expire(Timestamp cutoff) {
  std::unique_lock lock(mutex_);
  std::vector<std::uint32_t> touched;
  std::vector<ImageId> removed;
  while (!arrival_.empty() && arrival_.front().first < cutoff) {
    auto it = store_.find(arrival_.front().second);
    for (const auto& wc : it->second.psi) touched.push_back(wc.word.value);
    stats_.remove(it->second);
    // Postings still point at the record until their lists are truncated below.
    removed.push_back(it->first);
    arrival_.pop_front();
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (std::uint32_t w : touched) {
    auto lit = lists_.find(w);
    auto& list = lit->second;
    auto end = std::partition_point(list.begin(), list.end(),
                                    [&](const Posting& p) { return p.t_c < cutoff; });
    list.erase(list.begin(), end);
    if (list.empty()) lists_.erase(lit);
  }
  for (ImageId id : removed) store_.erase(id);
  return removed.size();
}

SearchResult IfaIndex::search(const Query& q) const {
  validate_query(q);
  std::shared_lock lock(mutex_);
  SearchResult out;
  if (stats_.total_terms() == 0) return out;
  const QueryScorer scorer(q, {cfg_.scoring, cfg_.domain, &stats_});

  std::vector<const GeoTemporalImage*> candidates;
  for (VisualWordId w : q.psi) {
    auto it = lists_.find(w.value);
    if (it == lists_.end()) continue;
    ++out.stats.nodes_visited;
    for (const auto& p : it->second) candidates.push_back(p.image);
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const GeoTemporalImage* a, const GeoTemporalImage* b) { return a->id < b->id; });
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  TopK topk(q.k);
  for (const GeoTemporalImage* img : candidates) {
    ++out.stats.images_scored;
    topk.offer({img->id, scorer.score(*img)});
  }
  out.stats.heap_peak = std::min<std::size_t>(q.k, candidates.size());
  out.entries = std::move(topk).take_sorted();
  return out;
}

std::size_t IfaIndex::size() const {
  std::shared_lock lock(mutex_);
  return store_.size();
}

CorpusStats IfaIndex::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

std::vector<GeoTemporalImage> IfaIndex::live_images() const {
  std::shared_lock lock(mutex_);
  std::vector<GeoTemporalImage> out;
  out.reserve(store_.size());
  for (const auto& [t, id] : arrival_) out.push_back(store_.at(id));
  return out;
}

std::vector<IfaIndex::Posting> IfaIndex::posting_list(VisualWordId word) const {
  std::shared_lock lock(mutex_);
  auto it = lists_.find(word.value);
  if (it == lists_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t IfaIndex::list_count() const {
  std::shared_lock lock(mutex_);
  return lists_.size();
}

std::size_t IfaIndex::storage_bytes() const {
  std::shared_lock lock(mutex_);
  std::size_t bytes = sizeof(IfaIndex) + stats_.storage_bytes();
  bytes += lists_.capacity() * (sizeof(std::pair<std::uint32_t, std::deque<Posting>>) + 1);
  for (const auto& [w, list] : lists_) bytes += list.size() * sizeof(Posting);
  // unordered_map node: value plus next pointer and cached hash
  bytes += store_.size() * (sizeof(std::pair<const ImageId, GeoTemporalImage>) + 2 * sizeof(void*));
  bytes += store_.bucket_count() * sizeof(void*);
  for (const auto& [id, img] : store_) bytes += img.psi.capacity() * sizeof(WordCount);
  bytes += arrival_.size() * sizeof(arrival_[0]);
  return bytes;
}

}  // namespace geostream
