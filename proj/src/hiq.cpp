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

#include "geostream/hiq.hpp"

#include <algorithm>
#include <string>

#include "geostream/errors.hpp"

namespace geostream {

void HiqConfig::validate() const {
  if (segment_span <= 0) throw ConfigError("segment span must be positive");
  if (window < 1) throw ConfigError("window must hold at least one segment");
  if (capacity < 1) throw ConfigError("leaf capacity must be at least 1");
  if (max_depth < 1) throw ConfigError("max depth must be at least 1");
  domain.validate();
  scoring.validate();
}

// QuadNode -------------------------------------------------------------------

std::size_t QuadNode::quadrant_of(GeoPoint p) const noexcept {
  const double mid_lat = rect_.min_lat + (rect_.max_lat - rect_.min_lat) / 2;
  const double mid_lon = rect_.min_lon + (rect_.max_lon - rect_.min_lon) / 2;
  const bool north = p.lat >= mid_lat;
  const bool west = p.lon <= mid_lon;
  return (north ? 0 : 2) + (west ? 0 : 1);
}

GeoRect QuadNode::quadrant_rect(std::size_t quadrant) const noexcept {
  const double mid_lat = rect_.min_lat + (rect_.max_lat - rect_.min_lat) / 2;
  const double mid_lon = rect_.min_lon + (rect_.max_lon - rect_.min_lon) / 2;
  GeoRect r = rect_;
  if (quadrant < 2) r.min_lat = mid_lat; else r.max_lat = mid_lat;
  if (quadrant % 2 == 0) r.max_lon = mid_lon; else r.min_lon = mid_lon;
  return r;
}

void QuadNode::absorb(const GeoTemporalImage& img) {
  t_max_ = std::max(t_max_, img.t_c);
  const std::uint64_t len = img.term_count();
  for (const auto& wc : img.psi) {
    WordSlot& s = ivf_[wc.word.value];
    s.max_freq = std::max(s.max_freq, term_frequency(wc.tf, len));
  }
}

void QuadNode::add_to_leaf(GeoTemporalImage img) {
  absorb(img);
  const auto slot = static_cast<std::uint32_t>(images_.size());
  for (const auto& wc : img.psi) {
    WordSlot& s = ivf_[wc.word.value];
    const auto p = static_cast<std::int32_t>(postings_.size());
    postings_.push_back({slot, wc.tf, -1});
    if (s.head < 0) {
      s.head = s.tail = p;
    } else if (images_[postings_[s.tail].slot].id <= img.id) {
      postings_[s.tail].next = p;
      s.tail = p;
    } else if (img.id < images_[postings_[s.head].slot].id) {
      postings_[p].next = s.head;
      s.head = p;
    } else {
      std::int32_t prev = s.head;
      while (images_[postings_[postings_[prev].next].slot].id <= img.id) prev = postings_[prev].next;
      postings_[p].next = postings_[prev].next;
      postings_[prev].next = p;
    }
  }
  images_.push_back(std::move(img));
}

void QuadNode::split(const HiqConfig& cfg) {
  for (std::size_t q = 0; q < 4; ++q) {
    children_[q] = std::make_unique<QuadNode>(quadrant_rect(q), depth_ + 1);
  }
  for (auto& img : images_) {
    const std::size_t q = quadrant_of(img.loc);
    children_[q]->add_to_leaf(std::move(img));
  }
  images_ = {};
  postings_ = {};
  for (auto& [word, slot] : ivf_) slot.head = slot.tail = -1;
  for (auto& c : children_) {
    if (c->images_.size() > cfg.capacity && c->depth_ < cfg.max_depth) c->split(cfg);
  }
}

std::size_t QuadNode::storage_bytes() const noexcept {
  std::size_t bytes = sizeof(QuadNode);
  bytes += ivf_.capacity() * (sizeof(std::pair<std::uint32_t, WordSlot>) + 1);
  bytes += postings_.capacity() * sizeof(Posting);
  bytes += images_.capacity() * sizeof(GeoTemporalImage);
  for (const auto& img : images_) bytes += img.psi.capacity() * sizeof(WordCount);
  if (!is_leaf()) {
    for (const auto& c : children_) bytes += c->storage_bytes();
  }
  return bytes;
}

// Segment --------------------------------------------------------------------

void Segment::insert(GeoTemporalImage img, const HiqConfig& cfg) {
  QuadNode* n = root_.get();
  while (!n->is_leaf()) {
    n->absorb(img);
    n = n->children_[n->quadrant_of(img.loc)].get();
  }
  n->add_to_leaf(std::move(img));
  if (n->images_.size() > cfg.capacity && n->depth_ < cfg.max_depth) n->split(cfg);
  ++image_count_;
}

// Bounds ---------------------------------------------------------------------

NodeBound node_bound(const QueryScorer& scorer, const QuadNode& node) {
  return scorer.bound(node.rect(), node.t_max(),
                      [&](VisualWordId w) { return node.max_frequency(w); });
}

double mind_stv(const Query& q, const QuadNode& node, const ScoreParams& params) {
  return node_bound(QueryScorer(q, params), node).value;
}

// HiqIndex -------------------------------------------------------------------

ScoreParams HiqIndex::View::params() const noexcept {
  return {index_->cfg_.scoring, index_->cfg_.domain, &index_->stats_};
}

std::vector<HiqIndex::View::NodeRef> HiqIndex::View::roots() const {
  std::vector<NodeRef> out;
  out.reserve(index_->segments_.size());
  for (auto it = index_->segments_.rbegin(); it != index_->segments_.rend(); ++it) {
    out.push_back(&it->root());
  }
  return out;
}

HiqIndex::HiqIndex(HiqConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Timestamp HiqIndex::align(Timestamp t) const noexcept {
  const Timestamp span = cfg_.segment_span;
  Timestamp q = t / span;
  if (t % span != 0 && t < 0) --q;
  return q * span;
}

void HiqIndex::insert(GeoTemporalImage img) {
  validate_image(img, cfg_.domain);
  std::unique_lock lock(mutex_);
  if (segments_.empty() || img.t_c >= segments_.back().end()) roll_locked(img.t_c);
  if (img.t_c < segments_.front().start()) {
    throw LateArrivalError("image " + std::to_string(img.id) + " is older than the live window");
  }
  auto seg = std::find_if(segments_.rbegin(), segments_.rend(),
                          [&](const Segment& s) { return s.covers(img.t_c); });
  stats_.add(img);
  seg->insert(std::move(img), cfg_);
}

std::size_t HiqIndex::roll_segment(Timestamp now) {
  std::unique_lock lock(mutex_);
  return roll_locked(now);
}

std::size_t HiqIndex::roll_locked(Timestamp now) {
  const Timestamp span = cfg_.segment_span;
  if (segments_.empty()) {
    const Timestamp start = align(now);
    segments_.emplace_back(start, start + span, cfg_.domain);
    return 0;
  }
  std::size_t expired = 0;
  Timestamp next = segments_.back().end();
  const auto w = static_cast<Timestamp>(cfg_.window);
  if (now >= next + w * span) {
    // The gap outlives the whole window: everything live expires and only
    // the last window's worth of empty slices is opened.
    while (!segments_.empty()) {
      drop_oldest();
      ++expired;
    }
    next = align(now) - (w - 1) * span;
  }
  do {
    segments_.emplace_back(next, next + span, cfg_.domain);
    next += span;
    expired += expire_overflow();
  } while (now >= next);
  return expired;
}

std::size_t HiqIndex::expire_overflow() {
  std::size_t expired = 0;
  while (segments_.size() > cfg_.window) {
    drop_oldest();
    ++expired;
  }
  return expired;
}

void HiqIndex::drop_oldest() {
  for_each_image(segments_.front().root(), [&](const GeoTemporalImage& img) { stats_.remove(img); });
  segments_.pop_front();
}

SearchResult HiqIndex::search(const Query& q) const { return top_k_search(q, read()); }

std::size_t HiqIndex::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& s : segments_) n += s.image_count();
  return n;
}

std::size_t HiqIndex::segment_count() const {
  std::shared_lock lock(mutex_);
  return segments_.size();
}

std::optional<Timestamp> HiqIndex::window_start() const {
  std::shared_lock lock(mutex_);
  if (segments_.empty()) return std::nullopt;
  return segments_.front().start();
}

CorpusStats HiqIndex::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

std::vector<GeoTemporalImage> HiqIndex::live_images() const {
  std::shared_lock lock(mutex_);
  std::vector<GeoTemporalImage> out;
  for (const auto& s : segments_) {
    for_each_image(s.root(), [&](const GeoTemporalImage& img) { out.push_back(img); });
  }
  return out;
}

namespace {

std::size_t count_nodes(const QuadNode& n) {
  if (n.is_leaf()) return 1;
  std::size_t c = 1;
  for (std::size_t i = 0; i < 4; ++i) c += count_nodes(n.child(i));
  return c;
}

}  // namespace

std::size_t HiqIndex::node_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& s : segments_) n += count_nodes(s.root());
  return n;
}

std::size_t HiqIndex::storage_bytes() const {
  std::shared_lock lock(mutex_);
  std::size_t bytes = sizeof(HiqIndex) + stats_.storage_bytes();
  for (const auto& s : segments_) bytes += sizeof(Segment) + s.root().storage_bytes();
  return bytes;
}

}  // namespace geostream
