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

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "geostream/engine.hpp"
#include "geostream/model.hpp"

namespace geostream {

struct HiqConfig {
  Timestamp segment_span = 3600;  ///< T, seconds covered by one segment
  std::size_t window = 24;        ///< W, live segments retained
  std::size_t capacity = 100;     ///< C, leaf capacity before a split
  int max_depth = 16;
  SpatialDomain domain;
  ScoringConfig scoring;

  void validate() const;
};

/// One node of an inverted quadtree.
///
/// Every node keeps, per visual word, the highest in-image frequency tf/|psi|
/// found below it. Leaves also hold the image records and posting lists of
/// (slot, tf) ordered by image id. Weights are derived at query time from the
/// stored frequency and the live corpus, so smoothing always reflects the
/// current window.
class QuadNode {
 public:
  struct Posting {
    std::uint32_t slot;  // index into images()
    std::uint32_t tf;
    std::int32_t next;   // -1 terminates
  };

  QuadNode(const GeoRect& rect, int depth) : rect_(rect), depth_(depth) {}

  [[nodiscard]] const GeoRect& rect() const noexcept { return rect_; }
  [[nodiscard]] Timestamp t_max() const noexcept { return t_max_; }
  [[nodiscard]] int depth() const noexcept { return depth_; }
  [[nodiscard]] bool is_leaf() const noexcept { return children_[0] == nullptr; }
  [[nodiscard]] bool empty() const noexcept { return ivf_.empty(); }

  /// NW, NE, SW, SE. Only valid for inner nodes.
  [[nodiscard]] const QuadNode& child(std::size_t quadrant) const { return *children_[quadrant]; }
  [[nodiscard]] std::span<const GeoTemporalImage> images() const noexcept { return images_; }

  [[nodiscard]] std::optional<double> max_frequency(VisualWordId word) const noexcept {
    auto it = ivf_.find(word.value);
    if (it == ivf_.end()) return std::nullopt;
    return it->second.max_freq;
  }
  [[nodiscard]] std::size_t vocabulary_size() const noexcept { return ivf_.size(); }
  /// Words present below this node.
  template <typename F>
  void for_each_word(F&& f) const {
    for (const auto& [word, slot] : ivf_) f(VisualWordId{word}, slot.max_freq);
  }

  /// Visits the leaf posting list of `word` in ascending image id.
  template <typename F>
  void for_each_posting(VisualWordId word, F&& f) const {
    auto it = ivf_.find(word.value);
    if (it == ivf_.end()) return;
    for (std::int32_t p = it->second.head; p >= 0; p = postings_[p].next) f(postings_[p]);
  }

  /// Quadrant a point belongs to; boundary points go to the lowest index.
  [[nodiscard]] std::size_t quadrant_of(GeoPoint p) const noexcept;
  [[nodiscard]] GeoRect quadrant_rect(std::size_t quadrant) const noexcept;

  [[nodiscard]] std::size_t storage_bytes() const noexcept;

 private:
  friend class Segment;

  struct WordSlot {
    double max_freq = 0.0;
    std::int32_t head = -1;
    std::int32_t tail = -1;
  };

  void absorb(const GeoTemporalImage& img);
  void add_to_leaf(GeoTemporalImage img);
  void split(const HiqConfig& cfg);

  GeoRect rect_;
  int depth_;
  Timestamp t_max_ = std::numeric_limits<Timestamp>::min();
  absl::flat_hash_map<std::uint32_t, WordSlot> ivf_;
  std::vector<GeoTemporalImage> images_;
  std::vector<Posting> postings_;
  std::array<std::unique_ptr<QuadNode>, 4> children_;
};

/// A time slice [start, end) owning one inverted quadtree.
class Segment {
 public:
  Segment(Timestamp start, Timestamp end, const SpatialDomain& domain)
      : start_(start), end_(end), root_(std::make_unique<QuadNode>(domain.rect(), 0)) {}

  [[nodiscard]] Timestamp start() const noexcept { return start_; }
  [[nodiscard]] Timestamp end() const noexcept { return end_; }
  [[nodiscard]] bool covers(Timestamp t) const noexcept { return t >= start_ && t < end_; }
  [[nodiscard]] const QuadNode& root() const noexcept { return *root_; }
  [[nodiscard]] std::size_t image_count() const noexcept { return image_count_; }

  void insert(GeoTemporalImage img, const HiqConfig& cfg);

 private:
  Timestamp start_;
  Timestamp end_;
  std::unique_ptr<QuadNode> root_;
  std::size_t image_count_ = 0;
};

/// Lower bound of the combined score of every image below `node`.
[[nodiscard]] double mind_stv(const Query& q, const QuadNode& node, const ScoreParams& params);
[[nodiscard]] NodeBound node_bound(const QueryScorer& scorer, const QuadNode& node);

/// Calls `f` for every image stored in the subtree of `node`.
template <typename F>
void for_each_image(const QuadNode& node, F&& f) {
  if (node.is_leaf()) {
    for (const auto& img : node.images()) f(img);
    return;
  }
  for (std::size_t i = 0; i < 4; ++i) for_each_image(node.child(i), f);
}

/// Hierarchical Information Quadtree: a sliding window of temporal segments,
/// each indexed by an inverted quadtree.
///
/// Single writer, many readers. Mutations take the lock exclusively; a View
/// holds it shared, so a reader sees whole segments in a consistent state.
class HiqIndex {
 public:
  class View {
   public:
    using NodeRef = const QuadNode*;

    [[nodiscard]] ScoreParams params() const noexcept;
    [[nodiscard]] std::vector<NodeRef> roots() const;
    [[nodiscard]] NodeBound bound(const QueryScorer& scorer, NodeRef node) const {
      return node_bound(scorer, *node);
    }
    [[nodiscard]] bool is_leaf(NodeRef node) const noexcept { return node->is_leaf(); }
    template <typename F>
    void for_each_child(NodeRef node, F&& f) const {
      for (std::size_t i = 0; i < 4; ++i) f(&node->child(i));
    }
    template <typename F>
    void for_each_candidate(NodeRef node, const QueryScorer& scorer, F&& f) const;

    [[nodiscard]] const std::deque<Segment>& segments() const noexcept { return index_->segments_; }
    [[nodiscard]] const CorpusStats& stats() const noexcept { return index_->stats_; }

   private:
    friend class HiqIndex;
    explicit View(const HiqIndex& index) : index_(&index), lock_(index.mutex_) {}

    const HiqIndex* index_;
    std::shared_lock<std::shared_mutex> lock_;
  };

  explicit HiqIndex(HiqConfig cfg);

  HiqIndex(const HiqIndex&) = delete;
  HiqIndex& operator=(const HiqIndex&) = delete;

  /// Inserts into the segment covering img.t_c, rolling forward first when
  /// the stream has moved past the head. Throws DomainError, DataError, or
  /// LateArrivalError (older than every live segment).
  void insert(GeoTemporalImage img);

  /// Opens a fresh head segment and keeps rolling until it covers `now`;
  /// returns how many segments fell out of the window.
  std::size_t roll_segment(Timestamp now);

  [[nodiscard]] View read() const { return View(*this); }
  [[nodiscard]] SearchResult search(const Query& q) const;

  [[nodiscard]] const HiqConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t segment_count() const;
  /// Start of the oldest live segment, nullopt when empty.
  [[nodiscard]] std::optional<Timestamp> window_start() const;
  [[nodiscard]] CorpusStats stats() const;
  [[nodiscard]] std::vector<GeoTemporalImage> live_images() const;
  [[nodiscard]] std::size_t node_count() const;
  [[nodiscard]] std::size_t storage_bytes() const;

 private:
  std::size_t roll_locked(Timestamp now);
  std::size_t expire_overflow();
  void drop_oldest();
  [[nodiscard]] Timestamp align(Timestamp t) const noexcept;

  HiqConfig cfg_;
  std::deque<Segment> segments_;  // oldest first, head at back
  CorpusStats stats_;
  mutable std::shared_mutex mutex_;
};

template <typename F>
void HiqIndex::View::for_each_candidate(NodeRef node, const QueryScorer& scorer, F&& f) const {
  const auto images = node->images();
  std::vector<char> hit(images.size(), 0);
  for (VisualWordId w : scorer.active_words()) {
    node->for_each_posting(w, [&](const QuadNode::Posting& p) { hit[p.slot] = 1; });
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (hit[i]) f(images[i]);
  }
}

}  // namespace geostream
