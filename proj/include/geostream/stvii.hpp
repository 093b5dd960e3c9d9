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
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "geostream/engine.hpp"
#include "geostream/model.hpp"

namespace geostream {

/// Bounding box over (lat, lon, time) in raw units. Volumes are taken on
/// normalized extents, see StviiIndex.
struct Box3 {
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;
  Timestamp min_t = 0;
  Timestamp max_t = 0;

  [[nodiscard]] static Box3 point(const GeoTemporalImage& img) noexcept {
    return {img.loc.lat, img.loc.lat, img.loc.lon, img.loc.lon, img.t_c, img.t_c};
  }
  [[nodiscard]] GeoRect spatial() const noexcept { return {min_lat, max_lat, min_lon, max_lon}; }
  [[nodiscard]] bool contains(const Box3& o) const noexcept {
    return o.min_lat >= min_lat && o.max_lat <= max_lat && o.min_lon >= min_lon &&
           o.max_lon <= max_lon && o.min_t >= min_t && o.max_t <= max_t;
  }
  void expand(const Box3& o) noexcept;
  [[nodiscard]] Box3 merged(const Box3& o) const noexcept {
    Box3 b = *this;
    b.expand(o);
    return b;
  }

  friend constexpr bool operator==(const Box3&, const Box3&) = default;
};

struct StviiConfig {
  std::size_t capacity = 100;    ///< M, entries per node
  Timestamp time_span = 86400;   ///< time extent mapped onto one unit of volume
  SpatialDomain domain;
  ScoringConfig scoring;

  [[nodiscard]] std::size_t min_fill() const noexcept;  ///< ceil(0.4 M)
  void validate() const;
};

/// Node of the 3D R-tree. Like the quadtree nodes it carries the highest
/// in-image frequency per word below it.
class RTreeNode {
 public:
  explicit RTreeNode(bool leaf) : leaf_(leaf) {}

  [[nodiscard]] bool is_leaf() const noexcept { return leaf_; }
  [[nodiscard]] bool empty() const noexcept { return leaf_ ? entries_.empty() : children_.empty(); }
  [[nodiscard]] std::size_t fanout() const noexcept { return leaf_ ? entries_.size() : children_.size(); }
  [[nodiscard]] const Box3& mbr() const noexcept { return mbr_; }
  [[nodiscard]] Timestamp t_max() const noexcept { return mbr_.max_t; }
  [[nodiscard]] std::span<const GeoTemporalImage> entries() const noexcept { return entries_; }
  [[nodiscard]] std::span<const std::unique_ptr<RTreeNode>> children() const noexcept { return children_; }

  [[nodiscard]] std::optional<double> max_frequency(VisualWordId word) const noexcept {
    auto it = ivf_.find(word.value);
    if (it == ivf_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::size_t vocabulary_size() const noexcept { return ivf_.size(); }
  template <typename F>
  void for_each_word(F&& f) const {
    for (const auto& [word, freq] : ivf_) f(VisualWordId{word}, freq);
  }

  [[nodiscard]] std::size_t storage_bytes() const noexcept;

 private:
  friend class StviiIndex;

  void absorb(const GeoTemporalImage& img);
  void absorb(const RTreeNode& child);
  /// Rebuilds mbr and inverted file from the current contents.
  void refresh();

  bool leaf_;
  Box3 mbr_;
  absl::flat_hash_map<std::uint32_t, double> ivf_;
  std::vector<GeoTemporalImage> entries_;
  std::vector<std::unique_ptr<RTreeNode>> children_;
};

[[nodiscard]] NodeBound node_bound(const QueryScorer& scorer, const RTreeNode& node);
/// Lower bound of the combined score of every image below `node`.
[[nodiscard]] double stvii_mind(const Query& q, const RTreeNode& node, const ScoreParams& params);

template <typename F>
void for_each_image(const RTreeNode& node, F&& f) {
  if (node.is_leaf()) {
    for (const auto& img : node.entries()) f(img);
    return;
  }
  for (const auto& c : node.children()) for_each_image(*c, f);
}

/// Spatial Temporal Visual Inverted Index: a 3D R-tree over (lon, lat, time)
/// whose nodes carry max-frequency inverted files. Leaves are chosen by least
/// normalized volume enlargement and overflowing nodes use the quadratic split.
class StviiIndex {
 public:
  class View {
   public:
    using NodeRef = const RTreeNode*;

    [[nodiscard]] ScoreParams params() const noexcept;
    [[nodiscard]] std::vector<NodeRef> roots() const { return {index_->root_.get()}; }
    [[nodiscard]] NodeBound bound(const QueryScorer& scorer, NodeRef node) const {
      return node_bound(scorer, *node);
    }
    [[nodiscard]] bool is_leaf(NodeRef node) const noexcept { return node->is_leaf(); }
    template <typename F>
    void for_each_child(NodeRef node, F&& f) const {
      for (const auto& c : node->children()) f(static_cast<NodeRef>(c.get()));
    }
    template <typename F>
    void for_each_candidate(NodeRef node, const QueryScorer& scorer, F&& f) const {
      for (const auto& img : node->entries()) {
        if (scorer.shares_word(img)) f(img);
      }
    }
    [[nodiscard]] const RTreeNode& root() const noexcept { return *index_->root_; }
    [[nodiscard]] const CorpusStats& stats() const noexcept { return index_->stats_; }

   private:
    friend class StviiIndex;
    explicit View(const StviiIndex& index) : index_(&index), lock_(index.mutex_) {}

    const StviiIndex* index_;
    std::shared_lock<std::shared_mutex> lock_;
  };

  explicit StviiIndex(StviiConfig cfg);

  StviiIndex(const StviiIndex&) = delete;
  StviiIndex& operator=(const StviiIndex&) = delete;

  /// Throws DomainError or DataError on an invalid image.
  void insert(GeoTemporalImage img);
  /// Deletes every image with t_c < cutoff, condensing underfull nodes and
  /// reinserting their surviving entries. Returns the number deleted.
  std::size_t expire(Timestamp cutoff);

  [[nodiscard]] View read() const { return View(*this); }
  [[nodiscard]] SearchResult search(const Query& q) const;

  [[nodiscard]] const StviiConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t height() const;
  [[nodiscard]] std::size_t node_count() const;
  [[nodiscard]] CorpusStats stats() const;
  [[nodiscard]] std::vector<GeoTemporalImage> live_images() const;
  [[nodiscard]] std::size_t storage_bytes() const;

  /// Volume of `b` after scaling each axis to unit extent.
  [[nodiscard]] double volume(const Box3& b) const noexcept;

 private:
  void insert_entry(GeoTemporalImage img);
  std::unique_ptr<RTreeNode> split(RTreeNode& node);
  void expire_node(RTreeNode& node, Timestamp cutoff, std::vector<GeoTemporalImage>& orphans,
                   std::size_t& removed);
  void drop_subtree(const RTreeNode& node, std::size_t& removed);

  StviiConfig cfg_;
  double lat_scale_ = 1.0;
  double lon_scale_ = 1.0;
  double t_scale_ = 1.0;
  std::unique_ptr<RTreeNode> root_;
  std::size_t size_ = 0;
  CorpusStats stats_;
  mutable std::shared_mutex mutex_;
};

}  // namespace geostream
