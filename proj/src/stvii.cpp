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

#include "geostream/stvii.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "geostream/errors.hpp"

namespace geostream {

void Box3::expand(const Box3& o) noexcept {
  min_lat = std::min(min_lat, o.min_lat);
  max_lat = std::max(max_lat, o.max_lat);
  min_lon = std::min(min_lon, o.min_lon);
  max_lon = std::max(max_lon, o.max_lon);
  min_t = std::min(min_t, o.min_t);
  max_t = std::max(max_t, o.max_t);
}

std::size_t StviiConfig::min_fill() const noexcept { return (4 * capacity + 9) / 10; }

void StviiConfig::validate() const {
  if (capacity < 2) throw ConfigError("R-tree node capacity must be at least 2");
  if (time_span <= 0) throw ConfigError("time normalization span must be positive");
  domain.validate();
  scoring.validate();
}

// RTreeNode ------------------------------------------------------------------

void RTreeNode::absorb(const GeoTemporalImage& img) {
  if (empty()) {
    mbr_ = Box3::point(img);
  } else {
    mbr_.expand(Box3::point(img));
  }
  const std::uint64_t len = img.term_count();
  for (const auto& wc : img.psi) {
    double& f = ivf_[wc.word.value];
    f = std::max(f, term_frequency(wc.tf, len));
  }
}

void RTreeNode::absorb(const RTreeNode& child) {
  mbr_.expand(child.mbr_);
  for (const auto& [word, freq] : child.ivf_) {
    double& f = ivf_[word];
    f = std::max(f, freq);
  }
}

void RTreeNode::refresh() {
  ivf_.clear();
  mbr_ = {};
  if (leaf_) {
    std::vector<GeoTemporalImage> entries = std::move(entries_);
    entries_.clear();
    for (auto& e : entries) {
      absorb(e);
      entries_.push_back(std::move(e));
    }
    return;
  }
  if (children_.empty()) return;
  mbr_ = children_.front()->mbr_;
  for (const auto& c : children_) absorb(*c);
}

std::size_t RTreeNode::storage_bytes() const noexcept {
  std::size_t bytes = sizeof(RTreeNode);
  bytes += ivf_.capacity() * (sizeof(std::pair<std::uint32_t, double>) + 1);
  bytes += entries_.capacity() * sizeof(GeoTemporalImage);
  for (const auto& e : entries_) bytes += e.psi.capacity() * sizeof(WordCount);
  bytes += children_.capacity() * sizeof(std::unique_ptr<RTreeNode>);
  for (const auto& c : children_) bytes += c->storage_bytes();
  return bytes;
}

NodeBound node_bound(const QueryScorer& scorer, const RTreeNode& node) {
  return scorer.bound(node.mbr().spatial(), node.t_max(),
                      [&](VisualWordId w) { return node.max_frequency(w); });
}

double stvii_mind(const Query& q, const RTreeNode& node, const ScoreParams& params) {
  return node_bound(QueryScorer(q, params), node).value;
}

// StviiIndex -----------------------------------------------------------------

namespace {

/// Quadratic split: returns 0/1 group per box, each group at least `min_fill`.
template <typename Volume>
std::vector<int> quadratic_split(std::span<const Box3> boxes, std::size_t min_fill, Volume&& volume) {
  const std::size_t n = boxes.size();
  std::vector<double> vols(n);
  for (std::size_t i = 0; i < n; ++i) vols[i] = volume(boxes[i]);

  // seeds: the pair wasting the most volume when grouped together
  std::size_t s0 = 0;
  std::size_t s1 = 1;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = volume(boxes[i].merged(boxes[j])) - vols[i] - vols[j];
      if (d > worst) {
        worst = d;
        s0 = i;
        s1 = j;
      }
    }
  }

  std::vector<int> group(n, -1);
  group[s0] = 0;
  group[s1] = 1;
  std::array<Box3, 2> cover{boxes[s0], boxes[s1]};
  std::array<std::size_t, 2> count{1, 1};
  std::size_t remaining = n - 2;

  while (remaining > 0) {
    for (int g = 0; g < 2; ++g) {
      if (count[g] + remaining == min_fill) {
        for (std::size_t i = 0; i < n; ++i) {
          if (group[i] < 0) group[i] = g;
        }
        return group;
      }
    }
    // next: the box with the strongest preference for one group
    std::size_t pick = n;
    double best_diff = -1.0;
    std::array<double, 2> best_grow{};
    for (std::size_t i = 0; i < n; ++i) {
      if (group[i] >= 0) continue;
      const double g0 = volume(cover[0].merged(boxes[i])) - volume(cover[0]);
      const double g1 = volume(cover[1].merged(boxes[i])) - volume(cover[1]);
      const double diff = std::abs(g0 - g1);
      if (diff > best_diff) {
        best_diff = diff;
        pick = i;
        best_grow = {g0, g1};
      }
    }
    int g;
    if (best_grow[0] != best_grow[1]) {
      g = best_grow[0] < best_grow[1] ? 0 : 1;
    } else {
      const double v0 = volume(cover[0]);
      const double v1 = volume(cover[1]);
      if (v0 != v1) {
        g = v0 < v1 ? 0 : 1;
      } else {
        g = count[0] <= count[1] ? 0 : 1;
      }
    }
    group[pick] = g;
    cover[g].expand(boxes[pick]);
    ++count[g];
    --remaining;
  }
  return group;
}

}  // namespace

ScoreParams StviiIndex::View::params() const noexcept {
  return {index_->cfg_.scoring, index_->cfg_.domain, &index_->stats_};
}

StviiIndex::StviiIndex(StviiConfig cfg)
    : cfg_(std::move(cfg)), root_(std::make_unique<RTreeNode>(true)) {
  cfg_.validate();
  lat_scale_ = 1.0 / (cfg_.domain.max_lat - cfg_.domain.min_lat);
  lon_scale_ = 1.0 / (cfg_.domain.max_lon - cfg_.domain.min_lon);
  t_scale_ = 1.0 / static_cast<double>(cfg_.time_span);
}

double StviiIndex::volume(const Box3& b) const noexcept {
  return (b.max_lat - b.min_lat) * lat_scale_ * ((b.max_lon - b.min_lon) * lon_scale_) *
         (static_cast<double>(b.max_t - b.min_t) * t_scale_);
}

void StviiIndex::insert(GeoTemporalImage img) {
  validate_image(img, cfg_.domain);
  std::unique_lock lock(mutex_);
  stats_.add(img);
  insert_entry(std::move(img));
  ++size_;
}

void StviiIndex::insert_entry(GeoTemporalImage img) {
  const Box3 pt = Box3::point(img);
  std::vector<RTreeNode*> path;
  RTreeNode* n = root_.get();
  while (!n->is_leaf()) {
    n->absorb(img);
    path.push_back(n);
    RTreeNode* best = nullptr;
    double best_grow = 0.0;
    double best_vol = 0.0;
    for (const auto& c : n->children_) {
      const double vol = volume(c->mbr_);
      const double grow = volume(c->mbr_.merged(pt)) - vol;
      if (best == nullptr || grow < best_grow ||
          (grow == best_grow && (vol < best_vol || (vol == best_vol && c->fanout() < best->fanout())))) {
        best = c.get();
        best_grow = grow;
        best_vol = vol;
      }
    }
    n = best;
  }
  n->absorb(img);
  n->entries_.push_back(std::move(img));

  RTreeNode* cur = n;
  while (cur->fanout() > cfg_.capacity) {
    std::unique_ptr<RTreeNode> sibling = split(*cur);
    if (cur == root_.get()) {
      auto root = std::make_unique<RTreeNode>(false);
      root->children_.push_back(std::move(root_));
      root->children_.push_back(std::move(sibling));
      root->refresh();
      root_ = std::move(root);
      break;
    }
    RTreeNode* parent = path.back();
    path.pop_back();
    parent->children_.push_back(std::move(sibling));
    cur = parent;
  }
}

std::unique_ptr<RTreeNode> StviiIndex::split(RTreeNode& node) {
  auto vol = [this](const Box3& b) { return volume(b); };
  auto sibling = std::make_unique<RTreeNode>(node.leaf_);
  std::vector<Box3> boxes;
  boxes.reserve(node.fanout());
  if (node.leaf_) {
    for (const auto& e : node.entries_) boxes.push_back(Box3::point(e));
  } else {
    for (const auto& c : node.children_) boxes.push_back(c->mbr_);
  }
  const std::vector<int> group = quadratic_split(boxes, cfg_.min_fill(), vol);
  if (node.leaf_) {
    std::vector<GeoTemporalImage> keep;
    for (std::size_t i = 0; i < group.size(); ++i) {
      (group[i] == 0 ? keep : sibling->entries_).push_back(std::move(node.entries_[i]));
    }
    node.entries_ = std::move(keep);
  } else {
    std::vector<std::unique_ptr<RTreeNode>> keep;
    for (std::size_t i = 0; i < group.size(); ++i) {
      (group[i] == 0 ? keep : sibling->children_).push_back(std::move(node.children_[i]));
    }
    node.children_ = std::move(keep);
  }
  node.refresh();
  sibling->refresh();
  return sibling;
}

namespace {

template <typename F>
void drain(std::unique_ptr<RTreeNode> node, F&& sink) {
  for_each_image(*node, [&](const GeoTemporalImage& img) { sink(img); });
}

}  // namespace

void StviiIndex::drop_subtree(const RTreeNode& node, std::size_t& removed) {
  for_each_image(node, [&](const GeoTemporalImage& img) {
    stats_.remove(img);
    ++removed;
  });
}

void StviiIndex::expire_node(RTreeNode& node, Timestamp cutoff, std::vector<GeoTemporalImage>& orphans,
                             std::size_t& removed) {
  if (node.leaf_) {
    std::erase_if(node.entries_, [&](const GeoTemporalImage& img) {
      if (img.t_c >= cutoff) return false;
      stats_.remove(img);
      ++removed;
      return true;
    });
    node.refresh();
    return;
  }
  std::vector<std::unique_ptr<RTreeNode>> keep;
  for (auto& c : node.children_) {
    if (c->mbr_.min_t >= cutoff) {
      keep.push_back(std::move(c));
    } else if (c->mbr_.max_t < cutoff) {
      drop_subtree(*c, removed);
    } else {
      expire_node(*c, cutoff, orphans, removed);
      if (c->fanout() >= cfg_.min_fill()) {
        keep.push_back(std::move(c));
      } else {
        drain(std::move(c), [&](const GeoTemporalImage& img) { orphans.push_back(img); });
      }
    }
  }
  node.children_ = std::move(keep);
  node.refresh();
}

std::size_t StviiIndex::expire(Timestamp cutoff) {
  std::unique_lock lock(mutex_);
  std::vector<GeoTemporalImage> orphans;
  std::size_t removed = 0;
  expire_node(*root_, cutoff, orphans, removed);
  while (!root_->leaf_ && root_->children_.size() == 1) {
    std::unique_ptr<RTreeNode> child = std::move(root_->children_.front());
    root_ = std::move(child);
  }
  if (!root_->leaf_ && root_->children_.empty()) root_ = std::make_unique<RTreeNode>(true);
  for (auto& img : orphans) insert_entry(std::move(img));
  size_ -= removed;
  return removed;
}

SearchResult StviiIndex::search(const Query& q) const { return top_k_search(q, read()); }

std::size_t StviiIndex::size() const {
  std::shared_lock lock(mutex_);
  return size_;
}

std::size_t StviiIndex::height() const {
  std::shared_lock lock(mutex_);
  std::size_t h = 1;
  for (const RTreeNode* n = root_.get(); !n->is_leaf(); n = n->children_.front().get()) ++h;
  return h;
}

namespace {

std::size_t count_nodes(const RTreeNode& n) {
  std::size_t c = 1;
  for (const auto& child : n.children()) c += count_nodes(*child);
  return c;
}

}  // namespace

std::size_t StviiIndex::node_count() const {
  std::shared_lock lock(mutex_);
  return count_nodes(*root_);
}

CorpusStats StviiIndex::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

std::vector<GeoTemporalImage> StviiIndex::live_images() const {
  std::shared_lock lock(mutex_);
  std::vector<GeoTemporalImage> out;
  out.reserve(size_);
  for_each_image(*root_, [&](const GeoTemporalImage& img) { out.push_back(img); });
  return out;
}

std::size_t StviiIndex::storage_bytes() const {
  std::shared_lock lock(mutex_);
  return sizeof(StviiIndex) + stats_.storage_bytes() + root_->storage_bytes();
}

}  // namespace geostream
