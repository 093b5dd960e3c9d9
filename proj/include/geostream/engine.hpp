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

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "geostream/model.hpp"

namespace geostream {

struct ResultEntry {
  ImageId id = 0;
  ScoreBreakdown score;

  friend constexpr bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

/// Ascending total score, ties by ascending id.
[[nodiscard]] constexpr bool ranks_before(const ResultEntry& a, const ResultEntry& b) noexcept {
  return a.score.total < b.score.total || (a.score.total == b.score.total && a.id < b.id);
}

struct SearchStats {
  std::size_t nodes_visited = 0;
  std::size_t images_scored = 0;
  std::size_t heap_peak = 0;

  friend constexpr bool operator==(const SearchStats&, const SearchStats&) = default;
};

struct SearchResult {
  std::vector<ResultEntry> entries;
  SearchStats stats;
};

/// Bounded collection of the k best entries seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  /// Current admission threshold: the k-th best score, +inf until k entries are held.
  [[nodiscard]] double threshold() const noexcept {
    return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.front().score.total;
  }

  /// Offers an entry; returns true if it was kept.
  bool offer(const ResultEntry& e) {
    if (heap_.size() < k_) {
      heap_.push_back(e);
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
      return true;
    }
    if (!ranks_before(e, heap_.front())) return false;
    std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
    heap_.back() = e;
    std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    return true;
  }

  [[nodiscard]] std::vector<ResultEntry> take_sorted() && {
    std::sort_heap(heap_.begin(), heap_.end(), ranks_before);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<ResultEntry> heap_;  // max-heap under ranks_before
};

/// What the best-first loop needs from an index. `NodeRef` is a cheap handle.
template <typename I>
concept SearchableIndex = requires(const I& index, const QueryScorer& scorer,
                                   typename I::NodeRef node) {
  { index.params() } -> std::convertible_to<ScoreParams>;
  { index.roots() } -> std::convertible_to<std::vector<typename I::NodeRef>>;
  { index.bound(scorer, node) } -> std::same_as<NodeBound>;
  { index.is_leaf(node) } -> std::convertible_to<bool>;
  index.for_each_child(node, [](typename I::NodeRef) {});
  index.for_each_candidate(node, scorer, [](const GeoTemporalImage&) {});
};

/// Observer that ignores everything; tests plug in auditing observers.
struct NullSearchObserver {
  template <typename NodeRef>
  void visited(NodeRef, double) {}
  void pruned(double) {}
  void threshold(double) {}
};

/// Best-first top-k search over any conforming index.
///
/// Nodes are ordered in a min-heap by their lower bound; a node is expanded
/// only while its bound does not exceed the admission threshold, and leaf
/// images are scored only if they share a query word.
template <SearchableIndex Index, typename Observer = NullSearchObserver>
SearchResult top_k_search(const Query& q, const Index& index, Observer&& observer = {}) {
  using NodeRef = typename Index::NodeRef;
  validate_query(q);
  SearchResult out;
  const ScoreParams params = index.params();
  if (params.stats == nullptr || params.stats->total_terms() == 0) return out;

  const QueryScorer scorer(q, params);
  if (scorer.active_words().empty()) return out;

  struct HeapEntry {
    double bound;
    std::uint64_t seq;  // insertion order, keeps ties deterministic
    NodeRef node;
  };
  auto later = [](const HeapEntry& a, const HeapEntry& b) {
    return a.bound > b.bound || (a.bound == b.bound && a.seq > b.seq);
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(later)> heap(later);
  std::uint64_t seq = 0;
  TopK topk(q.k);

  auto push = [&](NodeRef node) {
    const NodeBound b = index.bound(scorer, node);
    if (!b.has_query_word) return;
    if (b.value > topk.threshold()) {
      observer.pruned(b.value);
      return;
    }
    heap.push({b.value, seq++, node});
    out.stats.heap_peak = std::max(out.stats.heap_peak, heap.size());
  };

  for (NodeRef root : index.roots()) push(root);

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (top.bound > topk.threshold()) {
      // Every remaining entry is at least as large.
      observer.pruned(top.bound);
      while (!heap.empty()) {
        observer.pruned(heap.top().bound);
        heap.pop();
      }
      break;
    }
    ++out.stats.nodes_visited;
    observer.visited(top.node, top.bound);
    if (index.is_leaf(top.node)) {
      index.for_each_candidate(top.node, scorer, [&](const GeoTemporalImage& img) {
        ++out.stats.images_scored;
        const ResultEntry e{img.id, scorer.score(img)};
        if (e.score.total <= topk.threshold() && topk.offer(e)) observer.threshold(topk.threshold());
      });
    } else {
      index.for_each_child(top.node, push);
    }
  }
  out.entries = std::move(topk).take_sorted();
  return out;
}

/// Scores every image sharing a query word and keeps the k best.
[[nodiscard]] std::vector<ResultEntry> brute_force_oracle(const Query& q,
                                                          std::span<const GeoTemporalImage> images,
                                                          const ScoreParams& params);

}  // namespace geostream
