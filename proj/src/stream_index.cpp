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

#include "geostream/stream_index.hpp"

#include <algorithm>
#include <string>
#include <type_traits>

#include "geostream/errors.hpp"

namespace geostream {

std::string_view to_string(IndexKind kind) noexcept {
  switch (kind) {
    case IndexKind::hiq: return "hiq";
    case IndexKind::ifa: return "ifa";
    case IndexKind::stvii: return "stvii";
  }
  return "?";
}

std::optional<IndexKind> parse_index_kind(std::string_view name) noexcept {
  for (IndexKind k : kAllIndexes) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

HiqConfig IndexOptions::hiq() const {
  HiqConfig cfg;
  cfg.segment_span = segment_span;
  cfg.window = window;
  cfg.capacity = capacity;
  cfg.max_depth = max_depth;
  cfg.domain = domain;
  cfg.scoring = scoring;
  return cfg;
}

IfaConfig IndexOptions::ifa() const { return {domain, scoring}; }

StviiConfig IndexOptions::stvii() const {
  StviiConfig cfg;
  cfg.capacity = capacity;
  cfg.time_span = segment_span * static_cast<Timestamp>(std::max<std::size_t>(window, 1));
  cfg.domain = domain;
  cfg.scoring = scoring;
  return cfg;
}

void IndexOptions::validate() const {
  hiq().validate();
  stvii().validate();
}

Timestamp WindowClock::align(Timestamp t) const noexcept {
  Timestamp q = t / span_;
  if (t % span_ != 0 && t < 0) --q;
  return q * span_;
}

void WindowClock::move_head(Timestamp head) {
  const auto w = static_cast<Timestamp>(window_);
  if (!head_) {
    first_ = head;
  } else if (head >= *head_ + (w + 1) * span_) {
    first_ = head - (w - 1) * span_;
  }
  head_ = head;
}

bool WindowClock::advance(Timestamp now) {
  if (head_ && now < *head_ + span_) return false;
  move_head(align(now));
  return true;
}

void WindowClock::roll(Timestamp now) {
  if (!head_) {
    move_head(align(now));
    return;
  }
  move_head(std::max(*head_ + span_, align(now)));
}

std::optional<Timestamp> WindowClock::start() const {
  if (!head_) return std::nullopt;
  return std::max(first_, *head_ - static_cast<Timestamp>(window_ - 1) * span_);
}

std::optional<Timestamp> WindowClock::head_end() const {
  if (!head_) return std::nullopt;
  return *head_ + span_;
}

StreamIndex::StreamIndex(IndexKind kind, const IndexOptions& options)
    : kind_(kind), clock_(options.segment_span, options.window) {
  options.validate();
  switch (kind) {
    case IndexKind::hiq: impl_ = std::make_unique<HiqIndex>(options.hiq()); break;
    case IndexKind::ifa: impl_ = std::make_unique<IfaIndex>(options.ifa()); break;
    case IndexKind::stvii: impl_ = std::make_unique<StviiIndex>(options.stvii()); break;
  }
}

const HiqIndex* StreamIndex::hiq() const noexcept {
  const auto* p = std::get_if<std::unique_ptr<HiqIndex>>(&impl_);
  return p ? p->get() : nullptr;
}

const IfaIndex* StreamIndex::ifa() const noexcept {
  const auto* p = std::get_if<std::unique_ptr<IfaIndex>>(&impl_);
  return p ? p->get() : nullptr;
}

const StviiIndex* StreamIndex::stvii() const noexcept {
  const auto* p = std::get_if<std::unique_ptr<StviiIndex>>(&impl_);
  return p ? p->get() : nullptr;
}

std::size_t StreamIndex::expire_baseline() {
  const Timestamp cutoff = *clock_.start();
  return std::visit(
      [&](auto& idx) -> std::size_t {
        using T = std::decay_t<decltype(*idx)>;
        if constexpr (std::is_same_v<T, HiqIndex>) {
          return 0;
        } else {
          return idx->expire(cutoff);
        }
      },
      impl_);
}

void StreamIndex::insert(GeoTemporalImage img) {
  if (auto* h = std::get_if<std::unique_ptr<HiqIndex>>(&impl_)) {
    const Timestamp t = img.t_c;
    (*h)->insert(std::move(img));
    clock_.advance(t);
    return;
  }
  if (clock_.advance(img.t_c)) expire_baseline();
  if (img.t_c < *clock_.start()) {
    throw LateArrivalError("image " + std::to_string(img.id) + " is older than the live window");
  }
  std::visit(
      [&](auto& idx) {
        using T = std::decay_t<decltype(*idx)>;
        if constexpr (!std::is_same_v<T, HiqIndex>) idx->insert(std::move(img));
      },
      impl_);
}

std::size_t StreamIndex::advance(Timestamp now) {
  const std::size_t before = size();
  if (!clock_.advance(now)) return 0;
  if (auto* h = std::get_if<std::unique_ptr<HiqIndex>>(&impl_)) {
    (*h)->roll_segment(now);
  } else {
    expire_baseline();
  }
  return before - size();
}

std::size_t StreamIndex::roll(Timestamp now) {
  const std::size_t before = size();
  clock_.roll(now);
  if (auto* h = std::get_if<std::unique_ptr<HiqIndex>>(&impl_)) {
    (*h)->roll_segment(now);
  } else {
    expire_baseline();
  }
  return before - size();
}

SearchResult StreamIndex::search(const Query& q) const {
  return std::visit([&](const auto& idx) { return idx->search(q); }, impl_);
}

std::size_t StreamIndex::size() const {
  return std::visit([](const auto& idx) { return idx->size(); }, impl_);
}

std::size_t StreamIndex::node_count() const {
  return std::visit(
      [](const auto& idx) -> std::size_t {
        using T = std::decay_t<decltype(*idx)>;
        if constexpr (std::is_same_v<T, IfaIndex>) {
          return idx->list_count();
        } else {
          return idx->node_count();
        }
      },
      impl_);
}

std::size_t StreamIndex::storage_bytes() const {
  return std::visit([](const auto& idx) { return idx->storage_bytes(); }, impl_);
}

CorpusStats StreamIndex::stats() const {
  return std::visit([](const auto& idx) { return idx->stats(); }, impl_);
}

std::vector<GeoTemporalImage> StreamIndex::live_images() const {
  return std::visit([](const auto& idx) { return idx->live_images(); }, impl_);
}

}  // namespace geostream
