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

#include "geostream/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include "geostream/errors.hpp"

namespace geostream {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); }

bool has_axis(std::span<const BenchAxis> axes, BenchAxis a) {
  return std::find(axes.begin(), axes.end(), a) != axes.end();
}

void emit(BenchOutcome& out, const BenchConfig& cfg, BenchAxis axis, double value, IndexKind kind, Metric metric,
          std::vector<double> samples) {
  if (!cfg.metrics.empty() && std::find(cfg.metrics.begin(), cfg.metrics.end(), metric) == cfg.metrics.end()) {
    return;
  }
  const Summary s = summarize(std::move(samples));
  out.rows.push_back({axis, value, kind, metric, s.mean, s.p50, s.p95});
}

std::vector<GeoTemporalImage> stream_order(std::span<const GeoTemporalImage> data) {
  std::vector<GeoTemporalImage> out(data.begin(), data.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.t_c < b.t_c || (a.t_c == b.t_c && a.id < b.id);
  });
  return out;
}

StreamIndex build(IndexKind kind, const IndexOptions& options, std::span<const GeoTemporalImage> data,
                  std::vector<double>* insert_us = nullptr) {
  StreamIndex idx(kind, options);
  for (const auto& img : data) {
    if (insert_us == nullptr) {
      idx.insert(img);
      continue;
    }
    GeoTemporalImage copy = img;
    const auto t0 = Clock::now();
    idx.insert(std::move(copy));
    insert_us->push_back(micros(Clock::now() - t0));
  }
  return idx;
}

struct UpdatePoint {
  BenchAxis axis;
  double value;
  GeneratorConfig data;
  IndexOptions options;
};

std::vector<UpdatePoint> update_points(const BenchConfig& cfg, std::span<const BenchAxis> axes) {
  std::vector<UpdatePoint> points;
  IndexOptions base = cfg.options;
  base.domain = cfg.data.domain;
  if (has_axis(axes, BenchAxis::arrival_rate)) {
    for (double rate : cfg.arrival_rates) {
      UpdatePoint p{BenchAxis::arrival_rate, rate, cfg.data, base};
      p.data.arrival_rate = rate;
      points.push_back(p);
    }
  }
  if (has_axis(axes, BenchAxis::node_capacity)) {
    for (std::size_t c : cfg.capacities) {
      UpdatePoint p{BenchAxis::node_capacity, static_cast<double>(c), cfg.data, base};
      p.options.capacity = c;
      points.push_back(p);
    }
  }
  return points;
}

// Reuses the generated stream while consecutive points share a generator.
class StreamCache {
 public:
  const std::vector<GeoTemporalImage>& get(const GeneratorConfig& g) {
    if (!key_ || key_->seed != g.seed || key_->arrival_rate != g.arrival_rate) {
      data_ = generate_images(g);
      key_ = g;
    }
    return data_;
  }

 private:
  std::optional<GeneratorConfig> key_;
  std::vector<GeoTemporalImage> data_;
};

void run_queries(BenchOutcome& out, const BenchConfig& cfg, BenchAxis axis, double value,
                 std::span<const StreamIndex* const> indexes, std::span<const QueryRecord> queries,
                 std::size_t threads) {
  if (queries.empty()) return;
  std::vector<std::uint64_t> reference;
  for (const StreamIndex* idx : indexes) {
    const std::size_t n = queries.size();
    std::vector<double> ms(n), nodes(n), scored(n);
    std::vector<std::uint64_t> sums(n);
    auto run_one = [&](std::size_t i) {
      const auto t0 = Clock::now();
      const SearchResult r = idx->search(queries[i].query);
      ms[i] = micros(Clock::now() - t0) / 1000.0;
      nodes[i] = static_cast<double>(r.stats.nodes_visited);
      scored[i] = static_cast<double>(r.stats.images_scored);
      sums[i] = result_checksum(r);
    };
    if (threads <= 1) {
      for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < n; i += threads) run_one(i);
        });
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t plain = result_checksum(idx->search(queries[i].query));
      ++out.checksums_compared;
      if (plain != sums[i]) ++out.checksum_mismatches;
      if (!reference.empty()) {
        ++out.checksums_compared;
        if (reference[i] != plain) ++out.checksum_mismatches;
      }
    }
    if (reference.empty()) reference = sums;
    emit(out, cfg, axis, value, idx->kind(), Metric::response_ms, std::move(ms));
    emit(out, cfg, axis, value, idx->kind(), Metric::nodes, std::move(nodes));
    emit(out, cfg, axis, value, idx->kind(), Metric::images_scored, std::move(scored));
  }
}

}  // namespace

std::string_view to_string(BenchAxis axis) noexcept {
  switch (axis) {
    case BenchAxis::arrival_rate: return "arrival_rate";
    case BenchAxis::node_capacity: return "node_capacity";
    case BenchAxis::l: return "l";
    case BenchAxis::k: return "k";
    case BenchAxis::n: return "n";
    case BenchAxis::omega1: return "omega1";
    case BenchAxis::omega2: return "omega2";
    case BenchAxis::omega3: return "omega3";
    case BenchAxis::threads: return "threads";
  }
  return "?";
}

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::insert_us: return "insert_us";
    case Metric::delete_us: return "delete_us";
    case Metric::response_ms: return "response_ms";
    case Metric::nodes: return "nodes";
    case Metric::images_scored: return "images_scored";
    case Metric::bytes: return "bytes";
  }
  return "?";
}

std::optional<BenchAxis> parse_axis(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(BenchAxis::threads); ++i) {
    const auto a = static_cast<BenchAxis>(i);
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Metric::bytes); ++i) {
    const auto m = static_cast<Metric>(i);
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Summary summarize(std::vector<double> samples) {
  if (samples.empty()) return {};
  std::sort(samples.begin(), samples.end());
  double sum = 0;
  for (double v : samples) sum += v;
  auto rank = [&](double p) {
    const auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(r, 1, samples.size()) - 1];
  };
  return {sum / static_cast<double>(samples.size()), rank(0.5), rank(0.95)};
}

void BenchConfig::validate() const {
  if (indexes.empty()) throw ConfigError("bench needs at least one index");
  options.validate();
  data.validate();
  for (double r : arrival_rates) {
    if (!(r > 0) || !std::isfinite(r)) throw ConfigError("arrival rates must be positive");
  }
  for (std::size_t c : capacities) {
    if (c < 2) throw ConfigError("node capacities must be at least 2");
  }
  for (std::size_t l : word_counts) {
    if (l == 0) throw ConfigError("query word counts must be positive");
  }
  for (std::uint32_t k : ks) {
    if (k == 0) throw ConfigError("k values must be positive");
  }
  for (std::size_t n : sizes) {
    if (n == 0) throw ConfigError("dataset sizes must be positive");
  }
  for (double w : omegas) {
    if (!(w > 0 && w < 1)) throw ConfigError("omega values must lie in (0, 1)");
  }
  if (threads == 0) throw ConfigError("threads must be at least 1");
}

std::vector<std::size_t> BenchConfig::size_points(std::size_t total) const {
  std::vector<std::size_t> out;
  if (!sizes.empty()) {
    for (std::size_t n : sizes) out.push_back(std::min(n, total));
  } else {
    for (std::size_t i = 1; i <= 4; ++i) out.push_back(std::max<std::size_t>(1, total * i / 4));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void BenchOutcome::append(BenchOutcome other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  checksums_compared += other.checksums_compared;
  checksum_mismatches += other.checksum_mismatches;
}

std::uint64_t result_checksum(const SearchResult& result) noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& e : result.entries) {
    for (int b = 0; b < 8; ++b) {
      h ^= (e.id >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::size_t estimate_storage(const StreamIndex& index) { return index.storage_bytes(); }

BenchOutcome run_insertion_bench(const BenchConfig& cfg, std::span<const BenchAxis> axes) {
  cfg.validate();
  BenchOutcome out;
  StreamCache cache;
  for (const auto& p : update_points(cfg, axes)) {
    const auto& data = cache.get(p.data);
    for (IndexKind kind : cfg.indexes) {
      std::vector<double> samples;
      samples.reserve(data.size());
      const StreamIndex idx = build(kind, p.options, data, &samples);
      emit(out, cfg, p.axis, p.value, kind, Metric::insert_us, std::move(samples));
      emit(out, cfg, p.axis, p.value, kind, Metric::bytes, {static_cast<double>(estimate_storage(idx))});
    }
  }
  return out;
}

BenchOutcome run_deletion_bench(const BenchConfig& cfg, std::span<const BenchAxis> axes) {
  cfg.validate();
  BenchOutcome out;
  StreamCache cache;
  for (const auto& p : update_points(cfg, axes)) {
    const auto& data = cache.get(p.data);
    for (IndexKind kind : cfg.indexes) {
      StreamIndex idx = build(kind, p.options, data);
      std::vector<double> samples;
      Timestamp now = data.empty() ? 0 : data.back().t_c;
      while (idx.size() > 0) {
        now += p.options.segment_span;
        const auto t0 = Clock::now();
        const std::size_t expired = idx.roll(now);
        const double us = micros(Clock::now() - t0);
        if (expired > 0) samples.push_back(us / static_cast<double>(expired));
      }
      emit(out, cfg, p.axis, p.value, kind, Metric::delete_us, std::move(samples));
    }
  }
  return out;
}

BenchOutcome run_query_bench(std::span<const GeoTemporalImage> dataset, const BenchConfig& cfg,
                             std::span<const BenchAxis> axes) {
  cfg.validate();
  BenchOutcome out;
  if (dataset.empty() || cfg.queries.count == 0) return out;
  const std::vector<GeoTemporalImage> data = stream_order(dataset);

  std::vector<StreamIndex> full;
  std::vector<const StreamIndex*> full_ptrs;
  auto full_indexes = [&]() -> std::span<const StreamIndex* const> {
    if (full.empty()) {
      for (IndexKind kind : cfg.indexes) full.push_back(build(kind, cfg.options, data));
      for (const auto& idx : full) full_ptrs.push_back(&idx);
    }
    return full_ptrs;
  };

  for (BenchAxis axis : axes) {
    switch (axis) {
      case BenchAxis::l:
        for (std::size_t l : cfg.word_counts) {
          QueryConfig qc = cfg.queries;
          qc.words = l;
          run_queries(out, cfg, axis, static_cast<double>(l), full_indexes(), generate_queries(qc, data), 1);
        }
        break;
      case BenchAxis::k:
        for (std::uint32_t k : cfg.ks) {
          QueryConfig qc = cfg.queries;
          qc.k = k;
          run_queries(out, cfg, axis, k, full_indexes(), generate_queries(qc, data), 1);
        }
        break;
      case BenchAxis::omega1:
      case BenchAxis::omega2:
      case BenchAxis::omega3:
        for (double w : cfg.omegas) {
          QueryConfig qc = cfg.queries;
          const double rest = (1.0 - w) / 2.0;
          qc.weights = {rest, rest, rest};
          if (axis == BenchAxis::omega1) qc.weights.spatial = w;
          if (axis == BenchAxis::omega2) qc.weights.visual = w;
          if (axis == BenchAxis::omega3) qc.weights.temporal = w;
          run_queries(out, cfg, axis, w, full_indexes(), generate_queries(qc, data), 1);
        }
        break;
      case BenchAxis::n:
        for (std::size_t n : cfg.size_points(data.size())) {
          const std::span<const GeoTemporalImage> prefix(data.data(), n);
          std::vector<StreamIndex> built;
          for (IndexKind kind : cfg.indexes) built.push_back(build(kind, cfg.options, prefix));
          std::vector<const StreamIndex*> ptrs;
          for (const auto& idx : built) ptrs.push_back(&idx);
          run_queries(out, cfg, axis, static_cast<double>(n), ptrs, generate_queries(cfg.queries, prefix), 1);
        }
        break;
      case BenchAxis::threads:
        run_queries(out, cfg, axis, static_cast<double>(cfg.threads), full_indexes(),
                    generate_queries(cfg.queries, data), cfg.threads);
        break;
      case BenchAxis::arrival_rate:
      case BenchAxis::node_capacity:
        throw ArgumentError(std::string("not a query axis: ") + std::string(to_string(axis)));
    }
  }
  return out;
}

BenchOutcome run_bench(const BenchConfig& cfg, std::span<const BenchAxis> axes) {
  cfg.validate();
  std::vector<BenchAxis> update, query;
  for (BenchAxis a : axes) {
    (a == BenchAxis::arrival_rate || a == BenchAxis::node_capacity ? update : query).push_back(a);
  }
  BenchOutcome out;
  if (!update.empty()) {
    out.append(run_insertion_bench(cfg, update));
    out.append(run_deletion_bench(cfg, update));
  }
  if (!query.empty()) {
    BenchConfig qcfg = cfg;
    qcfg.options.domain = cfg.data.domain;
    out.append(run_query_bench(generate_images(cfg.data), qcfg, query));
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.axis) << ',' << format_real(r.value) << ',' << to_string(r.index) << ','
        << to_string(r.metric) << ',' << format_real(r.mean) << ',' << format_real(r.p50) << ','
        << format_real(r.p95) << '\n';
  }
}

}  // namespace geostream
