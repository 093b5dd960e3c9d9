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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "geostream/engine.hpp"
#include "geostream/model.hpp"
#include "geostream/stream_index.hpp"
#include "geostream/workload.hpp"

namespace geostream {

enum class BenchAxis { arrival_rate, node_capacity, l, k, n, omega1, omega2, omega3, threads };
enum class Metric { insert_us, delete_us, response_ms, nodes, images_scored, bytes };

inline constexpr BenchAxis kUpdateAxes[] = {BenchAxis::arrival_rate, BenchAxis::node_capacity};
inline constexpr BenchAxis kQueryAxes[] = {BenchAxis::l,      BenchAxis::k,      BenchAxis::n,
                                           BenchAxis::omega1, BenchAxis::omega2, BenchAxis::omega3};

[[nodiscard]] std::string_view to_string(BenchAxis axis) noexcept;
[[nodiscard]] std::string_view to_string(Metric metric) noexcept;
[[nodiscard]] std::optional<BenchAxis> parse_axis(std::string_view name) noexcept;
[[nodiscard]] std::optional<Metric> parse_metric(std::string_view name) noexcept;

struct BenchRow {
  BenchAxis axis;
  double value;
  IndexKind index;
  Metric metric;
  double mean;
  double p50;
  double p95;
};

struct Summary {
  double mean = 0;
  double p50 = 0;
  double p95 = 0;
};

/// Nearest-rank percentiles. An empty sample summarizes to zeros.
[[nodiscard]] Summary summarize(std::vector<double> samples);

struct BenchConfig {
  std::vector<IndexKind> indexes{IndexKind::hiq, IndexKind::ifa, IndexKind::stvii};
  IndexOptions options;
  GeneratorConfig data;
  QueryConfig queries;
  std::vector<double> arrival_rates{200, 400, 800, 1600, 3200};
  std::vector<std::size_t> capacities{100, 200, 300, 400, 500};
  std::vector<std::size_t> word_counts{10, 50, 100, 150, 200};
  std::vector<std::uint32_t> ks{10, 20, 40, 60, 80, 100};
  /// Dataset prefixes for the n axis; empty means quarters of the dataset.
  std::vector<std::size_t> sizes;
  std::vector<double> omegas{1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7};
  /// Parallel query contexts for the threads axis.
  std::size_t threads = 1;
  /// Restricts the emitted metrics; empty keeps all.
  std::vector<Metric> metrics;

  void validate() const;
  /// Points of the n axis for a dataset holding `total` images.
  [[nodiscard]] std::vector<std::size_t> size_points(std::size_t total) const;
};

struct BenchOutcome {
  std::vector<BenchRow> rows;
  std::size_t checksums_compared = 0;
  std::size_t checksum_mismatches = 0;

  void append(BenchOutcome other);
};

/// FNV-1a over the ranked ids.
[[nodiscard]] std::uint64_t result_checksum(const SearchResult& result) noexcept;

/// Per-image insert latency and final footprint while sweeping arrival
/// rate and node capacity. Timestamps are synthesized at the target rate.
[[nodiscard]] BenchOutcome run_insertion_bench(const BenchConfig& cfg,
                                               std::span<const BenchAxis> axes = kUpdateAxes);
/// Per-image expiry cost while draining the window one slice at a time.
[[nodiscard]] BenchOutcome run_deletion_bench(const BenchConfig& cfg,
                                              std::span<const BenchAxis> axes = kUpdateAxes);
/// Response time, node accesses and images scored over the query axes.
/// An empty dataset or a zero query count yields no rows.
[[nodiscard]] BenchOutcome run_query_bench(std::span<const GeoTemporalImage> dataset, const BenchConfig& cfg,
                                           std::span<const BenchAxis> axes = kQueryAxes);
/// All requested axes in a fixed order; the dataset comes from cfg.data.
[[nodiscard]] BenchOutcome run_bench(const BenchConfig& cfg, std::span<const BenchAxis> axes);

/// Bytes held by nodes, posting entries and image records; see
/// storage_bytes() on each index for the size model.
[[nodiscard]] std::size_t estimate_storage(const StreamIndex& index);

inline constexpr std::string_view kCsvHeader = "axis,value,index,metric,mean,p50,p95";
void write_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace geostream
