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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geostream/model.hpp"

namespace geostream {

enum class SpatialMode { uniform, gaussian_clusters };

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t image_count = 1000;
  std::uint32_t vocab_size = 10000;
  double mean_terms = 120.0;      ///< mean of sum(tf) per image
  double zipf_exponent = 1.0;
  SpatialMode spatial = SpatialMode::uniform;
  std::size_t clusters = 16;
  double cluster_sigma = 1.0;      ///< degrees
  double arrival_rate = 200.0;     ///< images per second
  Timestamp start_time = 1'500'000'000;
  ImageId first_id = 1;
  SpatialDomain domain;

  void validate() const;
};

/// Draws ranks 0..n-1 with P(r) proportional to 1/(r+1)^s.
class ZipfSampler {
 public:
  ZipfSampler(std::uint32_t n, double exponent);
  template <typename Rng>
  std::uint32_t operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return rank_of(u);
  }
  [[nodiscard]] std::uint32_t rank_of(double u) const noexcept;
  [[nodiscard]] double probability(std::uint32_t rank) const noexcept;

 private:
  std::vector<double> cdf_;
};

/// Deterministic synthetic image stream with Poisson arrivals.
class ImageGenerator {
 public:
  explicit ImageGenerator(GeneratorConfig cfg);

  [[nodiscard]] bool done() const noexcept { return produced_ >= cfg_.image_count; }
  GeoTemporalImage next();

 private:
  GeoPoint draw_location();

  GeneratorConfig cfg_;
  std::mt19937_64 rng_;
  ZipfSampler zipf_;
  std::vector<GeoPoint> centers_;
  double clock_ = 0.0;
  std::size_t produced_ = 0;
};

[[nodiscard]] std::vector<GeoTemporalImage> generate_images(const GeneratorConfig& cfg);

struct QueryRecord {
  std::uint64_t qid = 0;
  Query query;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct QueryConfig {
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::size_t words = 10;   ///< l, capped by the dataset vocabulary
  std::uint32_t k = 10;
  Weights weights;
  /// Query timestamp; defaults to the newest record of the dataset.
  std::optional<Timestamp> time;
};

/// Query locations are copied from random dataset records and word sets are
/// sampled by term occurrence in the dataset. Throws DataError when empty.
[[nodiscard]] std::vector<QueryRecord> generate_queries(const QueryConfig& cfg,
                                                        std::span<const GeoTemporalImage> dataset);

// TSV formats. Dataset lines:
//   id \t lat \t lon \t timestamp \t word:tf,word:tf,...
// Query lines:
//   qid \t lat \t lon \t timestamp \t k \t w1,w2,w3 \t word,word,...
// Reals are written in shortest round-trip form.

void write_dataset(std::ostream& out, std::span<const GeoTemporalImage> images);
void write_dataset(const std::filesystem::path& path, std::span<const GeoTemporalImage> images);
/// Throws DataError naming the line on malformed input or duplicate ids.
[[nodiscard]] std::vector<GeoTemporalImage> parse_dataset(std::istream& in);
[[nodiscard]] std::vector<GeoTemporalImage> parse_dataset(const std::filesystem::path& path);

void write_queries(std::ostream& out, std::span<const QueryRecord> queries);
void write_queries(const std::filesystem::path& path, std::span<const QueryRecord> queries);
[[nodiscard]] std::vector<QueryRecord> parse_queries(std::istream& in);
[[nodiscard]] std::vector<QueryRecord> parse_queries(const std::filesystem::path& path);

[[nodiscard]] std::string format_real(double v);

}  // namespace geostream
