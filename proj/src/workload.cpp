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

#include "geostream/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <type_traits>
#include <unordered_set>

#include "geostream/errors.hpp"

namespace geostream {

void GeneratorConfig::validate() const {
  if (vocab_size == 0) throw ConfigError("vocabulary size must be positive");
  if (!(mean_terms >= 1.0)) throw ConfigError("mean terms per image must be at least 1");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf exponent must be non-negative");
  if (!(arrival_rate > 0.0)) throw ConfigError("arrival rate must be positive");
  if (spatial == SpatialMode::gaussian_clusters && (clusters == 0 || !(cluster_sigma > 0.0))) {
    throw ConfigError("gaussian clusters need a positive count and sigma");
  }
  domain.validate();
}

// ZipfSampler ----------------------------------------------------------------

ZipfSampler::ZipfSampler(std::uint32_t n, double exponent) : cdf_(n) {
  double acc = 0.0;
  for (std::uint32_t r = 0; r < n; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r) + 1.0, exponent);
    cdf_[r] = acc;
  }
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::uint32_t ZipfSampler::rank_of(double u) const noexcept {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::uint32_t>(it - cdf_.begin());
}

double ZipfSampler::probability(std::uint32_t rank) const noexcept {
  return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

// ImageGenerator -------------------------------------------------------------

namespace {

GeneratorConfig validated(GeneratorConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

ImageGenerator::ImageGenerator(GeneratorConfig cfg)
    : cfg_(validated(std::move(cfg))), rng_(cfg_.seed), zipf_(cfg_.vocab_size, cfg_.zipf_exponent) {
  if (cfg_.spatial == SpatialMode::gaussian_clusters) {
    std::uniform_real_distribution<double> lat(cfg_.domain.min_lat, cfg_.domain.max_lat);
    std::uniform_real_distribution<double> lon(cfg_.domain.min_lon, cfg_.domain.max_lon);
    centers_.reserve(cfg_.clusters);
    for (std::size_t i = 0; i < cfg_.clusters; ++i) {
      const double a = lat(rng_);
      const double b = lon(rng_);
      centers_.push_back({a, b});
    }
  }
}

GeoPoint ImageGenerator::draw_location() {
  const SpatialDomain& d = cfg_.domain;
  if (cfg_.spatial == SpatialMode::uniform) {
    const double lat = std::uniform_real_distribution<double>(d.min_lat, d.max_lat)(rng_);
    const double lon = std::uniform_real_distribution<double>(d.min_lon, d.max_lon)(rng_);
    return {lat, lon};
  }
  const auto c = std::uniform_int_distribution<std::size_t>(0, centers_.size() - 1)(rng_);
  std::normal_distribution<double> noise(0.0, cfg_.cluster_sigma);
  const double lat = std::clamp(centers_[c].lat + noise(rng_), d.min_lat, d.max_lat);
  const double lon = std::clamp(centers_[c].lon + noise(rng_), d.min_lon, d.max_lon);
  return {lat, lon};
}

GeoTemporalImage ImageGenerator::next() {
  GeoTemporalImage img;
  img.id = cfg_.first_id + produced_;
  clock_ += std::exponential_distribution<double>(cfg_.arrival_rate)(rng_);
  img.t_c = cfg_.start_time + static_cast<Timestamp>(std::floor(clock_));
  img.loc = draw_location();

  // 1 + Poisson(mean - 1) keeps the mean exact while forbidding empty images.
  std::uint64_t terms = 1;
  if (cfg_.mean_terms > 1.0) {
    terms += std::poisson_distribution<std::uint64_t>(cfg_.mean_terms - 1.0)(rng_);
  }
  std::map<std::uint32_t, std::uint32_t> bag;
  for (std::uint64_t i = 0; i < terms; ++i) ++bag[zipf_(rng_)];
  img.psi.reserve(bag.size());
  for (const auto& [w, tf] : bag) img.psi.push_back({VisualWordId{w}, tf});
  ++produced_;
  return img;
}

std::vector<GeoTemporalImage> generate_images(const GeneratorConfig& cfg) {
  ImageGenerator gen(cfg);
  std::vector<GeoTemporalImage> out;
  out.reserve(cfg.image_count);
  while (!gen.done()) out.push_back(gen.next());
  return out;
}

// Queries --------------------------------------------------------------------

std::vector<QueryRecord> generate_queries(const QueryConfig& cfg, std::span<const GeoTemporalImage> dataset) {
  if (dataset.empty()) throw DataError("cannot sample queries from an empty dataset");
  if (cfg.words == 0) throw ConfigError("queries need at least one word");
  std::mt19937_64 rng(cfg.seed);

  std::unordered_set<std::uint32_t> vocab;
  Timestamp newest = dataset.front().t_c;
  for (const auto& img : dataset) {
    newest = std::max(newest, img.t_c);
    for (const auto& wc : img.psi) vocab.insert(wc.word.value);
  }
  const std::size_t l = std::min(cfg.words, vocab.size());
  std::uniform_int_distribution<std::size_t> pick_image(0, dataset.size() - 1);

  std::vector<QueryRecord> out;
  out.reserve(cfg.count);
  for (std::size_t qi = 0; qi < cfg.count; ++qi) {
    QueryRecord rec;
    rec.qid = qi;
    rec.query.loc = dataset[pick_image(rng)].loc;
    rec.query.t = cfg.time.value_or(newest);
    rec.query.k = cfg.k;
    rec.query.weights = cfg.weights;
    std::vector<VisualWordId> words;
    std::unordered_set<std::uint32_t> seen;
    while (words.size() < l) {
      const GeoTemporalImage& img = dataset[pick_image(rng)];
      // tf-weighted draw from the image's bag
      std::uint64_t u = std::uniform_int_distribution<std::uint64_t>(0, img.term_count() - 1)(rng);
      for (const auto& wc : img.psi) {
        if (u < wc.tf) {
          if (seen.insert(wc.word.value).second) words.push_back(wc.word);
          break;
        }
        u -= wc.tf;
      }
    }
    std::sort(words.begin(), words.end());
    rec.query.psi = std::move(words);
    out.push_back(std::move(rec));
  }
  return out;
}

// TSV ------------------------------------------------------------------------

std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : rest_(line), line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("line " + std::to_string(line_no_) + ": " + what);
  }

  std::string_view field(char sep = '\t') {
    if (exhausted_) fail("too few fields");
    const auto pos = rest_.find(sep);
    std::string_view f = rest_.substr(0, pos);
    if (pos == std::string_view::npos) {
      exhausted_ = true;
      rest_ = {};
    } else {
      rest_.remove_prefix(pos + 1);
    }
    return f;
  }

  void finish() const {
    if (!exhausted_) fail("too many fields");
  }

  template <typename T>
  T number(std::string_view s, const char* what) const {
    T v{};
    const auto* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != end) fail(std::string("bad ") + what);
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) fail(std::string("non-finite ") + what);
    }
    return v;
  }

 private:
  std::string_view rest_;
  std::size_t line_no_;
  bool exhausted_ = false;
};

template <typename F>
void for_each_item(std::string_view list, char sep, F&& f) {
  while (true) {
    const auto pos = list.find(sep);
    f(list.substr(0, pos));
    if (pos == std::string_view::npos) return;
    list.remove_prefix(pos + 1);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const GeoTemporalImage> images) {
  for (const auto& img : images) {
    out << img.id << '\t' << format_real(img.loc.lat) << '\t' << format_real(img.loc.lon) << '\t'
        << img.t_c << '\t';
    for (std::size_t i = 0; i < img.psi.size(); ++i) {
      if (i > 0) out << ',';
      out << img.psi[i].word.value << ':' << img.psi[i].tf;
    }
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const GeoTemporalImage> images) {
  auto out = open_out(path);
  write_dataset(out, images);
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<GeoTemporalImage> parse_dataset(std::istream& in) {
  std::vector<GeoTemporalImage> out;
  std::unordered_set<ImageId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    LineParser p(line, line_no);
    GeoTemporalImage img;
    img.id = p.number<ImageId>(p.field(), "id");
    img.loc.lat = p.number<double>(p.field(), "latitude");
    img.loc.lon = p.number<double>(p.field(), "longitude");
    img.t_c = p.number<Timestamp>(p.field(), "timestamp");
    const std::string_view words = p.field();
    p.finish();
    for_each_item(words, ',', [&](std::string_view item) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) p.fail("word entry without ':'");
      const auto w = p.number<std::uint32_t>(item.substr(0, colon), "word id");
      const auto tf = p.number<std::uint32_t>(item.substr(colon + 1), "term count");
      if (tf == 0) p.fail("term count must be positive");
      if (!img.psi.empty() && !(img.psi.back().word.value < w)) p.fail("words must be strictly ascending");
      img.psi.push_back({VisualWordId{w}, tf});
    });
    if (!ids.insert(img.id).second) p.fail("duplicate image id " + std::to_string(img.id));
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<GeoTemporalImage> parse_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_dataset(in);
}

void write_queries(std::ostream& out, std::span<const QueryRecord> queries) {
  for (const auto& rec : queries) {
    const Query& q = rec.query;
    out << rec.qid << '\t' << format_real(q.loc.lat) << '\t' << format_real(q.loc.lon) << '\t' << q.t
        << '\t' << q.k << '\t' << format_real(q.weights.spatial) << ',' << format_real(q.weights.visual)
        << ',' << format_real(q.weights.temporal) << '\t';
    for (std::size_t i = 0; i < q.psi.size(); ++i) {
      if (i > 0) out << ',';
      out << q.psi[i].value;
    }
    out << '\n';
  }
}

void write_queries(const std::filesystem::path& path, std::span<const QueryRecord> queries) {
  auto out = open_out(path);
  write_queries(out, queries);
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<QueryRecord> parse_queries(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    LineParser p(line, line_no);
    QueryRecord rec;
    Query& q = rec.query;
    rec.qid = p.number<std::uint64_t>(p.field(), "query id");
    q.loc.lat = p.number<double>(p.field(), "latitude");
    q.loc.lon = p.number<double>(p.field(), "longitude");
    q.t = p.number<Timestamp>(p.field(), "timestamp");
    q.k = p.number<std::uint32_t>(p.field(), "k");
    const std::string_view weights = p.field();
    const std::string_view words = p.field();
    p.finish();
    std::vector<double> w;
    for_each_item(weights, ',', [&](std::string_view item) { w.push_back(p.number<double>(item, "weight")); });
    if (w.size() != 3) p.fail("expected three weights");
    q.weights = {w[0], w[1], w[2]};
    for_each_item(words, ',', [&](std::string_view item) {
      const auto v = p.number<std::uint32_t>(item, "word id");
      if (!q.psi.empty() && !(q.psi.back().value < v)) p.fail("words must be strictly ascending");
      q.psi.push_back(VisualWordId{v});
    });
    try {
      validate_query(q);
    } catch (const Error& e) {
      p.fail(e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<QueryRecord> parse_queries(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_queries(in);
}

}  // namespace geostream
