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

#include "geostream/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "geostream/bench.hpp"
#include "geostream/errors.hpp"
#include "geostream/stream_index.hpp"
#include "geostream/verify.hpp"
#include "geostream/workload.hpp"

namespace geostream {

namespace {

struct UsageError : Error {
  using Error::Error;
};

const char* const kDomainHelp = "min_lat,max_lat,min_lon,max_lon";

SpatialDomain parse_domain(const std::string& text) {
  if (text.empty()) return {};
  std::vector<double> v;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--domain: bad number '" + part + "'");
    }
  }
  if (v.size() != 4) throw UsageError(std::string("--domain: expected ") + kDomainHelp);
  SpatialDomain d{v[0], v[1], v[2], v[3]};
  try {
    d.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--domain: ") + e.what());
  }
  return d;
}

std::vector<VisualWordId> parse_words(const std::string& text) {
  std::vector<std::uint32_t> ids;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(part, &used);
      if (used != part.size() || v > UINT32_MAX) throw std::invalid_argument(part);
      ids.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--words: bad word id '" + part + "'");
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<VisualWordId> out;
  for (auto id : ids) out.push_back(VisualWordId{id});
  return out;
}

struct IndexFlags {
  std::string index = "hiq";
  double xi = 0.5;
  double decay_base = 2.0;
  double time_unit = 3600.0;
  Timestamp segment_span = 3600;
  std::size_t window = 24;
  std::size_t capacity = 100;
  std::size_t max_depth = 16;
  std::string domain;

  void attach(CLI::App* app, bool with_index) {
    if (with_index) app->add_option("--index", index, "hiq, ifa or stvii")->capture_default_str();
    app->add_option("--xi", xi, "smoothing weight of the corpus model")->capture_default_str();
    app->add_option("--decay-base", decay_base, "recency decay base D")->capture_default_str();
    app->add_option("--time-unit", time_unit, "seconds per recency unit")->capture_default_str();
    app->add_option("--segment-span", segment_span, "seconds per segment")->capture_default_str();
    app->add_option("--window", window, "live segments")->capture_default_str();
    app->add_option("--capacity", capacity, "node capacity")->capture_default_str();
    app->add_option("--max-depth", max_depth, "quadtree depth limit")->capture_default_str();
    app->add_option("--domain", domain, kDomainHelp);
  }

  [[nodiscard]] IndexKind kind() const {
    const auto k = parse_index_kind(index);
    if (!k) throw UsageError("--index: unknown index '" + index + "' (expected hiq, ifa or stvii)");
    return *k;
  }

  [[nodiscard]] ScoringConfig scoring() const {
    ScoringConfig s{xi, decay_base, time_unit};
    if (!(xi >= 0 && xi <= 1)) throw UsageError("--xi: must lie in [0, 1]");
    if (!(decay_base > 1)) throw UsageError("--decay-base: must exceed 1");
    if (!(time_unit > 0)) throw UsageError("--time-unit: must be positive");
    s.validate();
    return s;
  }

  [[nodiscard]] IndexOptions options() const {
    IndexOptions o;
    o.scoring = scoring();
    o.domain = parse_domain(domain);
    if (segment_span <= 0) throw UsageError("--segment-span: must be positive");
    if (window == 0) throw UsageError("--window: must be at least 1");
    if (capacity < 2) throw UsageError("--capacity: must be at least 2");
    if (max_depth == 0) throw UsageError("--max-depth: must be at least 1");
    o.segment_span = segment_span;
    o.window = window;
    o.capacity = capacity;
    o.max_depth = max_depth;
    o.validate();
    return o;
  }
};

struct WeightFlags {
  std::optional<double> w1, w2, w3;

  void attach(CLI::App* app) {
    app->add_option("--w1", w1, "spatial weight");
    app->add_option("--w2", w2, "visual weight");
    app->add_option("--w3", w3, "temporal weight");
  }

  [[nodiscard]] bool given() const { return w1 || w2 || w3; }

  /// Unset flags take the default triple's value.
  [[nodiscard]] Weights resolve() const {
    const Weights d;
    const Weights w{w1.value_or(d.spatial), w2.value_or(d.visual), w3.value_or(d.temporal)};
    const std::pair<const char*, double> each[] = {{"--w1", w.spatial}, {"--w2", w.visual}, {"--w3", w.temporal}};
    for (const auto& [flag, v] : each) {
      if (!(v > 0)) throw UsageError(std::string(flag) + ": weight must be positive");
    }
    if (std::abs(w.spatial + w.visual + w.temporal - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "--w1/--w2/--w3: weights must sum to 1 (got " << format_real(w.spatial + w.visual + w.temporal) << ")";
      throw UsageError(msg.str());
    }
    return w;
  }
};

struct GeneratorFlags {
  GeneratorConfig cfg;
  std::string spatial = "clusters";
  std::string domain;

  void attach(CLI::App* app, std::size_t default_count) {
    cfg.image_count = default_count;
    cfg.spatial = SpatialMode::gaussian_clusters;
    app->add_option("--count", cfg.image_count, "images to generate")->capture_default_str();
    app->add_option("--vocab", cfg.vocab_size, "vocabulary size")->capture_default_str();
    app->add_option("--mean-terms", cfg.mean_terms, "mean terms per image")->capture_default_str();
    app->add_option("--zipf", cfg.zipf_exponent, "word frequency exponent")->capture_default_str();
    app->add_option("--spatial", spatial, "uniform or clusters")->capture_default_str();
    app->add_option("--clusters", cfg.clusters, "cluster count")->capture_default_str();
    app->add_option("--sigma", cfg.cluster_sigma, "cluster spread in degrees")->capture_default_str();
    app->add_option("--arrival-rate", cfg.arrival_rate, "images per second")->capture_default_str();
    app->add_option("--start-time", cfg.start_time, "first timestamp")->capture_default_str();
  }

  [[nodiscard]] GeneratorConfig resolve(std::uint64_t seed, const std::string& domain_text) const {
    GeneratorConfig g = cfg;
    g.seed = seed;
    g.domain = parse_domain(domain_text);
    if (spatial == "uniform") {
      g.spatial = SpatialMode::uniform;
    } else if (spatial == "clusters") {
      g.spatial = SpatialMode::gaussian_clusters;
    } else {
      throw UsageError("--spatial: expected uniform or clusters");
    }
    try {
      g.validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    return g;
  }
};

std::vector<GeoTemporalImage> stream_order(std::vector<GeoTemporalImage> data) {
  std::sort(data.begin(), data.end(), [](const auto& a, const auto& b) {
    return a.t_c < b.t_c || (a.t_c == b.t_c && a.id < b.id);
  });
  return data;
}

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

// Flags named in a key=value file are added unless the command line has them.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open " + path);
  auto present = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "config" || present(flag)) continue;
    extra.push_back(flag);
    extra.push_back(trim(line.substr(eq + 1)));
  }
  // the subcommand comes first; file flags go right after it
  args.insert(args.begin() + (args.empty() ? 0 : 1), extra.begin(), extra.end());
  return args;
}

int cmd_generate(const GeneratorFlags& gen, std::uint64_t seed, const std::string& domain, const std::string& out,
                 const std::string& queries_out, QueryConfig qc, const WeightFlags& weights, std::ostream& log) {
  const GeneratorConfig g = gen.resolve(seed, domain);
  if (weights.given()) qc.weights = weights.resolve();
  if (qc.k == 0) throw UsageError("--k: must be positive");
  if (qc.words == 0) throw UsageError("--words: must be positive");
  std::vector<GeoTemporalImage> data = generate_images(g);
  write_dataset(out, data);
  log << "wrote " << data.size() << " images to " << out << '\n';
  if (!queries_out.empty()) {
    qc.seed = seed + 1;
    const auto qs = generate_queries(qc, data);
    write_queries(queries_out, qs);
    log << "wrote " << qs.size() << " queries to " << queries_out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming top-k spatial-temporal image search", "geostream"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string config_path;

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic dataset (and optionally queries)");
  GeneratorFlags gen_flags;
  gen_flags.attach(gen_cmd, 1000);
  std::string gen_out, gen_queries, gen_domain;
  QueryConfig gen_qc;
  WeightFlags gen_weights;
  gen_cmd->add_option("--out", gen_out, "dataset TSV path")->required();
  gen_cmd->add_option("--queries", gen_queries, "also write a query TSV here");
  gen_cmd->add_option("--query-count", gen_qc.count, "queries to write")->capture_default_str();
  gen_cmd->add_option("--words", gen_qc.words, "words per query")->capture_default_str();
  gen_cmd->add_option("--k", gen_qc.k, "results per query")->capture_default_str();
  gen_cmd->add_option("--domain", gen_domain, kDomainHelp);
  gen_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--config", config_path, "key=value file of defaults");
  gen_weights.attach(gen_cmd);

  // query
  auto* query_cmd = app.add_subcommand("query", "rank a dataset against queries");
  IndexFlags query_index;
  query_index.attach(query_cmd, true);
  WeightFlags query_weights;
  query_weights.attach(query_cmd);
  std::string query_data, query_file, query_out, query_words;
  std::optional<std::uint32_t> query_k;
  std::optional<double> query_lat, query_lon;
  std::optional<Timestamp> query_time;
  query_cmd->add_option("--data", query_data, "dataset TSV")->required();
  auto* queries_opt = query_cmd->add_option("--queries", query_file, "query TSV");
  auto* words_opt = query_cmd->add_option("--words", query_words, "inline query words, comma separated");
  queries_opt->excludes(words_opt);
  query_cmd->add_option("--lat", query_lat, "inline query latitude");
  query_cmd->add_option("--lon", query_lon, "inline query longitude");
  query_cmd->add_option("--time", query_time, "inline query time (default: newest image)");
  query_cmd->add_option("--k", query_k, "results per query (default 10 or the file's k)");
  query_cmd->add_option("--out", query_out, "result path (default stdout)");
  query_cmd->add_option("--config", config_path, "key=value file of defaults");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "sweep benchmark axes and write CSV");
  IndexFlags bench_index;
  bench_index.attach(bench_cmd, false);
  GeneratorFlags bench_gen;
  bench_gen.attach(bench_cmd, 10'000);
  BenchConfig bench_cfg;
  std::string bench_data, bench_out;
  std::vector<std::string> bench_indexes{"hiq", "ifa", "stvii"};
  std::vector<std::string> bench_axes;
  bench_cmd->add_option("--data", bench_data, "dataset TSV (default: generate one)");
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");
  bench_cmd->add_option("--index", bench_indexes, "indexes to run")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--axes", bench_axes, "axes to sweep (default: all)")->delimiter(',');
  bench_cmd->add_option("--threads", bench_cfg.threads, "parallel query contexts")->capture_default_str();
  bench_cmd->add_option("--query-count", bench_cfg.queries.count, "queries per axis point")->capture_default_str();
  bench_cmd->add_option("--words", bench_cfg.queries.words, "base words per query")->capture_default_str();
  bench_cmd->add_option("--k", bench_cfg.queries.k, "base results per query")->capture_default_str();
  bench_cmd->add_option("--rates", bench_cfg.arrival_rates, "arrival rate points")->delimiter(',');
  bench_cmd->add_option("--capacities", bench_cfg.capacities, "node capacity points")->delimiter(',');
  bench_cmd->add_option("--ls", bench_cfg.word_counts, "query word count points")->delimiter(',');
  bench_cmd->add_option("--ks", bench_cfg.ks, "k points")->delimiter(',');
  bench_cmd->add_option("--sizes", bench_cfg.sizes, "dataset size points")->delimiter(',');
  bench_cmd->add_option("--omegas", bench_cfg.omegas, "weight sweep points")->delimiter(',');
  bench_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  bench_cmd->add_option("--config", config_path, "key=value file of defaults");
  WeightFlags bench_weights;
  bench_weights.attach(bench_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "check every index against the brute-force ranking");
  VerifyConfig verify_cfg;
  IndexFlags verify_scoring;
  std::vector<std::string> verify_indexes{"hiq", "ifa", "stvii"};
  verify_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  verify_cmd->add_option("--instances", verify_cfg.instances, "oracle instances")->capture_default_str();
  verify_cmd->add_option("--pairs", verify_cfg.dominance_pairs, "bound pairs per tree index")->capture_default_str();
  verify_cmd->add_option("--max-images", verify_cfg.max_images, "largest instance")->capture_default_str();
  verify_cmd->add_option("--index", verify_indexes, "indexes to check")->delimiter(',')->capture_default_str();
  verify_cmd->add_option("--xi", verify_scoring.xi)->capture_default_str();
  verify_cmd->add_option("--decay-base", verify_scoring.decay_base)->capture_default_str();
  verify_cmd->add_option("--time-unit", verify_scoring.time_unit)->capture_default_str();
  verify_cmd->add_option("--domain", verify_scoring.domain, kDomainHelp);
  verify_cmd->add_option("--config", config_path, "key=value file of defaults");

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  auto kinds_of = [](const std::vector<std::string>& names, const char* flag) {
    std::vector<IndexKind> kinds;
    for (const auto& n : names) {
      const auto k = parse_index_kind(n);
      if (!k) throw UsageError(std::string(flag) + ": unknown index '" + n + "'");
      if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
    }
    if (kinds.empty()) throw UsageError(std::string(flag) + ": no index given");
    return kinds;
  };

  try {
    if (gen_cmd->parsed()) {
      return cmd_generate(gen_flags, seed, gen_domain, gen_out, gen_queries, gen_qc, gen_weights, err);
    }

    if (query_cmd->parsed()) {
      const IndexOptions options = query_index.options();
      const IndexKind kind = query_index.kind();
      std::optional<Weights> weights;
      if (query_weights.given()) weights = query_weights.resolve();
      if (query_k && *query_k == 0) throw UsageError("--k: must be positive");
      const bool inline_query = !query_words.empty();
      if (!inline_query && query_file.empty()) throw UsageError("query needs --queries or --words");
      if (!inline_query && (query_lat || query_lon || query_time)) {
        throw UsageError("--lat/--lon/--time apply to inline queries only");
      }
      if (inline_query && (!query_lat || !query_lon)) throw UsageError("--words needs --lat and --lon");

      const std::vector<GeoTemporalImage> data = stream_order(parse_dataset(query_data));
      std::vector<QueryRecord> queries;
      if (inline_query) {
        QueryRecord rec;
        rec.qid = 1;
        rec.query.psi = parse_words(query_words);
        rec.query.loc = {*query_lat, *query_lon};
        rec.query.t = query_time ? *query_time : (data.empty() ? 0 : data.back().t_c);
        queries.push_back(rec);
      } else {
        queries = parse_queries(query_file);
      }
      for (auto& rec : queries) {
        if (query_k) rec.query.k = *query_k;
        if (weights) rec.query.weights = *weights;
        validate_query(rec.query);
      }

      StreamIndex index(kind, options);
      for (const auto& img : data) index.insert(img);
      Output sink(query_out, out);
      for (const auto& rec : queries) {
        const auto res = index.search(rec.query);
        for (std::size_t r = 0; r < res.entries.size(); ++r) {
          sink.get() << rec.qid << '\t' << (r + 1) << '\t' << res.entries[r].id << '\t'
                     << format_score(res.entries[r].score.total) << '\n';
        }
      }
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      bench_cfg.options = bench_index.options();
      bench_cfg.indexes = kinds_of(bench_indexes, "--index");
      bench_cfg.data = bench_gen.resolve(seed, bench_index.domain);
      bench_cfg.queries.seed = seed + 1;
      if (bench_weights.given()) bench_cfg.queries.weights = bench_weights.resolve();
      std::vector<BenchAxis> axes;
      if (bench_axes.empty()) {
        axes.assign(std::begin(kUpdateAxes), std::end(kUpdateAxes));
        axes.insert(axes.end(), std::begin(kQueryAxes), std::end(kQueryAxes));
        if (bench_cfg.threads > 1) axes.push_back(BenchAxis::threads);
      } else {
        for (const auto& name : bench_axes) {
          const auto a = parse_axis(name);
          if (!a) throw UsageError("--axes: unknown axis '" + name + "'");
          axes.push_back(*a);
        }
      }
      try {
        bench_cfg.validate();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }

      BenchOutcome result;
      if (bench_data.empty()) {
        result = run_bench(bench_cfg, axes);
      } else {
        const auto data = parse_dataset(bench_data);
        std::vector<BenchAxis> update, query;
        for (BenchAxis a : axes) {
          (a == BenchAxis::arrival_rate || a == BenchAxis::node_capacity ? update : query).push_back(a);
        }
        if (!update.empty()) {
          throw UsageError("--axes: arrival_rate and node_capacity need generated data, not --data");
        }
        result = run_query_bench(data, bench_cfg, query);
      }
      Output sink(bench_out, out);
      write_csv(sink.get(), result.rows);
      err << result.rows.size() << " rows, " << result.checksums_compared << " checksums compared, "
          << result.checksum_mismatches << " mismatches\n";
      return result.checksum_mismatches == 0 ? kExitOk : kExitVerify;
    }

    if (verify_cmd->parsed()) {
      verify_cfg.seed = seed;
      verify_cfg.scoring = verify_scoring.scoring();
      verify_cfg.domain = parse_domain(verify_scoring.domain);
      verify_cfg.indexes = kinds_of(verify_indexes, "--index");
      if (verify_cfg.max_images == 0) throw UsageError("--max-images: must be positive");
      bool ok = true;
      for (const SuiteReport& r : {verify_oracle_equivalence(verify_cfg), verify_dominance(verify_cfg)}) {
        const bool pass = r.passed() || (r.cases == 0 && r.failures == 0);
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << r.name << ": " << r.cases << " cases, " << r.failures << " failures";
        if (!r.first_failure.empty()) out << " (first: " << r.first_failure << ')';
        out << '\n';
      }
      return ok ? kExitOk : kExitVerify;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace geostream
