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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "geostream/cli.hpp"
#include "geostream/workload.hpp"

using namespace geostream;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("geostream_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("single matching image gives one line") {
  TempDir dir;
  write_text(dir.file("d.tsv"), "1\t10\t10\t100\t4:2\n2\t11\t11\t100\t5:1\n");
  const Run r = cli({"query", "--data", dir.file("d.tsv"), "--words", "4", "--lat", "10", "--lon", "10", "--k", "1"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "1\t1\t1\t0.000000\n");
}

TEST_CASE("all indexes print identical results") {
  TempDir dir;
  const Run gen = cli({"generate", "--out", dir.file("d.tsv"), "--queries", dir.file("q.tsv"), "--count", "1500",
                       "--vocab", "400", "--mean-terms", "20", "--query-count", "15", "--words", "3", "--seed", "9"});
  REQUIRE(gen.code == kExitOk);
  std::string first;
  for (const char* index : {"hiq", "ifa", "stvii"}) {
    const Run r = cli({"query", "--data", dir.file("d.tsv"), "--queries", dir.file("q.tsv"), "--index", index,
                       "--capacity", "6", "--segment-span", "1", "--window", "3"});
    CAPTURE(index);
    REQUIRE(r.code == kExitOk);
    CHECK_FALSE(r.out.empty());
    if (first.empty()) first = r.out;
    CHECK(r.out == first);
  }
  // written to a file instead of stdout
  const Run to_file = cli({"query", "--data", dir.file("d.tsv"), "--queries", dir.file("q.tsv"), "--capacity", "6",
                           "--segment-span", "1", "--window", "3", "--out", dir.file("r.tsv")});
  CHECK(to_file.code == kExitOk);
  std::ifstream in(dir.file("r.tsv"));
  CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == first);
}

TEST_CASE("generate is deterministic per seed") {
  TempDir dir;
  for (const char* name : {"a.tsv", "b.tsv"}) {
    REQUIRE(cli({"generate", "--out", dir.file(name), "--count", "50", "--seed", "4"}).code == kExitOk);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir.file("a.tsv")) == slurp(dir.file("b.tsv")));
  CHECK(parse_dataset(fs::path(dir.file("a.tsv"))).size() == 50);
}

TEST_CASE("errors map to exit codes") {
  TempDir dir;
  write_text(dir.file("d.tsv"), "1\t10\t10\t100\t4:2\n");
  const std::vector<std::string> base = {"query", "--data", dir.file("d.tsv"), "--words", "4", "--lat", "0", "--lon", "0"};

  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  Run r = with({"--w1", "0.6", "--w2", "0.3", "--w3", "0.3"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--w1") != std::string::npos);
  r = with({"--w2", "0"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--w2") != std::string::npos);
  r = with({"--index", "btree"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--index") != std::string::npos);
  r = with({"--xi", "2"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--xi") != std::string::npos);
  CHECK(with({"--k", "0"}).code == kExitUsage);
  CHECK(with({"--capacity", "1"}).code == kExitUsage);
  CHECK(with({"--domain", "0,1,2"}).code == kExitUsage);
  CHECK(with({"--no-such-flag"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);

  CHECK(cli({"query", "--data", dir.file("missing.tsv"), "--words", "1", "--lat", "0", "--lon", "0"}).code == kExitData);
  write_text(dir.file("bad.tsv"), "1\t10\t10\t100\t4:0\n");
  r = cli({"query", "--data", dir.file("bad.tsv"), "--words", "1", "--lat", "0", "--lon", "0"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 1") != std::string::npos);
  // outside the configured domain
  r = with({"--domain", "0,5,0,5"});
  CHECK(r.code == kExitData);
}

TEST_CASE("config file fills flags the command line leaves out") {
  TempDir dir;
  write_text(dir.file("d.tsv"), "1\t10\t10\t100\t4:2\n2\t11\t11\t100\t4:1\n3\t12\t12\t100\t4:1\n");
  write_text(dir.file("c.cfg"), "# defaults\nk = 2\nindex=stvii\nwindow=3\n");
  const std::vector<std::string> base = {"query",  "--config", dir.file("c.cfg"), "--data", dir.file("d.tsv"),
                                         "--words", "4",        "--lat",            "10",     "--lon",
                                         "10"};
  Run r = cli(base);
  CHECK(r.code == kExitOk);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
  auto args = base;
  args.insert(args.end(), {"--k", "3"});
  r = cli(args);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
  write_text(dir.file("bad.cfg"), "nonsense\n");
  CHECK(cli({"query", "--config", dir.file("bad.cfg"), "--data", dir.file("d.tsv")}).code == kExitUsage);
}

TEST_CASE("verify and bench subcommands") {
  Run r = cli({"verify", "--instances", "30", "--pairs", "10", "--max-images", "60"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("PASS oracle equivalence: 90 cases") != std::string::npos);
  CHECK(r.out.find("PASS bound dominance: 20 cases") != std::string::npos);

  r = cli({"bench", "--count", "300", "--query-count", "3", "--vocab", "200", "--mean-terms", "10", "--capacity", "8",
           "--rates", "200,400", "--capacities", "4,8", "--axes", "arrival_rate,k", "--ks", "1,5", "--index",
           "hiq,ifa"});
  CHECK(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "axis,value,index,metric,mean,p50,p95");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  // arrival_rate: 2 points x 2 indexes x (insert_us, bytes, delete_us); k: 2 x 2 x 3 metrics
  CHECK(rows == 2 * 2 * 3 + 2 * 2 * 3);
  CHECK(cli({"bench", "--axes", "sideways"}).code == kExitUsage);
}
