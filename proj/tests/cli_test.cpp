// Copyright 2026 The pbtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "pbt/cli.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pbt;

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pbtsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pbt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const Result g = cli({"generate", "--nodes", "80", "--tx-count", "120", "--seed", "4", "--out", p("w")});
    ASSERT_EQ(g.code, 0) << g.err;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }
  std::vector<std::string> base_run(const std::string& out) const {
    return {"run", "--snapshot", p("w/snapshot.csv"), "--transactions", p("w/transactions.csv"),
            "--epoch", "50", "--out", p(out)};
  }
  static std::vector<std::string> plus(std::vector<std::string> a, std::initializer_list<std::string> b) {
    a.insert(a.end(), b);
    return a;
  }
  static std::size_t data_rows(const std::string& file) {
    std::istringstream in(read_file(file));
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
      } else {
        ++n;
      }
    }
    return n;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpIsSuccess) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  Result r = cli({"run", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--trees"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, cli::kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(cli(plus(base_run("a"), {"--policy", "GE-FOO-OND"})).code, cli::kExitUsage);
  EXPECT_EQ(cli(plus(base_run("a"), {"--trees", "0"})).code, cli::kExitUsage);
  EXPECT_EQ(cli(plus(base_run("a"), {"--trees", "5..2"})).code, cli::kExitUsage);
  EXPECT_EQ(cli(plus(base_run("a"), {"--mode", "sideways"})).code, cli::kExitUsage);
  EXPECT_EQ(cli(plus(base_run("a"), {"--relative"})).code, cli::kExitUsage);
  EXPECT_EQ(cli({"run", "--snapshot", p("nope.csv"), "--transactions", p("w/transactions.csv"), "--out", p("a")}).code,
            cli::kExitUsage);
  EXPECT_EQ(cli({"generate", "--nodes", "1", "--out", p("g")}).code, cli::kExitUsage);
  EXPECT_EQ(cli({"generate", "--model", "ring", "--out", p("g")}).code, cli::kExitUsage);
}

TEST_F(Cli, RunWritesOutputs) {
  Result r = cli(plus(base_run("a"), {"--policy", "GE-RAND-OND,SW,FF", "--runs", "2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_rows(p("a/summary.csv")), 3u);
  EXPECT_EQ(data_rows(p("a/transactions.csv")), 3u * 2u * 120u);
  EXPECT_EQ(data_rows(p("a/epochs.csv")), 3u * 2u * 3u);
  const std::string s = read_file(p("a/summary.csv"));
  EXPECT_EQ(s.rfind("# fingerprint=", 0), 0u);
  EXPECT_NE(s.find("# dispersion=sample-stddev"), std::string::npos);
  EXPECT_NE(s.find("\npolicy,success_ratio,delay_hops,tx_messages,path_len,stab_messages,"), std::string::npos);
  EXPECT_NE(s.find("# config trees="), std::string::npos);
}

TEST_F(Cli, TreeSweepGivesOneRowPerCount) {
  Result r = cli(plus(base_run("a"), {"--policy", "GE-RAND-OND", "--trees", "1..3"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_rows(p("a/summary.csv")), 3u);
}

TEST_F(Cli, ByteIdenticalReruns) {
  for (const char* mode : {"static", "dynamic"}) {
    auto args = plus(base_run("a"), {"--mode", mode, "--policy", "GE-RAND-OND,LM-MUL-PER", "--runs", "2"});
    ASSERT_EQ(cli(args).code, 0);
    auto again = args;
    again.back() = args.back();
    again[again.size() - 7] = p("b");  // --out value
    ASSERT_EQ(again[again.size() - 8], "--out");
    ASSERT_EQ(cli(again).code, 0);
    for (const char* f : {"transactions.csv", "epochs.csv", "summary.csv"}) {
      EXPECT_EQ(read_file(p(std::string("a/") + f)), read_file(p(std::string("b/") + f))) << mode << " " << f;
    }
  }
}

TEST_F(Cli, CompareChecksFingerprints) {
  for (const char* pol : {"GE-RAND-OND", "SW", "SM"}) {
    ASSERT_EQ(cli(plus(base_run(pol), {"--policy", pol})).code, 0);
  }
  Result table = cli({"compare", p("GE-RAND-OND/summary.csv"), p("SW/summary.csv"), p("SM/summary.csv")});
  ASSERT_EQ(table.code, 0) << table.err;
  std::istringstream in(table.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1].rfind("GE-RAND-OND", 0), 0u);
  EXPECT_NE(lines[3].find(" +- "), std::string::npos);

  EXPECT_EQ(cli({"compare", p("SW/summary.csv")}).code, cli::kExitUsage);
  ASSERT_EQ(cli(plus(base_run("seed2"), {"--policy", "SW", "--seed", "2"})).code, 0);
  EXPECT_EQ(cli({"compare", p("SW/summary.csv"), p("seed2/summary.csv")}).code, cli::kExitUsage);
  EXPECT_EQ(cli({"compare", p("SW/summary.csv"), p("w/snapshot.csv")}).code, cli::kExitUsage);
}

TEST_F(Cli, ConfigFile) {
  write_file_atomic(p("run.ini"), "policy=SW\ntrees=2\nattempts=1\nepoch=40\n");
  Result r = cli({"run", "--config", p("run.ini"), "--snapshot", p("w/snapshot.csv"), "--transactions",
                  p("w/transactions.csv"), "--out", p("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string s = read_file(p("c/summary.csv"));
  EXPECT_NE(s.find("# config trees=2\n"), std::string::npos);
  EXPECT_NE(s.find("# config attempts=1\n"), std::string::npos);
  EXPECT_NE(s.find("\nLM-MUL-PER,"), std::string::npos);

  // Command-line flags override the file.
  write_file_atomic(p("run2.ini"), "# comment\n policy = SM \nlockstep=true\n");
  r = cli({"run", "--snapshot", p("w/snapshot.csv"), "--config", p("run2.ini"), "--transactions",
           p("w/transactions.csv"), "--policy", "SW", "--out", p("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_file(p("d/summary.csv")).find("\nLM-MUL-PER,"), std::string::npos);
  EXPECT_NE(read_file(p("d/transactions.csv")).find(",oracle_feasible"), std::string::npos);

  write_file_atomic(p("bad.ini"), "trees\n");
  EXPECT_EQ(cli({"run", "--config", p("bad.ini"), "--snapshot", "s", "--transactions", "t", "--out", "o"}).code,
            cli::kExitUsage);
  write_file_atomic(p("bad2.ini"), "colour=red\n");
  EXPECT_EQ(cli({"run", "--config", p("bad2.ini"), "--snapshot", "s", "--transactions", "t", "--out", "o"}).code,
            cli::kExitUsage);
}

TEST_F(Cli, StaticSamplingAndFeasibleFilter) {
  Result r = cli(plus(base_run("a"), {"--policy", "SM", "--tx-per-run", "30", "--runs", "3", "--feasible-only"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_rows(p("a/transactions.csv")), 90u);
  Result d = cli(plus(base_run("b"), {"--mode", "dynamic", "--tx-per-run", "30"}));
  EXPECT_EQ(d.code, cli::kExitUsage);
}

TEST_F(Cli, DynamicWithRelativeAndChanges) {
  write_file_atomic(p("w/changes.csv"), "time,u,v,new_weight\n3,0,1,5\n9,2,1,0\n");
  Result r = cli(plus(base_run("a"), {"--mode", "dynamic", "--policy", "GE-RAND-OND", "--relative", "--link-changes",
                                      p("w/changes.csv")}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_file(p("a/epochs.csv")).find(",relative_success"), std::string::npos);
}

TEST_F(Cli, GenerateAndPreprocess) {
  ASSERT_EQ(cli({"generate", "--nodes", "2", "--tx-count", "3", "--out", p("g")}).code, 0);
  EXPECT_EQ(data_rows(p("g/snapshot.csv")), 2u);
  EXPECT_EQ(data_rows(p("g/transactions.csv")), 3u);
  ASSERT_EQ(cli({"generate", "--nodes", "2", "--tx-count", "3", "--out", p("g2")}).code, 0);
  EXPECT_EQ(read_file(p("g/snapshot.csv")), read_file(p("g2/snapshot.csv")));

  write_file_atomic(p("raw_s.csv"), "u,v,weight\n5,6,1\n6,5,1\n8,9,1\n");
  write_file_atomic(p("raw_t.csv"), "time,value,src,dst\n0,1,5,6\n1,1,5,5\n2,1,8,9\n");
  Result r = cli({"preprocess", "--snapshot", p("raw_s.csv"), "--transactions", p("raw_t.csv"), "--out", p("pp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("self_transactions=1"), std::string::npos);
  EXPECT_EQ(read_file(p("pp/nodes.csv")), "id,original\n0,5\n1,6\n");
  EXPECT_EQ(read_file(p("pp/transactions.csv")), "time,value,src,dst\n0,1,0,1\n");
  write_file_atomic(p("bad.csv"), "u,v,weight\n1,2,zz\n");
  Result bad = cli({"preprocess", "--snapshot", p("bad.csv"), "--transactions", p("raw_t.csv"), "--out", p("pp")});
  EXPECT_EQ(bad.code, cli::kExitUsage);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, BinaryRuns) {
  const std::string cmd = std::string(PBTSIM_PATH) + " run --policy SW --epoch 60 --snapshot " + p("w/snapshot.csv") +
                          " --transactions " + p("w/transactions.csv") + " --out " + p("bin") + " > /dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(data_rows(p("bin/summary.csv")), 1u);
  const std::string bad = std::string(PBTSIM_PATH) + " run --policy nope --snapshot x --transactions y --out z > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), cli::kExitUsage);
}

}  // namespace
