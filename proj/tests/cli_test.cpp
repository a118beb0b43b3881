// Copyright 2026 The activetext Authors.
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

#include <csignal>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "activetext/benchmark.hpp"
#include "activetext/checkpoint.hpp"
#include "test_support.hpp"

extern char** environ;

namespace activetext {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ACTIVETEXT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticSpec s;
    s.docs = 300;
    s.positive_rate = 0.25;
    s.seed = 5;
    data_ = generate_synthetic(s);
    dfm_ = dir_.path() / "c.dfm";
    truth_ = dir_.path() / "truth.tsv";
    seed_labels_ = dir_.path() / "seed.tsv";
    std::ofstream d(dfm_);
    write_dfm(d, data_.corpus);
    std::ofstream t(truth_), l(seed_labels_);
    int seen[2] = {0, 0};
    for (std::size_t i = 0; i < data_.corpus.num_docs(); ++i) {
      t << data_.corpus.doc_id(i) << '\t' << data_.truth[i] << '\n';
      if (seen[data_.truth[i]]++ < 10) l << data_.corpus.doc_id(i) << '\t' << data_.truth[i] << '\n';
    }
  }

  std::string out(const std::string& name) const { return (dir_.path() / name).string(); }

  testing::TempDir dir_{"cli"};
  LabeledCorpus data_;
  fs::path dfm_, truth_, seed_labels_;
};

TEST_F(CliTest, FitWritesModelPredictionsAndRunRecord) {
  auto r = run("fit --dfm " + dfm_.string() + " --labels " + seed_labels_.string() + " --out " + out("fit"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("em_iterations"), std::string::npos);
  auto ck = load_checkpoint(out("fit") + "/model.ckpt");
  EXPECT_EQ(ck.params.k(), 2);
  std::ifstream d(dfm_);
  EXPECT_EQ(ck.vocab_hash, read_dfm(d).vocabulary().hash());
  std::ifstream p(out("fit") + "/predictions.csv");
  std::stringstream ps;
  ps << p.rdbuf();
  auto rows = lines_of(ps.str());
  ASSERT_EQ(rows.size(), 301u);
  EXPECT_EQ(rows[0], "doc_id,class_name,probability");
  std::ifstream rj(out("fit") + "/run.json");
  auto run_json = json::parse(rj);
  EXPECT_EQ(run_json["command"], "fit");
  EXPECT_EQ(run_json["config"]["model"]["lambda"], 0.001);
}

TEST_F(CliTest, FitWithZeroLambdaIsSupervised) {
  auto r = run("fit --dfm " + dfm_.string() + " --labels " + seed_labels_.string() + " --lambda 0 --out " + out("nb"));
  ASSERT_EQ(r.status, 0) << r.out;
  // With unlabeled documents switched off, EM stops after one pair.
  EXPECT_NE(r.out.find("em_iterations 1 (converged)"), std::string::npos) << r.out;
}

TEST_F(CliTest, FitMultiClusterMode) {
  auto r = run("fit --dfm " + dfm_.string() + " --labels " + seed_labels_.string() +
               " --mode multi_cluster_binary --k 5 --k-star 0 --out " + out("mc"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(load_checkpoint(out("mc") + "/model.ckpt").params.k(), 5);
}

TEST_F(CliTest, FitReadsConfigFileAndFlagsWin) {
  {
    std::ofstream cfg(out("fit.toml"));
    cfg << "lambda = 0.5\nalpha = 3\n";
  }
  auto r = run("fit --config " + out("fit.toml") + " --alpha 4 --dfm " + dfm_.string() + " --labels " +
               seed_labels_.string() + " --out " + out("cfg"));
  ASSERT_EQ(r.status, 0) << r.out;
  std::ifstream rj(out("cfg") + "/run.json");
  auto j = json::parse(rj);
  EXPECT_EQ(j["config"]["model"]["lambda"], 0.5);
  EXPECT_EQ(j["config"]["model"]["alpha"], 4.0);
  {
    std::ofstream cfg(out("typo.toml"));
    cfg << "lamda = 0.5\n";
  }
  EXPECT_EQ(run("fit --config " + out("typo.toml") + " --dfm " + dfm_.string() + " --labels " + seed_labels_.string() +
                " --out " + out("typo"))
                .status,
            2);
}

TEST_F(CliTest, UsageAndValidationErrorsExitTwo) {
  EXPECT_EQ(run("fit --dfm " + dfm_.string() + " --labels " + out("missing.tsv")).status, 2);
  EXPECT_EQ(run("fit --dfm " + dfm_.string()).status, 2);
  EXPECT_EQ(run("no-such-command").status, 2);
  EXPECT_EQ(run("fit --dfm " + dfm_.string() + " --labels " + seed_labels_.string() + " --lambda 2 --out " +
                out("bad"))
                .status,
            2);
  {
    std::ofstream bad(out("bad.dfm"));
    bad << "1 1\nd1\tw1\tmany\n";
  }
  EXPECT_EQ(run("fit --dfm " + out("bad.dfm") + " --labels " + seed_labels_.string()).status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST_F(CliTest, ActiveSimBudgetGivesOneRowPerIteration) {
  // 300 documents with 20% held out leave 240 for training; budget 620
  // is therefore capped by the pool: 12 batches of 20.
  auto r = run("active-sim --dfm " + dfm_.string() + " --labels " + truth_.string() + " --out " + out("sim"));
  ASSERT_EQ(r.status, 0);
  auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], "iteration,n_labeled,precision,recall,f1,objective");
  EXPECT_EQ(rows[1].rfind("0,20,", 0), 0u);
  EXPECT_EQ(rows[12].rfind("11,240,", 0), 0u);
  for (const char* f : {"run.json", "metrics.csv", "predictions.csv", "session/events.jsonl", "session/labels.tsv"})
    EXPECT_TRUE(fs::exists(out("sim") + "/" + f)) << f;

  auto again = run("active-sim --dfm " + dfm_.string() + " --labels " + truth_.string() + " --out " + out("sim2"));
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, ActiveSimFullBudgetOnLargerCorpus) {
  SyntheticSpec s;
  s.docs = 1000;
  s.positive_rate = 0.2;
  auto big = generate_synthetic(s);
  {
    std::ofstream d(out("big.dfm")), t(out("big.tsv"));
    write_dfm(d, big.corpus);
    for (std::size_t i = 0; i < big.corpus.num_docs(); ++i) t << big.corpus.doc_id(i) << '\t' << big.truth[i] << '\n';
  }
  auto r = run("active-sim --dfm " + out("big.dfm") + " --labels " + out("big.tsv") +
               " --stop budget:620 --lambda 0.01 --out " + out("big"));
  ASSERT_EQ(r.status, 0);
  auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 32u);
  EXPECT_EQ(rows.back().rfind("30,620,", 0), 0u);
}

TEST_F(CliTest, ActiveSimKeywordFlowAndStoppingRules) {
  auto r = run("active-sim --dfm " + dfm_.string() + " --labels " + truth_.string() +
               " --keyword-flow --stop budget:60 --out " + out("kw"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(lines_of(r.out).size(), 4u);
  std::ifstream kw(out("kw") + "/session/keywords.tsv");
  std::stringstream ks;
  ks << kw.rdbuf();
  EXPECT_FALSE(ks.str().empty());

  auto f1 = run("active-sim --dfm " + dfm_.string() + " --labels " + truth_.string() + " --stop f1:0.5 --out " +
                out("f1"));
  ASSERT_EQ(f1.status, 0);
  // A very loose threshold stops as soon as two evaluations exist.
  EXPECT_EQ(lines_of(f1.out).size(), 3u);
  EXPECT_EQ(run("active-sim --dfm " + dfm_.string() + " --labels " + truth_.string() +
                " --test-fraction 0 --stop f1:0.01 --out " + out("nof1"))
                .status,
            2);
  EXPECT_EQ(run("active-sim --dfm " + dfm_.string() + " --labels " + seed_labels_.string() + " --out " + out("x"))
                .status,
            2);
}

TEST_F(CliTest, EvalScoresPredictionsAndRejectsDisjointIds) {
  {
    std::ofstream p(out("pred.csv")), t(out("t.tsv"));
    p << "doc_id,class_name,probability\n";
    const char* rows[][2] = {{"a", "positive"}, {"b", "positive"}, {"c", "negative"}, {"d", "negative"}};
    for (auto& row : rows) p << row[0] << ',' << row[1] << ",0.9\n";
    t << "a\t1\nb\tnegative\nc\tpositive\nd\t0\n";
  }
  auto r = run("eval --predictions " + out("pred.csv") + " --truth " + out("t.tsv") + " --out " + out("ev"));
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("precision 0.5\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("recall 0.5\n"), std::string::npos);
  EXPECT_NE(r.out.find("f1 0.5\n"), std::string::npos);
  EXPECT_NE(r.out.find("accuracy 0.5\n"), std::string::npos);
  std::ifstream rj(out("ev") + "/run.json");
  EXPECT_EQ(json::parse(rj)["config"]["metrics"]["f1"], 0.5);

  {
    std::ofstream t(out("other.tsv"));
    t << "x\t1\ny\t0\n";
  }
  EXPECT_EQ(run("eval --predictions " + out("pred.csv") + " --truth " + out("other.tsv") + " --out " + out("ev2"))
                .status,
            2);
  EXPECT_EQ(run("eval --predictions " + out("pred.csv") + " --truth " + out("missing.tsv")).status, 2);
}

TEST_F(CliTest, BenchmarkFlagsOverrideConfigFile) {
  {
    std::ofstream cfg(out("bench.cfg"));
    cfg << "version = 1\nseeds = 5\niterations = 2\nsynthetic.docs = 200\nstrategies = uncertainty\n";
  }
  auto r = run("benchmark --config " + out("bench.cfg") + " --seeds 1 --out " + out("bench"));
  ASSERT_EQ(r.status, 0);
  auto curves = lines_of(r.out);
  ASSERT_EQ(curves.size(), 3u);
  EXPECT_EQ(curves[1].rfind("uncertainty,0,1,", 0), 0u) << curves[1];
  std::ifstream rows(out("bench") + "/rows.csv");
  std::stringstream rs;
  rs << rows.rdbuf();
  EXPECT_EQ(lines_of(rs.str()).size(), 3u);
  std::ifstream rj(out("bench") + "/run.json");
  EXPECT_EQ(json::parse(rj)["config"]["seeds"], "1");
  EXPECT_EQ(run("benchmark --colour blue").status, 2);
}

TEST_F(CliTest, DfmTokenizesTexts) {
  {
    std::ofstream t(out("texts.tsv"));
    t << "b\tThe cat sat\na\tthe dog, the cat\n";
  }
  auto r = run("dfm --texts " + out("texts.tsv") + " --out-dfm " + out("tok/t.dfm"));
  ASSERT_EQ(r.status, 0);
  std::ifstream in(out("tok/t.dfm"));
  Corpus c = read_dfm(in);
  EXPECT_EQ(c.num_docs(), 2u);
  EXPECT_EQ(c.doc_id(0), "a");
  EXPECT_EQ(c.count(0, *c.vocabulary().find("the")), 2u);
}

TEST_F(CliTest, ServePrintsPortAndStopsOnSigterm) {
  int fds[2];
  ASSERT_EQ(pipe(fds), 0);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&fa, fds[0]);
  const std::string data = out("serve");
  std::vector<std::string> args{ACTIVETEXT_CLI, "serve", "--port", "0", "--data-dir", data};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  ASSERT_EQ(posix_spawn(&pid, ACTIVETEXT_CLI, &fa, nullptr, argv.data(), environ), 0);
  posix_spawn_file_actions_destroy(&fa);
  close(fds[1]);

  std::string line;
  char ch = 0;
  while (read(fds[0], &ch, 1) == 1 && ch != '\n') line.push_back(ch);
  close(fds[0]);
  EXPECT_EQ(line.rfind("listening on http://127.0.0.1:", 0), 0u) << line;
  const int port = std::stoi(line.substr(line.rfind(':') + 1));
  EXPECT_GT(port, 0);
  EXPECT_TRUE(fs::exists(data + "/run.json"));

  kill(pid, SIGTERM);
  int status = 0;
  ASSERT_EQ(waitpid(pid, &status, 0), pid);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace activetext
