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

#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "activetext/benchmark.hpp"
#include "test_support.hpp"

namespace activetext {
namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.synthetic.docs = 300;
  c.synthetic.positive_rate = 0.2;
  c.seeds = 3;
  c.iterations = 4;
  c.threads = 2;
  return c;
}

TEST(Synthetic, ShapesAndDeterminism) {
  SyntheticSpec s;
  s.docs = 500;
  auto a = generate_synthetic(s);
  auto b = generate_synthetic(s);
  EXPECT_EQ(a.corpus.num_docs(), 500u);
  EXPECT_EQ(a.corpus.num_terms(), 50u);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.corpus.doc_id(7), "d007");
  for (std::size_t i = 0; i < 500; ++i) {
    EXPECT_GE(a.corpus.length(i), 1u);
    for (std::size_t v = 0; v < 50; ++v) ASSERT_EQ(a.corpus.count(i, v), b.corpus.count(i, v));
  }
  for (const auto& w : a.word_probs) EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
}

TEST(Synthetic, ClassShareNearTarget) {
  SyntheticSpec s;
  s.docs = 4000;
  s.positive_rate = 0.05;
  auto d = generate_synthetic(s);
  const auto pos = std::count(d.truth.begin(), d.truth.end(), 1);
  // Binomial(4000, 0.05) has standard deviation about 13.8.
  EXPECT_NEAR(static_cast<double>(pos), 200.0, 55.0);
}

TEST(Synthetic, RejectsInfeasibleSpecs) {
  SyntheticSpec s;
  s.signal_terms = 30;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = {};
  s.positive_rate = 0.6;
  s.classes = 3;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = {};
  s.topic_share = 1.5;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
}

TEST(Config, ParsesKeyValuesWithComments) {
  std::istringstream in(
      "# grid\nversion = 1\nstrategies = uncertainty, random\nseeds=5\nbatch_size = 10\n"
      "synthetic.positive-rate = 0.1\n[extra]\nlambda = 0.5 # inline\n");
  auto c = benchmark_config_from(read_key_values(in));
  EXPECT_EQ(c.seeds, 5u);
  EXPECT_EQ(c.batch_size, 10u);
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.synthetic.positive_rate, 0.1);
  EXPECT_EQ(c.strategies, (std::vector<Strategy>{Strategy::uncertainty, Strategy::random}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(benchmark_config_from({{"colour", "blue"}}), ValidationError);
  EXPECT_THROW(benchmark_config_from({{"seeds", "many"}}), ValidationError);
  EXPECT_THROW(benchmark_config_from({{"seeds", "-2"}}), ValidationError);
  EXPECT_THROW(benchmark_config_from({{"version", "2"}}), ValidationError);
  EXPECT_THROW(benchmark_config_from({{"test-fraction", "1"}}), ValidationError);
  std::istringstream bad("no equals sign\n");
  EXPECT_THROW(read_key_values(bad), ParseError);
}

TEST(Config, KeyValueRoundTrip) {
  BenchmarkConfig c = small_config();
  c.doc_error_p = 0.125;
  c.keywords = true;
  c.strategies = {Strategy::random};
  auto back = benchmark_config_from(to_key_values(c));
  EXPECT_EQ(to_key_values(back), to_key_values(c));
}

TEST(Benchmark, SingleCellRowsPerIteration) {
  BenchmarkConfig c = small_config();
  c.strategies = {Strategy::uncertainty};
  c.seeds = 1;
  c.iterations = 3;
  auto r = run_benchmark(c);
  ASSERT_EQ(r.rows.size(), 3u);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(r.rows[static_cast<std::size_t>(t)].iteration, t);
    EXPECT_EQ(r.rows[static_cast<std::size_t>(t)].n_labeled, 20u * static_cast<std::size_t>(t + 1));
  }
  EXPECT_LE(r.rows[0].cumulative_seconds, r.rows[2].cumulative_seconds);
}

TEST(Benchmark, GridGivesOneCurvePerStrategyAndReplays) {
  BenchmarkConfig c = small_config();
  auto a = run_benchmark(c);
  c.threads = 1;
  auto b = run_benchmark(c);
  ASSERT_EQ(a.rows.size(), 2u * 3u * 4u);
  ASSERT_EQ(a.curves.size(), 8u);
  for (const auto& p : a.curves) EXPECT_EQ(p.runs, 3u);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].strategy, b.rows[i].strategy);
    EXPECT_EQ(a.rows[i].seed, b.rows[i].seed);
    EXPECT_EQ(a.rows[i].metrics.f1, b.rows[i].metrics.f1);
    EXPECT_EQ(a.rows[i].objective, b.rows[i].objective);
  }
  // Rows ordered by (strategy, seed, iteration).
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    auto key = [](const BenchmarkRow& r) { return std::make_tuple(static_cast<int>(r.strategy), r.seed, r.iteration); };
    EXPECT_LT(key(a.rows[i - 1]), key(a.rows[i]));
  }
  EXPECT_TRUE(a.mean_f1_at(Strategy::random, 40).has_value());
  EXPECT_EQ(a.final_point(Strategy::uncertainty)->iteration, 3);
}

TEST(Benchmark, DuplicatedRunsAverageToTheSingleRun) {
  BenchmarkConfig c = small_config();
  c.strategies = {Strategy::uncertainty};
  c.seeds = 1;
  auto one = run_benchmark(c).rows;
  for (std::size_t copies : {2u, 4u}) {
    std::vector<BenchmarkRow> dup;
    for (std::size_t k = 0; k < copies; ++k) dup.insert(dup.end(), one.begin(), one.end());
    auto single = mean_curves(one), mean = mean_curves(dup);
    ASSERT_EQ(single.size(), mean.size());
    for (std::size_t i = 0; i < single.size(); ++i) {
      EXPECT_EQ(mean[i].f1, single[i].f1);
      EXPECT_EQ(mean[i].precision, single[i].precision);
      EXPECT_EQ(mean[i].recall, single[i].recall);
      EXPECT_EQ(mean[i].accuracy, single[i].accuracy);
      EXPECT_EQ(mean[i].n_labeled, single[i].n_labeled);
    }
  }
}

TEST(Benchmark, FileCorpusAndSubsampling) {
  testing::TempDir dir("bench");
  SyntheticSpec s;
  s.docs = 400;
  s.positive_rate = 0.3;
  auto data = generate_synthetic(s);
  {
    std::ofstream dfm(dir.path() / "c.dfm");
    write_dfm(dfm, data.corpus);
    auto labels = LabelStore::for_mode(400, Mode::binary, 2);
    for (std::size_t i = 0; i < 400; ++i) labels.set(i, data.truth[i]);
    std::ofstream lab(dir.path() / "c.labels");
    write_labels(lab, data.corpus, labels);
  }
  BenchmarkConfig c = small_config();
  c.corpus = "file";
  c.dfm = (dir.path() / "c.dfm").string();
  c.labels = (dir.path() / "c.labels").string();
  c.subsample_rate = 0.1;
  c.seeds = 1;
  c.iterations = 2;
  auto r = run_benchmark(c);
  EXPECT_EQ(r.rows.size(), 4u);
  c.subsample_rate = 0.0;
  c.labels = (dir.path() / "missing.labels").string();
  EXPECT_THROW(run_benchmark(c), Error);
}

TEST(Benchmark, CsvSchemas) {
  BenchmarkConfig c = small_config();
  c.seeds = 1;
  c.iterations = 2;
  auto r = run_benchmark(c);
  std::ostringstream rows, curves;
  write_benchmark_rows(rows, r.rows);
  write_benchmark_curves(curves, r.curves);
  std::istringstream rin(rows.str()), cin(curves.str());
  std::string header;
  std::getline(rin, header);
  EXPECT_EQ(header, "strategy,seed,iteration,n_labeled,precision,recall,f1,accuracy,macro_f1,objective,cumulative_seconds");
  std::getline(cin, header);
  EXPECT_EQ(header, "strategy,iteration,runs,n_labeled,precision,recall,f1,accuracy,macro_f1");
  std::size_t lines = 0;
  for (std::string l; std::getline(rin, l);) {
    ++lines;
    EXPECT_EQ(std::count(l.begin(), l.end(), ','), 10);
  }
  EXPECT_EQ(lines, r.rows.size());
}

}  // namespace
}  // namespace activetext
