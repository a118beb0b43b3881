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

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "activetext/benchmark.hpp"
#include "activetext/checkpoint.hpp"
#include "activetext/model.hpp"
#include "test_support.hpp"

namespace activetext {
namespace {

using testing::corpus_from_dense;
using testing::Dense;

ModelParams two_by_two(double pi1, std::array<double, 2> eta0, std::array<double, 2> eta1) {
  ModelParams p;
  p.log_pi = {std::log(1.0 - pi1), std::log(pi1)};
  p.log_eta = {std::log(eta0[0]), std::log(eta1[0]), std::log(eta0[1]), std::log(eta1[1])};
  return p;
}

TEST(EStep, HandEvaluatedPosterior) {
  Corpus c = corpus_from_dense({{1, 0}});
  auto labels = LabelStore::for_mode(1, Mode::binary, 2);
  auto post = e_step(c, labels, two_by_two(0.5, {0.5, 0.5}, {0.8, 0.2}));
  EXPECT_NEAR(post.at(0, 1), 0.4 / 0.65, 1e-12);
  EXPECT_NEAR(post.at(0, 0), 0.25 / 0.65, 1e-12);
}

TEST(EStep, IdenticalColumnsGivePi) {
  Corpus c = corpus_from_dense({{3, 1}, {0, 5}, {2, 2}});
  auto labels = LabelStore::for_mode(3, Mode::binary, 2);
  auto post = e_step(c, labels, two_by_two(0.3, {0.6, 0.4}, {0.6, 0.4}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(post.at(i, 1), 0.3, 1e-12);
}

TEST(EStep, EmptyDocumentGetsPi) {
  Corpus c = corpus_from_dense({{0, 0}});
  auto labels = LabelStore::for_mode(1, Mode::binary, 2);
  auto post = e_step(c, labels, two_by_two(0.2, {0.9, 0.1}, {0.1, 0.9}));
  EXPECT_NEAR(post.at(0, 1), 0.2, 1e-15);
}

TEST(EStep, LabeledRowsAreDegenerateOrRenormalized) {
  Corpus c = corpus_from_dense({{1, 2}, {2, 1}, {3, 0}});
  Hyperparams h = Hyperparams::make(Mode::multi_cluster_binary, 3, 2, 0);
  auto labels = h.label_store(3);
  labels.set(0, 1);
  labels.set(1, 0);
  ModelParams p;
  p.log_pi = {std::log(0.2), std::log(0.3), std::log(0.5)};
  p.log_eta = {std::log(0.5), std::log(0.7), std::log(0.2), std::log(0.5), std::log(0.3), std::log(0.8)};
  auto post = e_step(c, labels, p);
  EXPECT_EQ(post.at(0, 0), 1.0);
  EXPECT_EQ(post.at(0, 1), 0.0);
  EXPECT_EQ(post.at(1, 0), 0.0);
  const double a = 0.3 * 0.7 * 0.7 * 0.3, b = 0.5 * 0.2 * 0.2 * 0.8;
  EXPECT_NEAR(post.at(1, 1), a / (a + b), 1e-12);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += post.at(2, k);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(EStep, NoUnderflowOnLongDocuments) {
  Corpus c = corpus_from_dense({{5000, 3000}});
  auto labels = LabelStore::for_mode(1, Mode::binary, 2);
  auto post = e_step(c, labels, two_by_two(0.5, {0.5, 0.5}, {0.55, 0.45}));
  EXPECT_TRUE(std::isfinite(post.at(0, 1)));
  EXPECT_NEAR(post.at(0, 0) + post.at(0, 1), 1.0, 1e-12);
}

TEST(EStep, ScaleInvarianceOfArgmax) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    auto in = testing::random_instance(rng, Mode::multiclass, 3, 12, 6, 0.5, 0.0);
    ModelParams shifted = in.params;
    for (auto& x : shifted.log_pi) x += 37.25;  // every unnormalized mass times e^37.25
    auto a = predict(e_step(in.corpus, in.labels, in.params), in.labels);
    auto b = predict(e_step(in.corpus, in.labels, shifted), in.labels);
    EXPECT_EQ(a.labels, b.labels);
    for (std::size_t j = 0; j < a.class_probs.size(); ++j) EXPECT_NEAR(a.class_probs[j], b.class_probs[j], 1e-12);
  }
}

/// Builds a binary problem from dense counts and class labels (-1 unlabeled).
struct Problem {
  Corpus corpus;
  LabelStore labels;
};

Problem binary_problem(const Dense& d, const std::vector<int>& y) {
  Problem p{corpus_from_dense(d), LabelStore::for_mode(d.size(), Mode::binary, 2)};
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] >= 0) p.labels.set(i, y[i]);
  return p;
}

TEST(MStep, ProportionFromLabelCounts) {
  auto p = binary_problem({{1, 0}, {1, 0}, {1, 0}, {0, 1}}, {1, 1, 1, 0});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 0.0);
  auto post = e_step(p.corpus, p.labels, two_by_two(0.5, {0.5, 0.5}, {0.5, 0.5}));
  auto m = m_step(p.corpus, p.labels, post, h);
  EXPECT_NEAR(std::exp(m.log_pi[1]), 4.0 / 6.0, 1e-15);
}

TEST(MStep, UnlabeledMassWeightedByLambda) {
  auto p = binary_problem({{1, 0}, {1, 0}, {1, 0}, {0, 1}, {1, 1}, {1, 1}}, {1, 1, 1, 0, -1, -1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 1.0);
  PosteriorMatrix post;
  post.k = 2;
  post.probs = {0, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1};  // unlabeled rows: p_i1 = 1
  auto m = m_step(p.corpus, p.labels, post, h);
  EXPECT_NEAR(std::exp(m.log_pi[1]), 6.0 / 8.0, 1e-15);
}

TEST(MStep, WordDistributionOfSinglePositive) {
  auto p = binary_problem({{3, 1}}, {1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 0.0);
  auto post = e_step(p.corpus, p.labels, two_by_two(0.5, {0.5, 0.5}, {0.5, 0.5}));
  auto m = m_step(p.corpus, p.labels, post, h);
  EXPECT_NEAR(std::exp(m.log_eta_at(0, 1)), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::exp(m.log_eta_at(1, 1)), 1.0 / 3.0, 1e-15);
}

TEST(MStep, NonPositiveMassRaises) {
  auto p = binary_problem({{1, 1}}, {1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 0.0, 0.5);
  auto post = e_step(p.corpus, p.labels, two_by_two(0.5, {0.5, 0.5}, {0.5, 0.5}));
  EXPECT_THROW(m_step(p.corpus, p.labels, post, h), NumericError);
}

TEST(Hyperparams, RejectsInvalidPriors) {
  EXPECT_THROW(Hyperparams::make(Mode::binary, 2, 3, 1, 1.5), ValidationError);
  EXPECT_THROW(Hyperparams::make(Mode::binary, 2, 3, 1, 0.1, 2.0, 0.5), ValidationError);
  EXPECT_THROW(Hyperparams::make(Mode::binary, 2, 3, 1, 0.1, 0.0), ValidationError);
  EXPECT_THROW(Hyperparams::make(Mode::binary, 3, 3), ValidationError);
  EXPECT_THROW(Hyperparams::make(Mode::multi_cluster_binary, 3, 3, 3), ValidationError);
  EXPECT_THROW(Hyperparams::make(Mode::multiclass, 1, 3), ValidationError);
}

TEST(InitNaiveBayes, HandEvaluatedStart) {
  auto p = binary_problem({{3, 1}, {0, 2}}, {1, 0});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2);
  auto m = init_naive_bayes(p.corpus, p.labels, h, 1);
  EXPECT_NEAR(std::exp(m.log_pi[1]), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(m.log_eta_at(0, 1)), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::exp(m.log_eta_at(1, 1)), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::exp(m.log_eta_at(0, 0)), 1.0 / 4.0, 1e-15);
}

TEST(InitNaiveBayes, MissingClassRaisesUnlessRelaxed) {
  auto p = binary_problem({{3, 1}, {0, 2}}, {1, -1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2);
  EXPECT_THROW(init_naive_bayes(p.corpus, p.labels, h, 1), ValidationError);
  auto m = init_naive_bayes(p.corpus, p.labels, h, 1, InitOptions{.require_all_classes = false});
  EXPECT_NEAR(std::exp(m.log_eta_at(0, 0)), 0.5, 1e-15);  // prior mode for the empty class
}

TEST(InitNaiveBayes, SymmetricDataGivesEqualColumns) {
  auto p = binary_problem({{2, 5}, {2, 5}, {2, 5}, {2, 5}}, {0, 0, 1, 1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2);
  auto m = init_naive_bayes(p.corpus, p.labels, h, 1);
  EXPECT_EQ(m.log_eta_at(0, 0), m.log_eta_at(0, 1));
  EXPECT_EQ(m.log_eta_at(1, 0), m.log_eta_at(1, 1));
  EXPECT_NEAR(std::exp(m.log_pi[1]), 0.5, 1e-15);
}

TEST(InitNaiveBayes, JitterSeparatesNegativeClustersAndIsSeeded) {
  auto p0 = binary_problem({{3, 1}, {0, 2}, {1, 1}, {4, 0}}, {1, 0, 0, 0});
  Hyperparams h = Hyperparams::make(Mode::multi_cluster_binary, 3, 2, 1);
  auto labels = h.label_store(4);
  for (std::size_t i = 0; i < 4; ++i) labels.set(i, p0.labels[i]);
  auto a = init_naive_bayes(p0.corpus, labels, h, 42);
  auto b = init_naive_bayes(p0.corpus, labels, h, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.log_eta_at(0, 0), a.log_eta_at(0, 2));
}

TEST(Objective, LambdaZeroIgnoresUnlabeledDocuments) {
  auto small = binary_problem({{3, 1}, {0, 2}}, {1, 0});
  auto big = binary_problem({{3, 1}, {0, 2}, {7, 7}, {1, 9}}, {1, 0, -1, -1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 0.0);
  auto params = two_by_two(0.4, {0.3, 0.7}, {0.6, 0.4});
  EXPECT_EQ(log_posterior_objective(small.corpus, small.labels, params, h),
            log_posterior_objective(big.corpus, big.labels, params, h));
}

TEST(Objective, EmptyCorpusIsMaximizedAtUniform) {
  Corpus c = corpus_from_dense({});
  Dense d;
  Corpus empty = [] {
    CorpusBuilder b;
    b.reserve_terms(3);
    return std::move(b).build();
  }();
  auto labels = LabelStore::for_mode(0, Mode::binary, 2);
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 3);
  ModelParams uniform;
  uniform.log_pi = {std::log(0.5), std::log(0.5)};
  uniform.log_eta.assign(6, std::log(1.0 / 3.0));
  const double top = log_posterior_objective(empty, labels, uniform, h);
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    auto in = testing::random_instance(rng, Mode::binary, 2, 1, 3, 0.0);
    EXPECT_LT(log_posterior_objective(empty, labels, in.params, h), top);
  }
  auto fit = fit_em(empty, labels, h, uniform);
  EXPECT_NEAR(fit.trace.back(), top, 1e-12);
}

TEST(FitEm, InfiniteToleranceRunsOnePair) {
  auto p = binary_problem({{3, 1}, {0, 2}, {1, 1}}, {1, 0, -1});
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 2, 1, 1.0);
  auto init = init_naive_bayes(p.corpus, p.labels, h, 1);
  auto r = fit_em(p.corpus, p.labels, h, init, std::numeric_limits<double>::infinity(), 500);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(FitEm, AscentOnRandomInstancesAllModes) {
  std::mt19937_64 rng(17);
  const std::pair<Mode, int> modes[] = {{Mode::binary, 2}, {Mode::multi_cluster_binary, 3}, {Mode::multiclass, 3}};
  for (auto [mode, k] : modes) {
    for (int rep = 0; rep < 30; ++rep) {
      for (double lambda : {0.0, 0.001, 1.0}) {
        auto in = testing::random_instance(rng, mode, k, 30, 12, lambda, 0.3);
        auto r = fit_em(in.corpus, in.labels, in.hyper, in.params, 1e-12, 200);
        for (std::size_t t = 1; t < r.trace.size(); ++t)
          ASSERT_GE(r.trace[t], r.trace[t - 1] - 1e-8) << to_string(mode) << " rep " << rep << " step " << t;
      }
    }
  }
}

TEST(FitEm, MatchesReferenceUpdates) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Mode mode = rep % 3 == 0 ? Mode::binary : rep % 3 == 1 ? Mode::multi_cluster_binary : Mode::multiclass;
    auto in = testing::random_instance(rng, mode, mode == Mode::binary ? 2 : 3, 6, 5, rep % 2 ? 0.5 : 1.0);
    auto post = e_step(in.corpus, in.labels, in.params);
    auto ref = testing::reference_e_step(in, in.params);
    for (std::size_t i = 0; i < 6; ++i)
      for (int c = 0; c < in.hyper.k; ++c)
        EXPECT_NEAR(post.at(i, c), static_cast<double>(ref[i][static_cast<std::size_t>(c)]), 1e-10);
    auto m = m_step(in.corpus, in.labels, post, in.hyper);
    auto mref = testing::reference_m_step(in, ref, in.hyper);
    for (std::size_t j = 0; j < m.log_pi.size(); ++j)
      EXPECT_NEAR(std::exp(m.log_pi[j]), std::exp(mref.log_pi[j]), 1e-12);
    for (std::size_t j = 0; j < m.log_eta.size(); ++j)
      EXPECT_NEAR(std::exp(m.log_eta[j]), std::exp(mref.log_eta[j]), 1e-12);
  }
}

TEST(FitEm, SupervisedLimitIsNaiveBayes) {
  std::mt19937_64 rng(29);
  for (auto [mode, k] : {std::pair{Mode::binary, 2}, std::pair{Mode::multiclass, 4}}) {
    for (int rep = 0; rep < 10; ++rep) {
      auto in = testing::random_instance(rng, mode, k, 25, 8, 0.0, 0.6);
      for (int c = 0; c < k; ++c) in.labels.set(static_cast<std::size_t>(c), c);  // every class present
      auto init = init_naive_bayes(in.corpus, in.labels, in.hyper, 5);
      auto r = fit_em(in.corpus, in.labels, in.hyper, init);
      EXPECT_TRUE(r.converged);
      EXPECT_LE(r.iterations, 2);
      auto ref = testing::reference_naive_bayes(in.counts, in.labels.assignments(), in.hyper);
      for (std::size_t j = 0; j < ref.log_pi.size(); ++j) {
        EXPECT_NEAR(r.params.log_pi[j], ref.log_pi[j], 1e-12);
        EXPECT_NEAR(std::exp(r.params.log_pi[j]), std::exp(ref.log_pi[j]), 1e-12);
      }
      for (std::size_t j = 0; j < ref.log_eta.size(); ++j) {
        EXPECT_NEAR(r.params.log_eta[j], ref.log_eta[j], 1e-12);
        EXPECT_NEAR(std::exp(r.params.log_eta[j]), std::exp(ref.log_eta[j]), 1e-12);
      }
    }
  }
}

TEST(FitEm, MulticlassWithTwoClustersEqualsBinary) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = testing::random_instance(rng, Mode::binary, 2, 40, 10, 0.001, 0.3);
    in.labels.set(0, 0);
    in.labels.set(1, 1);
    Hyperparams mh = in.hyper;
    mh.mode = Mode::multiclass;
    LabelStore ml = mh.label_store(40);
    for (std::size_t i = 0; i < 40; ++i)
      if (in.labels.is_labeled(i)) ml.set(i, in.labels[i]);
    auto bi = init_naive_bayes(in.corpus, in.labels, in.hyper, 77);
    auto mi = init_naive_bayes(in.corpus, ml, mh, 77);
    EXPECT_EQ(bi, mi);
    auto br = fit_em(in.corpus, in.labels, in.hyper, bi);
    auto mr = fit_em(in.corpus, ml, mh, mi);
    EXPECT_EQ(br.params, mr.params);
    EXPECT_EQ(br.trace, mr.trace);
    EXPECT_EQ(br.posterior.probs, mr.posterior.probs);
  }
}

TEST(FitEm, RecoversGeneratingWordDistributions) {
  SyntheticSpec spec;
  spec.docs = 2000;
  spec.terms = 50;
  spec.positive_rate = 0.3;
  spec.seed = 8;
  auto data = generate_synthetic(spec);
  Hyperparams h = Hyperparams::make(Mode::binary, 2, 50);
  auto labels = h.label_store(2000);
  std::mt19937_64 rng(8);
  std::bernoulli_distribution pick(0.1);
  for (std::size_t i = 0; i < 2000; ++i)
    if (pick(rng)) labels.set(i, data.truth[i]);
  auto r = fit_em(data.corpus, labels, h, init_naive_bayes(data.corpus, labels, h, 1));
  for (int c = 0; c < 2; ++c) {
    const auto& truth = data.word_probs[static_cast<std::size_t>(c)];
    double mx = 0, my = 0;
    for (std::size_t v = 0; v < 50; ++v) {
      mx += truth[v] / 50;
      my += std::exp(r.params.log_eta_at(v, c)) / 50;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t v = 0; v < 50; ++v) {
      const double dx = truth[v] - mx, dy = std::exp(r.params.log_eta_at(v, c)) - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.95) << "class " << c;
  }
}

TEST(Predict, CollapsesClusters) {
  auto labels = LabelStore::for_mode(1, Mode::multi_cluster_binary, 5, 0);
  PosteriorMatrix post;
  post.k = 5;
  post.probs = {0.4, 0.2, 0.1, 0.2, 0.1};
  auto p = predict(post, labels);
  EXPECT_NEAR(p.prob(0, 1), 0.4, 1e-15);
  EXPECT_NEAR(p.prob(0, 0), 0.6, 1e-15);
  EXPECT_EQ(p.labels[0], 0);
}

TEST(Predict, BinaryThresholdAndTie) {
  auto labels = LabelStore::for_mode(2, Mode::binary, 2);
  PosteriorMatrix post;
  post.k = 2;
  post.probs = {0.1, 0.9, 0.5, 0.5};
  auto p = predict(post, labels);
  EXPECT_EQ(p.labels[0], 1);
  EXPECT_EQ(p.labels[1], 0);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(41);
  auto in = testing::random_instance(rng, Mode::multi_cluster_binary, 4, 20, 7, 0.001);
  Checkpoint ck{in.hyper, in.params, in.corpus.vocabulary().hash()};
  std::stringstream ss;
  write_checkpoint(ss, ck);
  Checkpoint back = read_checkpoint(ss);
  EXPECT_TRUE(back == ck);
  auto a = predict_corpus(in.corpus, ck.params, in.labels);
  auto b = predict_corpus(in.corpus, back.params, in.labels);
  EXPECT_EQ(a.class_probs, b.class_probs);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::istringstream bad("activetext-checkpoint 1\nmode binary\nk 2\nlog_pi zz\n");
  EXPECT_THROW(read_checkpoint(bad), ParseError);
  std::istringstream wrong_version("activetext-checkpoint 9\n");
  EXPECT_THROW(read_checkpoint(wrong_version), ParseError);
}

}  // namespace
}  // namespace activetext
