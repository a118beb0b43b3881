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

// Monte Carlo benchmark harness: simulated active-learning runs over a grid
// of strategies and seeds, reduced to mean learning curves.
//
// Config file (version 1): one `key = value` per line, `#` starts a
// comment, lists are comma separated. Keys use dashes; underscores are
// accepted as well. See BenchmarkConfig for the keys and defaults.
//
// Results table (version 1), one row per (strategy, seed, iteration):
//   strategy,seed,iteration,n_labeled,precision,recall,f1,accuracy,macro_f1,objective,cumulative_seconds
// Curve table (version 1), one row per (strategy, iteration):
//   strategy,iteration,runs,n_labeled,precision,recall,f1,accuracy,macro_f1

#ifndef ACTIVETEXT_BENCHMARK_HPP_
#define ACTIVETEXT_BENCHMARK_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "activetext/active.hpp"
#include "activetext/corpus.hpp"
#include "activetext/error.hpp"
#include "activetext/labels.hpp"
#include "activetext/model.hpp"
#include "activetext/rng.hpp"
#include "activetext/text.hpp"

namespace activetext {

inline constexpr int kBenchmarkSchemaVersion = 1;

/// Corpus drawn from the mixture model itself. A background word
/// distribution comes from a symmetric Dirichlet; each class owns a
/// disjoint set of `signal_terms` topic words and mixes a uniform draw over
/// them into the background with weight `topic_share`.
struct SyntheticSpec {
  std::size_t docs = 2000;
  std::size_t terms = 50;
  int classes = 2;
  /// Share of each non-zero class; class 0 takes the rest.
  double positive_rate = 0.05;
  double doc_length = 40.0;
  std::size_t signal_terms = 10;
  double topic_share = 0.3;
  double concentration = 1.0;
  std::uint64_t seed = 1;
};

struct LabeledCorpus {
  Corpus corpus;
  std::vector<int> truth;
  /// Generating word distribution of each class (synthetic corpora only).
  std::vector<std::vector<double>> word_probs;
};

inline LabeledCorpus generate_synthetic(const SyntheticSpec& s) {
  if (s.docs == 0 || s.terms == 0) throw ValidationError("synthetic", "docs and terms must be positive");
  if (s.classes < 2) throw ValidationError("synthetic.classes", "need at least two classes");
  const double rest = 1.0 - s.positive_rate * (s.classes - 1);
  if (!(s.positive_rate > 0.0) || !(rest > 0.0))
    throw ValidationError("synthetic.positive-rate", "class shares must be positive");
  if (!(s.doc_length > 0.0)) throw ValidationError("synthetic.doc-length", "must be positive");

  if (s.signal_terms * static_cast<std::size_t>(s.classes) > s.terms)
    throw ValidationError("synthetic.signal-terms", "classes x signal terms exceeds the vocabulary");
  if (!(s.topic_share >= 0.0 && s.topic_share <= 1.0))
    throw ValidationError("synthetic.topic-share", "must lie in [0, 1]");

  std::mt19937_64 rng(s.seed);
  std::gamma_distribution<double> gam(s.concentration, 1.0);
  std::vector<double> base(s.terms);
  double total = 0.0;
  for (auto& x : base) total += (x = gam(rng) + 1e-12);
  for (auto& x : base) x /= total;
  std::vector<std::size_t> perm(s.terms);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  LabeledCorpus out;
  std::vector<std::discrete_distribution<std::size_t>> words;
  for (int c = 0; c < s.classes; ++c) {
    std::vector<double> w(s.terms);
    for (std::size_t v = 0; v < s.terms; ++v) w[v] = (1.0 - s.topic_share) * base[v];
    if (s.signal_terms > 0)
      for (std::size_t j = 0; j < s.signal_terms; ++j)
        w[perm[static_cast<std::size_t>(c) * s.signal_terms + j]] += s.topic_share / static_cast<double>(s.signal_terms);
    words.emplace_back(w.begin(), w.end());
    out.word_probs.push_back(words.back().probabilities());
  }
  std::vector<double> shares(static_cast<std::size_t>(s.classes), s.positive_rate);
  shares[0] = rest;
  std::discrete_distribution<int> cls_dist(shares.begin(), shares.end());
  std::poisson_distribution<int> len_dist(s.doc_length);

  std::vector<std::string> names(s.terms);
  Vocabulary vocab;
  for (std::size_t v = 0; v < s.terms; ++v) vocab.add(names[v] = "w" + std::to_string(v));
  CorpusBuilder b(std::move(vocab));
  std::vector<std::uint32_t> counts(s.terms);
  const int width = static_cast<int>(std::to_string(s.docs - 1).size());
  for (std::size_t i = 0; i < s.docs; ++i) {
    std::string id = std::to_string(i);
    id = "d" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id;
    const int c = cls_dist(rng);
    const int len = std::max(1, len_dist(rng));
    std::fill(counts.begin(), counts.end(), 0u);
    for (int t = 0; t < len; ++t) ++counts[words[static_cast<std::size_t>(c)](rng)];
    b.add_document(id);
    for (std::size_t v = 0; v < s.terms; ++v)
      if (counts[v]) b.add(id, names[v], counts[v]);
    out.truth.push_back(c);
  }
  out.corpus = std::move(b).build();
  return out;
}

struct BenchmarkConfig {
  // Corpus source: "synthetic", "file" (dfm + labels) or "directory"
  // (one sub-directory per category).
  std::string corpus = "synthetic";
  std::string dfm;
  std::string labels;
  std::string directory;
  /// Category treated as the positive class for "directory" sources.
  std::string positive_category;
  std::size_t min_df = 1;
  SyntheticSpec synthetic;

  /// 0 keeps the natural class balance.
  double subsample_rate = 0.0;
  double test_fraction = 0.2;

  std::vector<Strategy> strategies{Strategy::uncertainty, Strategy::random};
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
  /// Fits per run, the seed-set fit included.
  std::size_t iterations = 31;
  std::size_t batch_size = kDefaultBatchSize;

  Mode mode = Mode::binary;
  int k = 2;
  int k_star = 1;
  double lambda = kDefaultLambda;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  double tol = kDefaultTolerance;
  int max_iter = kDefaultMaxIter;

  double doc_error_p = 0.0;
  bool keywords = false;
  double keyword_error_p = 0.0;
  double gamma = kDefaultGamma;
  std::size_t keyword_m = kDefaultCandidates;
  double keyword_quantile = 0.9;

  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;

  void validate() const {
    if (corpus != "synthetic" && corpus != "file" && corpus != "directory")
      throw ValidationError("corpus", "expected synthetic, file or directory");
    if (corpus == "file" && (dfm.empty() || labels.empty()))
      throw ValidationError("dfm", "file corpus needs dfm and labels");
    if (corpus == "directory" && (directory.empty() || positive_category.empty()))
      throw ValidationError("directory", "directory corpus needs directory and positive-category");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test-fraction", "must lie in (0, 1)");
    if (subsample_rate != 0.0 && !(subsample_rate > 0.0 && subsample_rate < 1.0))
      throw ValidationError("subsample-rate", "must be 0 or lie in (0, 1)");
    if (strategies.empty()) throw ValidationError("strategies", "need at least one strategy");
    if (seeds == 0) throw ValidationError("seeds", "must be positive");
    if (iterations == 0) throw ValidationError("iterations", "must be positive");
    if (batch_size == 0) throw ValidationError("batch-size", "must be positive");
    if (!(doc_error_p >= 0.0 && doc_error_p <= 1.0)) throw ValidationError("doc-error-p", "must lie in [0, 1]");
    if (!(keyword_error_p >= 0.0 && keyword_error_p <= 1.0))
      throw ValidationError("keyword-error-p", "must lie in [0, 1]");
    if (!(keyword_quantile > 0.0 && keyword_quantile < 1.0))
      throw ValidationError("keyword-quantile", "must lie in (0, 1)");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

}  // namespace detail

/// Parses `key = value` lines into a map (keys normalized to dashes).
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    std::string key = detail::normalize_key(detail::trim(t.substr(0, eq)));
    std::string value = detail::trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError("empty key", lineno);
    kv[key] = value;
  }
  return kv;
}

/// Builds a config from key/value pairs; unknown keys are rejected.
inline BenchmarkConfig benchmark_config_from(const std::map<std::string, std::string>& raw) {
  BenchmarkConfig c;
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : raw) kv[detail::normalize_key(k)] = v;
  auto num = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(key);
      return x;
    } catch (const std::exception&) {
      throw ValidationError(key, "not a number: '" + v + "'");
    }
  };
  auto count = [&](const std::string& key, const std::string& v) {
    const double x = num(key, v);
    if (x < 0 || x != std::floor(x)) throw ValidationError(key, "must be a non-negative integer");
    return static_cast<std::uint64_t>(x);
  };
  auto boolean = [](const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ValidationError(key, "expected true or false");
  };
  for (const auto& [key, v] : kv) {
    if (key == "version") {
      if (count(key, v) != kBenchmarkSchemaVersion) throw ValidationError(key, "unsupported config version");
    } else if (key == "corpus") c.corpus = v;
    else if (key == "dfm") c.dfm = v;
    else if (key == "labels") c.labels = v;
    else if (key == "directory") c.directory = v;
    else if (key == "positive-category") c.positive_category = v;
    else if (key == "min-df") c.min_df = count(key, v);
    else if (key == "synthetic.docs") c.synthetic.docs = count(key, v);
    else if (key == "synthetic.terms") c.synthetic.terms = count(key, v);
    else if (key == "synthetic.classes") c.synthetic.classes = static_cast<int>(count(key, v));
    else if (key == "synthetic.positive-rate") c.synthetic.positive_rate = num(key, v);
    else if (key == "synthetic.doc-length") c.synthetic.doc_length = num(key, v);
    else if (key == "synthetic.signal-terms") c.synthetic.signal_terms = count(key, v);
    else if (key == "synthetic.topic-share") c.synthetic.topic_share = num(key, v);
    else if (key == "synthetic.concentration") c.synthetic.concentration = num(key, v);
    else if (key == "synthetic.seed") c.synthetic.seed = count(key, v);
    else if (key == "subsample-rate") c.subsample_rate = num(key, v);
    else if (key == "test-fraction") c.test_fraction = num(key, v);
    else if (key == "strategies") {
      c.strategies.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) c.strategies.push_back(parse_strategy(detail::trim(item)));
    } else if (key == "seeds") c.seeds = count(key, v);
    else if (key == "seed") c.seed = count(key, v);
    else if (key == "iterations") c.iterations = count(key, v);
    else if (key == "batch-size") c.batch_size = count(key, v);
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "k") c.k = static_cast<int>(count(key, v));
    else if (key == "k-star") c.k_star = static_cast<int>(count(key, v));
    else if (key == "lambda") c.lambda = num(key, v);
    else if (key == "alpha") c.alpha = num(key, v);
    else if (key == "beta") c.beta = num(key, v);
    else if (key == "tol") c.tol = num(key, v);
    else if (key == "max-iter") c.max_iter = static_cast<int>(count(key, v));
    else if (key == "doc-error-p") c.doc_error_p = num(key, v);
    else if (key == "keywords") c.keywords = boolean(key, v);
    else if (key == "keyword-error-p") c.keyword_error_p = num(key, v);
    else if (key == "gamma") c.gamma = num(key, v);
    else if (key == "keyword-m") c.keyword_m = count(key, v);
    else if (key == "keyword-quantile") c.keyword_quantile = num(key, v);
    else if (key == "threads") c.threads = count(key, v);
    else throw ValidationError(key, "unknown benchmark key");
  }
  if (c.mode == Mode::binary) c.k_star = 1;
  c.validate();
  return c;
}

inline BenchmarkConfig load_benchmark_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return benchmark_config_from(read_key_values(in));
}

/// Key/value form of `c`, the inverse of benchmark_config_from.
inline std::map<std::string, std::string> to_key_values(const BenchmarkConfig& c) {
  auto real = [](double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
  };
  std::string strategies;
  for (auto s : c.strategies) strategies += (strategies.empty() ? "" : ",") + std::string(to_string(s));
  return {{"version", std::to_string(kBenchmarkSchemaVersion)},
          {"corpus", c.corpus},
          {"dfm", c.dfm},
          {"labels", c.labels},
          {"directory", c.directory},
          {"positive-category", c.positive_category},
          {"min-df", std::to_string(c.min_df)},
          {"synthetic.docs", std::to_string(c.synthetic.docs)},
          {"synthetic.terms", std::to_string(c.synthetic.terms)},
          {"synthetic.classes", std::to_string(c.synthetic.classes)},
          {"synthetic.positive-rate", real(c.synthetic.positive_rate)},
          {"synthetic.doc-length", real(c.synthetic.doc_length)},
          {"synthetic.signal-terms", std::to_string(c.synthetic.signal_terms)},
          {"synthetic.topic-share", real(c.synthetic.topic_share)},
          {"synthetic.concentration", real(c.synthetic.concentration)},
          {"synthetic.seed", std::to_string(c.synthetic.seed)},
          {"subsample-rate", real(c.subsample_rate)},
          {"test-fraction", real(c.test_fraction)},
          {"strategies", strategies},
          {"seeds", std::to_string(c.seeds)},
          {"seed", std::to_string(c.seed)},
          {"iterations", std::to_string(c.iterations)},
          {"batch-size", std::to_string(c.batch_size)},
          {"mode", std::string(to_string(c.mode))},
          {"k", std::to_string(c.k)},
          {"k-star", std::to_string(c.k_star)},
          {"lambda", real(c.lambda)},
          {"alpha", real(c.alpha)},
          {"beta", real(c.beta)},
          {"tol", real(c.tol)},
          {"max-iter", std::to_string(c.max_iter)},
          {"doc-error-p", real(c.doc_error_p)},
          {"keywords", c.keywords ? "true" : "false"},
          {"keyword-error-p", real(c.keyword_error_p)},
          {"gamma", real(c.gamma)},
          {"keyword-m", std::to_string(c.keyword_m)},
          {"keyword-quantile", real(c.keyword_quantile)},
          {"threads", std::to_string(c.threads)}};
}

struct BenchmarkRow {
  Strategy strategy = Strategy::uncertainty;
  std::uint64_t seed = 0;
  int iteration = 0;
  std::size_t n_labeled = 0;
  MetricRecord metrics;
  double objective = 0.0;
  double cumulative_seconds = 0.0;
};

struct CurvePoint {
  Strategy strategy = Strategy::uncertainty;
  int iteration = 0;
  std::size_t runs = 0;
  double n_labeled = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // ordered by (strategy, seed, iteration)
  std::vector<CurvePoint> curves;  // ordered by (strategy, iteration)
  /// Summed wall-clock seconds of all runs, per strategy in config order.
  std::vector<std::pair<Strategy, double>> seconds;

  /// Mean F1 of `s` at the iteration with `n_labeled` labels, if present.
  std::optional<double> mean_f1_at(Strategy s, std::size_t n_labeled) const {
    for (const auto& p : curves)
      if (p.strategy == s && std::llround(p.n_labeled) == static_cast<long long>(n_labeled)) return p.f1;
    return std::nullopt;
  }
  /// Final point of the mean curve of `s`.
  std::optional<CurvePoint> final_point(Strategy s) const {
    std::optional<CurvePoint> out;
    for (const auto& p : curves)
      if (p.strategy == s) out = p;
    return out;
  }
};

/// Mean curves over the rows of each (strategy, iteration).
inline std::vector<CurvePoint> mean_curves(const std::vector<BenchmarkRow>& rows) {
  std::vector<CurvePoint> out;
  std::map<std::pair<int, int>, std::size_t> where;
  std::vector<Strategy> order;
  for (const auto& r : rows) {
    auto key = std::make_pair(static_cast<int>(r.strategy), r.iteration);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, out.size()).first;
      CurvePoint p;
      p.strategy = r.strategy;
      p.iteration = r.iteration;
      out.push_back(p);
    }
    auto& p = out[it->second];
    ++p.runs;
    p.n_labeled += static_cast<double>(r.n_labeled);
    p.precision += r.metrics.precision;
    p.recall += r.metrics.recall;
    p.f1 += r.metrics.f1;
    p.accuracy += r.metrics.accuracy;
    p.macro_f1 += r.metrics.macro_f1;
  }
  for (auto& p : out) {
    const double n = static_cast<double>(p.runs);
    p.n_labeled /= n;
    p.precision /= n;
    p.recall /= n;
    p.f1 /= n;
    p.accuracy /= n;
    p.macro_f1 /= n;
  }
  std::stable_sort(out.begin(), out.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::make_pair(static_cast<int>(a.strategy), a.iteration) <
           std::make_pair(static_cast<int>(b.strategy), b.iteration);
  });
  return out;
}

/// Loads the corpus a config names, with classes as indices (binary
/// directory sources map the positive category to 1).
inline LabeledCorpus load_benchmark_corpus(const BenchmarkConfig& cfg) {
  if (cfg.corpus == "synthetic") return generate_synthetic(cfg.synthetic);
  if (cfg.corpus == "file") {
    LabeledCorpus out;
    out.corpus = load_corpus(cfg.dfm);
    auto store = LabelStore::for_mode(out.corpus.num_docs(), cfg.mode, cfg.k, cfg.k_star);
    load_labels(cfg.labels, out.corpus, store);
    out.truth = store.assignments();
    for (std::size_t i = 0; i < out.truth.size(); ++i)
      if (out.truth[i] == kUnlabeled)
        throw ValidationError("labels", "no label for document '" + out.corpus.doc_id(i) + "'");
    return out;
  }
  TokenizeOptions opts;
  opts.min_df = cfg.min_df;
  auto dir = corpus_from_directory(cfg.directory, opts);
  LabeledCorpus out;
  out.corpus = std::move(dir.corpus);
  bool any = false;
  for (const auto& cat : dir.categories) {
    out.truth.push_back(cat == cfg.positive_category ? 1 : 0);
    any = any || cat == cfg.positive_category;
  }
  if (!any) throw ValidationError("positive-category", "no documents in category '" + cfg.positive_category + "'");
  return out;
}

/// Keyword oracle whose true keywords come from a fit on the full ground
/// truth `truth` of `train`.
inline KeywordOracle reference_keyword_oracle(const Corpus& train, const LabelStore& truth, const Hyperparams& h,
                                              std::uint64_t seed, double error_p, double quantile_q = 0.9,
                                              double tol = kDefaultTolerance, int max_iter = kDefaultMaxIter) {
  const ModelParams init = init_naive_bayes(train, truth, h, seed, InitOptions{.require_all_classes = false});
  const FitResult ref = fit_em(train, truth, h, init, tol, max_iter);
  return KeywordOracle(ref.params, truth.cluster_to_class(), truth.num_classes(), error_p, quantile_q);
}

/// One simulated run. Splits, subsampling and oracles are seeded from
/// `seed` only, so strategies sharing a seed see the same data.
inline std::vector<BenchmarkRow> run_benchmark_cell(const BenchmarkConfig& cfg, const LabeledCorpus& data,
                                                    Strategy strategy, std::uint64_t seed) {
  const Corpus* corpus = &data.corpus;
  const std::vector<int>* truth = &data.truth;
  LabeledCorpus sub;
  auto store_for = [&](const Corpus& c, const std::vector<int>& t) {
    auto s = LabelStore::for_mode(c.num_docs(), cfg.mode, cfg.k, cfg.k_star);
    for (std::size_t i = 0; i < t.size(); ++i) s.set(i, t[i]);
    return s;
  };
  if (cfg.subsample_rate > 0.0) {
    auto [c, labels] = subsample_to_rate(data.corpus, store_for(data.corpus, data.truth), cfg.subsample_rate,
                                         derive_seed(seed, "subsample"));
    sub.corpus = std::move(c);
    sub.truth = labels.assignments();
    corpus = &sub.corpus;
    truth = &sub.truth;
  }
  const SplitSpec split = split_corpus(*corpus, cfg.test_fraction, derive_seed(seed, "split"));
  auto train = std::make_shared<Corpus>(corpus->subset(split.train_rows));
  auto held = std::make_shared<HeldOut>();
  held->corpus = corpus->subset(split.test_rows);
  std::vector<int> train_truth;
  for (auto r : split.train_rows) train_truth.push_back((*truth)[r]);
  for (auto r : split.test_rows) held->truth.push_back((*truth)[r]);

  ActiveConfig ac;
  ac.hyper = Hyperparams::make(cfg.mode, cfg.k, train->num_terms(), cfg.k_star, cfg.lambda, cfg.alpha, cfg.beta);
  ac.batch_size = cfg.batch_size;
  ac.strategy = strategy;
  ac.stop.kind = StoppingRule::Kind::fixed_budget;
  ac.stop.budget = cfg.batch_size * cfg.iterations;
  ac.keyword_flow = cfg.keywords;
  ac.gamma = cfg.gamma;
  ac.keyword_m = cfg.keyword_m;
  ac.seed = derive_seed(seed, "session");
  ac.tol = cfg.tol;
  ac.max_iter = cfg.max_iter;

  std::optional<KeywordOracle> kw;
  if (cfg.keywords)
    kw = reference_keyword_oracle(*train, store_for(*train, train_truth), ac.hyper, derive_seed(seed, "reference"),
                                  cfg.keyword_error_p, cfg.keyword_quantile, cfg.tol, cfg.max_iter);

  const int num_classes = cfg.mode == Mode::multiclass ? cfg.k : 2;
  ActiveSession session(train, held, ac);
  SimulatedOracle oracle(train_truth, num_classes, cfg.doc_error_p, derive_seed(seed, "oracle"));
  run_active_loop(session, oracle, kw ? &*kw : nullptr, derive_seed(seed, "keyword-oracle"));

  std::vector<BenchmarkRow> rows;
  double cumulative = 0.0;
  for (const auto& h : session.state().metric_history) {
    cumulative += h.wall_clock_seconds;
    BenchmarkRow r;
    r.strategy = strategy;
    r.seed = seed;
    r.iteration = h.iteration;
    r.n_labeled = h.n_labeled;
    r.metrics = *h.heldout;
    r.objective = h.objective;
    r.cumulative_seconds = cumulative;
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Runs every (strategy, seed) cell on `data`, in parallel when allowed.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const LabeledCorpus& data) {
  cfg.validate();
  struct Cell {
    Strategy strategy;
    std::uint64_t seed;
    std::vector<BenchmarkRow> rows;
    std::exception_ptr error;
  };
  std::vector<Cell> cells;
  for (auto s : cfg.strategies)
    for (std::size_t i = 0; i < cfg.seeds; ++i) cells.push_back({s, cfg.seed + i, {}, nullptr});

  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < cells.size(); j = next++) {
      try {
        cells[j].rows = run_benchmark_cell(cfg, data, cells[j].strategy, cells[j].seed);
      } catch (...) {
        cells[j].error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  BenchmarkResult out;
  for (auto s : cfg.strategies) out.seconds.emplace_back(s, 0.0);
  for (auto& c : cells) {
    if (c.error) std::rethrow_exception(c.error);
    for (auto& [s, secs] : out.seconds)
      if (s == c.strategy && !c.rows.empty()) secs += c.rows.back().cumulative_seconds;
    for (auto& r : c.rows) out.rows.push_back(std::move(r));
  }
  out.curves = mean_curves(out.rows);
  return out;
}

inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) { return run_benchmark(cfg, load_benchmark_corpus(cfg)); }

inline void write_benchmark_rows(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out.precision(17);
  out << "strategy,seed,iteration,n_labeled,precision,recall,f1,accuracy,macro_f1,objective,cumulative_seconds\n";
  for (const auto& r : rows)
    out << to_string(r.strategy) << ',' << r.seed << ',' << r.iteration << ',' << r.n_labeled << ','
        << r.metrics.precision << ',' << r.metrics.recall << ',' << r.metrics.f1 << ',' << r.metrics.accuracy << ','
        << r.metrics.macro_f1 << ',' << r.objective << ',' << r.cumulative_seconds << '\n';
}

inline void write_benchmark_curves(std::ostream& out, const std::vector<CurvePoint>& curves) {
  out.precision(17);
  out << "strategy,iteration,runs,n_labeled,precision,recall,f1,accuracy,macro_f1\n";
  for (const auto& p : curves)
    out << to_string(p.strategy) << ',' << p.iteration << ',' << p.runs << ',' << p.n_labeled << ',' << p.precision
        << ',' << p.recall << ',' << p.f1 << ',' << p.accuracy << ',' << p.macro_f1 << '\n';
}

}  // namespace activetext

#endif  // ACTIVETEXT_BENCHMARK_HPP_
