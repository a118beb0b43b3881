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

// activetext command-line tool.
//
//   activetext fit         --dfm D --labels L [model flags] [--keywords LEDGER]
//   activetext active-sim  --dfm D --labels TRUTH [--strategy ...] [--stop ...]
//   activetext benchmark   [--config FILE] [--<key> value ...]
//   activetext eval        --predictions P.csv --truth T.tsv
//   activetext serve       --data-dir DIR [--port N]
//   activetext dfm         --texts T.tsv | --directory ROOT
//
// Every command writes run.json with its resolved configuration into --out
// (serve: into --data-dir). Exit status: 0 success, 1 runtime failure,
// 2 usage or validation error.

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "activetext/active.hpp"
#include "activetext/benchmark.hpp"
#include "activetext/checkpoint.hpp"
#include "activetext/corpus.hpp"
#include "activetext/eval.hpp"
#include "activetext/http_service.hpp"
#include "activetext/keywords.hpp"
#include "activetext/model.hpp"
#include "activetext/session_manager.hpp"
#include "activetext/session_store.hpp"
#include "activetext/text.hpp"

namespace at = activetext;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ModelFlags {
  std::string mode = "binary";
  int k = 2;
  int k_star = 1;
  double lambda = at::kDefaultLambda;
  double alpha = at::kDefaultAlpha;
  double beta = at::kDefaultBeta;
  double tol = at::kDefaultTolerance;
  int max_iter = at::kDefaultMaxIter;

  void add_to(CLI::App& app) {
    app.add_option("--mode", mode, "binary, multi_cluster_binary or multiclass")->capture_default_str();
    app.add_option("--k", k, "Number of mixture clusters")->capture_default_str();
    app.add_option("--k-star", k_star, "Cluster linked to the positive class (multi_cluster_binary)")
        ->capture_default_str();
    app.add_option("--lambda", lambda, "Weight of unlabeled documents, in [0, 1]")->capture_default_str();
    app.add_option("--alpha", alpha, "Symmetric Dirichlet prior on cluster proportions")->capture_default_str();
    app.add_option("--beta", beta, "Symmetric Dirichlet prior on word distributions")->capture_default_str();
    app.add_option("--tol", tol, "EM convergence tolerance on the objective")->capture_default_str();
    app.add_option("--max-iter", max_iter, "EM iteration cap")->capture_default_str();
  }

  at::Hyperparams hyper(std::size_t num_terms) const {
    const at::Mode m = at::parse_mode(mode);
    // Binary mode always links cluster 1 to the positive class.
    return at::Hyperparams::make(m, k, num_terms, m == at::Mode::binary ? 1 : k_star, lambda, alpha, beta);
  }

  json to_json() const {
    return {{"mode", mode}, {"k", k},       {"k_star", k_star},     {"lambda", lambda},
            {"alpha", alpha}, {"beta", beta}, {"tol", tol}, {"max_iter", max_iter}};
  }
};

void write_run_json(const fs::path& dir, const std::string& command, json config) {
  fs::create_directories(dir);
  json run{{"command", command}, {"version", "0.1.0"}, {"created_at", at::utc_timestamp()}, {"config", std::move(config)}};
  std::ofstream(dir / "run.json") << run.dump(2) << '\n';
}

std::vector<at::PredictionRow> prediction_rows(const at::Corpus& c, const at::Prediction& p) {
  std::vector<at::PredictionRow> out;
  for (std::size_t i = 0; i < c.num_docs(); ++i) out.push_back({c.doc_id(i), p.labels[i], p.prob(i, p.labels[i])});
  return out;
}

// ---------------------------------------------------------------- fit

struct FitCmd {
  std::string dfm, labels, keywords, out = ".";
  std::uint64_t seed = 0;
  double gamma = at::kDefaultGamma;
  ModelFlags model;

  void add_to(CLI::App& app) {
    app.add_option("--dfm", dfm, "Document-feature matrix (triplet format)")->required()->check(CLI::ExistingFile);
    app.add_option("--labels", labels, "doc_id<TAB>class_index rows")->required()->check(CLI::ExistingFile);
    app.add_option("--keywords", keywords, "Keyword ledger: term<TAB>class<TAB>accept|reject")
        ->check(CLI::ExistingFile);
    app.add_option("--gamma", gamma, "Prior boost per accepted keyword")->capture_default_str();
    app.add_option("--seed", seed, "Seed for the initialization jitter")->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
    model.add_to(app);
  }

  int run() const {
    at::Corpus c = at::load_corpus(dfm);
    at::Hyperparams h = model.hyper(c.num_terms());
    at::LabelStore store = h.label_store(c.num_docs());
    at::load_labels(labels, c, store);
    if (!keywords.empty()) {
      auto in = at::detail::open_input(keywords);
      auto ledger = at::replay_ledger(in, at::KeywordLedger(store.num_classes(), gamma), c.vocabulary(),
                                      store.class_names());
      h = at::apply_keywords(h, ledger, c.vocabulary(), store.cluster_to_class());
    }
    const at::ModelParams init = at::init_naive_bayes(c, store, h, at::derive_seed(seed, "init"));
    at::FitResult fit = at::fit_em(c, store, h, init, model.tol, model.max_iter);

    fs::create_directories(out);
    at::save_checkpoint((fs::path(out) / "model.ckpt").string(), {h, fit.params, c.vocabulary().hash()});
    {
      std::ofstream p(fs::path(out) / "predictions.csv");
      at::write_predictions_csv(p, prediction_rows(c, at::predict(fit.posterior, store)), store.class_names());
    }
    json cfg{{"dfm", dfm}, {"labels", labels}, {"keywords", keywords}, {"gamma", gamma}, {"seed", seed},
             {"out", out}, {"model", model.to_json()}};
    write_run_json(out, "fit", cfg);

    std::cout << "documents " << c.num_docs() << ", labeled " << store.labeled_count() << ", terms " << c.num_terms()
              << '\n'
              << "em_iterations " << fit.iterations << (fit.converged ? " (converged)" : " (iteration cap reached)")
              << '\n'
              << "objective " << at::format_real(fit.trace.front()) << " -> " << at::format_real(fit.trace.back())
              << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------- active-sim

struct ActiveSimCmd {
  std::string dfm, labels, out = ".";
  std::string strategy = "uncertainty";
  std::string stop = "budget:620";
  std::size_t batch_size = at::kDefaultBatchSize;
  double test_fraction = 0.2;
  double doc_error_p = 0.0;
  bool keyword_flow = false;
  double keyword_error_p = 0.0;
  double keyword_quantile = 0.9;
  double gamma = at::kDefaultGamma;
  std::size_t keyword_m = at::kDefaultCandidates;
  std::uint64_t seed = 0;
  ModelFlags model;

  void add_to(CLI::App& app) {
    app.add_option("--dfm", dfm, "Document-feature matrix")->required()->check(CLI::ExistingFile);
    app.add_option("--labels", labels, "Ground truth for every document")->required()->check(CLI::ExistingFile);
    app.add_option("--strategy", strategy, "uncertainty or random")->capture_default_str();
    app.add_option("--stop", stop, "budget:N, f1:DELTA[:PATIENCE[:CAP]] or stability:DELTA[:PATIENCE[:CAP]]")
        ->capture_default_str();
    app.add_option("--batch-size", batch_size, "Documents labeled per iteration")->capture_default_str();
    app.add_option("--test-fraction", test_fraction, "Held-out share for metrics (0 disables)")->capture_default_str();
    app.add_option("--doc-error-p", doc_error_p, "Probability a simulated label is wrong")->capture_default_str();
    app.add_flag("--keyword-flow", keyword_flow, "Run a simulated keyword round before each refit");
    app.add_option("--keyword-error-p", keyword_error_p, "Probability a keyword decision is flipped")
        ->capture_default_str();
    app.add_option("--keyword-quantile", keyword_quantile, "Score quantile above which a term is a true keyword")
        ->capture_default_str();
    app.add_option("--gamma", gamma, "Prior boost per accepted keyword")->capture_default_str();
    app.add_option("--keyword-m", keyword_m, "Keyword candidates per class and round")->capture_default_str();
    app.add_option("--seed", seed, "Seed for splits, oracles and selection")->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
    model.add_to(app);
  }

  int run() const {
    at::Corpus all = at::load_corpus(dfm);
    const at::Hyperparams probe = model.hyper(all.num_terms());
    at::LabelStore truth_store = probe.label_store(all.num_docs());
    at::load_labels(labels, all, truth_store);
    for (std::size_t i = 0; i < all.num_docs(); ++i)
      if (!truth_store.is_labeled(i))
        throw at::ValidationError("labels", "no ground truth for document '" + all.doc_id(i) + "'");

    std::vector<std::size_t> train_rows(all.num_docs()), test_rows;
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    if (test_fraction > 0.0) {
      auto split = at::split_corpus(all, test_fraction, at::derive_seed(seed, "split"));
      train_rows = split.train_rows;
      test_rows = split.test_rows;
    }
    auto train = std::make_shared<at::Corpus>(all.subset(train_rows));
    std::shared_ptr<at::HeldOut> held;
    if (!test_rows.empty()) {
      held = std::make_shared<at::HeldOut>();
      held->corpus = all.subset(test_rows);
      for (auto r : test_rows) held->truth.push_back(truth_store[r]);
    }
    std::vector<int> train_truth;
    for (auto r : train_rows) train_truth.push_back(truth_store[r]);

    at::ActiveConfig cfg;
    cfg.hyper = model.hyper(train->num_terms());
    cfg.class_names = truth_store.class_names();
    cfg.batch_size = batch_size;
    cfg.strategy = at::parse_strategy(strategy);
    cfg.stop = at::StoppingRule::parse(stop);
    cfg.keyword_flow = keyword_flow;
    cfg.gamma = gamma;
    cfg.keyword_m = keyword_m;
    cfg.seed = at::derive_seed(seed, "session");
    cfg.tol = model.tol;
    cfg.max_iter = model.max_iter;

    std::optional<at::KeywordOracle> kw;
    if (keyword_flow) {
      at::LabelStore full = cfg.hyper.label_store(train->num_docs());
      for (std::size_t i = 0; i < train_truth.size(); ++i) full.set(i, train_truth[i]);
      kw = at::reference_keyword_oracle(*train, full, cfg.hyper, at::derive_seed(seed, "reference"), keyword_error_p,
                                        keyword_quantile, model.tol, model.max_iter);
    }

    json config{{"dfm", dfm},
                {"labels", labels},
                {"strategy", strategy},
                {"stop", cfg.stop.to_spec()},
                {"batch_size", batch_size},
                {"test_fraction", test_fraction},
                {"doc_error_p", doc_error_p},
                {"keyword_flow", keyword_flow},
                {"keyword_error_p", keyword_error_p},
                {"keyword_quantile", keyword_quantile},
                {"gamma", gamma},
                {"keyword_m", keyword_m},
                {"seed", seed},
                {"out", out},
                {"model", model.to_json()}};
    write_run_json(out, "active-sim", config);

    at::ActiveSession session(train, held, cfg);
    at::SessionDirectory dir(fs::path(out) / "session", config);
    dir.attach(session);
    at::SimulatedOracle oracle(train_truth, truth_store.num_classes(), doc_error_p, at::derive_seed(seed, "oracle"));
    at::run_active_loop(session, oracle, kw ? &*kw : nullptr, at::derive_seed(seed, "keyword-oracle"));

    {
      std::ofstream m(fs::path(out) / "metrics.csv");
      at::write_metrics_csv(m, session.state().metric_history);
    }
    {
      std::ofstream p(fs::path(out) / "predictions.csv");
      at::write_predictions_csv(p, session.export_predictions(), cfg.class_names);
    }
    at::write_metrics_csv(std::cout, session.state().metric_history);
    std::cerr << "stopped: " << session.stop_reason() << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------- benchmark

struct BenchmarkCmd {
  std::string config_path, out = ".";
  std::map<std::string, std::string> flags;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "Benchmark config file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output directory for rows.csv and curves.csv")->capture_default_str();
    for (const auto& [key, value] : at::to_key_values(at::BenchmarkConfig{})) {
      if (key == "version") continue;
      app.add_option_function<std::string>("--" + key, [this, key = key](const std::string& v) { flags[key] = v; },
                                           "Config key '" + key + "' (default " + (value.empty() ? "unset" : value) +
                                               ")");
    }
  }

  int run() const {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      kv = at::read_key_values(in);
    }
    for (const auto& [k, v] : flags) kv[k] = v;
    const at::BenchmarkConfig cfg = at::benchmark_config_from(kv);
    write_run_json(out, "benchmark", at::to_key_values(cfg));

    const at::BenchmarkResult r = at::run_benchmark(cfg);
    {
      std::ofstream rows(fs::path(out) / "rows.csv");
      at::write_benchmark_rows(rows, r.rows);
      std::ofstream curves(fs::path(out) / "curves.csv");
      at::write_benchmark_curves(curves, r.curves);
    }
    at::write_benchmark_curves(std::cout, r.curves);
    for (const auto& [s, secs] : r.seconds)
      std::cerr << at::to_string(s) << ": " << secs << " s fitting across " << cfg.seeds << " runs\n";
    return 0;
  }
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  std::string predictions, truth, out = ".";
  std::vector<std::string> classes{"negative", "positive"};
  std::string positive;

  void add_to(CLI::App& app) {
    app.add_option("--predictions", predictions, "CSV with doc_id,class_name[,probability]")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--truth", truth, "doc_id<TAB>class (name or index)")->required()->check(CLI::ExistingFile);
    app.add_option("--classes", classes, "Class names in index order")->delimiter(',')->capture_default_str();
    app.add_option("--positive", positive,
                   "Class reported as the headline (default: the second of two classes; macro averages otherwise)");
    app.add_option("--out", out, "Directory for run.json")->capture_default_str();
  }

  int class_index(const std::string& v, const std::string& where) const {
    auto it = std::find(classes.begin(), classes.end(), v);
    if (it != classes.end()) return static_cast<int>(it - classes.begin());
    auto idx = at::detail::parse_int<int>(v);
    if (idx && *idx >= 0 && *idx < static_cast<int>(classes.size())) return *idx;
    throw at::ParseError(where + ": unknown class '" + v + "'");
  }

  int run() const {
    if (classes.size() < 2) throw at::ValidationError("classes", "need at least two classes");
    std::map<std::string, int> actual, predicted;
    {
      auto in = at::detail::open_input(truth);
      std::string line;
      for (std::size_t n = 1; std::getline(in, line); ++n) {
        auto sv = at::detail::trim_cr(line);
        if (sv.empty()) continue;
        auto f = at::detail::split_tabs(sv);
        if (f.size() != 2) throw at::ParseError("expected 'doc_id<TAB>class'", n);
        if (!actual.emplace(std::string(f[0]), class_index(std::string(f[1]), truth)).second)
          throw at::ParseError("duplicate document '" + std::string(f[0]) + "'", n);
      }
    }
    {
      auto in = at::detail::open_input(predictions);
      std::string line;
      for (std::size_t n = 1; std::getline(in, line); ++n) {
        auto sv = at::detail::trim_cr(line);
        if (sv.empty() || (n == 1 && sv.rfind("doc_id,", 0) == 0)) continue;
        std::vector<std::string> f;
        std::stringstream ss{std::string(sv)};
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() < 2) throw at::ParseError("expected 'doc_id,class_name,...'", n);
        if (!predicted.emplace(f[0], class_index(f[1], predictions)).second)
          throw at::ParseError("duplicate document '" + f[0] + "'", n);
      }
    }
    // Predictions may cover more documents than the truth file (training
    // rows, say); every truth id must be predicted.
    std::map<std::string, int> matched;
    for (const auto& [id, _] : actual) {
      auto it = predicted.find(id);
      if (it == predicted.end()) throw at::ValidationError("predictions", "no prediction for '" + id + "'");
      matched.insert(*it);
    }
    const int k = static_cast<int>(classes.size());
    int pos = -1;
    if (!positive.empty()) pos = class_index(positive, "--positive");
    else if (k == 2) pos = 1;
    const auto cm = at::confusion(actual, matched, k);
    const auto r = at::metrics_from_confusion(cm, pos);

    json metrics{{"documents", actual.size()},
                 {"accuracy", r.accuracy},
                 {"precision", r.precision},
                 {"recall", r.recall},
                 {"f1", r.f1},
                 {"macro_f1", r.macro_f1},
                 {"undefined", r.undefined}};
    json per_class = json::object();
    for (int c = 0; c < k; ++c) {
      const auto& m = r.per_class[static_cast<std::size_t>(c)];
      per_class[classes[static_cast<std::size_t>(c)]] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    }
    metrics["per_class"] = per_class;
    write_run_json(out, "eval",
                   {{"predictions", predictions}, {"truth", truth}, {"classes", classes}, {"positive", positive},
                    {"metrics", metrics}});

    std::cout << "documents " << actual.size() << '\n'
              << "accuracy " << at::format_real(r.accuracy) << '\n'
              << "precision " << at::format_real(r.precision) << '\n'
              << "recall " << at::format_real(r.recall) << '\n'
              << "f1 " << at::format_real(r.f1) << '\n'
              << "macro_f1 " << at::format_real(r.macro_f1) << '\n';
    if (r.undefined) std::cout << "note: some ratios had a zero denominator and were reported as 0\n";
    return 0;
  }
};

// ---------------------------------------------------------------- serve

struct ServeCmd {
  std::string host = "127.0.0.1", data_dir;
  int port = 8080;

  void add_to(CLI::App& app) {
    app.add_option("--host", host, "Address to bind")->capture_default_str();
    app.add_option("--port", port, "Port; 0 picks a free one")->capture_default_str()->check(CLI::Range(0, 65535));
    app.add_option("--data-dir", data_dir, "Directory holding corpora and sessions")->required();
  }

  int run() const {
    // Block the shutdown signals before any thread starts so that only the
    // waiter below receives them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    write_run_json(data_dir, "serve", {{"host", host}, {"port", port}, {"data_dir", data_dir}});
    at::SessionManager manager(data_dir);
    at::HttpService service(manager);
    const int bound = service.bind(host, port);
    std::cout << "listening on http://" << host << ':' << bound << std::endl;
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&set, &sig);
      service.stop();
    });
    service.listen();
    waiter.join();
    manager.wait_idle();
    return 0;
  }
};

// ---------------------------------------------------------------- dfm

struct DfmCmd {
  std::string texts, directory, out_dfm, out_texts, out_labels, positive;
  std::size_t min_df = 1;
  std::size_t min_length = 2;

  void add_to(CLI::App& app) {
    auto* t = app.add_option("--texts", texts, "doc_id<TAB>text rows")->check(CLI::ExistingFile);
    auto* d = app.add_option("--directory", directory, "One sub-directory of text files per category")
                  ->check(CLI::ExistingDirectory);
    t->excludes(d);
    app.add_option("--out-dfm", out_dfm, "Where to write the document-feature matrix")->required();
    app.add_option("--out-texts", out_texts, "Where to write the raw texts (escaped TSV)");
    app.add_option("--out-labels", out_labels, "Where to write category labels (directory input)");
    app.add_option("--positive", positive, "Category labeled 1, all others 0 (default: category index)");
    app.add_option("--min-df", min_df, "Drop terms seen in fewer documents")->capture_default_str();
    app.add_option("--min-length", min_length, "Shortest token kept")->capture_default_str();
  }

  int run() const {
    if (texts.empty() == directory.empty()) throw at::ValidationError("texts", "give exactly one of --texts or --directory");
    at::TokenizeOptions opts;
    opts.min_df = min_df;
    opts.min_length = min_length;
    at::Corpus c;
    std::vector<std::string> categories;
    if (!texts.empty()) {
      auto in = at::detail::open_input(texts);
      auto map = at::read_texts(in);
      std::vector<std::pair<std::string, std::string>> docs(map.begin(), map.end());
      std::sort(docs.begin(), docs.end());
      c = at::corpus_from_texts(docs, opts);
    } else {
      auto dir = at::corpus_from_directory(directory, opts);
      c = std::move(dir.corpus);
      categories = std::move(dir.categories);
    }
    for (const auto* p : {&out_dfm, &out_texts, &out_labels})
      if (!p->empty() && fs::path(*p).has_parent_path()) fs::create_directories(fs::path(*p).parent_path());
    {
      std::ofstream o(out_dfm);
      at::write_dfm(o, c);
    }
    if (!out_texts.empty()) {
      std::ofstream o(out_texts);
      for (std::size_t i = 0; i < c.num_docs(); ++i)
        if (auto* t = c.raw_text(c.doc_id(i))) o << c.doc_id(i) << '\t' << at::detail::escape_text(*t) << '\n';
    }
    if (!out_labels.empty()) {
      if (categories.empty()) throw at::ValidationError("out-labels", "labels need --directory input");
      std::vector<std::string> names = categories;
      std::sort(names.begin(), names.end());
      names.erase(std::unique(names.begin(), names.end()), names.end());
      if (!positive.empty() && std::find(names.begin(), names.end(), positive) == names.end())
        throw at::ValidationError("positive", "no category '" + positive + "'");
      std::ofstream o(out_labels);
      for (std::size_t i = 0; i < c.num_docs(); ++i) {
        const auto& cat = categories[i];
        const int cls = positive.empty() ? static_cast<int>(std::find(names.begin(), names.end(), cat) - names.begin())
                                         : (cat == positive ? 1 : 0);
        o << c.doc_id(i) << '\t' << cls << '\n';
      }
    }
    write_run_json(fs::path(out_dfm).parent_path().empty() ? fs::path(".") : fs::path(out_dfm).parent_path(), "dfm",
                   {{"texts", texts},
                    {"directory", directory},
                    {"out_dfm", out_dfm},
                    {"out_texts", out_texts},
                    {"out_labels", out_labels},
                    {"positive", positive},
                    {"min_df", min_df},
                    {"min_length", min_length}});
    std::cout << "documents " << c.num_docs() << ", terms " << c.num_terms() << '\n';
    return 0;
  }
};

// CLI11 only reads config files attached to the root app, so subcommand
// files are merged here: a key fills its option unless the flag was given.
void apply_config_file(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name()))
      throw at::ValidationError(item.fullname(), "unknown config key");
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") throw at::ValidationError(item.name, "unknown config key");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised active learning for text classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "activetext 0.1.0");

  FitCmd fit;
  ActiveSimCmd sim;
  BenchmarkCmd bench;
  EvalCmd eval;
  ServeCmd serve;
  DfmCmd dfm;

  auto* fit_app = app.add_subcommand("fit", "Fit the mixture model once on labeled and unlabeled documents");
  fit.add_to(*fit_app);
  std::string fit_config, sim_config;
  fit_app->add_option("--config", fit_config, "TOML/INI file with the same keys as the flags; flags win")
      ->check(CLI::ExistingFile);
  auto* sim_app = app.add_subcommand("active-sim", "Run the active learning loop against a simulated oracle");
  sim.add_to(*sim_app);
  sim_app->add_option("--config", sim_config, "TOML/INI file with the same keys as the flags; flags win")
      ->check(CLI::ExistingFile);
  auto* bench_app = app.add_subcommand("benchmark", "Monte Carlo grid of simulated active learning runs");
  bench.add_to(*bench_app);
  auto* eval_app = app.add_subcommand("eval", "Score a prediction file against ground truth");
  eval.add_to(*eval_app);
  auto* serve_app = app.add_subcommand("serve", "Serve the labeling API over HTTP");
  serve.add_to(*serve_app);
  auto* dfm_app = app.add_subcommand("dfm", "Tokenize raw texts into a document-feature matrix");
  dfm.add_to(*dfm_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_config_file(*fit_app, fit_config);
    apply_config_file(*sim_app, sim_config);
    if (*fit_app) return fit.run();
    if (*sim_app) return sim.run();
    if (*bench_app) return bench.run();
    if (*eval_app) return eval.run();
    if (*serve_app) return serve.run();
    if (*dfm_app) return dfm.run();
  } catch (const at::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const at::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const at::NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
