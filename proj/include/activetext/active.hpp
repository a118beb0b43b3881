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

// The query / label / refit loop.
//
// ActiveSession is a state machine shared by every driver (the simulated
// loop, the HTTP service, event-log replay):
//
//   awaiting_labels --batch complete--> awaiting_keywords --decisions--> ready_to_fit
//          ^                 \___________(no keyword flow)___________/        |
//          |                                                                  v
//          +------------------- next batch selected <------------------- fit()
//                                                                             |
//                                                      stopping rule met --> stopped
//
// The first batch is a uniform random seed set. Each fit re-applies the
// keyword ledger to the pristine priors, warm-starts EM from the previous
// parameters, scores the held-out split, checks the stopping rule and, if
// the loop continues, selects the next batch.

#ifndef ACTIVETEXT_ACTIVE_HPP_
#define ACTIVETEXT_ACTIVE_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "activetext/corpus.hpp"
#include "activetext/error.hpp"
#include "activetext/eval.hpp"
#include "activetext/keywords.hpp"
#include "activetext/labels.hpp"
#include "activetext/model.hpp"
#include "activetext/rng.hpp"

namespace activetext {

inline constexpr std::size_t kDefaultBatchSize = 20;
inline constexpr double kDefaultStopDelta = 0.01;

enum class Strategy { uncertainty, random };

inline std::string_view to_string(Strategy s) { return s == Strategy::uncertainty ? "uncertainty" : "random"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "uncertainty") return Strategy::uncertainty;
  if (s == "random") return Strategy::random;
  throw ValidationError("strategy", "expected uncertainty or random, got '" + std::string(s) + "'");
}

struct StoppingRule {
  enum class Kind { fixed_budget, f1_delta, stability };

  Kind kind = Kind::fixed_budget;
  /// Maximum labeled documents. Required for fixed_budget; an optional cap
  /// (0 = none) for the other kinds.
  std::size_t budget = 0;
  double delta = kDefaultStopDelta;
  /// Consecutive sub-threshold checks required before stopping.
  int patience = 1;

  void validate() const {
    if (kind == Kind::fixed_budget && budget == 0) throw ValidationError("stop.budget", "must be positive");
    if (kind != Kind::fixed_budget && !(delta > 0.0)) throw ValidationError("stop.delta", "must be positive");
    if (patience < 1) throw ValidationError("stop.patience", "must be at least 1");
  }

  static std::string_view kind_name(Kind k) {
    switch (k) {
      case Kind::fixed_budget: return "budget";
      case Kind::f1_delta: return "f1_delta";
      case Kind::stability: return "stability";
    }
    return "?";
  }

  static Kind parse_kind(std::string_view s) {
    if (s == "budget" || s == "fixed_budget") return Kind::fixed_budget;
    if (s == "f1" || s == "f1_delta") return Kind::f1_delta;
    if (s == "stability") return Kind::stability;
    throw ValidationError("stop.kind", "expected budget, f1_delta or stability, got '" + std::string(s) + "'");
  }

  /// `budget:620`, `f1:0.01[:patience[:cap]]`, `stability:0.01[:patience[:cap]]`.
  static StoppingRule parse(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = text.find(':', start);
      parts.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    StoppingRule r;
    r.kind = parse_kind(parts[0]);
    auto num = [&](std::size_t i, const char* field) {
      try {
        std::size_t used = 0;
        double x = std::stod(parts.at(i), &used);
        if (used != parts[i].size()) throw std::invalid_argument(field);
        return x;
      } catch (const std::exception&) {
        throw ValidationError(field, "bad value in stopping rule '" + std::string(text) + "'");
      }
    };
    if (r.kind == Kind::fixed_budget) {
      if (parts.size() != 2) throw ValidationError("stop", "expected budget:<labels>");
      r.budget = static_cast<std::size_t>(num(1, "stop.budget"));
    } else {
      if (parts.size() < 2 || parts.size() > 4) throw ValidationError("stop", "expected <kind>:<delta>[:patience[:cap]]");
      r.delta = num(1, "stop.delta");
      if (parts.size() > 2) r.patience = static_cast<int>(num(2, "stop.patience"));
      if (parts.size() > 3) r.budget = static_cast<std::size_t>(num(3, "stop.budget"));
    }
    r.validate();
    return r;
  }

  std::string to_spec() const {
    if (kind == Kind::fixed_budget) return "budget:" + std::to_string(budget);
    std::string s = std::string(kind_name(kind)) + ":" + std::to_string(delta) + ":" + std::to_string(patience);
    if (budget) s += ":" + std::to_string(budget);
    return s;
  }
};

struct StopDecision {
  bool stop = false;
  std::string reason;
};

struct ActiveConfig {
  /// Pristine priors; keywords are layered on a copy each iteration.
  Hyperparams hyper;
  std::vector<std::string> class_names;
  std::size_t batch_size = kDefaultBatchSize;
  Strategy strategy = Strategy::uncertainty;
  StoppingRule stop;
  bool keyword_flow = false;
  double gamma = kDefaultGamma;
  std::size_t keyword_m = kDefaultCandidates;
  std::vector<KeywordDecision> initial_keywords;
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  int max_iter = kDefaultMaxIter;
};

/// Documents withheld from training with their true classes.
struct HeldOut {
  Corpus corpus;
  std::vector<int> truth;
};

struct HistoryEntry {
  int iteration = 0;
  std::size_t n_labeled = 0;
  std::optional<MetricRecord> heldout;
  double objective = 0.0;
  /// Fraction of unlabeled documents whose hard label changed since the
  /// previous fit; absent on the first fit.
  std::optional<double> prediction_change;
  int em_iterations = 0;
  double wall_clock_seconds = 0.0;
};

struct SessionState {
  int iteration = 0;
  Hyperparams hyper;
  std::optional<ModelParams> params;
  KeywordLedger ledger;
  LabelStore labels;
  std::vector<std::size_t> pending_queries;  // current batch, in query order
  std::vector<HistoryEntry> metric_history;
  StoppingRule stop_config;
  std::size_t batch_size = kDefaultBatchSize;
  std::uint64_t seed = 0;
  std::vector<int> last_predictions;
  std::optional<PosteriorMatrix> posterior;
  bool has_heldout = false;
};

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

/// Shannon entropy of the collapsed class probabilities of each document.
inline std::vector<double> class_entropies(const Prediction& pred) {
  std::vector<double> out(pred.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = entropy(pred.row(i));
  return out;
}

/// Next documents to query among the unlabeled rows of `labels`.
/// Uncertainty: descending class entropy; entropies equal to 1e-12 are
/// treated as ties and broken by ascending row. Random: seeded uniform
/// sample without replacement, in draw order.
inline std::vector<std::size_t> select_batch(const PosteriorMatrix& post, const LabelStore& labels, std::size_t n,
                                             Strategy strategy, std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < labels.num_docs(); ++i)
    if (!labels.is_labeled(i)) pool.push_back(i);
  if (pool.empty()) throw ValidationError("labels", "no unlabeled documents to select from");
  n = std::min(n, pool.size());
  if (strategy == Strategy::random) {
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(n);
    return pool;
  }
  const auto ent = class_entropies(predict(post, labels));
  std::vector<std::pair<long long, std::size_t>> keyed;
  keyed.reserve(pool.size());
  for (auto i : pool) keyed.emplace_back(-std::llround(ent[i] * 1e12), i);
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n), keyed.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(keyed[j].second);
  return out;
}

/// Stopping decision for the latest history entry.
inline StopDecision check_stopping(const SessionState& s) {
  const auto& rule = s.stop_config;
  const auto n_labeled = s.labels.labeled_count();
  if (rule.budget > 0 && n_labeled >= rule.budget)
    return {true, "budget reached (" + std::to_string(n_labeled) + " labeled)"};
  if (n_labeled >= s.labels.num_docs()) return {true, "no unlabeled documents left"};
  const auto& hist = s.metric_history;
  if (rule.kind == StoppingRule::Kind::f1_delta) {
    if (!s.has_heldout) throw ValidationError("stop", "f1_delta stopping needs a held-out split");
    int run = 0;
    for (std::size_t t = hist.size(); t >= 2; --t) {
      const auto& cur = hist[t - 1].heldout;
      const auto& prev = hist[t - 2].heldout;
      if (!cur || !prev || !(cur->f1 - prev->f1 < rule.delta)) break;
      ++run;
    }
    if (run >= rule.patience)
      return {true, "held-out F1 improved by less than " + std::to_string(rule.delta) + " for " + std::to_string(run) +
                        " check(s)"};
  } else if (rule.kind == StoppingRule::Kind::stability) {
    int run = 0;
    for (std::size_t t = hist.size(); t >= 1; --t) {
      const auto& change = hist[t - 1].prediction_change;
      if (!change || !(*change < rule.delta)) break;
      ++run;
    }
    if (run >= rule.patience)
      return {true, "predictions changed on less than " + std::to_string(rule.delta) + " of unlabeled documents for " +
                        std::to_string(run) + " check(s)"};
  }
  return {false, "continue"};
}

/// Ground-truth label source with optional independent corruption.
class SimulatedOracle {
 public:
  /// `truth[i]` is the class of training row i.
  SimulatedOracle(std::vector<int> truth, int num_classes, double doc_error_p, std::uint64_t seed)
      : truth_(std::move(truth)), num_classes_(num_classes), error_p_(doc_error_p), rng_(seed) {
    if (!(doc_error_p >= 0.0 && doc_error_p <= 1.0)) throw ValidationError("doc_error_p", "must lie in [0, 1]");
  }

  /// Labels for `rows`; each is replaced by a uniformly chosen wrong class
  /// with probability doc_error_p.
  std::vector<std::pair<std::size_t, int>> label(std::span<const std::size_t> rows) {
    std::vector<std::pair<std::size_t, int>> out;
    std::bernoulli_distribution corrupt(error_p_);
    for (auto r : rows) {
      if (r >= truth_.size() || truth_[r] < 0) throw ValidationError("truth", "no ground truth for row " + std::to_string(r));
      int cls = truth_[r];
      if (error_p_ > 0.0 && corrupt(rng_)) {
        std::uniform_int_distribution<int> other(0, num_classes_ - 2);
        int w = other(rng_);
        cls = w >= cls ? w + 1 : w;
      }
      out.emplace_back(r, cls);
    }
    return out;
  }

  const std::vector<int>& truth() const { return truth_; }

 private:
  std::vector<int> truth_;
  int num_classes_;
  double error_p_;
  std::mt19937_64 rng_;
};

/// One line of the prediction export.
struct PredictionRow {
  std::string doc_id;
  int cls = 0;
  double probability = 0.0;
};

/// Mutations a session accepted, in order; replaying them against the same
/// corpus and config reproduces the session.
struct LabelsEvent {
  std::vector<std::pair<std::size_t, int>> items;
};
struct KeywordsEvent {
  std::vector<KeywordDecision> decisions;
};
struct StopEvent {
  std::string reason;
};
using SessionEvent = std::variant<LabelsEvent, KeywordsEvent, StopEvent>;

enum class Phase { awaiting_labels, awaiting_keywords, ready_to_fit, stopped };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::awaiting_labels: return "awaiting_labels";
    case Phase::awaiting_keywords: return "awaiting_keywords";
    case Phase::ready_to_fit: return "fitting";
    case Phase::stopped: return "stopped";
  }
  return "?";
}

class ActiveSession {
 public:
  ActiveSession(std::shared_ptr<const Corpus> train, std::shared_ptr<const HeldOut> heldout, ActiveConfig cfg)
      : train_(std::move(train)), heldout_(std::move(heldout)), cfg_(std::move(cfg)) {
    if (!train_) throw ValidationError("corpus", "missing training corpus");
    cfg_.hyper.validate(train_->num_terms());
    cfg_.stop.validate();
    if (cfg_.batch_size == 0) throw ValidationError("batch_size", "must be positive");
    if (train_->num_docs() == 0) throw ValidationError("corpus", "training corpus is empty");
    s_.hyper = cfg_.hyper;
    s_.labels = cfg_.hyper.label_store(train_->num_docs(), cfg_.class_names);
    s_.ledger = KeywordLedger(s_.labels.num_classes(), cfg_.gamma, cfg_.keyword_m);
    if (!cfg_.initial_keywords.empty())
      s_.ledger = record_decisions(s_.ledger, cfg_.initial_keywords, train_->vocabulary());
    s_.stop_config = cfg_.stop;
    s_.batch_size = cfg_.batch_size;
    s_.seed = cfg_.seed;
    s_.has_heldout = heldout_ && heldout_->corpus.num_docs() > 0;
    if (heldout_ && heldout_->truth.size() != heldout_->corpus.num_docs())
      throw ValidationError("heldout", "truth not aligned with held-out corpus");
    if (cfg_.stop.kind == StoppingRule::Kind::f1_delta && !s_.has_heldout)
      throw ValidationError("stop", "f1_delta stopping needs a held-out split");

    std::vector<std::size_t> all(train_->num_docs());
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg_.seed, "seed-set"));
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(cfg_.batch_size, all.size()));
    s_.pending_queries = std::move(all);
  }

  Phase phase() const { return phase_; }
  const SessionState& state() const { return s_; }
  const ActiveConfig& config() const { return cfg_; }
  const Corpus& train() const { return *train_; }
  std::shared_ptr<const Corpus> train_ptr() const { return train_; }
  const HeldOut* heldout() const { return heldout_.get(); }
  const std::string& stop_reason() const { return stop_reason_; }

  void set_event_sink(std::function<void(const SessionEvent&)> sink) { sink_ = std::move(sink); }
  /// Called after every completed fit, once the next phase is set.
  void set_fit_sink(std::function<void(const ActiveSession&)> sink) { fit_sink_ = std::move(sink); }

  /// Batch rows still waiting for a label, in query order.
  std::vector<std::size_t> pending() const {
    std::vector<std::size_t> out;
    for (auto r : s_.pending_queries)
      if (!s_.labels.is_labeled(r)) out.push_back(r);
    return out;
  }

  /// Accepts labels for rows of the current batch. The call is atomic:
  /// any invalid item rejects the whole submission.
  void submit_labels(std::span<const std::pair<std::size_t, int>> items) {
    require(Phase::awaiting_labels, "submit labels");
    std::unordered_set<std::size_t> batch(s_.pending_queries.begin(), s_.pending_queries.end());
    std::unordered_set<std::size_t> seen;
    for (const auto& [row, cls] : items) {
      if (row >= train_->num_docs()) throw NotFoundError("unknown document row " + std::to_string(row));
      const auto& id = train_->doc_id(row);
      if (s_.labels.is_labeled(row)) throw ConflictError("document '" + id + "' is already labeled");
      if (!batch.count(row)) throw ConflictError("document '" + id + "' is not in the current query batch");
      if (!seen.insert(row).second) throw ConflictError("document '" + id + "' appears twice in the submission");
      if (cls < 0 || cls >= s_.labels.num_classes())
        throw ValidationError("class", "class index " + std::to_string(cls) + " out of range for '" + id + "'");
    }
    for (const auto& [row, cls] : items) s_.labels.set(row, cls);
    emit(LabelsEvent{{items.begin(), items.end()}});
    if (pending().empty()) phase_ = cfg_.keyword_flow && s_.params ? Phase::awaiting_keywords : Phase::ready_to_fit;
  }

  /// Candidate keywords per class from the latest parameters. Terms offered
  /// to an earlier class in the same round are not offered again.
  std::vector<std::vector<std::string>> keyword_candidates() const {
    require(Phase::awaiting_keywords, "propose keywords");
    const auto& vocab = train_->vocabulary();
    KeywordLedger scratch = s_.ledger;
    std::vector<std::vector<std::string>> out;
    for (int cls = 0; cls < s_.labels.num_classes(); ++cls) {
      auto cands = propose_candidates(*s_.params, scratch, vocab, s_.labels.cluster_to_class(), cls);
      std::vector<KeywordDecision> hold;
      for (const auto& t : cands) hold.push_back({t, cls, Verdict::reject});
      scratch = record_decisions(scratch, hold, vocab);
      out.push_back(std::move(cands));
    }
    return out;
  }

  /// Records keyword decisions (possibly none) and moves on to fitting.
  void submit_keywords(std::span<const KeywordDecision> decisions) {
    require(Phase::awaiting_keywords, "submit keywords");
    s_.ledger = record_decisions(s_.ledger, decisions, train_->vocabulary());
    emit(KeywordsEvent{{decisions.begin(), decisions.end()}});
    phase_ = Phase::ready_to_fit;
  }

  /// Runs one refit / evaluate / stop-check / select pass.
  void fit() {
    require(Phase::ready_to_fit, "fit");
    const auto started = std::chrono::steady_clock::now();
    const Corpus& c = *train_;
    const Hyperparams h = apply_keywords(cfg_.hyper, s_.ledger, c.vocabulary(), s_.labels.cluster_to_class());
    const ModelParams init = s_.params ? *s_.params
                                       : init_naive_bayes(c, s_.labels, h, derive_seed(cfg_.seed, "init"),
                                                          InitOptions{.require_all_classes = false});
    FitResult fit = fit_em(c, s_.labels, h, init, cfg_.tol, cfg_.max_iter);

    HistoryEntry entry;
    entry.iteration = s_.iteration;
    entry.n_labeled = s_.labels.labeled_count();
    entry.objective = fit.trace.back();
    entry.em_iterations = fit.iterations;

    Prediction pred = predict(fit.posterior, s_.labels);
    if (!s_.last_predictions.empty()) {
      std::size_t changed = 0, pool = 0;
      for (std::size_t i = 0; i < c.num_docs(); ++i) {
        if (s_.labels.is_labeled(i)) continue;
        ++pool;
        changed += pred.labels[i] != s_.last_predictions[i];
      }
      entry.prediction_change = pool ? static_cast<double>(changed) / static_cast<double>(pool) : 0.0;
    }
    if (s_.has_heldout) entry.heldout = evaluate(fit.params);

    s_.last_predictions = std::move(pred.labels);
    s_.params = std::move(fit.params);
    s_.posterior = std::move(fit.posterior);
    entry.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (entry.heldout) {
      entry.heldout->iteration = entry.iteration;
      entry.heldout->n_labeled = entry.n_labeled;
      entry.heldout->wall_clock_seconds = entry.wall_clock_seconds;
    }
    s_.metric_history.push_back(std::move(entry));
    ++s_.iteration;

    StopDecision d = check_stopping(s_);
    if (d.stop) {
      phase_ = Phase::stopped;
      stop_reason_ = d.reason;
      s_.pending_queries.clear();
    } else {
      s_.pending_queries = select_batch(*s_.posterior, s_.labels, cfg_.batch_size, cfg_.strategy,
                                        derive_seed(cfg_.seed, "select", static_cast<std::uint64_t>(s_.iteration)));
      phase_ = Phase::awaiting_labels;
    }
    if (fit_sink_) fit_sink_(*this);
  }

  /// Ends the session from any state.
  void stop(const std::string& reason) {
    if (phase_ == Phase::stopped) throw ConflictError("session is already stopped");
    phase_ = Phase::stopped;
    stop_reason_ = reason;
    s_.pending_queries.clear();
    emit(StopEvent{reason});
  }

  /// Held-out metrics for `params`: positive-class figures in the binary
  /// modes, macro averages in multiclass mode.
  MetricRecord evaluate(const ModelParams& params) const {
    if (!s_.has_heldout) throw ValidationError("heldout", "no held-out split");
    Prediction p = predict_corpus(heldout_->corpus, params, s_.labels);
    auto m = confusion(heldout_->truth, p.labels, s_.labels.num_classes());
    return metrics_from_confusion(m, cfg_.hyper.mode == Mode::multiclass ? -1 : 1);
  }

  /// Current class probabilities of training rows (uniform before the
  /// first fit).
  std::vector<double> class_probabilities(std::size_t row) const {
    const auto nc = static_cast<std::size_t>(s_.labels.num_classes());
    if (!s_.posterior) return std::vector<double>(nc, 1.0 / static_cast<double>(nc));
    std::vector<double> out(nc, 0.0);
    auto p = s_.posterior->row(row);
    for (std::size_t k = 0; k < p.size(); ++k) out[static_cast<std::size_t>(s_.labels.class_of_cluster(static_cast<int>(k)))] += p[k];
    return out;
  }

  /// One row per training and held-out document: labeled documents carry
  /// their label with probability 1, others the argmax class and its
  /// probability.
  std::vector<PredictionRow> export_predictions() const {
    if (!s_.params) throw ConflictError("no fitted model yet");
    std::vector<PredictionRow> out;
    Prediction train_pred = predict_corpus(*train_, *s_.params, s_.labels);
    for (std::size_t i = 0; i < train_->num_docs(); ++i) {
      if (s_.labels.is_labeled(i)) out.push_back({train_->doc_id(i), s_.labels[i], 1.0});
      else out.push_back({train_->doc_id(i), train_pred.labels[i], train_pred.prob(i, train_pred.labels[i])});
    }
    if (s_.has_heldout) {
      Prediction p = predict_corpus(heldout_->corpus, *s_.params, s_.labels);
      for (std::size_t i = 0; i < heldout_->corpus.num_docs(); ++i)
        out.push_back({heldout_->corpus.doc_id(i), p.labels[i], p.prob(i, p.labels[i])});
    }
    return out;
  }

  /// Applies a recorded event, then runs any fits it unlocks.
  void apply(const SessionEvent& e) {
    if (auto* l = std::get_if<LabelsEvent>(&e)) submit_labels(l->items);
    else if (auto* k = std::get_if<KeywordsEvent>(&e)) submit_keywords(k->decisions);
    else stop(std::get<StopEvent>(e).reason);
    while (phase_ == Phase::ready_to_fit) fit();
  }

 private:
  void require(Phase p, const char* what) const {
    if (phase_ != p)
      throw ConflictError(std::string("cannot ") + what + " while session is " + std::string(to_string(phase_)));
  }
  void emit(const SessionEvent& e) {
    if (sink_) sink_(e);
  }

  std::shared_ptr<const Corpus> train_;
  std::shared_ptr<const HeldOut> heldout_;
  ActiveConfig cfg_;
  SessionState s_;
  Phase phase_ = Phase::awaiting_labels;
  std::string stop_reason_;
  std::function<void(const SessionEvent&)> sink_;
  std::function<void(const ActiveSession&)> fit_sink_;
};

/// Drives a session to completion with simulated oracles. When
/// `keyword_oracle` is null and the keyword flow is on, every keyword
/// round is skipped.
inline void run_active_loop(ActiveSession& session, SimulatedOracle& oracle, const KeywordOracle* keyword_oracle = nullptr,
                            std::uint64_t keyword_seed = 0) {
  std::mt19937_64 kw_rng(keyword_seed);
  while (session.phase() != Phase::stopped) {
    switch (session.phase()) {
      case Phase::awaiting_labels: {
        auto rows = session.pending();
        auto labels = oracle.label(rows);
        session.submit_labels(labels);
        break;
      }
      case Phase::awaiting_keywords: {
        std::vector<KeywordDecision> decisions;
        if (keyword_oracle) {
          auto cands = session.keyword_candidates();
          for (int cls = 0; cls < static_cast<int>(cands.size()); ++cls) {
            auto d = keyword_oracle->decide(cands[static_cast<std::size_t>(cls)], cls, session.train().vocabulary(),
                                            kw_rng);
            decisions.insert(decisions.end(), d.begin(), d.end());
          }
        }
        session.submit_keywords(decisions);
        break;
      }
      case Phase::ready_to_fit:
        session.fit();
        break;
      case Phase::stopped:
        break;
    }
  }
}

}  // namespace activetext

#endif  // ACTIVETEXT_ACTIVE_HPP_
