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

// Keyword prior boosting. Accepted keywords of class c add gamma to the
// Dirichlet prior beta[v, k] of every cluster k linked to c. Candidates are
// the words with the highest log ratio between the class's word
// distribution and that of all other classes.
//
// Ledger file: `term<TAB>class_name<TAB>accept|reject`, in decision order.

#ifndef ACTIVETEXT_KEYWORDS_HPP_
#define ACTIVETEXT_KEYWORDS_HPP_

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "activetext/corpus.hpp"
#include "activetext/error.hpp"
#include "activetext/labels.hpp"
#include "activetext/model.hpp"

namespace activetext {

inline constexpr double kDefaultGamma = 10.0;
inline constexpr std::size_t kDefaultCandidates = 10;

enum class Verdict { accept, reject };

inline std::string_view to_string(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

struct KeywordDecision {
  std::string term;
  int cls = 0;
  Verdict verdict = Verdict::accept;

  bool operator==(const KeywordDecision&) const = default;
};

class KeywordLedger {
 public:
  KeywordLedger() = default;
  explicit KeywordLedger(int num_classes, double gamma = kDefaultGamma, std::size_t m = kDefaultCandidates)
      : accepted_(static_cast<std::size_t>(num_classes)), gamma_(gamma), m_(m) {
    if (num_classes < 2) throw ValidationError("num_classes", "need at least two classes");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma", "must be positive");
  }

  int num_classes() const { return static_cast<int>(accepted_.size()); }
  double gamma() const { return gamma_; }
  std::size_t m() const { return m_; }
  const std::set<std::string>& accepted(int cls) const { return accepted_.at(static_cast<std::size_t>(cls)); }
  const std::set<std::string>& rejected() const { return rejected_; }
  const std::vector<KeywordDecision>& history() const { return history_; }

  bool is_decided(const std::string& term) const {
    if (rejected_.count(term)) return true;
    for (const auto& s : accepted_)
      if (s.count(term)) return true;
    return false;
  }

  /// Class the term was accepted for, or -1.
  int accepted_class(const std::string& term) const {
    for (std::size_t c = 0; c < accepted_.size(); ++c)
      if (accepted_[c].count(term)) return static_cast<int>(c);
    return -1;
  }

  bool empty() const { return history_.empty(); }

 private:
  friend KeywordLedger record_decisions(const KeywordLedger&, std::span<const KeywordDecision>, const Vocabulary&);

  std::vector<std::set<std::string>> accepted_;
  std::set<std::string> rejected_;
  std::vector<KeywordDecision> history_;
  double gamma_ = kDefaultGamma;
  std::size_t m_ = kDefaultCandidates;
};

/// Ledger with `decisions` appended. Every term must be in the vocabulary
/// and appear once per call; a term already decided differently raises
/// ConflictError, an identical repeat is ignored.
inline KeywordLedger record_decisions(const KeywordLedger& ledger, std::span<const KeywordDecision> decisions,
                                      const Vocabulary& vocab) {
  KeywordLedger out = ledger;
  std::unordered_set<std::string> in_call;
  for (const auto& d : decisions) {
    if (!vocab.find(d.term)) throw ValidationError("term", "unknown term '" + d.term + "'");
    if (d.cls < 0 || d.cls >= ledger.num_classes())
      throw ValidationError("class", "class index " + std::to_string(d.cls) + " out of range for '" + d.term + "'");
    if (!in_call.insert(d.term).second) throw ConflictError("term '" + d.term + "' decided twice in one batch");
    const int prior_class = out.accepted_class(d.term);
    const bool prior_reject = out.rejected_.count(d.term) > 0;
    if (prior_class >= 0 || prior_reject) {
      const bool same = d.verdict == Verdict::accept ? prior_class == d.cls : prior_reject;
      if (same) continue;
      throw ConflictError("term '" + d.term + "' was already " + (prior_reject ? "rejected" : "accepted"));
    }
    if (d.verdict == Verdict::accept) out.accepted_[static_cast<std::size_t>(d.cls)].insert(d.term);
    else out.rejected_.insert(d.term);
    out.history_.push_back(d);
  }
  return out;
}

/// Copy of `h` with gamma added to beta for every accepted keyword, on
/// every cluster linked to the keyword's class. `h` must hold the pristine
/// priors; applying twice adds gamma twice.
inline Hyperparams apply_keywords(const Hyperparams& h, const KeywordLedger& ledger, const Vocabulary& vocab,
                                  const std::vector<int>& cluster_to_class) {
  if (cluster_to_class.size() != static_cast<std::size_t>(h.k))
    throw ValidationError("cluster_to_class", "expected K entries");
  Hyperparams out = h;
  for (int cls = 0; cls < ledger.num_classes(); ++cls) {
    for (const auto& term : ledger.accepted(cls)) {
      auto v = vocab.find(term);
      if (!v) throw ValidationError("term", "unknown term '" + term + "'");
      for (int k = 0; k < h.k; ++k)
        if (cluster_to_class[static_cast<std::size_t>(k)] == cls) out.beta_at(*v, k) += ledger.gamma();
    }
  }
  return out;
}

/// Per-word log ratio between class `cls` and the rest. Each side is the
/// pi-weighted mixture of its clusters' word distributions, so with one
/// cluster per class this is log(eta[v, cls] / eta[v, other]).
inline std::vector<double> keyword_scores(const ModelParams& params, const std::vector<int>& cluster_to_class,
                                          int cls) {
  const auto kk = static_cast<std::size_t>(params.k());
  const std::size_t n_terms = params.num_terms();
  std::vector<double> in_w, out_w;
  std::vector<std::size_t> in_k, out_k;
  for (std::size_t k = 0; k < kk; ++k) {
    if (cluster_to_class[k] == cls) {
      in_k.push_back(k);
      in_w.push_back(params.log_pi[k]);
    } else {
      out_k.push_back(k);
      out_w.push_back(params.log_pi[k]);
    }
  }
  if (in_k.empty() || out_k.empty()) throw ValidationError("class", "class has no clusters on one side");
  const double in_norm = detail::log_sum_exp(in_w);
  const double out_norm = detail::log_sum_exp(out_w);
  std::vector<double> scores(n_terms);
  std::vector<double> tmp;
  for (std::size_t v = 0; v < n_terms; ++v) {
    auto side = [&](const std::vector<std::size_t>& ks, const std::vector<double>& w, double norm) {
      if (ks.size() == 1) return params.log_eta[v * kk + ks[0]];
      tmp.resize(ks.size());
      for (std::size_t j = 0; j < ks.size(); ++j) tmp[j] = w[j] + params.log_eta[v * kk + ks[j]];
      return detail::log_sum_exp(tmp) - norm;
    };
    scores[v] = side(in_k, in_w, in_norm) - side(out_k, out_w, out_norm);
  }
  return scores;
}

/// Up to `ledger.m()` undecided terms for `cls`, by descending score, ties
/// by vocabulary position.
inline std::vector<std::string> propose_candidates(const ModelParams& params, const KeywordLedger& ledger,
                                                   const Vocabulary& vocab, const std::vector<int>& cluster_to_class,
                                                   int cls) {
  if (params.num_terms() != vocab.size()) throw ValidationError("params", "vocabulary size mismatch");
  auto scores = keyword_scores(params, cluster_to_class, cls);
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < vocab.size(); ++v)
    if (!ledger.is_decided(vocab.term(v))) order.push_back(v);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (order.size() > ledger.m()) order.resize(ledger.m());
  std::vector<std::string> out;
  for (auto v : order) out.push_back(vocab.term(v));
  return out;
}

inline void write_ledger(std::ostream& out, const KeywordLedger& ledger, const std::vector<std::string>& class_names) {
  for (const auto& d : ledger.history())
    out << d.term << '\t' << class_names.at(static_cast<std::size_t>(d.cls)) << '\t' << to_string(d.verdict) << '\n';
}

inline std::vector<KeywordDecision> read_ledger_decisions(std::istream& in,
                                                          const std::vector<std::string>& class_names) {
  std::vector<KeywordDecision> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim_cr(line);
    if (sv.empty()) continue;
    auto f = detail::split_tabs(sv);
    if (f.size() != 3) throw ParseError("expected 'term<TAB>class<TAB>accept|reject'", lineno);
    auto it = std::find(class_names.begin(), class_names.end(), f[1]);
    if (it == class_names.end()) throw ParseError("unknown class '" + std::string(f[1]) + "'", lineno);
    KeywordDecision d;
    d.term = std::string(f[0]);
    d.cls = static_cast<int>(it - class_names.begin());
    if (f[2] == "accept") d.verdict = Verdict::accept;
    else if (f[2] == "reject") d.verdict = Verdict::reject;
    else throw ParseError("expected accept or reject, got '" + std::string(f[2]) + "'", lineno);
    out.push_back(std::move(d));
  }
  return out;
}

/// Rebuilds a ledger by replaying a ledger file one decision at a time.
inline KeywordLedger replay_ledger(std::istream& in, KeywordLedger base, const Vocabulary& vocab,
                                   const std::vector<std::string>& class_names) {
  for (const auto& d : read_ledger_decisions(in, class_names)) base = record_decisions(base, std::span(&d, 1), vocab);
  return base;
}

/// Linear-interpolation sample quantile (R type 7).
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ValidationError("quantile", "empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

/// Simulated keyword adjudicator. A term is a true keyword of a class when
/// its score under a reference model fit on full labels is above the 90%
/// quantile of that class's scores. Each decision is flipped with
/// probability `error_p`.
class KeywordOracle {
 public:
  KeywordOracle() = default;
  KeywordOracle(const ModelParams& reference, const std::vector<int>& cluster_to_class, int num_classes,
                double error_p, double q = 0.9)
      : error_p_(error_p), truth_(static_cast<std::size_t>(num_classes)) {
    if (!(error_p >= 0.0 && error_p <= 1.0)) throw ValidationError("keyword_error_p", "must lie in [0, 1]");
    for (int c = 0; c < num_classes; ++c) {
      auto scores = keyword_scores(reference, cluster_to_class, c);
      const double cut = quantile(scores, q);
      auto& t = truth_[static_cast<std::size_t>(c)];
      t.assign(scores.size(), false);
      for (std::size_t v = 0; v < scores.size(); ++v) t[v] = scores[v] > cut;
    }
  }

  bool is_true_keyword(std::size_t v, int cls) const { return truth_.at(static_cast<std::size_t>(cls)).at(v); }
  std::size_t true_count(int cls) const {
    const auto& t = truth_.at(static_cast<std::size_t>(cls));
    return static_cast<std::size_t>(std::count(t.begin(), t.end(), true));
  }

  std::vector<KeywordDecision> decide(std::span<const std::string> candidates, int cls, const Vocabulary& vocab,
                                      std::mt19937_64& rng) const {
    std::bernoulli_distribution flip(error_p_);
    std::vector<KeywordDecision> out;
    for (const auto& term : candidates) {
      bool truth = is_true_keyword(*vocab.find(term), cls);
      if (error_p_ > 0.0 && flip(rng)) truth = !truth;
      out.push_back({term, cls, truth ? Verdict::accept : Verdict::reject});
    }
    return out;
  }

 private:
  double error_p_ = 0.0;
  std::vector<std::vector<bool>> truth_;
};

}  // namespace activetext

#endif  // ACTIVETEXT_KEYWORDS_HPP_
