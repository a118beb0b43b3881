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

// Semi-supervised multinomial mixture over K clusters fit by EM.
//
// Documents are multinomial draws from one cluster's word distribution
// eta[., k]; clusters are drawn from pi. Labeled documents contribute their
// full likelihood, unlabeled documents contribute their marginal likelihood
// raised to the power lambda. Priors are Dirichlet(alpha) on pi and
// Dirichlet(beta[., k]) on each eta column; parameters are MAP estimates.
//
// Everything is computed in log space. Multinomial coefficients are
// constant in the parameters and are dropped, so objective values are only
// comparable within one corpus.

#ifndef ACTIVETEXT_MODEL_HPP_
#define ACTIVETEXT_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "activetext/corpus.hpp"
#include "activetext/error.hpp"
#include "activetext/labels.hpp"

namespace activetext {

inline constexpr double kDefaultAlpha = 2.0;
inline constexpr double kDefaultBeta = 2.0;
inline constexpr double kDefaultLambda = 0.001;
inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr int kDefaultMaxIter = 500;
inline constexpr double kInitJitterConcentration = 5.0;

struct Hyperparams {
  Mode mode = Mode::binary;
  int k = 2;
  /// Cluster linked to the positive class. Fixed to 1 in binary mode.
  int k_star = 1;
  double lambda = kDefaultLambda;
  std::vector<double> alpha;  // K
  std::vector<double> beta;   // V x K, row-major: beta[v * K + k]

  static Hyperparams make(Mode mode, int k, std::size_t n_terms, int k_star = 1, double lambda = kDefaultLambda,
                          double alpha = kDefaultAlpha, double beta = kDefaultBeta) {
    Hyperparams h;
    h.mode = mode;
    h.k = k;
    h.k_star = mode == Mode::binary ? 1 : k_star;
    h.lambda = lambda;
    h.alpha.assign(static_cast<std::size_t>(k), alpha);
    h.beta.assign(n_terms * static_cast<std::size_t>(k), beta);
    h.validate(n_terms);
    return h;
  }

  std::size_t num_terms() const { return k > 0 ? beta.size() / static_cast<std::size_t>(k) : 0; }
  double beta_at(std::size_t v, int cluster) const { return beta[v * static_cast<std::size_t>(k) + cluster]; }
  double& beta_at(std::size_t v, int cluster) { return beta[v * static_cast<std::size_t>(k) + cluster]; }

  /// Label store layout matching this configuration.
  LabelStore label_store(std::size_t n_docs, std::vector<std::string> class_names = {}) const {
    return LabelStore::for_mode(n_docs, mode, k, k_star, std::move(class_names));
  }

  void validate(std::size_t n_terms) const {
    if (k < 2) throw ValidationError("k", "K must be at least 2");
    if (mode == Mode::binary && k != 2) throw ValidationError("k", "binary mode requires K = 2");
    if (mode == Mode::binary && k_star != 1) throw ValidationError("k_star", "binary mode links cluster 1");
    if (mode == Mode::multi_cluster_binary && (k_star < 0 || k_star >= k))
      throw ValidationError("k_star", "must be a cluster index below K");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda", "must lie in [0, 1]");
    if (alpha.size() != static_cast<std::size_t>(k)) throw ValidationError("alpha", "expected K entries");
    for (double a : alpha)
      if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alpha", "entries must be positive and finite");
    if (beta.size() != n_terms * static_cast<std::size_t>(k)) throw ValidationError("beta", "expected V x K entries");
    for (double b : beta)
      if (!(b >= 1.0) || !std::isfinite(b)) throw ValidationError("beta", "entries must be finite and >= 1");
  }
};

/// MAP parameters: log pi (K) and log eta (V x K, row-major).
struct ModelParams {
  std::vector<double> log_pi;
  std::vector<double> log_eta;

  int k() const { return static_cast<int>(log_pi.size()); }
  std::size_t num_terms() const { return log_pi.empty() ? 0 : log_eta.size() / log_pi.size(); }
  double log_eta_at(std::size_t v, int cluster) const { return log_eta[v * log_pi.size() + cluster]; }

  void validate(std::size_t n_terms, double tol = 1e-10) const {
    if (log_pi.size() < 2) throw ValidationError("log_pi", "need at least two clusters");
    if (log_eta.size() != n_terms * log_pi.size()) throw ValidationError("log_eta", "expected V x K entries");
    double s = 0.0;
    for (double x : log_pi) {
      if (!std::isfinite(x)) throw ValidationError("log_pi", "entries must be finite");
      s += std::exp(x);
    }
    if (std::abs(s - 1.0) > tol) throw ValidationError("log_pi", "proportions do not sum to 1");
    const auto kk = log_pi.size();
    for (std::size_t c = 0; c < kk; ++c) {
      double col = 0.0;
      for (std::size_t v = 0; v < n_terms; ++v) {
        double x = log_eta[v * kk + c];
        if (!std::isfinite(x)) throw ValidationError("log_eta", "entries must be finite");
        col += std::exp(x);
      }
      if (n_terms > 0 && std::abs(col - 1.0) > tol)
        throw ValidationError("log_eta", "column " + std::to_string(c) + " does not sum to 1");
    }
  }

  bool operator==(const ModelParams&) const = default;
};

/// N x K responsibilities, row-major.
struct PosteriorMatrix {
  int k = 0;
  std::vector<double> probs;

  std::size_t num_docs() const { return k > 0 ? probs.size() / static_cast<std::size_t>(k) : 0; }
  std::span<const double> row(std::size_t i) const {
    return {probs.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  std::span<double> row(std::size_t i) {
    return {probs.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  double at(std::size_t i, int cluster) const { return probs[i * static_cast<std::size_t>(k) + cluster]; }
};

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

/// Unnormalized log mass log pi_k + sum_v D_iv log eta_vk for every k.
inline void log_joint(const Corpus& c, std::size_t i, const ModelParams& params, std::span<double> out) {
  const auto kk = static_cast<std::size_t>(params.k());
  for (std::size_t k = 0; k < kk; ++k) out[k] = params.log_pi[k];
  auto terms = c.row_terms(i);
  auto counts = c.row_counts(i);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double* eta = params.log_eta.data() + static_cast<std::size_t>(terms[j]) * kk;
    const double n = counts[j];
    for (std::size_t k = 0; k < kk; ++k) out[k] += n * eta[k];
  }
}

/// Softmax of `scores` restricted to clusters mapped to `cls` (all clusters
/// when cls is kUnlabeled). A single admissible cluster gets exactly 1.
inline void restricted_softmax(std::span<const double> scores, const std::vector<int>& cluster_to_class, int cls,
                               std::span<double> out) {
  const std::size_t kk = scores.size();
  double m = -std::numeric_limits<double>::infinity();
  std::size_t admissible = 0, last = 0;
  for (std::size_t k = 0; k < kk; ++k) {
    if (cls != kUnlabeled && cluster_to_class[k] != cls) continue;
    m = std::max(m, scores[k]);
    ++admissible;
    last = k;
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (admissible == 1) {
    out[last] = 1.0;
    return;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    if (cls != kUnlabeled && cluster_to_class[k] != cls) continue;
    out[k] = std::exp(scores[k] - m);
    s += out[k];
  }
  for (auto& p : out) p /= s;
}

inline void check_aligned(const Corpus& c, const LabelStore& labels, int k) {
  if (labels.num_docs() != c.num_docs()) throw ValidationError("labels", "not aligned with corpus rows");
  if (labels.num_clusters() != k) throw ValidationError("labels", "cluster count differs from model K");
}

}  // namespace detail

/// Responsibilities for every document. Unlabeled rows are the full
/// posterior over clusters; labeled rows are restricted to the clusters of
/// their class and renormalized (one-hot when the class has one cluster).
/// Empty documents fall back to pi.
inline PosteriorMatrix e_step(const Corpus& c, const LabelStore& labels, const ModelParams& params) {
  const int kk = params.k();
  detail::check_aligned(c, labels, kk);
  PosteriorMatrix post;
  post.k = kk;
  post.probs.assign(c.num_docs() * static_cast<std::size_t>(kk), 0.0);
  std::vector<double> scores(static_cast<std::size_t>(kk));
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    detail::log_joint(c, i, params, scores);
    detail::restricted_softmax(scores, labels.cluster_to_class(), labels[i], post.row(i));
  }
  return post;
}

/// Closed-form MAP update given responsibilities. Labeled rows carry weight
/// 1 and unlabeled rows weight lambda:
///   pi_k  ~ alpha_k - 1 + sum_i w_i p_ik
///   eta_vk ~ beta_vk - 1 + sum_i w_i p_ik D_iv
/// Accumulation runs in document order so results are reproducible.
inline ModelParams m_step(const Corpus& c, const LabelStore& labels, const PosteriorMatrix& post,
                          const Hyperparams& h) {
  const auto kk = static_cast<std::size_t>(h.k);
  const std::size_t n_terms = c.num_terms();
  h.validate(n_terms);
  detail::check_aligned(c, labels, h.k);
  if (post.k != h.k || post.num_docs() != c.num_docs())
    throw ValidationError("posterior", "shape does not match corpus and K");

  std::vector<double> pi_mass(kk);
  for (std::size_t k = 0; k < kk; ++k) pi_mass[k] = h.alpha[k] - 1.0;
  std::vector<double> eta_mass(n_terms * kk);
  for (std::size_t j = 0; j < eta_mass.size(); ++j) eta_mass[j] = h.beta[j] - 1.0;

  std::vector<double> pi_data(kk, 0.0);
  std::vector<double> w(kk);
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    const double weight = labels.is_labeled(i) ? 1.0 : h.lambda;
    if (weight == 0.0) continue;
    auto p = post.row(i);
    for (std::size_t k = 0; k < kk; ++k) {
      w[k] = weight * p[k];
      pi_data[k] += w[k];
    }
    auto terms = c.row_terms(i);
    auto counts = c.row_counts(i);
    for (std::size_t j = 0; j < terms.size(); ++j) {
      double* eta = eta_mass.data() + static_cast<std::size_t>(terms[j]) * kk;
      const double n = counts[j];
      for (std::size_t k = 0; k < kk; ++k) eta[k] += w[k] * n;
    }
  }
  for (std::size_t k = 0; k < kk; ++k) pi_mass[k] += pi_data[k];

  ModelParams out;
  out.log_pi.resize(kk);
  double pi_total = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    if (!(pi_mass[k] > 0.0))
      throw NumericError("cluster " + std::to_string(k) + " has non-positive proportion mass; raise alpha");
    pi_total += pi_mass[k];
  }
  for (std::size_t k = 0; k < kk; ++k) out.log_pi[k] = std::log(pi_mass[k]) - std::log(pi_total);

  out.log_eta.resize(n_terms * kk);
  for (std::size_t k = 0; k < kk; ++k) {
    double col = 0.0;
    for (std::size_t v = 0; v < n_terms; ++v) {
      double m = eta_mass[v * kk + k];
      if (!(m > 0.0))
        throw NumericError("word " + std::to_string(v) + " has non-positive mass in cluster " + std::to_string(k) +
                           "; beta must exceed 1 for unseen words");
      col += m;
    }
    const double log_col = std::log(col);
    for (std::size_t v = 0; v < n_terms; ++v) out.log_eta[v * kk + k] = std::log(eta_mass[v * kk + k]) - log_col;
  }
  return out;
}

/// Log of the unnormalized observed-data posterior: Dirichlet priors, the
/// labeled-document likelihood (summed over the clusters of each label),
/// and lambda times the unlabeled marginal log-likelihood.
inline double log_posterior_objective(const Corpus& c, const LabelStore& labels, const ModelParams& params,
                                      const Hyperparams& h) {
  const int kk = params.k();
  detail::check_aligned(c, labels, kk);
  const auto ku = static_cast<std::size_t>(kk);
  double prior = 0.0;
  for (std::size_t k = 0; k < ku; ++k)
    if (h.alpha[k] != 1.0) prior += (h.alpha[k] - 1.0) * params.log_pi[k];
  for (std::size_t j = 0; j < params.log_eta.size(); ++j)
    if (h.beta[j] != 1.0) prior += (h.beta[j] - 1.0) * params.log_eta[j];

  double labeled = 0.0, unlabeled = 0.0;
  std::vector<double> scores(ku), masked(ku);
  const auto& map = labels.cluster_to_class();
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    detail::log_joint(c, i, params, scores);
    const int cls = labels[i];
    if (cls == kUnlabeled) {
      if (h.lambda != 0.0) unlabeled += detail::log_sum_exp(scores);
      continue;
    }
    std::size_t n = 0;
    for (std::size_t k = 0; k < ku; ++k)
      if (map[k] == cls) masked[n++] = scores[k];
    labeled += n == 1 ? masked[0] : detail::log_sum_exp(std::span<const double>(masked.data(), n));
  }
  return prior + labeled + h.lambda * unlabeled;
}

struct InitOptions {
  /// When false, a class without labeled documents falls back to its prior
  /// mode instead of raising.
  bool require_all_classes = true;
};

/// Naive Bayes start: the M-step over labeled documents only. In
/// multi-cluster binary mode the negative-labeled documents are spread over
/// the negative clusters with a seeded Dirichlet draw so that those
/// clusters do not start identical.
inline ModelParams init_naive_bayes(const Corpus& c, const LabelStore& labels, const Hyperparams& h,
                                    std::uint64_t seed, InitOptions opts = {}) {
  detail::check_aligned(c, labels, h.k);
  if (opts.require_all_classes) {
    for (int cls = 0; cls < labels.num_classes(); ++cls)
      if (labels.class_count(cls) == 0)
        throw ValidationError("labels", "class '" + labels.class_names()[static_cast<std::size_t>(cls)] +
                                            "' has no labeled documents; label more seed documents");
  }
  const auto kk = static_cast<std::size_t>(h.k);
  PosteriorMatrix post;
  post.k = h.k;
  post.probs.assign(c.num_docs() * kk, 1.0 / static_cast<double>(kk));
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(kInitJitterConcentration, 1.0);
  const auto& map = labels.cluster_to_class();
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    const int cls = labels[i];
    if (cls == kUnlabeled) continue;
    auto row = post.row(i);
    std::fill(row.begin(), row.end(), 0.0);
    double s = 0.0;
    std::size_t admissible = 0;
    for (std::size_t k = 0; k < kk; ++k)
      if (map[k] == cls) ++admissible;
    for (std::size_t k = 0; k < kk; ++k) {
      if (map[k] != cls) continue;
      row[k] = admissible == 1 ? 1.0 : gamma(rng);
      s += row[k];
    }
    for (auto& p : row) p /= s;
  }
  Hyperparams supervised = h;
  supervised.lambda = 0.0;
  return m_step(c, labels, post, supervised);
}

struct FitResult {
  ModelParams params;
  PosteriorMatrix posterior;   // at `params`
  std::vector<double> trace;   // objective at the start and after each EM pair
  int iterations = 0;
  bool converged = false;
};

/// Alternates e_step / m_step from `init` until the relative change of the
/// objective drops below `tol` or `max_iter` pairs have run.
inline FitResult fit_em(const Corpus& c, const LabelStore& labels, const Hyperparams& h, const ModelParams& init,
                        double tol = kDefaultTolerance, int max_iter = kDefaultMaxIter) {
  h.validate(c.num_terms());
  init.validate(c.num_terms(), 1e-8);
  if (init.k() != h.k) throw ValidationError("init", "cluster count differs from hyperparameters");
  FitResult r;
  r.params = init;
  double obj = log_posterior_objective(c, labels, r.params, h);
  if (!std::isfinite(obj)) throw NumericError("objective is not finite at the starting point");
  r.trace.push_back(obj);
  for (int it = 0; it < max_iter; ++it) {
    PosteriorMatrix post = e_step(c, labels, r.params);
    r.params = m_step(c, labels, post, h);
    ++r.iterations;
    const double next = log_posterior_objective(c, labels, r.params, h);
    if (!std::isfinite(next)) throw NumericError("objective became non-finite at iteration " + std::to_string(it + 1));
    r.trace.push_back(next);
    const double rel = std::abs(next - obj) / std::max(std::abs(obj), std::numeric_limits<double>::min());
    obj = next;
    if (rel < tol) {
      r.converged = true;
      break;
    }
  }
  r.posterior = e_step(c, labels, r.params);
  return r;
}

/// Class-level view of a posterior.
struct Prediction {
  int num_classes = 0;
  std::vector<double> class_probs;  // N x C
  std::vector<int> labels;          // argmax, ties toward the lower class index

  double prob(std::size_t i, int cls) const { return class_probs[i * static_cast<std::size_t>(num_classes) + cls]; }
  std::span<const double> row(std::size_t i) const {
    return {class_probs.data() + i * static_cast<std::size_t>(num_classes), static_cast<std::size_t>(num_classes)};
  }
};

/// Sums cluster responsibilities into their classes and takes the argmax.
/// In binary modes an exact 0.5 goes to the negative class.
inline Prediction predict(const PosteriorMatrix& post, const LabelStore& labels) {
  if (post.k != labels.num_clusters()) throw ValidationError("posterior", "cluster count differs from label store");
  Prediction out;
  out.num_classes = labels.num_classes();
  const auto nc = static_cast<std::size_t>(out.num_classes);
  const auto& map = labels.cluster_to_class();
  out.class_probs.assign(post.num_docs() * nc, 0.0);
  out.labels.resize(post.num_docs());
  for (std::size_t i = 0; i < post.num_docs(); ++i) {
    auto p = post.row(i);
    double* cp = out.class_probs.data() + i * nc;
    for (std::size_t k = 0; k < p.size(); ++k) cp[map[k]] += p[k];
    int best = 0;
    for (std::size_t cls = 1; cls < nc; ++cls)
      if (cp[cls] > cp[best]) best = static_cast<int>(cls);
    out.labels[i] = best;
  }
  return out;
}

/// Predictions for documents outside the training set (all unlabeled).
inline Prediction predict_corpus(const Corpus& c, const ModelParams& params, const LabelStore& layout) {
  LabelStore none = layout.empty_like(c.num_docs());
  return predict(e_step(c, none, params), none);
}

}  // namespace activetext

#endif  // ACTIVETEXT_MODEL_HPP_
