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

#ifndef ACTIVETEXT_LABELS_HPP_
#define ACTIVETEXT_LABELS_HPP_

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "activetext/corpus.hpp"
#include "activetext/error.hpp"

namespace activetext {

/// How latent clusters relate to output classes.
///  - binary: K = 2, cluster k is class k (class 1 is positive).
///  - multi_cluster_binary: K >= 2 clusters, cluster k_star is the positive
///    class and every other cluster collapses into the negative class.
///  - multiclass: K clusters, one per class.
enum class Mode { binary, multi_cluster_binary, multiclass };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::binary: return "binary";
    case Mode::multi_cluster_binary: return "multi_cluster_binary";
    case Mode::multiclass: return "multiclass";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "binary") return Mode::binary;
  if (s == "multi_cluster_binary") return Mode::multi_cluster_binary;
  if (s == "multiclass") return Mode::multiclass;
  throw ValidationError("mode", "unknown mode '" + std::string(s) +
                                    "' (expected binary, multi_cluster_binary or multiclass)");
}

inline constexpr int kUnlabeled = -1;

/// Per-document class assignments, aligned with the rows of one Corpus.
class LabelStore {
 public:
  LabelStore() = default;

  /// `cluster_to_class[k]` is the class of cluster k.
  LabelStore(std::size_t n_docs, std::vector<std::string> class_names, std::vector<int> cluster_to_class)
      : assignments_(n_docs, kUnlabeled),
        class_names_(std::move(class_names)),
        cluster_to_class_(std::move(cluster_to_class)) {
    if (class_names_.size() < 2) throw ValidationError("class_names", "need at least two classes");
    for (int c : cluster_to_class_)
      if (c < 0 || c >= num_classes()) throw ValidationError("cluster_to_class", "class index out of range");
  }

  static std::vector<std::string> default_class_names(Mode mode, int k) {
    if (mode != Mode::multiclass) return {"negative", "positive"};
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) names.push_back("class" + std::to_string(c));
    return names;
  }

  static std::vector<int> cluster_map(Mode mode, int k, int k_star) {
    std::vector<int> map(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      if (mode == Mode::multi_cluster_binary) map[j] = j == k_star ? 1 : 0;
      else map[j] = j;
    }
    return map;
  }

  /// Store for `mode` with K clusters; class names default per mode.
  static LabelStore for_mode(std::size_t n_docs, Mode mode, int k, int k_star = 1,
                             std::vector<std::string> class_names = {}) {
    if (mode == Mode::binary && k != 2) throw ValidationError("k", "binary mode requires K = 2");
    if (k < 2) throw ValidationError("k", "K must be at least 2");
    if (mode == Mode::multi_cluster_binary && (k_star < 0 || k_star >= k))
      throw ValidationError("k_star", "must be a cluster index below K");
    if (mode == Mode::binary) k_star = 1;
    if (class_names.empty()) class_names = default_class_names(mode, k);
    std::size_t expected = mode == Mode::multiclass ? static_cast<std::size_t>(k) : 2;
    if (class_names.size() != expected)
      throw ValidationError("class_names", "expected " + std::to_string(expected) + " class names");
    return LabelStore(n_docs, std::move(class_names), cluster_map(mode, k, k_star));
  }

  std::size_t num_docs() const { return assignments_.size(); }
  int num_classes() const { return static_cast<int>(class_names_.size()); }
  int num_clusters() const { return static_cast<int>(cluster_to_class_.size()); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<int>& cluster_to_class() const { return cluster_to_class_; }
  int class_of_cluster(int k) const { return cluster_to_class_[static_cast<std::size_t>(k)]; }

  int class_index(std::string_view name) const {
    for (int c = 0; c < num_classes(); ++c)
      if (class_names_[static_cast<std::size_t>(c)] == name) return c;
    throw ValidationError("class", "unknown class '" + std::string(name) + "'");
  }

  int operator[](std::size_t i) const { return assignments_[i]; }
  bool is_labeled(std::size_t i) const { return assignments_[i] != kUnlabeled; }
  const std::vector<int>& assignments() const { return assignments_; }

  void set(std::size_t i, int cls) {
    if (i >= assignments_.size()) throw NotFoundError("document row out of range");
    if (cls < 0 || cls >= num_classes())
      throw ValidationError("class", "class index " + std::to_string(cls) + " out of range");
    assignments_[i] = cls;
  }
  void clear(std::size_t i) { assignments_.at(i) = kUnlabeled; }

  std::size_t labeled_count() const {
    std::size_t n = 0;
    for (int a : assignments_) n += a != kUnlabeled;
    return n;
  }
  std::size_t class_count(int cls) const {
    std::size_t n = 0;
    for (int a : assignments_) n += a == cls;
    return n;
  }

  /// Store restricted to `rows`, in that order.
  LabelStore subset(std::span<const std::size_t> rows) const {
    LabelStore out = *this;
    out.assignments_.clear();
    for (auto r : rows) out.assignments_.push_back(assignments_.at(r));
    return out;
  }

  /// Same classes and mapping, no assignments, `n_docs` rows.
  LabelStore empty_like(std::size_t n_docs) const {
    LabelStore out = *this;
    out.assignments_.assign(n_docs, kUnlabeled);
    return out;
  }

 private:
  std::vector<int> assignments_;
  std::vector<std::string> class_names_;
  std::vector<int> cluster_to_class_;
};

/// Reads `doc_id<TAB>class_index` rows into `store`, which must be aligned
/// with `corpus`.
inline void read_labels(std::istream& in, const Corpus& corpus, LabelStore& store) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim_cr(line);
    if (sv.empty()) continue;
    auto fields = detail::split_tabs(sv);
    if (fields.size() != 2) throw ParseError("expected 'doc_id<TAB>class_index'", lineno);
    auto doc = corpus.find_doc(fields[0]);
    if (!doc) throw ParseError("unknown document id '" + std::string(fields[0]) + "'", lineno);
    auto cls = detail::parse_int<int>(fields[1]);
    if (!cls || *cls < 0 || *cls >= store.num_classes())
      throw ParseError("invalid class index '" + std::string(fields[1]) + "'", lineno);
    if (store.is_labeled(*doc) && store[*doc] != *cls)
      throw ParseError("conflicting labels for '" + std::string(fields[0]) + "'", lineno);
    store.set(*doc, *cls);
  }
}

inline void load_labels(const std::string& path, const Corpus& corpus, LabelStore& store) {
  auto in = detail::open_input(path);
  read_labels(in, corpus, store);
}

inline void write_labels(std::ostream& out, const Corpus& corpus, const LabelStore& store) {
  for (std::size_t i = 0; i < store.num_docs(); ++i)
    if (store.is_labeled(i)) out << corpus.doc_id(i) << '\t' << store[i] << '\n';
}

/// Rebalanced sample whose positive-class share is `p`; `truth` must label
/// every document with class 0 or 1.
inline std::pair<Corpus, LabelStore> subsample_to_rate(const Corpus& c, const LabelStore& truth, double p,
                                                       std::uint64_t seed) {
  if (truth.num_docs() != c.num_docs()) throw ValidationError("truth", "not aligned with corpus");
  std::vector<bool> positive(c.num_docs());
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    if (!truth.is_labeled(i)) throw ValidationError("truth", "document '" + c.doc_id(i) + "' has no label");
    if (truth[i] > 1) throw ValidationError("truth", "binary labels required");
    positive[i] = truth[i] == 1;
  }
  auto rows = subsample_rows(positive, p, seed);
  return {c.subset(rows), truth.subset(rows)};
}

}  // namespace activetext

#endif  // ACTIVETEXT_LABELS_HPP_
