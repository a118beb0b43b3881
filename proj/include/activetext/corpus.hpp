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

// Sparse document-feature matrix, vocabulary, and the on-disk formats
// used to ingest them.
//
// DFM file:   first line `N V`, then `doc_id<TAB>term<TAB>count` per line.
//             A line holding only `doc_id` declares a document with no terms.
//             Terms are numbered in first-appearance order; when the header
//             declares more terms than appear, the remainder are placeholders.
// Texts file: `doc_id<TAB>text`, with `\t`, `\n` and `\\` escapes in text.

#ifndef ACTIVETEXT_CORPUS_HPP_
#define ACTIVETEXT_CORPUS_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "activetext/error.hpp"

namespace activetext {

class Vocabulary {
 public:
  /// Returns the position of `term`, appending it when new.
  std::size_t add(const std::string& term) {
    auto [it, inserted] = index_.try_emplace(term, terms_.size());
    if (inserted) terms_.push_back(term);
    return it->second;
  }

  std::optional<std::size_t> find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return terms_.size(); }
  const std::string& term(std::size_t v) const { return terms_.at(v); }
  const std::vector<std::string>& terms() const { return terms_; }

  /// FNV-1a over the ordered terms; identifies a vocabulary in checkpoints.
  std::uint64_t hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](unsigned char c) {
      h ^= c;
      h *= 1099511628211ull;
    };
    for (const auto& t : terms_) {
      for (unsigned char c : t) mix(c);
      mix('\n');
    }
    return h;
  }

  bool operator==(const Vocabulary& o) const { return terms_ == o.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Immutable N x V count matrix in compressed row layout.
class Corpus {
 public:
  Corpus() : row_ptr_{0} {}

  std::size_t num_docs() const { return doc_ids_.size(); }
  std::size_t num_terms() const { return vocab_.size(); }
  const Vocabulary& vocabulary() const { return vocab_; }

  std::span<const std::uint32_t> row_terms(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const std::uint32_t> row_counts(std::size_t i) const {
    return {counts_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::uint64_t length(std::size_t i) const { return lengths_[i]; }
  const std::vector<std::uint64_t>& lengths() const { return lengths_; }
  std::size_t num_nonzeros() const { return cols_.size(); }

  const std::string& doc_id(std::size_t i) const { return doc_ids_.at(i); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::optional<std::size_t> find_doc(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t doc_index(std::string_view id) const {
    auto i = find_doc(id);
    if (!i) throw NotFoundError("unknown document id '" + std::string(id) + "'");
    return *i;
  }

  const std::string* raw_text(std::string_view id) const {
    auto it = raw_texts_.find(std::string(id));
    return it == raw_texts_.end() ? nullptr : &it->second;
  }
  std::size_t num_texts() const { return raw_texts_.size(); }

  /// Dense count of term v in document i (linear scan of the row).
  std::uint32_t count(std::size_t i, std::size_t v) const {
    auto terms = row_terms(i);
    for (std::size_t j = 0; j < terms.size(); ++j)
      if (terms[j] == v) return row_counts(i)[j];
    return 0;
  }

  /// Rows `rows` in the given order; vocabulary and texts are carried over.
  Corpus subset(std::span<const std::size_t> rows) const {
    Corpus out;
    out.vocab_ = vocab_;
    for (std::size_t i : rows) {
      auto t = row_terms(i);
      auto c = row_counts(i);
      out.cols_.insert(out.cols_.end(), t.begin(), t.end());
      out.counts_.insert(out.counts_.end(), c.begin(), c.end());
      out.row_ptr_.push_back(out.cols_.size());
      out.lengths_.push_back(lengths_[i]);
      out.id_index_.emplace(doc_ids_[i], out.doc_ids_.size());
      out.doc_ids_.push_back(doc_ids_[i]);
      if (auto it = raw_texts_.find(doc_ids_[i]); it != raw_texts_.end())
        out.raw_texts_.insert(*it);
    }
    return out;
  }

  /// Attaches display texts; every id must name a document.
  void set_raw_texts(std::unordered_map<std::string, std::string> texts) {
    for (const auto& [id, _] : texts)
      if (!find_doc(id)) throw ValidationError("texts", "unknown document id '" + id + "'");
    raw_texts_ = std::move(texts);
  }

 private:
  friend class CorpusBuilder;

  Vocabulary vocab_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> lengths_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> id_index_;
  std::unordered_map<std::string, std::string> raw_texts_;
};

/// Accumulates triplets, then freezes them into a Corpus. Documents keep
/// first-appearance order; within a row, terms are sorted by index.
class CorpusBuilder {
 public:
  CorpusBuilder() = default;
  explicit CorpusBuilder(Vocabulary vocab) : vocab_(std::move(vocab)), fixed_vocab_(true) {}

  std::size_t add_document(const std::string& doc_id) {
    auto [it, inserted] = doc_index_.try_emplace(doc_id, rows_.size());
    if (inserted) {
      rows_.emplace_back();
      ids_.push_back(doc_id);
    }
    return it->second;
  }

  /// Adds one (doc, term, count) triplet. Zero counts declare the document
  /// and the term without storing an entry.
  void add(const std::string& doc_id, const std::string& term, std::uint32_t count) {
    std::size_t d = add_document(doc_id);
    std::size_t v;
    if (fixed_vocab_) {
      auto f = vocab_.find(term);
      if (!f) throw ValidationError("term", "term '" + term + "' not in vocabulary");
      v = *f;
    } else {
      v = vocab_.add(term);
    }
    auto& row = rows_[d];
    if (row.seen.count(v)) throw ParseError("duplicate entry for (" + doc_id + ", " + term + ")");
    row.seen.insert(v);
    if (count > 0) row.entries.emplace_back(static_cast<std::uint32_t>(v), count);
  }

  /// Pads the vocabulary with placeholder terms up to `v` entries.
  void reserve_terms(std::size_t v) {
    for (std::size_t j = vocab_.size(); j < v; ++j) vocab_.add("<unused:" + std::to_string(j) + ">");
  }

  std::size_t num_docs() const { return rows_.size(); }
  std::size_t num_terms() const { return vocab_.size(); }

  Corpus build() && {
    Corpus c;
    c.vocab_ = std::move(vocab_);
    for (std::size_t d = 0; d < rows_.size(); ++d) {
      auto& e = rows_[d].entries;
      std::sort(e.begin(), e.end());
      std::uint64_t len = 0;
      for (auto [v, n] : e) {
        c.cols_.push_back(v);
        c.counts_.push_back(n);
        len += n;
      }
      c.row_ptr_.push_back(c.cols_.size());
      c.lengths_.push_back(len);
      c.id_index_.emplace(ids_[d], d);
      c.doc_ids_.push_back(std::move(ids_[d]));
    }
    return c;
  }

 private:
  struct Row {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    std::unordered_set<std::size_t> seen;
  };
  Vocabulary vocab_;
  bool fixed_vocab_ = false;
  std::vector<Row> rows_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> doc_index_;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string unescape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 't') { out += '\t'; ++i; continue; }
      if (n == 'n') { out += '\n'; ++i; continue; }
      if (n == '\\') { out += '\\'; ++i; continue; }
    }
    out += s[i];
  }
  return out;
}

inline std::string escape_text(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else if (c == '\\') out += "\\\\";
    else out += c;
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Parses the DFM triplet format from a stream.
inline Corpus read_dfm(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::pair<std::size_t, std::size_t>> header;
  CorpusBuilder builder;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim_cr(line);
    if (sv.empty()) continue;
    if (!header) {
      std::istringstream hs{std::string(sv)};
      long long n = -1, v = -1;
      std::string extra;
      if (!(hs >> n >> v) || (hs >> extra) || n < 0 || v < 0)
        throw ParseError("expected header 'N V'", lineno);
      header.emplace(static_cast<std::size_t>(n), static_cast<std::size_t>(v));
      continue;
    }
    auto fields = detail::split_tabs(sv);
    if (fields.size() == 1 && !fields[0].empty()) {
      builder.add_document(std::string(fields[0]));
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      throw ParseError("expected 'doc_id<TAB>term<TAB>count'", lineno);
    auto count = detail::parse_int<long long>(fields[2]);
    if (!count) throw ParseError("count '" + std::string(fields[2]) + "' is not an integer", lineno);
    if (*count < 0) throw ParseError("negative count " + std::to_string(*count), lineno);
    if (*count > UINT32_MAX) throw ParseError("count out of range", lineno);
    try {
      builder.add(std::string(fields[0]), std::string(fields[1]), static_cast<std::uint32_t>(*count));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!header) throw ParseError("missing header 'N V'", 1);
  if (builder.num_terms() > header->second)
    throw ParseError("header declares V=" + std::to_string(header->second) + " but " +
                     std::to_string(builder.num_terms()) + " distinct terms appear");
  if (builder.num_docs() != header->first)
    throw ParseError("header declares N=" + std::to_string(header->first) + " but " +
                     std::to_string(builder.num_docs()) + " documents appear");
  builder.reserve_terms(header->second);
  return std::move(builder).build();
}

inline std::unordered_map<std::string, std::string> read_texts(std::istream& in) {
  std::unordered_map<std::string, std::string> texts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim_cr(line);
    if (sv.empty()) continue;
    auto tab = sv.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError("expected 'doc_id<TAB>text'", lineno);
    std::string id(sv.substr(0, tab));
    if (!texts.emplace(id, detail::unescape_text(sv.substr(tab + 1))).second)
      throw ParseError("duplicate text for '" + id + "'", lineno);
  }
  return texts;
}

/// Loads a DFM file and, optionally, a raw-texts file covering any subset
/// of its documents.
inline Corpus load_corpus(const std::string& dfm_path, const std::optional<std::string>& texts_path = {}) {
  auto in = detail::open_input(dfm_path);
  Corpus c = read_dfm(in);
  if (texts_path) {
    auto tin = detail::open_input(*texts_path);
    c.set_raw_texts(read_texts(tin));
  }
  return c;
}

inline void write_dfm(std::ostream& out, const Corpus& c) {
  out << c.num_docs() << ' ' << c.num_terms() << '\n';
  const auto& vocab = c.vocabulary();
  for (std::size_t i = 0; i < c.num_docs(); ++i) {
    auto t = c.row_terms(i);
    auto n = c.row_counts(i);
    if (t.empty()) out << c.doc_id(i) << '\n';
    for (std::size_t j = 0; j < t.size(); ++j)
      out << c.doc_id(i) << '\t' << vocab.term(t[j]) << '\t' << n[j] << '\n';
  }
}

struct SplitSpec {
  std::vector<std::size_t> train_rows;  // ascending
  std::vector<std::size_t> test_rows;   // ascending
  std::uint64_t seed = 0;

  std::vector<std::string> train_ids(const Corpus& c) const { return ids(c, train_rows); }
  std::vector<std::string> test_ids(const Corpus& c) const { return ids(c, test_rows); }

 private:
  static std::vector<std::string> ids(const Corpus& c, const std::vector<std::size_t>& rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(c.doc_id(r));
    return out;
  }
};

/// Random train/test partition with |test| = round(N * test_fraction).
inline SplitSpec split_corpus(const Corpus& c, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ValidationError("test_fraction", "must lie in [0, 1)");
  const std::size_t n = c.num_docs();
  if (test_fraction > 0.0 && n < 2) throw ValidationError("test_fraction", "needs at least 2 documents");
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  SplitSpec s;
  s.seed = seed;
  s.test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test_rows.begin(), s.test_rows.end());
  std::sort(s.train_rows.begin(), s.train_rows.end());
  return s;
}

/// Target sizes for a rebalanced sample with positive share `p`.
struct SubsamplePlan {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// M_pos = floor(N p), M_neg = N - M_pos; while either exceeds what is
/// available, M_pos is decremented and M_neg reset to round(M_pos (1-p) / p).
inline SubsamplePlan plan_subsample(std::size_t n_pos, std::size_t n_neg, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("rate", "must lie in (0, 1)");
  const std::size_t n = n_pos + n_neg;
  // The epsilon absorbs representation error in products like 100 * 0.29.
  auto m_pos = static_cast<long long>(std::floor(static_cast<double>(n) * p + 1e-9));
  auto m_neg = static_cast<long long>(n) - m_pos;
  while (m_pos > static_cast<long long>(n_pos) || m_neg > static_cast<long long>(n_neg)) {
    --m_pos;
    if (m_pos <= 0) throw ValidationError("rate", "positive share is infeasible for this corpus");
    m_neg = std::llround(static_cast<double>(m_pos) * (1.0 - p) / p);
  }
  if (m_pos <= 0) throw ValidationError("rate", "positive share is infeasible for this corpus");
  return {static_cast<std::size_t>(m_pos), static_cast<std::size_t>(m_neg)};
}

/// Rows of a sample with positive share `p`, ascending. `is_positive[i]`
/// gives the binary ground truth of row i.
inline std::vector<std::size_t> subsample_rows(const std::vector<bool>& is_positive, double p, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < is_positive.size(); ++i) (is_positive[i] ? pos : neg).push_back(i);
  const auto plan = plan_subsample(pos.size(), neg.size(), p);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  std::sample(pos.begin(), pos.end(), std::back_inserter(out), plan.positives, rng);
  std::sample(neg.begin(), neg.end(), std::back_inserter(out), plan.negatives, rng);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace activetext

#endif  // ACTIVETEXT_CORPUS_HPP_
