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

#ifndef ACTIVETEXT_TEXT_HPP_
#define ACTIVETEXT_TEXT_HPP_

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "activetext/corpus.hpp"
#include "activetext/error.hpp"

namespace activetext {

/// Lower-cased ASCII alphanumeric runs of at least `min_length` characters.
inline std::vector<std::string> tokenize(std::string_view text, std::size_t min_length = 2) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= min_length) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) cur.push_back(static_cast<char>(std::tolower(u)));
    else flush();
  }
  flush();
  return out;
}

struct TokenizeOptions {
  std::size_t min_length = 2;
  /// Terms appearing in fewer documents are dropped.
  std::size_t min_df = 1;
  std::unordered_set<std::string> stopwords;
};

/// Unigram document-feature matrix for `docs` (id, text). Terms are
/// ordered by first appearance; raw texts are attached.
inline Corpus corpus_from_texts(const std::vector<std::pair<std::string, std::string>>& docs,
                                const TokenizeOptions& opts = {}) {
  std::vector<std::map<std::string, std::uint32_t>> counts(docs.size());
  std::unordered_map<std::string, std::size_t> df;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (auto& t : tokenize(docs[i].second, opts.min_length))
      if (!opts.stopwords.count(t)) ++counts[i][t];
    for (const auto& [t, _] : counts[i]) ++df[t];
  }
  CorpusBuilder b;
  std::unordered_map<std::string, std::string> texts;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    b.add_document(docs[i].first);
    for (const auto& [t, n] : counts[i])
      if (df[t] >= opts.min_df) b.add(docs[i].first, t, n);
    texts[docs[i].first] = docs[i].second;
  }
  Corpus c = std::move(b).build();
  c.set_raw_texts(std::move(texts));
  return c;
}

struct LabeledDirectory {
  Corpus corpus;
  /// Sub-directory name of each row.
  std::vector<std::string> categories;
};

/// Reads `root/<category>/<file>` text files; doc ids are
/// `<category>/<file stem>`. Files are visited in sorted order.
inline LabeledDirectory corpus_from_directory(const std::filesystem::path& root, const TokenizeOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ValidationError("path", "not a directory: '" + root.string() + "'");
  std::vector<fs::path> cats;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) cats.push_back(e.path());
  std::sort(cats.begin(), cats.end());
  std::vector<std::pair<std::string, std::string>> docs;
  LabeledDirectory out;
  for (const auto& cat : cats) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cat))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      docs.emplace_back(cat.filename().string() + "/" + f.stem().string(), ss.str());
      out.categories.push_back(cat.filename().string());
    }
  }
  if (docs.empty()) throw ValidationError("path", "no documents under '" + root.string() + "'");
  out.corpus = corpus_from_texts(docs, opts);
  return out;
}

}  // namespace activetext

#endif  // ACTIVETEXT_TEXT_HPP_
