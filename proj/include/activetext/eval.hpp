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

#ifndef ACTIVETEXT_EVAL_HPP_
#define ACTIVETEXT_EVAL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "activetext/error.hpp"

namespace activetext {

/// Rows are actual classes, columns predicted classes.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(int k = 2) : num_classes(k), counts(static_cast<std::size_t>(k * k), 0) {}

  std::uint64_t& at(int actual, int predicted) { return counts[static_cast<std::size_t>(actual * num_classes + predicted)]; }
  std::uint64_t at(int actual, int predicted) const {
    return counts[static_cast<std::size_t>(actual * num_classes + predicted)];
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when a denominator was zero and the value defaulted to 0.
  bool undefined = false;
};

struct MetricRecord {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  /// Headline numbers: the positive class in binary modes, macro averages
  /// in multiclass mode.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined = false;
  std::size_t n_labeled = 0;
  int iteration = 0;
  double wall_clock_seconds = 0.0;
};

/// Confusion matrix over doc ids; both maps must hold the same ids.
inline ConfusionMatrix confusion(const std::map<std::string, int>& actual, const std::map<std::string, int>& predicted,
                                 int num_classes) {
  if (actual.size() != predicted.size()) throw ValidationError("predicted", "id sets differ in size");
  ConfusionMatrix m(num_classes);
  for (const auto& [id, a] : actual) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw ValidationError("predicted", "no prediction for '" + id + "'");
    if (a < 0 || a >= num_classes || it->second < 0 || it->second >= num_classes)
      throw ValidationError("class", "class index out of range for '" + id + "'");
    ++m.at(a, it->second);
  }
  return m;
}

/// Confusion matrix over aligned label vectors.
inline ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted, int num_classes) {
  if (actual.size() != predicted.size()) throw ValidationError("predicted", "length differs from actual");
  ConfusionMatrix m(num_classes);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 0 || actual[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes)
      throw ValidationError("class", "class index out of range at row " + std::to_string(i));
    ++m.at(actual[i], predicted[i]);
  }
  return m;
}

/// Precision TP/(TP+FP), recall TP/(TP+FN), F1 their harmonic mean;
/// zero denominators give 0 and set `undefined`. `positive_class` picks
/// the headline numbers; pass -1 to report macro averages instead.
inline MetricRecord metrics_from_confusion(const ConfusionMatrix& m, int positive_class) {
  MetricRecord r;
  const int k = m.num_classes;
  const auto total = m.total();
  std::uint64_t diag = 0;
  r.per_class.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::uint64_t tp = m.at(c, c), col = 0, row = 0;
    for (int j = 0; j < k; ++j) {
      col += m.at(j, c);
      row += m.at(c, j);
    }
    diag += tp;
    auto& pc = r.per_class[static_cast<std::size_t>(c)];
    if (col > 0) pc.precision = static_cast<double>(tp) / static_cast<double>(col);
    else pc.undefined = true;
    if (row > 0) pc.recall = static_cast<double>(tp) / static_cast<double>(row);
    else pc.undefined = true;
    if (pc.precision + pc.recall > 0.0) pc.f1 = 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);
    else pc.undefined = true;
  }
  if (total > 0) r.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  else r.undefined = true;
  double macro_p = 0.0, macro_r = 0.0;
  for (const auto& pc : r.per_class) {
    r.macro_f1 += pc.f1;
    macro_p += pc.precision;
    macro_r += pc.recall;
  }
  r.macro_f1 /= k;
  if (positive_class >= 0) {
    if (positive_class >= k) throw ValidationError("positive_class", "out of range");
    const auto& pc = r.per_class[static_cast<std::size_t>(positive_class)];
    r.precision = pc.precision;
    r.recall = pc.recall;
    r.f1 = pc.f1;
    r.undefined = r.undefined || pc.undefined;
  } else {
    r.precision = macro_p / k;
    r.recall = macro_r / k;
    r.f1 = r.macro_f1;
    for (const auto& pc : r.per_class) r.undefined = r.undefined || pc.undefined;
  }
  return r;
}

}  // namespace activetext

#endif  // ACTIVETEXT_EVAL_HPP_
