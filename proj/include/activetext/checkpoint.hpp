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

// Parameter checkpoints. Text format, one record per line, every real
// written as a hexadecimal float so a reload is bit-exact:
//
//   activetext-checkpoint 1
//   mode <binary|multi_cluster_binary|multiclass>
//   k <K>
//   k_star <k*>
//   v <V>
//   vocab_hash <16 hex digits>
//   lambda <x>
//   alpha <x_1> ... <x_K>
//   beta <x_11> ... <x_VK>        (row-major, V x K)
//   log_pi <x_1> ... <x_K>
//   log_eta <x_11> ... <x_VK>     (row-major, V x K)

#ifndef ACTIVETEXT_CHECKPOINT_HPP_
#define ACTIVETEXT_CHECKPOINT_HPP_

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "activetext/error.hpp"
#include "activetext/model.hpp"

namespace activetext {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Hyperparams hyper;
  ModelParams params;
  std::uint64_t vocab_hash = 0;

  bool operator==(const Checkpoint& o) const {
    return hyper.mode == o.hyper.mode && hyper.k == o.hyper.k && hyper.k_star == o.hyper.k_star &&
           hyper.lambda == o.hyper.lambda && hyper.alpha == o.hyper.alpha && hyper.beta == o.hyper.beta &&
           params == o.params && vocab_hash == o.vocab_hash;
  }
};

namespace detail {

inline std::string hex_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::hex);
  return std::string(buf.data(), ptr);
}

inline double parse_hex_double(std::string_view s, std::size_t lineno) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad hexadecimal float '" + std::string(s) + "'", lineno);
  return x;
}

inline void write_reals(std::ostream& out, const char* key, const std::vector<double>& xs) {
  out << key;
  for (double x : xs) out << ' ' << hex_double(x);
  out << '\n';
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const auto& h = ck.hyper;
  out << "activetext-checkpoint " << kCheckpointVersion << '\n';
  out << "mode " << to_string(h.mode) << '\n';
  out << "k " << h.k << '\n';
  out << "k_star " << h.k_star << '\n';
  out << "v " << h.num_terms() << '\n';
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ck.vocab_hash));
  out << "vocab_hash " << hash << '\n';
  out << "lambda " << detail::hex_double(h.lambda) << '\n';
  detail::write_reals(out, "alpha", h.alpha);
  detail::write_reals(out, "beta", h.beta);
  detail::write_reals(out, "log_pi", ck.params.log_pi);
  detail::write_reals(out, "log_eta", ck.params.log_eta);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ck;
  std::string line;
  std::size_t lineno = 0;
  std::size_t n_terms = 0;
  bool saw_header = false;
  auto reals = [](std::istringstream& ss, std::size_t ln) {
    std::vector<double> xs;
    std::string tok;
    while (ss >> tok) xs.push_back(detail::parse_hex_double(tok, ln));
    return xs;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (!saw_header) {
      int version = 0;
      if (key != "activetext-checkpoint" || !(ss >> version)) throw ParseError("not a checkpoint file", lineno);
      if (version != kCheckpointVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(version), lineno);
      saw_header = true;
      continue;
    }
    if (key == "mode") {
      std::string m;
      ss >> m;
      ck.hyper.mode = parse_mode(m);
    } else if (key == "k") {
      ss >> ck.hyper.k;
    } else if (key == "k_star") {
      ss >> ck.hyper.k_star;
    } else if (key == "v") {
      ss >> n_terms;
    } else if (key == "vocab_hash") {
      std::string hex;
      ss >> hex;
      auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), ck.vocab_hash, 16);
      if (ec != std::errc()) throw ParseError("bad vocabulary hash", lineno);
    } else if (key == "lambda") {
      std::string tok;
      ss >> tok;
      ck.hyper.lambda = detail::parse_hex_double(tok, lineno);
    } else if (key == "alpha") {
      ck.hyper.alpha = reals(ss, lineno);
    } else if (key == "beta") {
      ck.hyper.beta = reals(ss, lineno);
    } else if (key == "log_pi") {
      ck.params.log_pi = reals(ss, lineno);
    } else if (key == "log_eta") {
      ck.params.log_eta = reals(ss, lineno);
    } else {
      throw ParseError("unknown checkpoint key '" + key + "'", lineno);
    }
  }
  if (!saw_header) throw ParseError("empty checkpoint");
  ck.hyper.validate(n_terms);
  ck.params.validate(n_terms);
  if (ck.params.k() != ck.hyper.k) throw ParseError("log_pi length differs from k");
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  write_checkpoint(out, ck);
  if (!out) throw Error("failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace activetext

#endif  // ACTIVETEXT_CHECKPOINT_HPP_
