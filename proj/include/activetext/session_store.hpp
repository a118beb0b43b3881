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

// Session configuration schema, event log and checkpoint directory.
//
// A session directory holds:
//   config.json     SessionSpec (schema version 1)
//   events.jsonl    one accepted mutation per line (labels, keywords, stop)
//   labels.tsv      doc_id<TAB>class_index, in labeling order
//   keywords.tsv    term<TAB>class_name<TAB>accept|reject
//   params.ckpt     latest parameter checkpoint
//   metrics.csv     iteration,n_labeled,precision,recall,f1,objective
//
// Replaying events.jsonl against the same corpus and config.json rebuilds
// the session, including a bit-identical params.ckpt.

#ifndef ACTIVETEXT_SESSION_STORE_HPP_
#define ACTIVETEXT_SESSION_STORE_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "activetext/active.hpp"
#include "activetext/checkpoint.hpp"
#include "activetext/error.hpp"

namespace activetext {

inline constexpr int kSessionSchemaVersion = 1;

/// Declarative session configuration. Scalar priors are expanded to the
/// corpus vocabulary by `to_active_config`.
struct SessionSpec {
  Mode mode = Mode::binary;
  int k = 2;
  int k_star = 1;
  double lambda = kDefaultLambda;
  std::vector<double> alpha{kDefaultAlpha};  // one value for all clusters, or K values
  double beta = kDefaultBeta;
  std::vector<std::string> class_names;
  std::size_t batch_size = kDefaultBatchSize;
  Strategy strategy = Strategy::uncertainty;
  StoppingRule stop{StoppingRule::Kind::fixed_budget, 620, kDefaultStopDelta, 1};
  bool keyword_flow = false;
  double gamma = kDefaultGamma;
  std::size_t keyword_m = kDefaultCandidates;
  std::vector<nlohmann::json> initial_keywords;  // [{term, class, verdict}]
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  int max_iter = kDefaultMaxIter;

  int num_classes() const { return mode == Mode::multiclass ? k : 2; }

  ActiveConfig to_active_config(const Vocabulary& vocab) const {
    ActiveConfig c;
    std::vector<double> a = alpha.size() == 1 ? std::vector<double>(static_cast<std::size_t>(k), alpha[0]) : alpha;
    c.hyper = Hyperparams::make(mode, k, vocab.size(), k_star, lambda, 2.0, beta);
    c.hyper.alpha = std::move(a);
    c.hyper.validate(vocab.size());
    c.class_names = class_names.empty() ? LabelStore::default_class_names(mode, k) : class_names;
    c.batch_size = batch_size;
    c.strategy = strategy;
    c.stop = stop;
    c.keyword_flow = keyword_flow;
    c.gamma = gamma;
    c.keyword_m = keyword_m;
    c.seed = seed;
    c.tol = tol;
    c.max_iter = max_iter;
    for (const auto& j : initial_keywords) {
      KeywordDecision d;
      d.term = j.at("term").get<std::string>();
      const auto& cls = j.at("class");
      d.cls = cls.is_string()
                  ? static_cast<int>(std::find(c.class_names.begin(), c.class_names.end(), cls.get<std::string>()) -
                                     c.class_names.begin())
                  : cls.get<int>();
      d.verdict = j.value("verdict", std::string("accept")) == "reject" ? Verdict::reject : Verdict::accept;
      c.initial_keywords.push_back(std::move(d));
    }
    return c;
  }
};

struct FieldProblem {
  std::string field;
  std::string message;
};

/// Every violated field of a candidate config; empty when valid.
inline std::vector<FieldProblem> check_spec(const SessionSpec& s) {
  std::vector<FieldProblem> out;
  if (s.k < 2) out.push_back({"k", "must be at least 2"});
  if (s.mode == Mode::binary && s.k != 2) out.push_back({"k", "binary mode requires k = 2"});
  if (s.mode == Mode::multi_cluster_binary && (s.k_star < 0 || s.k_star >= s.k))
    out.push_back({"k_star", "must be a cluster index below k"});
  if (!(s.lambda >= 0.0 && s.lambda <= 1.0)) out.push_back({"lambda", "must lie in [0, 1]"});
  if (s.alpha.size() != 1 && s.alpha.size() != static_cast<std::size_t>(s.k))
    out.push_back({"alpha", "give one value or k values"});
  for (double a : s.alpha)
    if (!(a > 0.0)) out.push_back({"alpha", "entries must be positive"});
  if (!(s.beta >= 1.0)) out.push_back({"beta", "must be at least 1"});
  if (!s.class_names.empty() && static_cast<int>(s.class_names.size()) != s.num_classes())
    out.push_back({"class_names", "expected " + std::to_string(s.num_classes()) + " names"});
  if (s.batch_size == 0) out.push_back({"batch_size", "must be positive"});
  if (!(s.gamma > 0.0)) out.push_back({"keywords.gamma", "must be positive"});
  if (s.keyword_m == 0) out.push_back({"keywords.m", "must be positive"});
  if (!(s.tol > 0.0)) out.push_back({"tol", "must be positive"});
  if (s.max_iter < 1) out.push_back({"max_iter", "must be at least 1"});
  try {
    s.stop.validate();
  } catch (const ValidationError& e) {
    out.push_back({e.field(), e.what()});
  }
  return out;
}

inline nlohmann::json to_json(const StoppingRule& r) {
  return {{"kind", std::string(StoppingRule::kind_name(r.kind))},
          {"budget", r.budget},
          {"delta", r.delta},
          {"patience", r.patience}};
}

inline nlohmann::json to_json(const SessionSpec& s) {
  nlohmann::json j;
  j["version"] = kSessionSchemaVersion;
  j["mode"] = std::string(to_string(s.mode));
  j["k"] = s.k;
  j["k_star"] = s.k_star;
  j["lambda"] = s.lambda;
  j["alpha"] = s.alpha.size() == 1 ? nlohmann::json(s.alpha[0]) : nlohmann::json(s.alpha);
  j["beta"] = s.beta;
  j["class_names"] = s.class_names;
  j["batch_size"] = s.batch_size;
  j["strategy"] = std::string(to_string(s.strategy));
  j["stop"] = to_json(s.stop);
  j["keywords"] = {{"enabled", s.keyword_flow}, {"gamma", s.gamma}, {"m", s.keyword_m}, {"initial", s.initial_keywords}};
  j["seed"] = s.seed;
  j["tol"] = s.tol;
  j["max_iter"] = s.max_iter;
  return j;
}

/// Parses and validates a config document. Missing keys keep defaults;
/// all problems are reported together in one ValidationError whose field
/// is the first offender.
inline SessionSpec spec_from_json(const nlohmann::json& j) {
  SessionSpec s;
  std::vector<FieldProblem> problems;
  auto field = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const nlohmann::json::exception&) {
      problems.push_back({key, "wrong type"});
    }
  };
  if (!j.is_object()) throw ValidationError("", "config must be a JSON object");
  if (j.contains("version") && j["version"] != kSessionSchemaVersion)
    problems.push_back({"version", "unsupported schema version"});
  try {
    if (j.contains("mode")) s.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("strategy")) s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  } catch (const ValidationError& e) {
    problems.push_back({e.field(), e.what()});
  } catch (const nlohmann::json::exception&) {
    problems.push_back({"mode", "wrong type"});
  }
  field("k", s.k);
  if (s.mode == Mode::binary) s.k_star = 1;
  field("k_star", s.k_star);
  if (s.mode == Mode::binary && s.k_star != 1) problems.push_back({"k_star", "binary mode links cluster 1"});
  field("lambda", s.lambda);
  if (j.contains("alpha")) {
    if (j["alpha"].is_number()) s.alpha = {j["alpha"].get<double>()};
    else field("alpha", s.alpha);
  }
  field("beta", s.beta);
  field("class_names", s.class_names);
  field("batch_size", s.batch_size);
  field("seed", s.seed);
  field("tol", s.tol);
  field("max_iter", s.max_iter);
  if (j.contains("stop")) {
    const auto& st = j["stop"];
    try {
      if (st.is_string()) {
        s.stop = StoppingRule::parse(st.get<std::string>());
      } else {
        s.stop.kind = StoppingRule::parse_kind(st.value("kind", std::string("budget")));
        s.stop.budget = st.value("budget", std::size_t{0});
        s.stop.delta = st.value("delta", kDefaultStopDelta);
        s.stop.patience = st.value("patience", 1);
      }
    } catch (const ValidationError& e) {
      problems.push_back({e.field(), e.what()});
    } catch (const nlohmann::json::exception&) {
      problems.push_back({"stop", "wrong type"});
    }
  }
  if (j.contains("keywords")) {
    const auto& kw = j["keywords"];
    try {
      s.keyword_flow = kw.value("enabled", false);
      s.gamma = kw.value("gamma", kDefaultGamma);
      s.keyword_m = kw.value("m", kDefaultCandidates);
      if (kw.contains("initial")) s.initial_keywords = kw["initial"].get<std::vector<nlohmann::json>>();
    } catch (const nlohmann::json::exception&) {
      problems.push_back({"keywords", "wrong type"});
    }
  }
  for (auto& p : check_spec(s)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p.field + ": " + p.message;
    throw ValidationError(problems.front().field, "invalid config (" + msg + ")");
  }
  return s;
}

inline nlohmann::json event_to_json(const SessionEvent& e, const Corpus& train,
                                    const std::vector<std::string>& class_names) {
  if (auto* l = std::get_if<LabelsEvent>(&e)) {
    nlohmann::json items = nlohmann::json::array();
    for (auto [row, cls] : l->items) items.push_back({{"doc_id", train.doc_id(row)}, {"class", cls}});
    return {{"type", "labels"}, {"items", items}};
  }
  if (auto* k = std::get_if<KeywordsEvent>(&e)) {
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : k->decisions)
      ds.push_back({{"term", d.term},
                    {"class", class_names.at(static_cast<std::size_t>(d.cls))},
                    {"verdict", std::string(to_string(d.verdict))}});
    return {{"type", "keywords"}, {"decisions", ds}};
  }
  return {{"type", "stop"}, {"reason", std::get<StopEvent>(e).reason}};
}

inline SessionEvent event_from_json(const nlohmann::json& j, const Corpus& train,
                                    const std::vector<std::string>& class_names) {
  const auto type = j.at("type").get<std::string>();
  if (type == "labels") {
    LabelsEvent l;
    for (const auto& it : j.at("items"))
      l.items.emplace_back(train.doc_index(it.at("doc_id").get<std::string>()), it.at("class").get<int>());
    return l;
  }
  if (type == "keywords") {
    KeywordsEvent k;
    for (const auto& d : j.at("decisions")) {
      KeywordDecision kd;
      kd.term = d.at("term").get<std::string>();
      const auto name = d.at("class").get<std::string>();
      auto it = std::find(class_names.begin(), class_names.end(), name);
      if (it == class_names.end()) throw ParseError("unknown class '" + name + "' in event log");
      kd.cls = static_cast<int>(it - class_names.begin());
      kd.verdict = d.at("verdict").get<std::string>() == "reject" ? Verdict::reject : Verdict::accept;
      k.decisions.push_back(std::move(kd));
    }
    return k;
  }
  if (type == "stop") return StopEvent{j.at("reason").get<std::string>()};
  throw ParseError("unknown event type '" + type + "'");
}

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<HistoryEntry>& history) {
  out << "iteration,n_labeled,precision,recall,f1,objective\n";
  for (const auto& h : history) {
    out << h.iteration << ',' << h.n_labeled << ',';
    if (h.heldout) out << format_real(h.heldout->precision) << ',' << format_real(h.heldout->recall) << ',' << format_real(h.heldout->f1);
    else out << ",,";
    out << ',' << format_real(h.objective) << '\n';
  }
}

inline void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows,
                                  const std::vector<std::string>& class_names) {
  out << "doc_id,class_name,probability\n";
  for (const auto& r : rows)
    out << r.doc_id << ',' << class_names.at(static_cast<std::size_t>(r.cls)) << ',' << format_real(r.probability)
        << '\n';
}

inline Checkpoint make_checkpoint(const ActiveSession& s) {
  if (!s.state().params) throw ConflictError("no fitted model yet");
  Checkpoint ck;
  ck.hyper = apply_keywords(s.config().hyper, s.state().ledger, s.train().vocabulary(),
                            s.state().labels.cluster_to_class());
  ck.params = *s.state().params;
  ck.vocab_hash = s.train().vocabulary().hash();
  return ck;
}

/// Mirrors a session into a directory: appends each event to the log and
/// rewrites the derived files after every event and fit.
class SessionDirectory {
 public:
  SessionDirectory(std::filesystem::path dir, const nlohmann::json& config_snapshot) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    std::ofstream(dir_ / "config.json") << config_snapshot.dump(2) << '\n';
  }

  /// Reuses an existing directory without touching the log.
  explicit SessionDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& path() const { return dir_; }

  /// Installs sinks that keep the directory in step with `session`.
  /// With `fresh`, the event log is truncated first.
  void attach(ActiveSession& session, bool fresh = true) {
    if (fresh) std::ofstream(dir_ / "events.jsonl", std::ios::trunc);
    ActiveSession* sp = &session;
    session.set_event_sink([this, sp](const SessionEvent& e) {
      if (auto* l = std::get_if<LabelsEvent>(&e))
        labeling_order_.insert(labeling_order_.end(), l->items.begin(), l->items.end());
      if (!replaying_) append_event(event_to_json(e, sp->train(), sp->state().labels.class_names()));
      write_ledgers(*sp);
    });
    session.set_fit_sink([this](const ActiveSession& s) { write_fit(s); });
  }

  /// Feeds this directory's event log into a freshly constructed, attached
  /// session without appending to the log again.
  void resume(ActiveSession& session) {
    replaying_ = true;
    try {
      for (const auto& e : read_events())
        session.apply(event_from_json(e, session.train(), session.state().labels.class_names()));
    } catch (...) {
      replaying_ = false;
      throw;
    }
    replaying_ = false;
  }

  void append_event(const nlohmann::json& e) {
    std::ofstream out(dir_ / "events.jsonl", std::ios::app);
    out << e.dump() << '\n';
    out.flush();
    if (!out) throw Error("failed appending to event log in " + dir_.string());
  }

  void write_ledgers(const ActiveSession& s) const {
    {
      std::ofstream out(dir_ / "labels.tsv", std::ios::trunc);
      for (const auto& row : labeling_order_) out << s.train().doc_id(row.first) << '\t' << row.second << '\n';
    }
    std::ofstream kw(dir_ / "keywords.tsv", std::ios::trunc);
    write_ledger(kw, s.state().ledger, s.state().labels.class_names());
  }

  void write_fit(const ActiveSession& s) const {
    save_checkpoint((dir_ / "params.ckpt").string(), make_checkpoint(s));
    std::ofstream m(dir_ / "metrics.csv", std::ios::trunc);
    write_metrics_csv(m, s.state().metric_history);
  }

  std::vector<nlohmann::json> read_events() const { return read_event_log(dir_ / "events.jsonl"); }

  static std::vector<nlohmann::json> read_event_log(const std::filesystem::path& p) {
    std::vector<nlohmann::json> out;
    std::ifstream in(p);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        out.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad event: ") + e.what(), lineno);
      }
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::size_t, int>> labeling_order_;
  bool replaying_ = false;
};

/// Rebuilds a session from its config and event log.
inline std::unique_ptr<ActiveSession> replay_session(std::shared_ptr<const Corpus> train,
                                                     std::shared_ptr<const HeldOut> heldout, const ActiveConfig& cfg,
                                                     const std::vector<nlohmann::json>& events) {
  auto s = std::make_unique<ActiveSession>(std::move(train), std::move(heldout), cfg);
  for (const auto& e : events) s->apply(event_from_json(e, s->train(), s->state().labels.class_names()));
  return s;
}

}  // namespace activetext

#endif  // ACTIVETEXT_SESSION_STORE_HPP_
