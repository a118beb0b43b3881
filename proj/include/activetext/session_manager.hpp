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

// Registry of corpora and labeling sessions behind the HTTP API.
//
// Layout under the data directory:
//   corpora/<corpus_id>/corpus.dfm, texts.tsv (optional)
//   sessions/<session_id>/session.json   corpus id, held-out truth, timestamps
//   sessions/<session_id>/...            files written by SessionDirectory
//
// Every mutation runs under the session's mutex and publishes an immutable
// Snapshot; reads only copy the current snapshot pointer.

#ifndef ACTIVETEXT_SESSION_MANAGER_HPP_
#define ACTIVETEXT_SESSION_MANAGER_HPP_

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "activetext/active.hpp"
#include "activetext/corpus.hpp"
#include "activetext/error.hpp"
#include "activetext/session_store.hpp"

namespace activetext {

struct QueryItem {
  std::string doc_id;
  std::optional<std::string> raw_text;
  std::vector<double> probabilities;
  double entropy = 0.0;
};

/// Read-only view of a session published after every change.
struct Snapshot {
  std::string session_id;
  std::string corpus_id;
  std::string status;
  std::string stop_reason;
  std::string error;
  int iteration = 0;
  std::size_t n_labeled = 0;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
  std::size_t batch_size = 0;
  std::vector<std::string> class_names;
  std::vector<QueryItem> queries;  // unlabeled rows of the current batch
  std::vector<std::vector<std::string>> keyword_candidates;
  nlohmann::json metrics = nlohmann::json::array();
  std::shared_ptr<const std::vector<PredictionRow>> predictions;
  std::string created_at;
  std::string updated_at;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline nlohmann::json to_json(const QueryItem& q) {
  nlohmann::json j{{"doc_id", q.doc_id}, {"probabilities", q.probabilities}, {"entropy", q.entropy}};
  j["raw_text"] = q.raw_text ? nlohmann::json(*q.raw_text) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const HistoryEntry& h) {
  nlohmann::json j{{"iteration", h.iteration},
                   {"n_labeled", h.n_labeled},
                   {"objective", h.objective},
                   {"em_iterations", h.em_iterations},
                   {"wall_clock_seconds", h.wall_clock_seconds}};
  j["prediction_change"] = h.prediction_change ? nlohmann::json(*h.prediction_change) : nlohmann::json(nullptr);
  if (h.heldout) {
    j["precision"] = h.heldout->precision;
    j["recall"] = h.heldout->recall;
    j["f1"] = h.heldout->f1;
    j["accuracy"] = h.heldout->accuracy;
    j["macro_f1"] = h.heldout->macro_f1;
    j["undefined"] = h.heldout->undefined;
  }
  return j;
}

inline nlohmann::json status_json(const Snapshot& s) {
  return {{"session_id", s.session_id},
          {"corpus_id", s.corpus_id},
          {"status", s.status},
          {"iteration", s.iteration},
          {"n_labeled", s.n_labeled},
          {"n_train", s.n_train},
          {"n_heldout", s.n_heldout},
          {"pending", s.queries.size()},
          {"batch_size", s.batch_size},
          {"class_names", s.class_names},
          {"stop_reason", s.stop_reason},
          {"error", s.error},
          {"created_at", s.created_at},
          {"updated_at", s.updated_at}};
}

class SessionManager {
 public:
  /// Opens `data_dir`, reloading every stored corpus and replaying every
  /// stored session. With `background_fits` off, fits run inside the
  /// request that triggers them.
  explicit SessionManager(std::filesystem::path data_dir, bool background_fits = true)
      : root_(std::move(data_dir)), background_(background_fits) {
    std::filesystem::create_directories(root_ / "corpora");
    std::filesystem::create_directories(root_ / "sessions");
    recover();
  }

  ~SessionManager() { wait_idle(); }

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  struct CorpusRef {
    std::string corpus_id;
    bool created = false;
    std::size_t num_docs = 0;
    std::size_t num_terms = 0;
  };

  /// Registers a corpus from DFM text and optional texts content.
  /// Registering identical content again returns the existing id.
  CorpusRef register_corpus(const std::string& dfm_text, const std::optional<std::string>& texts_text) {
    const std::string id = "c-" + hex64(fnv1a(texts_text ? *texts_text : std::string(), fnv1a(dfm_text + '\x1f')));
    {
      std::shared_lock lk(mu_);
      if (auto it = corpora_.find(id); it != corpora_.end())
        return {id, false, it->second->num_docs(), it->second->num_terms()};
    }
    auto corpus = std::make_shared<Corpus>(parse_corpus(dfm_text, texts_text));
    std::unique_lock lk(mu_);
    if (auto it = corpora_.find(id); it != corpora_.end())
      return {id, false, it->second->num_docs(), it->second->num_terms()};
    const auto dir = root_ / "corpora" / id;
    std::filesystem::create_directories(dir);
    write_file(dir / "corpus.dfm", dfm_text);
    if (texts_text) write_file(dir / "texts.tsv", *texts_text);
    corpora_[id] = corpus;
    return {id, true, corpus->num_docs(), corpus->num_terms()};
  }

  CorpusRef register_corpus_files(const std::string& dfm_path, const std::optional<std::string>& texts_path) {
    return register_corpus(read_file(dfm_path), texts_path ? std::optional(read_file(*texts_path)) : std::nullopt);
  }

  /// Creates a session. `heldout` maps doc ids to class names or indices;
  /// those documents are withheld from labeling and used for metrics.
  std::string create_session(const std::string& corpus_id, const nlohmann::json& config,
                             const nlohmann::json& heldout = nlohmann::json::object()) {
    std::shared_ptr<const Corpus> corpus = find_corpus(corpus_id);
    SessionSpec spec = spec_from_json(config);
    std::string id;
    {
      std::lock_guard g(id_mu_);
      id = "s-" + hex64(id_rng_());
    }
    nlohmann::json meta{{"corpus_id", corpus_id},
                        {"config", to_json(spec)},
                        {"heldout", heldout.is_null() ? nlohmann::json::object() : heldout},
                        {"created_at", utc_timestamp()}};
    auto rec = build_record(id, meta, corpus);
    const auto dir = root_ / "sessions" / id;
    std::filesystem::create_directories(dir);
    write_file(dir / "session.json", meta.dump(2) + "\n");
    rec->dir = std::make_unique<SessionDirectory>(dir, meta["config"]);
    rec->dir->attach(*rec->session, true);
    publish(*rec);
    std::unique_lock lk(mu_);
    sessions_[id] = rec;
    return id;
  }

  std::shared_ptr<const Snapshot> snapshot(const std::string& id) const { return record(id)->current(); }

  std::vector<std::string> session_ids() const {
    std::shared_lock lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

  std::vector<QueryItem> queries(const std::string& id) const {
    auto snap = snapshot(id);
    if (snap->status != "awaiting_labels")
      throw ConflictError("no queries while session is " + snap->status);
    return snap->queries;
  }

  /// Accepts (doc_id, class) pairs; classes are names or indices.
  std::shared_ptr<const Snapshot> submit_labels(const std::string& id, const nlohmann::json& items) {
    auto rec = record(id);
    {
      std::lock_guard g(rec->mu);
      drain(*rec);
      ActiveSession& s = *rec->session;
      if (!items.is_array()) throw ValidationError("labels", "must be an array");
      std::vector<std::pair<std::size_t, int>> rows;
      for (const auto& it : items) {
        if (!it.is_object() || !it.contains("doc_id") || !it.contains("class"))
          throw ValidationError("labels", "each label needs doc_id and class");
        const auto doc = it["doc_id"].get<std::string>();
        auto row = s.train().find_doc(doc);
        if (!row) throw NotFoundError("unknown document '" + doc + "'");
        rows.emplace_back(*row, class_of(s.state().labels, it["class"]));
      }
      s.submit_labels(rows);
      after_mutation(rec);
    }
    return rec->current();
  }

  std::vector<std::vector<std::string>> keyword_candidates(const std::string& id) const {
    auto snap = snapshot(id);
    if (snap->status != "awaiting_keywords")
      throw ConflictError("no keyword round while session is " + snap->status);
    return snap->keyword_candidates;
  }

  std::shared_ptr<const Snapshot> submit_keywords(const std::string& id, const nlohmann::json& decisions) {
    auto rec = record(id);
    {
      std::lock_guard g(rec->mu);
      drain(*rec);
      ActiveSession& s = *rec->session;
      if (!decisions.is_array()) throw ValidationError("decisions", "must be an array");
      std::vector<KeywordDecision> ds;
      for (const auto& d : decisions) {
        if (!d.is_object() || !d.contains("term") || !d.contains("class"))
          throw ValidationError("decisions", "each decision needs term and class");
        KeywordDecision kd;
        kd.term = d["term"].get<std::string>();
        kd.cls = class_of(s.state().labels, d["class"]);
        const auto verdict = d.value("verdict", std::string("accept"));
        if (verdict != "accept" && verdict != "reject") throw ValidationError("verdict", "must be accept or reject");
        kd.verdict = verdict == "accept" ? Verdict::accept : Verdict::reject;
        ds.push_back(std::move(kd));
      }
      s.submit_keywords(ds);
      after_mutation(rec);
    }
    return rec->current();
  }

  std::shared_ptr<const Snapshot> stop(const std::string& id, const std::string& reason) {
    auto rec = record(id);
    {
      std::lock_guard g(rec->mu);
      drain(*rec);
      rec->session->stop(reason.empty() ? "stopped by client" : reason);
      publish(*rec);
    }
    return rec->current();
  }

  /// Blocks until no fit is running in any session.
  void wait_idle() {
    std::vector<std::shared_ptr<Record>> recs;
    {
      std::shared_lock lk(mu_);
      for (const auto& [_, r] : sessions_) recs.push_back(r);
    }
    for (auto& r : recs) {
      std::shared_future<void> f;
      {
        std::lock_guard g(r->fit_mu);
        f = r->fit_future;
      }
      if (f.valid()) f.wait();
    }
  }

  /// The latest checkpoint of a session, for replay checks.
  Checkpoint checkpoint(const std::string& id) const {
    auto rec = record(id);
    std::lock_guard g(rec->mu);
    return make_checkpoint(*rec->session);
  }

  const std::filesystem::path& data_dir() const { return root_; }

 private:
  struct Record {
    std::string id;
    std::string corpus_id;
    std::string created_at;
    std::unique_ptr<ActiveSession> session;
    std::unique_ptr<SessionDirectory> dir;
    std::mutex mu;  // serializes mutations and fits
    std::string error;

    std::mutex snap_mu;
    std::shared_ptr<const Snapshot> snap;
    std::mutex fit_mu;
    std::shared_future<void> fit_future;

    std::shared_ptr<const Snapshot> current() {
      std::lock_guard g(snap_mu);
      return snap;
    }
  };

  static std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("path", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write '" + p.string() + "'");
  }

  static Corpus parse_corpus(const std::string& dfm_text, const std::optional<std::string>& texts_text) {
    std::istringstream in(dfm_text);
    Corpus c = read_dfm(in);
    if (texts_text) {
      std::istringstream tin(*texts_text);
      c.set_raw_texts(read_texts(tin));
    }
    return c;
  }

  static int class_of(const LabelStore& labels, const nlohmann::json& v) {
    if (v.is_string()) return labels.class_index(v.get<std::string>());
    if (v.is_number_integer()) {
      const int c = v.get<int>();
      if (c < 0 || c >= labels.num_classes()) throw ValidationError("class", "class index out of range");
      return c;
    }
    throw ValidationError("class", "must be a class name or index");
  }

  std::shared_ptr<const Corpus> find_corpus(const std::string& id) const {
    std::shared_lock lk(mu_);
    auto it = corpora_.find(id);
    if (it == corpora_.end()) throw NotFoundError("unknown corpus '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Record> record(const std::string& id) const {
    std::shared_lock lk(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }

  /// Builds the session object from stored metadata without attaching it.
  std::shared_ptr<Record> build_record(const std::string& id, const nlohmann::json& meta,
                                       std::shared_ptr<const Corpus> corpus) {
    SessionSpec spec = spec_from_json(meta.at("config"));
    ActiveConfig cfg = spec.to_active_config(corpus->vocabulary());
    const auto& held = meta.at("heldout");
    if (!held.is_object()) throw ValidationError("heldout", "must map doc ids to classes");

    LabelStore names = cfg.hyper.label_store(0, cfg.class_names);
    std::vector<bool> is_held(corpus->num_docs(), false);
    std::vector<int> truth_by_row(corpus->num_docs(), kUnlabeled);
    for (const auto& [doc, cls] : held.items()) {
      auto row = corpus->find_doc(doc);
      if (!row) throw ValidationError("heldout", "unknown document '" + doc + "'");
      is_held[*row] = true;
      truth_by_row[*row] = class_of(names, cls);
    }
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < corpus->num_docs(); ++i) (is_held[i] ? held_rows : train_rows).push_back(i);
    std::shared_ptr<const Corpus> train = held_rows.empty() ? corpus : std::make_shared<Corpus>(corpus->subset(train_rows));
    std::shared_ptr<const HeldOut> heldout;
    if (!held_rows.empty()) {
      auto h = std::make_shared<HeldOut>();
      h->corpus = corpus->subset(held_rows);
      for (auto r : held_rows) h->truth.push_back(truth_by_row[r]);
      heldout = h;
    }
    auto rec = std::make_shared<Record>();
    rec->id = id;
    rec->corpus_id = meta.at("corpus_id").get<std::string>();
    rec->created_at = meta.value("created_at", utc_timestamp());
    rec->session = std::make_unique<ActiveSession>(std::move(train), std::move(heldout), std::move(cfg));
    return rec;
  }

  void recover() {
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "corpora")) {
      if (!entry.is_directory()) continue;
      const auto dfm = entry.path() / "corpus.dfm";
      if (!std::filesystem::exists(dfm)) continue;
      const auto texts = entry.path() / "texts.tsv";
      std::optional<std::string> t;
      if (std::filesystem::exists(texts)) t = read_file(texts.string());
      corpora_[entry.path().filename().string()] = std::make_shared<Corpus>(parse_corpus(read_file(dfm.string()), t));
    }
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "sessions")) {
      const auto meta_path = entry.path() / "session.json";
      if (!entry.is_directory() || !std::filesystem::exists(meta_path)) continue;
      const auto id = entry.path().filename().string();
      auto meta = nlohmann::json::parse(read_file(meta_path.string()));
      auto rec = build_record(id, meta, find_corpus_unlocked(meta.at("corpus_id").get<std::string>()));
      rec->dir = std::make_unique<SessionDirectory>(entry.path());
      rec->dir->attach(*rec->session, false);
      try {
        rec->dir->resume(*rec->session);
      } catch (const std::exception& e) {
        rec->error = std::string("replay failed: ") + e.what();
      }
      publish(*rec);
      sessions_[id] = rec;
    }
  }

  std::shared_ptr<const Corpus> find_corpus_unlocked(const std::string& id) const {
    auto it = corpora_.find(id);
    if (it == corpora_.end()) throw NotFoundError("unknown corpus '" + id + "'");
    return it->second;
  }

  /// Runs any fit the session is waiting on. Caller holds rec.mu.
  void drain(Record& rec) {
    while (rec.session->phase() == Phase::ready_to_fit) {
      try {
        rec.session->fit();
        rec.error.clear();
      } catch (const std::exception& e) {
        rec.error = std::string("fit failed: ") + e.what();
        rec.session->stop(rec.error);
      }
    }
  }

  /// Publishes the new state and, if a fit is due, runs it (inline or on
  /// a worker). Caller holds rec->mu.
  void after_mutation(const std::shared_ptr<Record>& rec) {
    publish(*rec);
    if (rec->session->phase() != Phase::ready_to_fit) return;
    if (!background_) {
      drain(*rec);
      publish(*rec);
      return;
    }
    std::lock_guard g(rec->fit_mu);
    rec->fit_future = std::async(std::launch::async, [this, rec] {
                        std::lock_guard lk(rec->mu);
                        drain(*rec);
                        publish(*rec);
                      }).share();
  }

  void publish(Record& rec) {
    const ActiveSession& s = *rec.session;
    const SessionState& st = s.state();
    auto snap = std::make_shared<Snapshot>();
    snap->session_id = rec.id;
    snap->corpus_id = rec.corpus_id;
    snap->status = std::string(to_string(s.phase()));
    snap->stop_reason = s.stop_reason();
    snap->error = rec.error;
    snap->iteration = st.iteration;
    snap->n_labeled = st.labels.labeled_count();
    snap->n_train = s.train().num_docs();
    snap->n_heldout = s.heldout() ? s.heldout()->corpus.num_docs() : 0;
    snap->batch_size = s.config().batch_size;
    snap->class_names = st.labels.class_names();
    if (s.phase() == Phase::awaiting_labels) {
      for (auto row : s.pending()) {
        QueryItem q;
        q.doc_id = s.train().doc_id(row);
        if (const auto* t = s.train().raw_text(q.doc_id)) q.raw_text = *t;
        q.probabilities = s.class_probabilities(row);
        q.entropy = entropy(q.probabilities);
        snap->queries.push_back(std::move(q));
      }
    }
    if (s.phase() == Phase::awaiting_keywords) snap->keyword_candidates = s.keyword_candidates();
    for (const auto& h : st.metric_history) snap->metrics.push_back(to_json(h));
    if (st.params) {
      auto prev = rec.current();
      if (prev && prev->predictions && prev->iteration == st.iteration && prev->n_labeled == snap->n_labeled)
        snap->predictions = prev->predictions;
      else
        snap->predictions = std::make_shared<const std::vector<PredictionRow>>(s.export_predictions());
    }
    snap->created_at = rec.created_at;
    snap->updated_at = utc_timestamp();
    std::lock_guard g(rec.snap_mu);
    rec.snap = std::move(snap);
  }

  std::filesystem::path root_;
  bool background_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const Corpus>> corpora_;
  std::map<std::string, std::shared_ptr<Record>> sessions_;
  std::mutex id_mu_;
  std::mt19937_64 id_rng_{std::random_device{}()};
};

}  // namespace activetext

#endif  // ACTIVETEXT_SESSION_MANAGER_HPP_
