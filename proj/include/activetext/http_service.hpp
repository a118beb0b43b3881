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

// JSON-over-HTTP front end for SessionManager.
//
//   POST /v1/corpora                      {dfm | dfm_path, texts | texts_path}
//   POST /v1/sessions                     {corpus_id, config, heldout?}
//   GET  /v1/sessions/{id}
//   GET  /v1/sessions/{id}/queries
//   POST /v1/sessions/{id}/labels         {labels: [{doc_id, class}]}
//   GET  /v1/sessions/{id}/keywords
//   POST /v1/sessions/{id}/keywords       {decisions: [{term, class, verdict}]}
//   GET  /v1/sessions/{id}/metrics
//   GET  /v1/sessions/{id}/predictions    ?format=csv for the CSV export
//   POST /v1/sessions/{id}/stop           {reason?}
//
// Errors carry {code, message, field?} with status 400, 404 or 409.

#ifndef ACTIVETEXT_HTTP_SERVICE_HPP_
#define ACTIVETEXT_HTTP_SERVICE_HPP_

#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "activetext/error.hpp"
#include "activetext/session_manager.hpp"

namespace activetext {

class HttpService {
 public:
  explicit HttpService(SessionManager& manager) : m_(manager) { routes(); }
  ~HttpService() { stop(); }

  /// Binds to `host:port` (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port) {
    if (port == 0) port_ = server_.bind_to_any_port(host);
    else port_ = server_.bind_to_port(host, port) ? port : -1;
    if (port_ < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port_;
  }

  /// Serves until stop() is called.
  void listen() { server_.listen_after_bind(); }

  /// Serves on a background thread.
  void start() {
    thread_ = std::thread([this] { listen(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  using Handler = std::function<nlohmann::json(const httplib::Request&, httplib::Response&)>;

  static void send_error(httplib::Response& res, int status, const char* code, const std::string& message,
                         const std::string& field = {}) {
    nlohmann::json body{{"code", code}, {"message", message}};
    if (!field.empty()) body["field"] = field;
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static nlohmann::json body_of(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed JSON body: ") + e.what());
    }
  }

  /// Runs `h` and maps library errors onto HTTP statuses.
  static httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
    return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
      try {
        nlohmann::json out = h(req, res);
        if (!out.is_null()) {
          res.status = ok_status;
          res.set_content(out.dump(), "application/json");
        }
      } catch (const ValidationError& e) {
        send_error(res, 400, "validation_error", e.what(), e.field());
      } catch (const ParseError& e) {
        send_error(res, 400, "parse_error", e.what());
      } catch (const NotFoundError& e) {
        send_error(res, 404, "not_found", e.what());
      } catch (const ConflictError& e) {
        send_error(res, 409, "conflict", e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "validation_error", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server_.Post("/v1/corpora", wrap(
                                    [this](const httplib::Request& req, httplib::Response&) {
                                      auto b = body_of(req);
                                      auto opt = [&](const char* k) -> std::optional<std::string> {
                                        if (!b.contains(k)) return std::nullopt;
                                        return b.at(k).get<std::string>();
                                      };
                                      SessionManager::CorpusRef ref;
                                      if (auto dfm = opt("dfm")) ref = m_.register_corpus(*dfm, opt("texts"));
                                      else if (auto path = opt("dfm_path"))
                                        ref = m_.register_corpus_files(*path, opt("texts_path"));
                                      else throw ValidationError("dfm", "provide dfm or dfm_path");
                                      return nlohmann::json{{"corpus_id", ref.corpus_id},
                                                            {"created", ref.created},
                                                            {"num_docs", ref.num_docs},
                                                            {"num_terms", ref.num_terms}};
                                    },
                                    201));

    server_.Post("/v1/sessions", wrap(
                                     [this](const httplib::Request& req, httplib::Response&) {
                                       auto b = body_of(req);
                                       if (!b.contains("corpus_id")) throw ValidationError("corpus_id", "required");
                                       auto id = m_.create_session(b["corpus_id"].get<std::string>(),
                                                                   b.value("config", nlohmann::json::object()),
                                                                   b.value("heldout", nlohmann::json::object()));
                                       return status_json(*m_.snapshot(id));
                                     },
                                     201));

    const std::string sid = R"(/v1/sessions/([A-Za-z0-9_-]+))";
    server_.Get(sid, wrap([this](const httplib::Request& req, httplib::Response&) {
                  return status_json(*m_.snapshot(req.matches[1]));
                }));

    server_.Get(sid + "/queries", wrap([this](const httplib::Request& req, httplib::Response&) {
                  nlohmann::json items = nlohmann::json::array();
                  for (const auto& q : m_.queries(req.matches[1])) items.push_back(to_json(q));
                  return nlohmann::json{{"queries", items}};
                }));

    server_.Post(sid + "/labels", wrap([this](const httplib::Request& req, httplib::Response&) {
                   auto b = body_of(req);
                   return status_json(*m_.submit_labels(req.matches[1], b.value("labels", nlohmann::json::array())));
                 }));

    server_.Get(sid + "/keywords", wrap([this](const httplib::Request& req, httplib::Response&) {
                  const std::string id = req.matches[1];
                  auto cands = m_.keyword_candidates(id);
                  auto snap = m_.snapshot(id);
                  nlohmann::json groups = nlohmann::json::array();
                  for (std::size_t c = 0; c < cands.size(); ++c)
                    groups.push_back({{"class", snap->class_names.at(c)}, {"terms", cands[c]}});
                  return nlohmann::json{{"candidates", groups}};
                }));

    server_.Post(sid + "/keywords", wrap([this](const httplib::Request& req, httplib::Response&) {
                   auto b = body_of(req);
                   return status_json(
                       *m_.submit_keywords(req.matches[1], b.value("decisions", nlohmann::json::array())));
                 }));

    server_.Get(sid + "/metrics", wrap([this](const httplib::Request& req, httplib::Response&) {
                  return nlohmann::json{{"metrics", m_.snapshot(req.matches[1])->metrics}};
                }));

    server_.Get(sid + "/predictions", wrap([this](const httplib::Request& req, httplib::Response& res) {
                  auto snap = m_.snapshot(req.matches[1]);
                  if (!snap->predictions) throw ConflictError("no fitted model yet");
                  if (req.get_param_value("format") == "csv") {
                    std::ostringstream out;
                    write_predictions_csv(out, *snap->predictions, snap->class_names);
                    res.set_content(out.str(), "text/csv");
                    return nlohmann::json();
                  }
                  nlohmann::json rows = nlohmann::json::array();
                  for (const auto& r : *snap->predictions)
                    rows.push_back({{"doc_id", r.doc_id},
                                    {"class_name", snap->class_names.at(static_cast<std::size_t>(r.cls))},
                                    {"probability", r.probability}});
                  return nlohmann::json{{"predictions", rows}};
                }));

    server_.Post(sid + "/stop", wrap([this](const httplib::Request& req, httplib::Response&) {
                   auto b = body_of(req);
                   return status_json(*m_.stop(req.matches[1], b.value("reason", std::string())));
                 }));

    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
    });
  }

  SessionManager& m_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace activetext

#endif  // ACTIVETEXT_HTTP_SERVICE_HPP_
