// Copyright 2026 The JNDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <fmt/format.h>

#include "jndq/error.hpp"
#include "jndq/service.hpp"

namespace jndq::service {
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

/// Runs a handler, translating exceptions into the {code, message} error body.
template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "malformed_request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return body;
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(SessionStore& s) : store(s) {}
  SessionStore& store;
  httplib::Server server;
  std::atomic<bool> entered{false};
  std::atomic<bool> finished{false};
  std::atomic<bool> stop_requested{false};
};

ApiServer::ApiServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& svr = impl_->server;
  auto& st = impl_->store;

  svr.Get("/v1/health", guarded([&st](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}, {"version", JNDQ_VERSION}, {"stimuli_registered", st.has_stimuli()}});
          }));

  svr.Post("/v1/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             for (const auto& [key, value] : body.items()) {
               if (key != "kind" && key != "config") {
                 throw Error(ErrorCode::kInvalidArgument, "unknown field '" + key + "'; session settings go under config");
               }
             }
             const auto kind = parse_kind(body.value("kind", std::string()));
             if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown session kind");
             const std::string id = st.create_session(*kind, body.value("config", json::object()));
             send_json(res, 201, {{"session_id", id}, {"kind", to_string(*kind)}});
           }));

  svr.Get(R"(/v1/sessions/([^/]+)/trial)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, st.get_next_trial(req.matches[1]).to_json());
          }));

  svr.Post(R"(/v1/sessions/([^/]+)/answers)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("trial_index") || !body["trial_index"].is_number_integer() ||
                 !body.contains("answer") || !body["answer"].is_string()) {
               throw Error(ErrorCode::kInvalidArgument, "answer body needs integer trial_index and string answer");
             }
             const auto ack =
                 st.post_answer(req.matches[1], body["trial_index"].get<int>(), body["answer"].get<std::string>());
             send_json(res, 200, {{"complete", ack.complete}, {"next_available", ack.next_available}});
           }));

  svr.Get(R"(/v1/sessions/([^/]+)/result)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, st.get_result(req.matches[1]));
          }));

  svr.Get(R"(/v1/sessions/([^/]+)/audit)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, st.get_audit(req.matches[1]));
          }));

  svr.Get(R"(/v1/stimuli/([^/]+))", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            const auto& bytes = st.serve_stimulus(req.matches[1]);
            res.status = 200;
            res.set_header("Cache-Control", "no-store");
            res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), "audio/wav");
          }));

  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "error",
                 fmt::format("{} {} -> {}", req.method, req.path, res.status));
    }
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() {
  // Either this sees stop_requested or stop() sees entered, so a stop issued
  // at any moment is never lost.
  impl_->entered = true;
  bool ok = true;
  if (!impl_->stop_requested) ok = impl_->server.listen_after_bind();
  impl_->finished = true;
  return ok;
}

void ApiServer::stop() {
  impl_->stop_requested = true;
  if (!impl_->entered) return;
  while (!impl_->server.is_running() && !impl_->finished) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  impl_->server.stop();
}

}  // namespace jndq::service
