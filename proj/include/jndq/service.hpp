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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "jndq/audio.hpp"
#include "jndq/error.hpp"
#include "jndq/screening.hpp"
#include "jndq/staircase.hpp"

namespace jndq::service {

enum class SessionKind { kStaircase, kScreening };
std::string_view to_string(SessionKind kind);
std::optional<SessionKind> parse_kind(std::string_view text);

struct ServiceOptions {
  std::filesystem::path data_dir;
  /// Empty path: no stimulus set registered, session creation fails.
  std::filesystem::path manifest_path;
  /// When set, failed screenings report proceed_to_ratings = false.
  bool gate_on_fail = false;
  std::chrono::seconds session_ttl{std::chrono::hours(24)};
  std::size_t snapshot_every = 8;
  /// Seconds since the epoch; injectable for expiry tests.
  std::function<std::int64_t()> clock;
};

/// What a client sees for the pending pair. Deliberately carries no SNR and
/// no hint of which slot holds the reference.
struct TrialPayload {
  std::string session_id;
  int trial_index = 0;
  int max_trials = 0;
  std::string stimulus_a_url;
  std::string stimulus_b_url;
  bool allow_not_detectable = true;

  nlohmann::json to_json() const;
  friend bool operator==(const TrialPayload&, const TrialPayload&) = default;
};

struct AnswerAck {
  bool complete = false;
  bool next_available = false;
};

using Machine = std::variant<staircase::StaircaseState, screening::ScreeningSession>;

/// Event-sourced session store. Each session lives in
/// <data_dir>/sessions/<id>/ as envelope.json (immutable), events.jsonl
/// (append-only, fsync'd before acknowledging) and snapshot.json (periodic).
/// Mutations are serialized per session; sessions are independent.
class SessionStore {
 public:
  explicit SessionStore(ServiceOptions options);
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  std::string create_session(SessionKind kind, const nlohmann::json& config);
  TrialPayload get_next_trial(const std::string& session_id);
  AnswerAck post_answer(const std::string& session_id, int trial_index, std::string_view answer);
  nlohmann::json get_result(const std::string& session_id);
  /// Full trial log including reference positions; only after completion.
  nlohmann::json get_audit(const std::string& session_id);
  /// Bytes of the manifest file behind a stimulus token of a pending trial.
  const std::vector<std::uint8_t>& serve_stimulus(const std::string& token);

  /// Machine state as the canonical session JSON (tests and tooling).
  nlohmann::json machine_state(const std::string& session_id);
  std::vector<std::string> session_ids() const;
  bool has_stimuli() const noexcept { return manifest_.has_value(); }
  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct Session;
  struct TokenTarget {
    std::string session_id;
    int trial_index = 0;
    std::string stimulus_id;
  };

  std::shared_ptr<Session> find(const std::string& session_id) const;
  void load_existing();
  std::shared_ptr<Session> load_session(const std::filesystem::path& dir);
  void register_tokens(Session& s);
  void drop_tokens(const Session& s, int trial_index);
  std::string token_for(const std::string& session_id, int trial_index, int slot) const;
  std::string stimulus_url(const Session& s, int trial_index, int slot);
  void check_stimuli(SessionKind kind, const Machine& machine) const;
  std::int64_t now() const;

  ServiceOptions options_;
  std::string secret_;
  std::optional<audio::StimulusManifest> manifest_;
  std::map<std::string, std::vector<std::uint8_t>> stimulus_bytes_;  // stimulus_id -> file bytes

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  mutable std::mutex tokens_mutex_;
  std::map<std::string, TokenTarget> tokens_;
};

/// Thin HTTP+JSON front end over a SessionStore (routes under /v1).
class ApiServer {
 public:
  explicit ApiServer(SessionStore& store);
  ~ApiServer();

  /// Binds to host:port; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for a library error code.
int http_status(ErrorCode code);

}  // namespace jndq::service
