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

#include "jndq/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "jndq/error.hpp"
#include "jndq/hash.hpp"

namespace jndq::service {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string random_hex(std::size_t n_bytes) {
  std::random_device rd;
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(n_bytes * 2);
  for (std::size_t i = 0; i < n_bytes; ++i) {
    const auto b = static_cast<unsigned>(rd() & 0xFFu);
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::uint64_t random_u64() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void fsync_path(const fs::path& path, int flags) {
  const int fd = ::open(path.c_str(), flags);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

/// tmp + fsync + rename + fsync(dir): readers see the old or the new file, never a mix.
void write_file_durable(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < text.size()) {
    const auto n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename failed for " + path.string() + ": " + ec.message());
  fsync_path(path.parent_path(), O_RDONLY | O_DIRECTORY);
}

bool machine_complete(const Machine& m) {
  return std::visit([](const auto& s) { return s.complete(); }, m);
}

TrialSpec machine_trial(const Machine& m) {
  return std::visit([](const auto& s) -> TrialSpec { return s.current_trial(); }, m);
}

void machine_submit(Machine& m, Answer a) {
  std::visit([a](auto& s) { s.submit(a); }, m);
}

json machine_json(const Machine& m) {
  return std::visit([](const auto& s) { return s.to_json(); }, m);
}

std::size_t machine_trial_count(const Machine& m) {
  if (const auto* s = std::get_if<staircase::StaircaseState>(&m)) return s->trials().size();
  return std::get<screening::ScreeningSession>(m).answers().size();
}

int machine_max_trials(const Machine& m) {
  if (const auto* s = std::get_if<staircase::StaircaseState>(&m)) return s->config().max_trials;
  return std::get<screening::ScreeningSession>(m).config().n_questions;
}

Machine machine_from_config(SessionKind kind, const json& config) {
  if (kind == SessionKind::kStaircase) return staircase::StaircaseState(staircase::config_from_json(config));
  return screening::ScreeningSession(screening::config_from_json(config));
}

Machine machine_from_state(SessionKind kind, const json& state) {
  if (kind == SessionKind::kStaircase) return staircase::state_from_json(state);
  return screening::session_from_json(state);
}

json machine_config_json(const Machine& m) {
  if (const auto* s = std::get_if<staircase::StaircaseState>(&m)) return staircase::config_to_json(s->config());
  return screening::config_to_json(std::get<screening::ScreeningSession>(m).config());
}

}  // namespace

std::string_view to_string(SessionKind kind) { return kind == SessionKind::kStaircase ? "staircase" : "screening"; }

std::optional<SessionKind> parse_kind(std::string_view text) {
  if (text == "staircase") return SessionKind::kStaircase;
  if (text == "screening") return SessionKind::kScreening;
  return std::nullopt;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kSchema: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kStale:
    case ErrorCode::kSessionComplete:
    case ErrorCode::kSessionIncomplete: return 409;
    case ErrorCode::kExpired: return 410;
    case ErrorCode::kMissingStimuli: return 503;
    default: return 500;
  }
}

json TrialPayload::to_json() const {
  return {{"session_id", session_id},
          {"trial_index", trial_index},
          {"max_trials", max_trials},
          {"stimulus_a_url", stimulus_a_url},
          {"stimulus_b_url", stimulus_b_url},
          {"allow_not_detectable", allow_not_detectable}};
}

struct SessionStore::Session {
  Session(std::string id_, SessionKind kind_, Machine machine_) : id(std::move(id_)), kind(kind_), machine(std::move(machine_)) {}
  ~Session() {
    if (event_fd >= 0) ::close(event_fd);
  }

  std::mutex mutex;
  std::string id;
  SessionKind kind;
  std::int64_t created_at = 0;
  std::int64_t expires_at = 0;
  Machine machine;
  fs::path dir;
  int event_fd = -1;
  std::size_t event_count = 0;
  int stimulus_fetches = 0;  // for the pending trial

  void append_event(const std::string& line) {
    // A failed append is rolled back so later events never follow a partial line.
    const off_t start = ::lseek(event_fd, 0, SEEK_END);
    auto fail = [&](const char* what) {
      if (start >= 0 && ::ftruncate(event_fd, start) == 0) ::fsync(event_fd);
      throw Error(ErrorCode::kIo, std::string(what) + " for session " + id);
    };
    std::size_t done = 0;
    while (done < line.size()) {
      const auto n = ::write(event_fd, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail("event append failed");
      }
      done += static_cast<std::size_t>(n);
    }
    if (::fsync(event_fd) != 0) fail("event fsync failed");
  }

  void write_snapshot() const {
    write_file_durable(dir / "snapshot.json",
                       json{{"event_count", event_count}, {"state", machine_json(machine)}}.dump() + "\n");
  }
};

SessionStore::SessionStore(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.clock) {
    options_.clock = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  if (options_.snapshot_every == 0) options_.snapshot_every = 1;
  std::error_code ec;
  fs::create_directories(options_.data_dir / "sessions", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create data dir " + options_.data_dir.string() + ": " + ec.message());

  const fs::path secret_path = options_.data_dir / "secret.key";
  if (fs::exists(secret_path)) {
    secret_ = read_text(secret_path);
  } else {
    secret_ = random_hex(32);
    write_file_durable(secret_path, secret_);
  }

  if (!options_.manifest_path.empty()) {
    manifest_ = audio::read_manifest(options_.manifest_path);
    for (const auto& e : manifest_->entries) {
      const auto path = manifest_->directory / e.file;
      const std::string text = read_text(path);
      std::vector<std::uint8_t> bytes(text.begin(), text.end());
      if (sha256_hex(bytes) != e.sha256) {
        throw Error(ErrorCode::kMissingStimuli, "stimulus file does not match its manifest hash: " + path.string());
      }
      stimulus_bytes_.emplace(e.stimulus_id, std::move(bytes));
    }
  }
  load_existing();
}

SessionStore::~SessionStore() = default;

std::int64_t SessionStore::now() const { return options_.clock(); }

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session");
  return it->second;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void SessionStore::check_stimuli(SessionKind kind, const Machine& machine) const {
  if (!manifest_) throw Error(ErrorCode::kMissingStimuli, "no stimulus set registered");
  std::vector<int> needed;
  std::size_t n_sources = 0;
  if (kind == SessionKind::kStaircase) {
    const auto& c = std::get<staircase::StaircaseState>(machine).config();
    for (int l = c.min_dynamic_snr_db; l <= c.max_dynamic_snr_db; ++l) needed.push_back(l);
    needed.push_back(c.reference_snr_db);
    n_sources = c.n_sources;
  } else {
    const auto& c = std::get<screening::ScreeningSession>(machine).config();
    needed = {c.dynamic_snr_db(), c.reference_snr_db};
    n_sources = c.n_sources;
  }
  if (n_sources > manifest_->sources.size()) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("config asks for {} sources, stimulus set has {}", n_sources,
                                                       manifest_->sources.size()));
  }
  for (std::size_t i = 0; i < n_sources; ++i) {
    for (int level : needed) {
      if (!manifest_->find(manifest_->sources[i], level)) {
        throw Error(ErrorCode::kMissingStimuli,
                    fmt::format("stimulus set lacks {} at {} dB", manifest_->sources[i], level));
      }
    }
  }
}

std::string SessionStore::create_session(SessionKind kind, const json& config_in) {
  if (!manifest_) throw Error(ErrorCode::kMissingStimuli, "no stimulus set registered");
  json config = config_in.is_null() ? json::object() : config_in;
  if (!config.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be an object");
  if (!config.contains("order_seed")) config["order_seed"] = random_u64();
  if (!config.contains("n_sources")) config["n_sources"] = manifest_->sources.size();
  if (!config.contains("reference_snr_db") && kind == SessionKind::kScreening) {
    config["reference_snr_db"] = manifest_->reference_level;
  }

  Machine machine = machine_from_config(kind, config);
  check_stimuli(kind, machine);

  std::string id;
  {
    std::shared_lock lock(sessions_mutex_);
    do {
      id = random_hex(16);
    } while (sessions_.count(id));
  }
  auto session = std::make_shared<Session>(id, kind, std::move(machine));
  session->created_at = now();
  session->expires_at = session->created_at + options_.session_ttl.count();
  session->dir = options_.data_dir / "sessions" / id;
  std::error_code ec;
  fs::create_directories(session->dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create session dir: " + ec.message());
  write_file_durable(session->dir / "envelope.json",
                     json{{"session_id", id},
                          {"kind", to_string(kind)},
                          {"created_at", session->created_at},
                          {"expires_at", session->expires_at},
                          {"config", machine_config_json(session->machine)}}
                             .dump(2) +
                         "\n");
  session->event_fd = ::open((session->dir / "events.jsonl").c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (session->event_fd < 0) throw Error(ErrorCode::kIo, "cannot open event log for session " + id);
  fsync_path(session->dir, O_RDONLY | O_DIRECTORY);

  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::string SessionStore::token_for(const std::string& session_id, int trial_index, int slot) const {
  return sha256_hex(fmt::format("{}:{}:{}:{}", secret_, session_id, trial_index, slot)).substr(0, 32);
}

std::string SessionStore::stimulus_url(const Session& s, int trial_index, int slot) {
  const TrialSpec t = machine_trial(s.machine);
  const int snr = slot == 0 ? t.first_snr_db() : t.second_snr_db();
  const std::string& source = manifest_->sources.at(t.source_index);
  const std::string token = token_for(s.id, trial_index, slot);
  {
    std::lock_guard lock(tokens_mutex_);
    tokens_[token] = {s.id, trial_index, audio::stimulus_id(source, snr)};
  }
  return "/v1/stimuli/" + token;
}

void SessionStore::register_tokens(Session& s) {
  if (machine_complete(s.machine) || !manifest_) return;
  const int index = machine_trial(s.machine).trial_index;
  stimulus_url(s, index, 0);
  stimulus_url(s, index, 1);
}

void SessionStore::drop_tokens(const Session& s, int trial_index) {
  std::lock_guard lock(tokens_mutex_);
  tokens_.erase(token_for(s.id, trial_index, 0));
  tokens_.erase(token_for(s.id, trial_index, 1));
}

TrialPayload SessionStore::get_next_trial(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (machine_complete(s->machine)) throw Error(ErrorCode::kSessionComplete, "session complete");
  if (now() >= s->expires_at) throw Error(ErrorCode::kExpired, "session expired");
  const TrialSpec t = machine_trial(s->machine);
  TrialPayload p;
  p.session_id = s->id;
  p.trial_index = t.trial_index;
  p.max_trials = machine_max_trials(s->machine);
  p.stimulus_a_url = stimulus_url(*s, t.trial_index, 0);
  p.stimulus_b_url = stimulus_url(*s, t.trial_index, 1);
  return p;
}

AnswerAck SessionStore::post_answer(const std::string& session_id, int trial_index, std::string_view answer_text) {
  const auto answer = parse_answer(answer_text);
  if (!answer) throw Error(ErrorCode::kInvalidArgument, "malformed answer '" + std::string(answer_text) + "'");
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (machine_complete(s->machine)) throw Error(ErrorCode::kSessionComplete, "session complete");
  if (now() >= s->expires_at) throw Error(ErrorCode::kExpired, "session expired");
  const int pending = machine_trial(s->machine).trial_index;
  if (trial_index != pending) {
    throw Error(ErrorCode::kStale, fmt::format("trial {} is not pending (pending: {})", trial_index, pending));
  }
  // Durable before the state changes or the client hears back.
  s->append_event(json{{"seq", s->event_count + 1},
                       {"trial_index", trial_index},
                       {"answer", answer_text},
                       {"received_at", now()},
                       {"stimulus_fetches", s->stimulus_fetches}}
                      .dump() +
                  "\n");
  machine_submit(s->machine, *answer);
  ++s->event_count;
  s->stimulus_fetches = 0;
  drop_tokens(*s, trial_index);
  const bool complete = machine_complete(s->machine);
  if (complete || s->event_count % options_.snapshot_every == 0) s->write_snapshot();
  return {complete, !complete};
}

json SessionStore::get_result(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (!machine_complete(s->machine)) throw Error(ErrorCode::kSessionIncomplete, "not complete");
  json out = {{"session_id", s->id}, {"kind", to_string(s->kind)}, {"complete", true}};
  if (const auto* st = std::get_if<staircase::StaircaseState>(&s->machine)) {
    out["threshold"] = staircase::threshold_to_json(st->threshold());
    out["n_trials"] = st->trials().size();
    out["n_reversals"] = st->reversals().size();
  } else {
    const auto& sc = std::get<screening::ScreeningSession>(s->machine);
    const auto verdict = screening::screening_verdict(sc);
    out["verdict"] = screening::to_string(verdict);
    out["n_correct"] = sc.n_correct();
    out["n_questions"] = sc.config().n_questions;
    out["acceptance_k"] = sc.config().acceptance_k;
    out["jnd_level_db"] = sc.config().jnd_level_db;
    out["proceed_to_ratings"] = !options_.gate_on_fail || verdict == screening::Verdict::kPass;
  }
  return out;
}

json SessionStore::get_audit(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (!machine_complete(s->machine)) throw Error(ErrorCode::kSessionIncomplete, "not complete");
  json out = machine_json(s->machine);
  out["session_id"] = s->id;
  return out;
}

json SessionStore::machine_state(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  return machine_json(s->machine);
}

const std::vector<std::uint8_t>& SessionStore::serve_stimulus(const std::string& token) {
  TokenTarget target;
  {
    std::lock_guard lock(tokens_mutex_);
    const auto it = tokens_.find(token);
    if (it == tokens_.end()) throw Error(ErrorCode::kNotFound, "unknown stimulus");
    target = it->second;
  }
  auto s = find(target.session_id);
  std::lock_guard lock(s->mutex);
  if (now() >= s->expires_at) throw Error(ErrorCode::kExpired, "session expired");
  if (machine_complete(s->machine) || machine_trial(s->machine).trial_index != target.trial_index) {
    throw Error(ErrorCode::kNotFound, "unknown stimulus");
  }
  ++s->stimulus_fetches;
  return stimulus_bytes_.at(target.stimulus_id);
}

void SessionStore::load_existing() {
  const fs::path root = options_.data_dir / "sessions";
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    try {
      auto s = load_session(entry.path());
      register_tokens(*s);
      sessions_.emplace(s->id, std::move(s));
    } catch (const std::exception& e) {
      std::cerr << "jndq: skipping session " << entry.path().filename().string() << ": " << e.what() << "\n";
    }
  }
}

std::shared_ptr<SessionStore::Session> SessionStore::load_session(const fs::path& dir) {
  const json envelope = json::parse(read_text(dir / "envelope.json"));
  const auto kind = parse_kind(envelope.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kSchema, "unknown session kind");
  Machine machine = machine_from_config(*kind, envelope.at("config"));

  std::size_t snapshot_count = 0;
  if (fs::exists(dir / "snapshot.json")) {
    const json snap = json::parse(read_text(dir / "snapshot.json"));
    Machine restored = machine_from_state(*kind, snap.at("state"));
    if (machine_config_json(restored) != envelope.at("config")) {
      throw Error(ErrorCode::kSchema, "snapshot config differs from envelope");
    }
    snapshot_count = snap.at("event_count").get<std::size_t>();
    if (machine_trial_count(restored) != snapshot_count) throw Error(ErrorCode::kSchema, "snapshot count mismatch");
    machine = std::move(restored);
  }

  auto s = std::make_shared<Session>(envelope.at("session_id").get<std::string>(), *kind, std::move(machine));
  s->created_at = envelope.at("created_at").get<std::int64_t>();
  s->expires_at = envelope.at("expires_at").get<std::int64_t>();
  s->dir = dir;

  const fs::path log_path = dir / "events.jsonl";
  const std::string log = fs::exists(log_path) ? read_text(log_path) : std::string();
  std::size_t offset = 0, good_end = 0, n_events = 0;
  while (offset < log.size()) {
    const auto nl = log.find('\n', offset);
    if (nl == std::string::npos) break;  // torn tail: never acknowledged
    const json ev = json::parse(log.substr(offset, nl - offset));
    ++n_events;
    if (ev.at("seq").get<std::size_t>() != n_events) throw Error(ErrorCode::kSchema, "event log sequence gap");
    if (n_events > snapshot_count) {
      const auto answer = parse_answer(ev.at("answer").get<std::string>());
      if (!answer) throw Error(ErrorCode::kSchema, "event log holds an unknown answer");
      if (ev.at("trial_index").get<int>() != machine_trial(s->machine).trial_index) {
        throw Error(ErrorCode::kSchema, "event log trial index out of order");
      }
      machine_submit(s->machine, *answer);
    }
    offset = good_end = nl + 1;
  }
  if (n_events < snapshot_count) throw Error(ErrorCode::kSchema, "snapshot is ahead of the event log");
  if (good_end < log.size()) fs::resize_file(log_path, good_end);
  s->event_count = n_events;
  s->event_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (s->event_fd < 0) throw Error(ErrorCode::kIo, "cannot open event log " + log_path.string());
  return s;
}

}  // namespace jndq::service
