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

#include "jndq/screening.hpp"

#include <algorithm>
#include <string>

#include "jndq/error.hpp"

namespace jndq::screening {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, "screening config: " + what);
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kPending: break;
  }
  return "pending";
}

void ScreeningConfig::validate() const {
  require(n_questions >= 1, "n_questions must be >= 1");
  require(acceptance_k >= 1 && acceptance_k <= n_questions, "acceptance_k must lie in 1..n_questions");
  require(min_dynamic_snr_db <= max_dynamic_snr_db && max_dynamic_snr_db < reference_snr_db,
          "dynamic bounds must lie below the reference");
  require(dynamic_snr_db() >= min_dynamic_snr_db && dynamic_snr_db() <= max_dynamic_snr_db,
          "jnd level " + std::to_string(jnd_level_db) + " dB puts the dynamic stimulus at " +
              std::to_string(dynamic_snr_db()) + " dB, outside [" + std::to_string(min_dynamic_snr_db) + ", " +
              std::to_string(max_dynamic_snr_db) + "]");
  require(n_sources >= 1, "n_sources must be >= 1");
}

ScreeningSession::ScreeningSession(const ScreeningConfig& config) : config_(config) {
  config_.validate();
  // Sources rotate through a seeded permutation so that, with enough sources,
  // no utterance repeats within the test.
  const auto perm = seeded_permutation(config_.order_seed, config_.n_sources);
  for (int i = 1; i <= config_.n_questions; ++i) {
    const auto draw = draw_order(config_.order_seed, i);
    questions_.push_back({i, draw.reference_position, perm[static_cast<std::size_t>(i - 1) % perm.size()],
                          config_.reference_snr_db, config_.dynamic_snr_db()});
  }
}

int ScreeningSession::n_correct() const noexcept {
  return static_cast<int>(std::count_if(answers_.begin(), answers_.end(), [](const auto& r) { return r.correct; }));
}

Verdict ScreeningSession::verdict() const noexcept {
  return complete() ? grade(n_correct(), config_.acceptance_k) : Verdict::kPending;
}

const TrialSpec& ScreeningSession::current_trial() const {
  if (complete()) throw Error(ErrorCode::kSessionComplete, "screening: session already decided");
  return questions_[answers_.size()];
}

void ScreeningSession::submit(Answer answer) {
  const TrialSpec& q = current_trial();
  answers_.push_back({q.trial_index, q.dynamic_snr_db, q.reference_position, q.source_index, answer,
                      is_correct(answer, q.reference_position)});
}

nlohmann::json ScreeningSession::to_json() const {
  nlohmann::json answers = nlohmann::json::array();
  for (const auto& t : answers_) {
    answers.push_back({{"trial_index", t.trial_index},
                       {"dynamic_snr_db", t.dynamic_snr_db},
                       {"reference_position", std::string(jndq::to_string(t.reference_position))},
                       {"source_index", t.source_index},
                       {"answer", std::string(jndq::to_string(t.answer))},
                       {"correct", t.correct}});
  }
  return {{"kind", "screening"},
          {"config", config_to_json(config_)},
          {"trials", std::move(answers)},
          {"n_correct", n_correct()},
          {"verdict", std::string(to_string(verdict()))},
          {"complete", complete()}};
}

ScreeningSession new_screening(const ScreeningConfig& config) { return ScreeningSession(config); }

ScreeningSession submit_screening_answer(ScreeningSession session, Answer answer) {
  session.submit(answer);
  return session;
}

Verdict screening_verdict(const ScreeningSession& session) {
  return screening_verdict(session, session.config().acceptance_k);
}

Verdict screening_verdict(const ScreeningSession& session, int acceptance_k) {
  if (!session.complete()) throw Error(ErrorCode::kSessionIncomplete, "screening: not complete");
  return grade(session.n_correct(), acceptance_k);
}

ScreeningSession replay(const ScreeningConfig& config, std::span<const Answer> answers) {
  ScreeningSession s(config);
  for (Answer a : answers) s.submit(a);
  return s;
}

nlohmann::json config_to_json(const ScreeningConfig& c) {
  return {{"jnd_level_db", c.jnd_level_db},
          {"n_questions", c.n_questions},
          {"acceptance_k", c.acceptance_k},
          {"order_seed", c.order_seed},
          {"n_sources", c.n_sources},
          {"reference_snr_db", c.reference_snr_db},
          {"dynamic_bounds_db", {c.min_dynamic_snr_db, c.max_dynamic_snr_db}}};
}

ScreeningConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "screening config must be an object");
  ScreeningConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "jnd_level_db") c.jnd_level_db = value.get<int>();
      else if (key == "n_questions") c.n_questions = value.get<int>();
      else if (key == "acceptance_k") c.acceptance_k = value.get<int>();
      else if (key == "order_seed") c.order_seed = value.get<std::uint64_t>();
      else if (key == "n_sources") c.n_sources = value.get<std::size_t>();
      else if (key == "reference_snr_db") c.reference_snr_db = value.get<int>();
      else if (key == "dynamic_bounds_db") {
        const auto b = value.get<std::vector<int>>();
        if (b.size() != 2) throw Error(ErrorCode::kInvalidConfig, "dynamic_bounds_db needs two values");
        c.min_dynamic_snr_db = b[0];
        c.max_dynamic_snr_db = b[1];
      } else {
        throw Error(ErrorCode::kInvalidConfig, "screening config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("screening config: ") + e.what());
  }
  c.validate();
  return c;
}

ScreeningSession session_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "screening") throw Error(ErrorCode::kSchema, "state document is not a screening");
    ScreeningSession s(config_from_json(doc.at("config")));
    for (const auto& t : doc.at("trials")) {
      const auto answer = parse_answer(t.at("answer").get<std::string>());
      if (!answer) throw Error(ErrorCode::kSchema, "unknown answer in trial log");
      s.submit(*answer);
    }
    if (doc.contains("trials") && doc.at("trials") != s.to_json().at("trials")) {
      throw Error(ErrorCode::kSchema, "stored trial log disagrees with replay");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("screening state: ") + e.what());
  }
}

}  // namespace jndq::screening
