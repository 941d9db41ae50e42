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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jndq/trial.hpp"

namespace jndq::screening {

/// Fixed-level environment check: n_questions pairs, all at
/// dynamic = reference - jnd_level_db, passed with >= acceptance_k correct.
struct ScreeningConfig {
  int jnd_level_db = 10;
  int n_questions = 4;
  int acceptance_k = 3;
  std::uint64_t order_seed = 0;
  std::size_t n_sources = 4;
  int reference_snr_db = 50;
  int min_dynamic_snr_db = 35;
  int max_dynamic_snr_db = 49;

  int dynamic_snr_db() const noexcept { return reference_snr_db - jnd_level_db; }
  void validate() const;

  friend bool operator==(const ScreeningConfig&, const ScreeningConfig&) = default;
};

enum class Verdict { kPending, kPass, kFail };
std::string_view to_string(Verdict v);

/// pass iff n_correct >= k.
constexpr Verdict grade(int n_correct, int acceptance_k) noexcept {
  return n_correct >= acceptance_k ? Verdict::kPass : Verdict::kFail;
}

class ScreeningSession {
 public:
  explicit ScreeningSession(const ScreeningConfig& config);

  const ScreeningConfig& config() const noexcept { return config_; }
  const std::vector<TrialSpec>& questions() const noexcept { return questions_; }
  const std::vector<TrialRecord>& answers() const noexcept { return answers_; }
  bool complete() const noexcept { return answers_.size() == questions_.size(); }
  int n_correct() const noexcept;

  /// kPending until every question is answered.
  Verdict verdict() const noexcept;

  const TrialSpec& current_trial() const;
  void submit(Answer answer);

  nlohmann::json to_json() const;

  friend bool operator==(const ScreeningSession&, const ScreeningSession&) = default;

 private:
  ScreeningConfig config_;
  std::vector<TrialSpec> questions_;
  std::vector<TrialRecord> answers_;
};

ScreeningSession new_screening(const ScreeningConfig& config);
ScreeningSession submit_screening_answer(ScreeningSession session, Answer answer);

/// Final verdict under the session's own criterion; throws when incomplete.
Verdict screening_verdict(const ScreeningSession& session);
/// Re-grades a completed session under another criterion without touching it.
Verdict screening_verdict(const ScreeningSession& session, int acceptance_k);

ScreeningSession replay(const ScreeningConfig& config, std::span<const Answer> answers);

nlohmann::json config_to_json(const ScreeningConfig& config);
ScreeningConfig config_from_json(const nlohmann::json& doc);
ScreeningSession session_from_json(const nlohmann::json& doc);

}  // namespace jndq::screening
