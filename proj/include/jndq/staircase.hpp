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
#include <vector>

#include <nlohmann/json.hpp>

#include "jndq/trial.hpp"

namespace jndq::staircase {

/// Adaptive transformed up-down track over the dynamic stimulus SNR.
/// Defaults: 50 dB reference, start at 35 dB, 1 dB steps, 2-down/1-up,
/// stop after 7 reversals or 45 trials.
struct StaircaseConfig {
  int reference_snr_db = 50;
  int start_dynamic_snr_db = 35;
  int step_db = 1;
  int n_down = 2;
  int n_up = 1;
  int max_reversals = 7;
  int max_trials = 45;
  int min_dynamic_snr_db = 35;
  int max_dynamic_snr_db = 49;
  std::uint64_t order_seed = 0;
  std::size_t n_sources = 4;

  /// Throws Error(kInvalidConfig) naming the first violated invariant.
  void validate() const;

  friend bool operator==(const StaircaseConfig&, const StaircaseConfig&) = default;
};

enum class Direction { kNone, kUp, kDown };

struct ThresholdResult {
  double threshold_snr_db = 0.0;  // mean of reversals 2..N; NaN when invalid
  double jnd_db = 0.0;            // reference - threshold
  int n_reversals_used = 0;       // N - 1
  bool valid = false;             // N >= 2
};

/// Mean of reversal levels with the first one discarded.
ThresholdResult threshold_from_reversals(std::span<const int> reversals, int reference_snr_db);

class StaircaseState {
 public:
  explicit StaircaseState(const StaircaseConfig& config);

  const StaircaseConfig& config() const noexcept { return config_; }
  int current_dynamic_snr_db() const noexcept { return current_; }
  int consecutive_correct() const noexcept { return consecutive_correct_; }
  Direction last_move_direction() const noexcept { return last_direction_; }
  const std::vector<int>& reversals() const noexcept { return reversals_; }
  const std::vector<TrialRecord>& trials() const noexcept { return trials_; }
  bool complete() const noexcept { return complete_; }

  /// The pending pair. Pure: repeated calls return the same spec.
  TrialSpec current_trial() const;

  /// Grades the answer against the pending trial and moves the track.
  void submit(Answer answer);

  ThresholdResult threshold() const;

  nlohmann::json to_json() const;

  friend bool operator==(const StaircaseState&, const StaircaseState&) = default;

 private:
  StaircaseConfig config_;
  int current_ = 0;
  int consecutive_correct_ = 0;
  int consecutive_incorrect_ = 0;
  Direction last_direction_ = Direction::kNone;
  std::vector<int> reversals_;
  std::vector<TrialRecord> trials_;
  bool complete_ = false;
};

StaircaseState new_session(const StaircaseConfig& config);
TrialSpec current_trial(const StaircaseState& state);
StaircaseState submit_answer(StaircaseState state, Answer answer);
bool is_complete(const StaircaseState& state);
ThresholdResult threshold(const StaircaseState& state);

/// Rebuilds a state by folding answers over a fresh session.
StaircaseState replay(const StaircaseConfig& config, std::span<const Answer> answers);

nlohmann::json config_to_json(const StaircaseConfig& config);
StaircaseConfig config_from_json(const nlohmann::json& doc);

/// Inverse of StaircaseState::to_json. The trial log is authoritative; any
/// stored derived field that disagrees with the replay is a schema error.
StaircaseState state_from_json(const nlohmann::json& doc);

nlohmann::json threshold_to_json(const ThresholdResult& result);

}  // namespace jndq::staircase
