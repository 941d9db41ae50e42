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

#include "jndq/staircase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jndq/error.hpp"

namespace jndq::staircase {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, "staircase config: " + what);
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kNone: break;
  }
  return "none";
}

}  // namespace

void StaircaseConfig::validate() const {
  require(step_db >= 1, "step_db must be >= 1");
  require(n_down >= 1 && n_up >= 1, "n_down and n_up must be >= 1");
  require(min_dynamic_snr_db <= max_dynamic_snr_db, "dynamic bounds are inverted");
  require(max_dynamic_snr_db < reference_snr_db, "dynamic upper bound must stay below the reference");
  require(start_dynamic_snr_db >= min_dynamic_snr_db && start_dynamic_snr_db <= max_dynamic_snr_db,
          "start level outside dynamic bounds");
  require(max_reversals >= 2, "max_reversals must be >= 2");
  require(max_trials >= max_reversals, "max_trials must be >= max_reversals");
  require(n_sources >= 1, "n_sources must be >= 1");
}

ThresholdResult threshold_from_reversals(std::span<const int> reversals, int reference_snr_db) {
  ThresholdResult r;
  if (reversals.size() < 2) {
    r.threshold_snr_db = std::numeric_limits<double>::quiet_NaN();
    r.jnd_db = std::numeric_limits<double>::quiet_NaN();
    r.n_reversals_used = 0;
    r.valid = false;
    return r;
  }
  // Integer sum keeps the mean exact for any realistic reversal count.
  long long sum = 0;
  for (std::size_t i = 1; i < reversals.size(); ++i) sum += reversals[i];
  r.n_reversals_used = static_cast<int>(reversals.size() - 1);
  r.threshold_snr_db = static_cast<double>(sum) / r.n_reversals_used;
  r.jnd_db = reference_snr_db - r.threshold_snr_db;
  r.valid = true;
  return r;
}

StaircaseState::StaircaseState(const StaircaseConfig& config) : config_(config) {
  config_.validate();
  current_ = config_.start_dynamic_snr_db;
}

TrialSpec StaircaseState::current_trial() const {
  if (complete_) throw Error(ErrorCode::kSessionComplete, "staircase: session complete");
  const int index = static_cast<int>(trials_.size()) + 1;
  const auto draw = draw_order(config_.order_seed, index);
  return {index, draw.reference_position, static_cast<std::size_t>(draw.bits % config_.n_sources),
          config_.reference_snr_db, current_};
}

void StaircaseState::submit(Answer answer) {
  const TrialSpec spec = current_trial();  // throws when complete
  const bool correct = is_correct(answer, spec.reference_position);
  trials_.push_back({spec.trial_index, spec.dynamic_snr_db, spec.reference_position, spec.source_index, answer,
                     correct});

  Direction move = Direction::kNone;
  if (correct) {
    consecutive_incorrect_ = 0;
    if (++consecutive_correct_ >= config_.n_down) {
      move = Direction::kUp;
      consecutive_correct_ = 0;
    }
  } else {
    consecutive_correct_ = 0;
    if (++consecutive_incorrect_ >= config_.n_up) {
      move = Direction::kDown;
      consecutive_incorrect_ = 0;
    }
  }

  if (move != Direction::kNone) {
    // The turn is stored at the extremum, i.e. the level before moving back.
    if (last_direction_ != Direction::kNone && move != last_direction_) reversals_.push_back(current_);
    const int delta = move == Direction::kUp ? config_.step_db : -config_.step_db;
    current_ = std::clamp(current_ + delta, config_.min_dynamic_snr_db, config_.max_dynamic_snr_db);
    last_direction_ = move;
  }

  complete_ = static_cast<int>(reversals_.size()) >= config_.max_reversals ||
              static_cast<int>(trials_.size()) >= config_.max_trials;
}

ThresholdResult StaircaseState::threshold() const {
  if (!complete_) throw Error(ErrorCode::kSessionIncomplete, "staircase: not complete");
  return threshold_from_reversals(reversals_, config_.reference_snr_db);
}

nlohmann::json StaircaseState::to_json() const {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : trials_) {
    trials.push_back({{"trial_index", t.trial_index},
                      {"dynamic_snr_db", t.dynamic_snr_db},
                      {"reference_position", std::string(jndq::to_string(t.reference_position))},
                      {"source_index", t.source_index},
                      {"answer", std::string(jndq::to_string(t.answer))},
                      {"correct", t.correct}});
  }
  return {{"kind", "staircase"},
          {"config", config_to_json(config_)},
          {"trials", std::move(trials)},
          {"reversals", reversals_},
          {"current_dynamic_snr_db", current_},
          {"consecutive_correct", consecutive_correct_},
          {"last_move_direction", std::string(to_string(last_direction_))},
          {"complete", complete_}};
}

StaircaseState new_session(const StaircaseConfig& config) { return StaircaseState(config); }

TrialSpec current_trial(const StaircaseState& state) { return state.current_trial(); }

StaircaseState submit_answer(StaircaseState state, Answer answer) {
  state.submit(answer);
  return state;
}

bool is_complete(const StaircaseState& state) { return state.complete(); }

ThresholdResult threshold(const StaircaseState& state) { return state.threshold(); }

StaircaseState replay(const StaircaseConfig& config, std::span<const Answer> answers) {
  StaircaseState state(config);
  for (Answer a : answers) state.submit(a);
  return state;
}

nlohmann::json config_to_json(const StaircaseConfig& c) {
  return {{"reference_snr_db", c.reference_snr_db},
          {"start_dynamic_snr_db", c.start_dynamic_snr_db},
          {"step_db", c.step_db},
          {"n_down", c.n_down},
          {"n_up", c.n_up},
          {"max_reversals", c.max_reversals},
          {"max_trials", c.max_trials},
          {"dynamic_bounds_db", {c.min_dynamic_snr_db, c.max_dynamic_snr_db}},
          {"order_seed", c.order_seed},
          {"n_sources", c.n_sources}};
}

StaircaseConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "staircase config must be an object");
  StaircaseConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "reference_snr_db") c.reference_snr_db = value.get<int>();
      else if (key == "start_dynamic_snr_db") c.start_dynamic_snr_db = value.get<int>();
      else if (key == "step_db") c.step_db = value.get<int>();
      else if (key == "n_down") c.n_down = value.get<int>();
      else if (key == "n_up") c.n_up = value.get<int>();
      else if (key == "max_reversals") c.max_reversals = value.get<int>();
      else if (key == "max_trials") c.max_trials = value.get<int>();
      else if (key == "order_seed") c.order_seed = value.get<std::uint64_t>();
      else if (key == "n_sources") c.n_sources = value.get<std::size_t>();
      else if (key == "dynamic_bounds_db") {
        const auto b = value.get<std::vector<int>>();
        if (b.size() != 2) throw Error(ErrorCode::kInvalidConfig, "dynamic_bounds_db needs two values");
        c.min_dynamic_snr_db = b[0];
        c.max_dynamic_snr_db = b[1];
      } else {
        throw Error(ErrorCode::kInvalidConfig, "staircase config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("staircase config: ") + e.what());
  }
  c.validate();
  return c;
}

StaircaseState state_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "staircase") throw Error(ErrorCode::kSchema, "state document is not a staircase");
    const auto config = config_from_json(doc.at("config"));
    StaircaseState state(config);
    for (const auto& t : doc.at("trials")) {
      const auto answer = parse_answer(t.at("answer").get<std::string>());
      if (!answer) throw Error(ErrorCode::kSchema, "unknown answer in trial log");
      if (t.at("trial_index").get<int>() != static_cast<int>(state.trials().size()) + 1) {
        throw Error(ErrorCode::kSchema, "trial log is not contiguous");
      }
      state.submit(*answer);
    }
    const nlohmann::json rebuilt = state.to_json();
    for (const char* key : {"trials", "reversals", "current_dynamic_snr_db", "complete"}) {
      if (doc.contains(key) && doc.at(key) != rebuilt.at(key)) {
        throw Error(ErrorCode::kSchema, std::string("stored '") + key + "' disagrees with trial-log replay");
      }
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("staircase state: ") + e.what());
  }
}

nlohmann::json threshold_to_json(const ThresholdResult& r) {
  nlohmann::json j = {{"n_reversals_used", r.n_reversals_used}, {"valid", r.valid}};
  j["threshold_snr_db"] = r.valid ? nlohmann::json(r.threshold_snr_db) : nlohmann::json(nullptr);
  j["jnd_db"] = r.valid ? nlohmann::json(r.jnd_db) : nlohmann::json(nullptr);
  return j;
}

}  // namespace jndq::staircase
