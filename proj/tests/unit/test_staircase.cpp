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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "jndq/error.hpp"
#include "jndq/staircase.hpp"

namespace jndq::staircase {
namespace {

Answer right(const TrialSpec& t) {
  return t.reference_position == Position::kFirst ? Answer::kFirstBetter : Answer::kSecondBetter;
}
Answer wrong(const TrialSpec& t) {
  return t.reference_position == Position::kFirst ? Answer::kSecondBetter : Answer::kFirstBetter;
}

// c = correct, w = wrong slot, n = not detectable.
StaircaseState drive(StaircaseState s, const std::string& script) {
  for (char ch : script) {
    const auto t = s.current_trial();
    s.submit(ch == 'c' ? right(t) : ch == 'w' ? wrong(t) : Answer::kNotDetectable);
  }
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(Staircase, FreshSessionStartsAt35AgainstReference) {
  const auto s = new_session({});
  EXPECT_EQ(s.current_dynamic_snr_db(), 35);
  const auto t = current_trial(s);
  EXPECT_EQ(t.trial_index, 1);
  EXPECT_EQ(t.reference_snr_db, 50);
  EXPECT_EQ(t.dynamic_snr_db, 35);
  EXPECT_EQ(std::min(t.first_snr_db(), t.second_snr_db()), 35);
  EXPECT_EQ(std::max(t.first_snr_db(), t.second_snr_db()), 50);
  EXPECT_EQ(current_trial(s), t);
}

TEST(Staircase, ConfigValidation) {
  StaircaseConfig c;
  c.start_dynamic_snr_db = 34;
  EXPECT_EQ(code_of([&] { new_session(c); }), ErrorCode::kInvalidConfig);
  c = {};
  c.start_dynamic_snr_db = 50;
  EXPECT_THROW(new_session(c), Error);
  c = {};
  c.n_down = 0;
  EXPECT_THROW(new_session(c), Error);
  c = {};
  c.max_dynamic_snr_db = 50;
  EXPECT_THROW(new_session(c), Error);
  c = {};
  c.max_trials = 3;
  EXPECT_THROW(new_session(c), Error);
  c = {};
  c.n_sources = 0;
  EXPECT_THROW(new_session(c), Error);
}

TEST(Staircase, TwoCorrectMoveUpWithoutReversal) {
  const auto s = drive(new_session({}), "cc");
  EXPECT_EQ(s.current_dynamic_snr_db(), 36);
  EXPECT_TRUE(s.reversals().empty());
  EXPECT_EQ(s.last_move_direction(), Direction::kUp);
}

TEST(Staircase, OneCorrectDoesNotMove) {
  const auto s = drive(new_session({}), "c");
  EXPECT_EQ(s.current_dynamic_snr_db(), 35);
  EXPECT_EQ(s.consecutive_correct(), 1);
  EXPECT_EQ(s.last_move_direction(), Direction::kNone);
}

TEST(Staircase, WrongAtFloorStaysClampedAndRecordsDown) {
  const auto s = drive(new_session({}), "w");
  EXPECT_EQ(s.current_dynamic_snr_db(), 35);
  EXPECT_EQ(s.last_move_direction(), Direction::kDown);
  EXPECT_TRUE(s.reversals().empty());
}

TEST(Staircase, NotDetectableCountsAsWrong) {
  const auto a = drive(new_session({}), "ccccn");
  const auto b = drive(new_session({}), "ccccw");
  EXPECT_EQ(a.current_dynamic_snr_db(), b.current_dynamic_snr_db());
  EXPECT_EQ(a.reversals(), b.reversals());
  EXPECT_FALSE(a.trials().back().correct);
}

TEST(Staircase, ReversalStoredAtTheTurningLevel) {
  // up, up, down: the turn happens at 37.
  const auto s = drive(new_session({}), "ccccw");
  ASSERT_EQ(s.reversals().size(), 1u);
  EXPECT_EQ(s.reversals()[0], 37);
  EXPECT_EQ(s.current_dynamic_snr_db(), 36);
}

TEST(Staircase, WrongResetsTheCorrectRun) {
  const auto s = drive(new_session({}), "cwc");
  EXPECT_EQ(s.current_dynamic_snr_db(), 35);
  EXPECT_EQ(s.consecutive_correct(), 1);
}

TEST(Staircase, CeilingClamp) {
  // 14 double-corrects reach 49; a 15th is clamped but still an up move.
  const auto s = drive(new_session({}), std::string(30, 'c'));
  EXPECT_EQ(s.current_dynamic_snr_db(), 49);
  EXPECT_TRUE(s.reversals().empty());
  const auto t = drive(s, "w");
  EXPECT_EQ(t.reversals(), std::vector<int>{49});
}

TEST(Staircase, StopsAtSevenReversals) {
  const auto s = drive(new_session({}), std::string(19, 'w') + "ccwccwccwcc");
  EXPECT_EQ(s.trials().size(), 30u);
  EXPECT_EQ(s.reversals().size(), 7u);
  EXPECT_TRUE(is_complete(s));
  EXPECT_EQ(code_of([&] { auto copy = s; copy.submit(Answer::kFirstBetter); }), ErrorCode::kSessionComplete);
}

TEST(Staircase, StopsAtTrialCap) {
  const auto s = drive(new_session({}), "ccwccw" + std::string(39, 'w'));
  EXPECT_EQ(s.trials().size(), 45u);
  EXPECT_EQ(s.reversals().size(), 3u);
  EXPECT_TRUE(is_complete(s));
}

TEST(Staircase, NotCompleteAtSixReversalsAnd44Trials) {
  const auto s = drive(new_session({}), std::string(33, 'w') + "ccwccwccw" + "ww");
  EXPECT_EQ(s.trials().size(), 44u);
  EXPECT_EQ(s.reversals().size(), 6u);
  EXPECT_FALSE(is_complete(s));
  EXPECT_EQ(code_of([&] { s.threshold(); }), ErrorCode::kSessionIncomplete);
}

TEST(Threshold, MeanOfLastSixReversals) {
  const std::vector<int> rev{38, 40, 39, 41, 40, 42, 41};
  const auto t = threshold_from_reversals(rev, 50);
  EXPECT_EQ(t.threshold_snr_db, 40.5);
  EXPECT_EQ(t.jnd_db, 9.5);
  EXPECT_EQ(t.n_reversals_used, 6);
  EXPECT_TRUE(t.valid);
}

TEST(Threshold, ConstantReversals) {
  const std::vector<int> rev(7, 44);
  const auto t = threshold_from_reversals(rev, 50);
  EXPECT_EQ(t.threshold_snr_db, 44.0);
  EXPECT_EQ(t.jnd_db, 6.0);
}

TEST(Threshold, UndefinedBelowTwoReversals) {
  EXPECT_FALSE(threshold_from_reversals(std::vector<int>{}, 50).valid);
  const auto one = threshold_from_reversals(std::vector<int>{40}, 50);
  EXPECT_FALSE(one.valid);
  EXPECT_TRUE(std::isnan(one.jnd_db));
  const auto s = drive(new_session({}), "ccw" + std::string(42, 'w'));
  ASSERT_TRUE(s.complete());
  EXPECT_EQ(s.reversals().size(), 1u);
  EXPECT_FALSE(threshold(s).valid);
  EXPECT_TRUE(threshold_to_json(threshold(s))["jnd_db"].is_null());
}

TEST(Threshold, TwoReversalsUseOnlyTheSecond) {
  const auto t = threshold_from_reversals(std::vector<int>{36, 41}, 50);
  EXPECT_EQ(t.threshold_snr_db, 41.0);
  EXPECT_EQ(t.n_reversals_used, 1);
}

TEST(Staircase, SameSeedSamePresentationOrder) {
  StaircaseConfig c;
  c.order_seed = 1234;
  auto a = new_session(c), b = new_session(c);
  c.order_seed = 1235;
  auto other = new_session(c);
  bool differs = false;
  for (int i = 0; i < 45 && !a.complete(); ++i) {
    EXPECT_EQ(a.current_trial(), b.current_trial());
    differs |= a.current_trial().reference_position != other.current_trial().reference_position ||
               a.current_trial().source_index != other.current_trial().source_index;
    a.submit(wrong(a.current_trial()));
    b.submit(wrong(b.current_trial()));
    other.submit(wrong(other.current_trial()));
  }
  EXPECT_TRUE(differs);
}

// Independent transcription of the 2-down/1-up rule used as a replay oracle.
struct Oracle {
  int level = 35, run = 0, dir = 0;
  std::vector<int> reversals;
  void step(bool correct) {
    int move = 0;
    if (correct) {
      if (++run == 2) move = +1, run = 0;
    } else {
      move = -1, run = 0;
    }
    if (!move) return;
    if (dir != 0 && move != dir) reversals.push_back(level);
    level = std::clamp(level + move, 35, 49);
    dir = move;
  }
};

TEST(StaircaseProperty, MatchesRuleOracleOnRandomAnswerSequences) {
  std::mt19937_64 rng(42);
  for (int run = 0; run < 2000; ++run) {
    StaircaseConfig c;
    c.order_seed = rng();
    auto s = new_session(c);
    Oracle o;
    const double p = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    std::vector<Answer> answers;
    while (!s.complete()) {
      const auto t = s.current_trial();
      EXPECT_EQ(t.dynamic_snr_db, o.level);
      EXPECT_GE(t.dynamic_snr_db, 35);
      EXPECT_LE(t.dynamic_snr_db, 49);
      EXPECT_LT(t.source_index, c.n_sources);
      const double u = std::uniform_real_distribution<double>()(rng);
      const Answer a = u < p ? right(t) : (u < (1 + p) / 2 ? wrong(t) : Answer::kNotDetectable);
      answers.push_back(a);
      s.submit(a);
      o.step(is_correct(a, t.reference_position));
    }
    EXPECT_EQ(s.reversals(), o.reversals);
    EXPECT_TRUE(s.reversals().size() == 7 || s.trials().size() == 45);
    EXPECT_LE(s.trials().size(), 45u);
    EXPECT_EQ(replay(c, answers), s);
    if (HasFailure()) break;
  }
}

TEST(StaircaseJson, RoundTripAndTamperDetection) {
  StaircaseConfig c;
  c.order_seed = 77;
  const auto s = drive(new_session(c), "ccccwccwn");
  const auto doc = s.to_json();
  EXPECT_EQ(state_from_json(doc), s);
  EXPECT_EQ(config_from_json(config_to_json(c)), c);

  auto tampered = doc;
  tampered["current_dynamic_snr_db"] = 44;
  EXPECT_EQ(code_of([&] { state_from_json(tampered); }), ErrorCode::kSchema);
  tampered = doc;
  tampered["trials"][0]["answer"] = "maybe";
  EXPECT_EQ(code_of([&] { state_from_json(tampered); }), ErrorCode::kSchema);

  auto cfg = config_to_json(c);
  cfg["n_dwon"] = 2;
  EXPECT_EQ(code_of([&] { config_from_json(cfg); }), ErrorCode::kInvalidConfig);
}

TEST(Staircase, FunctionalSubmitLeavesInputUntouched) {
  const auto s0 = new_session({});
  const auto s1 = submit_answer(s0, right(s0.current_trial()));
  EXPECT_TRUE(s0.trials().empty());
  EXPECT_EQ(s1.trials().size(), 1u);
}

}  // namespace
}  // namespace jndq::staircase
