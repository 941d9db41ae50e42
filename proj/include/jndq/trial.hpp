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
#include <optional>
#include <string_view>
#include <vector>

namespace jndq {

/// The three response options of a pair comparison.
enum class Answer { kFirstBetter, kSecondBetter, kNotDetectable };

/// Which slot of the pair carries the reference stimulus.
enum class Position { kFirst, kSecond };

std::string_view to_string(Answer a);
std::string_view to_string(Position p);
std::optional<Answer> parse_answer(std::string_view text);
std::optional<Position> parse_position(std::string_view text);

/// Only picking the reference slot counts; "not detectable" is always incorrect.
constexpr bool is_correct(Answer answer, Position reference) noexcept {
  return (answer == Answer::kFirstBetter && reference == Position::kFirst) ||
         (answer == Answer::kSecondBetter && reference == Position::kSecond);
}

/// One pair presentation: reference and dynamic stimulus rendered from the same source.
struct TrialSpec {
  int trial_index = 0;  // 1-based
  Position reference_position = Position::kFirst;
  std::size_t source_index = 0;
  int reference_snr_db = 0;
  int dynamic_snr_db = 0;

  int first_snr_db() const { return reference_position == Position::kFirst ? reference_snr_db : dynamic_snr_db; }
  int second_snr_db() const { return reference_position == Position::kFirst ? dynamic_snr_db : reference_snr_db; }

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

struct TrialRecord {
  int trial_index = 0;
  int dynamic_snr_db = 0;
  Position reference_position = Position::kFirst;
  std::size_t source_index = 0;
  Answer answer = Answer::kNotDetectable;
  bool correct = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Seeded presentation-order stream. Every (seed, trial_index) pair maps to
/// an independent draw, so trials can be regenerated in any order.
struct OrderDraw {
  Position reference_position;
  std::uint64_t bits;  // further entropy for source selection
};
OrderDraw draw_order(std::uint64_t order_seed, int trial_index);

/// Seeded permutation of [0, n).
std::vector<std::size_t> seeded_permutation(std::uint64_t seed, std::size_t n);

}  // namespace jndq
