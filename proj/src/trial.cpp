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

#include "jndq/trial.hpp"

#include <numeric>
#include <utility>

#include "jndq/seeding.hpp"

namespace jndq {

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::kFirstBetter: return "first_better";
    case Answer::kSecondBetter: return "second_better";
    case Answer::kNotDetectable: return "not_detectable";
  }
  return "?";
}

std::string_view to_string(Position p) { return p == Position::kFirst ? "first" : "second"; }

std::optional<Answer> parse_answer(std::string_view text) {
  if (text == "first_better") return Answer::kFirstBetter;
  if (text == "second_better") return Answer::kSecondBetter;
  if (text == "not_detectable") return Answer::kNotDetectable;
  return std::nullopt;
}

std::optional<Position> parse_position(std::string_view text) {
  if (text == "first") return Position::kFirst;
  if (text == "second") return Position::kSecond;
  return std::nullopt;
}

OrderDraw draw_order(std::uint64_t order_seed, int trial_index) {
  const std::uint64_t w = combine_seed(order_seed, static_cast<std::uint64_t>(trial_index));
  return {(w >> 63) ? Position::kFirst : Position::kSecond, mix64(w)};
}

std::vector<std::size_t> seeded_permutation(std::uint64_t seed, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::uint64_t state = mix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  for (std::size_t i = n; i > 1; --i) {
    state = mix64(state);
    std::swap(perm[i - 1], perm[state % i]);
  }
  return perm;
}

}  // namespace jndq
