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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace jndq::analysis {

/// One ACR vote together with the screening outcome of its submission.
struct RatingRecord {
  std::string worker_id;
  std::string assignment_id;
  std::string condition_id;
  std::string stimulus_id;
  int score = 0;         // 1..5
  int jnd_level_db = 0;  // screening level the worker saw
  int n_correct = 0;     // 0..4
  bool trapping_ok = true;
  bool gold_ok = true;
  bool headphone_ok = true;
};

struct RemovedRecord {
  RatingRecord record;
  std::vector<std::string> reasons;  // "headphone", "trapping", "gold"
};

struct CleanResult {
  std::vector<RatingRecord> kept;
  std::vector<RemovedRecord> removed;
  std::map<std::string, std::size_t> reason_counts;
};

/// Drops records failing any reliability flag. kept + removed partitions the input.
CleanResult clean_ratings(std::span<const RatingRecord> records);

struct SplitResult {
  std::vector<RatingRecord> passed;
  std::vector<RatingRecord> failed;
  std::optional<std::string> warning;
};

/// passed iff n_correct >= acceptance_k.
SplitResult split_by_screening(std::span<const RatingRecord> records, int acceptance_k);

struct ConditionMOS {
  std::string condition_id;
  double mos = 0.0;
  std::size_t n_votes = 0;
  double ci95 = 0.0;  // normal-approximation half-width
};

/// Mean score per condition, ordered by condition id.
std::vector<ConditionMOS> mos_per_condition(std::span<const RatingRecord> records);

// ---------------------------------------------------------------------------
// Agreement statistics

double pcc(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
double srcc(std::span<const double> x, std::span<const double> y);
double rmse(std::span<const double> x, std::span<const double> y);

/// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

enum class Tail { kTwo, kOne };

struct ZTest {
  double z = 0.0;
  double p = 1.0;
};

/// Compares two correlations via Fisher's z transform. kOne tests r1 > r2.
ZTest fisher_z_test(double r1, std::size_t n1, double r2, std::size_t n2, Tail tail = Tail::kTwo);

struct FTest {
  double f = 1.0;
  std::size_t df_num = 0;
  std::size_t df_den = 0;
  double p = 0.5;  // upper tail
};

/// F = larger^2 / smaller^2 with (n_larger - 1, n_smaller - 1) degrees of freedom.
FTest rmse_f_test(double rmse1, std::size_t n1, double rmse2, std::size_t n2);

// ---------------------------------------------------------------------------
// Group comparison

struct LabMOS {
  std::string condition_id;
  double mos = 0.0;
};

struct GroupStats {
  double pcc = 0.0;
  double srcc = 0.0;
  double rmse = 0.0;
  std::size_t n_conditions = 0;
};

/// Passed-vs-failed difference tests. A field is empty when its test is
/// undefined (|r| = 1, zero RMSE) or when fewer than 4 conditions exist.
struct Significance {
  std::optional<double> z_pcc, p_pcc;
  std::optional<double> z_srcc, p_srcc;
  std::optional<double> f_rmse, p_rmse;
};

struct ComparisonReport {
  int jnd_level_db = 0;
  int acceptance_k = 0;
  GroupStats passed;
  GroupStats failed;
  Significance significance;
  Tail tail = Tail::kTwo;
};

inline constexpr std::size_t kMinConditionsForSignificance = 4;

/// Per-group agreement with laboratory MOS plus difference tests. The three
/// condition sets must be identical.
ComparisonReport compare_groups(std::span<const ConditionMOS> passed_mos, std::span<const ConditionMOS> failed_mos,
                                std::span<const LabMOS> lab_mos, int jnd_level_db, int acceptance_k,
                                Tail tail = Tail::kTwo);

nlohmann::json report_to_json(const ComparisonReport& report);

/// Rows laid out as: level, criterion, PCC passed/failed, SRCC passed/failed,
/// RMSE passed/failed; a = significant at .05, b = at .1.
std::string render_comparison_table(std::span<const ComparisonReport> reports);

// ---------------------------------------------------------------------------
// Pass rates

struct SessionOutcome {
  int jnd_level_db = 0;
  int n_correct = 0;
};

struct PassRateRow {
  int jnd_level_db = 0;
  std::size_t n_sessions = 0;
  std::vector<double> percent;  // percent[k - 1] = % with n_correct >= k
};

/// One row per level (ascending), criteria k = 1..n_questions.
std::vector<PassRateRow> pass_rate_table(std::span<const SessionOutcome> sessions, int n_questions = 4);

std::string render_pass_rate_table(std::span<const PassRateRow> rows);

// ---------------------------------------------------------------------------
// CSV ingestion

struct RatingsFile {
  std::vector<RatingRecord> records;
  std::vector<std::string> warnings;
};

/// Header: worker_id, assignment_id, condition_id, stimulus_id, score,
/// jnd_level_db, n_correct, trapping_ok, gold_ok, headphone_ok (0/1).
/// Unknown columns are ignored with a warning; violations name the line.
RatingsFile parse_ratings_csv(const std::string& text);
RatingsFile read_ratings_csv(const std::filesystem::path& path);

/// Header: condition_id, mos.
std::vector<LabMOS> parse_lab_mos_csv(const std::string& text);
std::vector<LabMOS> read_lab_mos_csv(const std::filesystem::path& path);

/// One outcome per distinct assignment (the screening is per submission).
std::vector<SessionOutcome> sessions_from_ratings(std::span<const RatingRecord> records);

}  // namespace jndq::analysis
