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

#include <algorithm>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "commands.hpp"
#include "jndq/analysis.hpp"
#include "jndq/error.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;
using nlohmann::json;
namespace an = jndq::analysis;

int cmd_analyze(const AnalyzeOptions& o, Streams io) {
  const fs::path ratings_path = resolve_path(o.ratings);
  const fs::path lab_path = resolve_path(o.lab_mos);
  const fs::path out_dir = resolve_path(o.out_dir);

  const auto ratings = an::read_ratings_csv(ratings_path);
  for (const auto& w : ratings.warnings) io.err << "warning: " << w << "\n";
  const auto lab = an::read_lab_mos_csv(lab_path);
  const auto criteria = parse_int_list(o.criteria);
  const an::Tail tail = o.tail == "one" ? an::Tail::kOne : an::Tail::kTwo;

  std::vector<int> levels;
  if (o.levels.empty()) {
    std::set<int> seen;
    for (const auto& r : ratings.records) seen.insert(r.jnd_level_db);
    levels.assign(seen.rbegin(), seen.rend());
  } else {
    levels = parse_int_list(o.levels);
  }

  const auto cleaned = an::clean_ratings(ratings.records);
  fs::create_directories(out_dir);

  std::vector<an::ComparisonReport> reports;
  json report_rows = json::array();
  json skipped = json::array();
  std::string mos_csv = "jnd_level_db,k,condition_id,group,mos,ci95,n_votes\n";
  for (const auto& l : lab) mos_csv += fmt::format(",,{},lab,{:.6f},,\n", l.condition_id, l.mos);

  for (int level : levels) {
    std::vector<an::RatingRecord> at_level;
    std::copy_if(cleaned.kept.begin(), cleaned.kept.end(), std::back_inserter(at_level),
                 [level](const an::RatingRecord& r) { return r.jnd_level_db == level; });
    for (int k : criteria) {
      const auto split = an::split_by_screening(at_level, k);
      if (split.warning) io.err << fmt::format("warning: level {} k={}: {}\n", level, k, *split.warning);
      const auto passed = an::mos_per_condition(split.passed);
      const auto failed = an::mos_per_condition(split.failed);
      for (const auto& [group, rows] : {std::pair{"passed", &passed}, std::pair{"failed", &failed}}) {
        for (const auto& m : *rows) {
          mos_csv += fmt::format("{},{},{},{},{:.6f},{:.6f},{}\n", level, k, m.condition_id, group, m.mos, m.ci95,
                                 m.n_votes);
        }
      }
      auto skip = [&](const std::string& reason) {
        io.err << fmt::format("level {} k={}: skipped ({})\n", level, k, reason);
        skipped.push_back({{"jnd_level_db", level}, {"k", k}, {"reason", reason}});
      };
      if (passed.empty() || failed.empty()) {
        skip(passed.empty() ? "no passed ratings" : "no failed ratings");
        continue;
      }
      try {
        reports.push_back(an::compare_groups(passed, failed, lab, level, k, tail));
        auto row = an::report_to_json(reports.back());
        row["n_votes"] = {{"passed", split.passed.size()}, {"failed", split.failed.size()}};
        report_rows.push_back(std::move(row));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInvalidArgument && e.code() != ErrorCode::kUndefinedStatistic) throw;
        skip(e.what());
      }
    }
  }

  std::vector<an::SessionOutcome> sessions = an::sessions_from_ratings(ratings.records);
  const auto pass_rows = an::pass_rate_table(sessions);
  std::string pass_csv = "jnd_level_db,n_sessions,pct_k1,pct_k2,pct_k3,pct_k4\n";
  for (const auto& r : pass_rows) {
    pass_csv += fmt::format("{},{}", r.jnd_level_db, r.n_sessions);
    for (double p : r.percent) pass_csv += fmt::format(",{:.4f}", p);
    pass_csv += "\n";
  }

  json cleaning = {{"n_input", ratings.records.size()},
                   {"n_kept", cleaned.kept.size()},
                   {"n_removed", cleaned.removed.size()},
                   {"reason_counts", cleaned.reason_counts}};
  json report = {{"tail", o.tail},
                 {"levels", levels},
                 {"criteria", criteria},
                 {"comparisons", report_rows},
                 {"skipped", skipped},
                 {"cleaning", cleaning},
                 {"warnings", ratings.warnings}};

  RunManifest rm;
  rm.command = "analyze";
  rm.config = {{"levels", levels}, {"criteria", criteria}, {"tail", o.tail}};
  rm.seeds = {{"seed", o.seed}};
  rm.inputs = {ratings_path, lab_path};
  const std::string table = an::render_comparison_table(reports);
  const std::string pass_txt = an::render_pass_rate_table(pass_rows);
  const std::pair<const char*, std::string> files[] = {{"report.json", report.dump(2) + "\n"},
                                                       {"table2.txt", table},
                                                       {"pass_rates.csv", pass_csv},
                                                       {"pass_rates.txt", pass_txt},
                                                       {"condition_mos.csv", mos_csv},
                                                       {"cleaning.json", cleaning.dump(2) + "\n"}};
  for (const auto& [name, text] : files) {
    write_text(out_dir / name, text);
    rm.outputs.push_back(out_dir / name);
  }
  rm.write(out_dir);

  io.out << table << "\n" << pass_txt;
  io.out << fmt::format("{} comparisons, {} skipped; wrote {}\n", reports.size(), skipped.size(), out_dir.string());
  return 0;
}

}  // namespace jndq::cli
