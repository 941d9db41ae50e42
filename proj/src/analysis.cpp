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

#include "jndq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "jndq/error.hpp"

namespace jndq::analysis {
namespace {

constexpr double kZ975 = 1.959963984540054;

void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, fmt::format("{}: length mismatch ({} vs {})", what, x.size(), y.size()));
  }
  if (x.size() < 3) throw Error(ErrorCode::kInvalidArgument, fmt::format("{}: need at least 3 values", what));
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      t.rows.emplace_back(line_no, std::move(fields));
    }
  }
  return t;
}

std::map<std::string, std::size_t> column_index(const CsvTable& t, std::span<const char* const> required,
                                                 const char* what, std::vector<std::string>* warnings) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < t.header.size(); ++i) idx[t.header[i]] = i;
  for (const char* col : required) {
    if (!idx.count(col)) throw Error(ErrorCode::kSchema, fmt::format("{}: missing column '{}' (line 1)", what, col));
  }
  if (warnings) {
    for (const auto& h : t.header) {
      if (std::find_if(required.begin(), required.end(), [&](const char* c) { return h == c; }) == required.end()) {
        warnings->push_back(fmt::format("{}: ignoring unknown column '{}'", what, h));
      }
    }
  }
  return idx;
}

int parse_int(const std::string& s, std::size_t line, const char* col) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kSchema, fmt::format("line {}: column '{}' is not an integer: '{}'", line, col, s));
}

double parse_double(const std::string& s, std::size_t line, const char* col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kSchema, fmt::format("line {}: column '{}' is not a number: '{}'", line, col, s));
}

bool parse_flag(const std::string& s, std::size_t line, const char* col) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw Error(ErrorCode::kSchema, fmt::format("line {}: column '{}' must be 0 or 1, got '{}'", line, col, s));
}

std::string short_decimal(double v) {
  std::string s = fmt::format("{:.3f}", v);
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  else if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

std::string mark(const std::optional<double>& p) {
  if (!p) return "";
  if (*p < 0.05) return "a";
  if (*p < 0.1) return "b";
  return "";
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

CleanResult clean_ratings(std::span<const RatingRecord> records) {
  CleanResult out;
  for (const auto& r : records) {
    std::vector<std::string> reasons;
    if (!r.headphone_ok) reasons.emplace_back("headphone");
    if (!r.trapping_ok) reasons.emplace_back("trapping");
    if (!r.gold_ok) reasons.emplace_back("gold");
    if (reasons.empty()) {
      out.kept.push_back(r);
    } else {
      for (const auto& reason : reasons) ++out.reason_counts[reason];
      out.removed.push_back({r, std::move(reasons)});
    }
  }
  return out;
}

SplitResult split_by_screening(std::span<const RatingRecord> records, int acceptance_k) {
  SplitResult out;
  if (acceptance_k <= 0) {
    out.warning = fmt::format("acceptance criterion k={} accepts every submission", acceptance_k);
  }
  for (const auto& r : records) (r.n_correct >= acceptance_k ? out.passed : out.failed).push_back(r);
  return out;
}

std::vector<ConditionMOS> mos_per_condition(std::span<const RatingRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "mos_per_condition: no ratings");
  std::map<std::string, std::vector<int>> by_condition;
  for (const auto& r : records) by_condition[r.condition_id].push_back(r.score);
  std::vector<ConditionMOS> out;
  for (const auto& [id, scores] : by_condition) {
    ConditionMOS c{id, 0.0, scores.size(), 0.0};
    double sum = 0.0;
    for (int s : scores) sum += s;
    c.mos = sum / static_cast<double>(scores.size());
    if (scores.size() > 1) {
      double ss = 0.0;
      for (int s : scores) ss += (s - c.mos) * (s - c.mos);
      c.ci95 = kZ975 * std::sqrt(ss / static_cast<double>(scores.size() - 1)) /
               std::sqrt(static_cast<double>(scores.size()));
    }
    out.push_back(std::move(c));
  }
  return out;
}

double pcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pcc");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kUndefinedStatistic, "pcc: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "srcc");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pcc(rx, ry);
}

double rmse(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

ZTest fisher_z_test(double r1, std::size_t n1, double r2, std::size_t n2, Tail tail) {
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fisher_z_test: |r| must be < 1");
  }
  if (n1 < 4 || n2 < 4) throw Error(ErrorCode::kInvalidArgument, "fisher_z_test: n must be >= 4");
  ZTest t;
  t.z = (std::atanh(r1) - std::atanh(r2)) / std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  const boost::math::normal_distribution<double> standard;
  if (tail == Tail::kTwo) {
    t.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(t.z))));
  } else {
    t.p = boost::math::cdf(boost::math::complement(standard, t.z));
  }
  return t;
}

FTest rmse_f_test(double rmse1, std::size_t n1, double rmse2, std::size_t n2) {
  if (!(rmse1 >= 0.0) || !(rmse2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "rmse_f_test: negative RMSE");
  if (n1 < 2 || n2 < 2) throw Error(ErrorCode::kInvalidArgument, "rmse_f_test: n must be >= 2");
  const bool first_larger = rmse1 > rmse2 || (rmse1 == rmse2 && n1 >= n2);
  const double big = first_larger ? rmse1 : rmse2;
  const double small = first_larger ? rmse2 : rmse1;
  if (small == 0.0) throw Error(ErrorCode::kUndefinedStatistic, "rmse_f_test: zero RMSE in denominator");
  FTest t;
  t.f = (big * big) / (small * small);
  t.df_num = (first_larger ? n1 : n2) - 1;
  t.df_den = (first_larger ? n2 : n1) - 1;
  const boost::math::fisher_f_distribution<double> dist(static_cast<double>(t.df_num), static_cast<double>(t.df_den));
  t.p = boost::math::cdf(boost::math::complement(dist, t.f));
  return t;
}

ComparisonReport compare_groups(std::span<const ConditionMOS> passed_mos, std::span<const ConditionMOS> failed_mos,
                                std::span<const LabMOS> lab_mos, int jnd_level_db, int acceptance_k, Tail tail) {
  std::map<std::string, double> lab;
  for (const auto& l : lab_mos) lab[l.condition_id] = l.mos;

  auto align = [&](std::span<const ConditionMOS> group, const char* name) {
    std::map<std::string, double> g;
    for (const auto& c : group) g[c.condition_id] = c.mos;
    if (g.size() != lab.size() || !std::equal(g.begin(), g.end(), lab.begin(),
                                              [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("compare_groups: condition-set mismatch between {} group ({} conditions) and lab MOS "
                              "({} conditions)",
                              name, g.size(), lab.size()));
    }
    std::vector<double> values;
    for (const auto& [id, v] : g) values.push_back(v);
    return values;
  };

  std::vector<double> lab_values;
  for (const auto& [id, v] : lab) lab_values.push_back(v);
  const auto passed = align(passed_mos, "passed");
  const auto failed = align(failed_mos, "failed");

  ComparisonReport rep;
  rep.jnd_level_db = jnd_level_db;
  rep.acceptance_k = acceptance_k;
  rep.tail = tail;
  auto stats = [&](const std::vector<double>& v) {
    return GroupStats{pcc(v, lab_values), srcc(v, lab_values), rmse(v, lab_values), v.size()};
  };
  rep.passed = stats(passed);
  rep.failed = stats(failed);

  const std::size_t n = lab_values.size();
  if (n >= kMinConditionsForSignificance) {
    auto& s = rep.significance;
    if (std::abs(rep.passed.pcc) < 1.0 && std::abs(rep.failed.pcc) < 1.0) {
      const auto z = fisher_z_test(rep.passed.pcc, n, rep.failed.pcc, n, tail);
      s.z_pcc = z.z;
      s.p_pcc = z.p;
    }
    if (std::abs(rep.passed.srcc) < 1.0 && std::abs(rep.failed.srcc) < 1.0) {
      const auto z = fisher_z_test(rep.passed.srcc, n, rep.failed.srcc, n, tail);
      s.z_srcc = z.z;
      s.p_srcc = z.p;
    }
    if (rep.passed.rmse > 0.0 && rep.failed.rmse > 0.0) {
      const auto f = rmse_f_test(rep.passed.rmse, n, rep.failed.rmse, n);
      s.f_rmse = f.f;
      s.p_rmse = f.p;
    }
  }
  return rep;
}

nlohmann::json report_to_json(const ComparisonReport& r) {
  auto group = [](const GroupStats& g) {
    return nlohmann::json{{"pcc", g.pcc}, {"srcc", g.srcc}, {"rmse", g.rmse}, {"n_conditions", g.n_conditions}};
  };
  const auto& s = r.significance;
  return {{"jnd_level_db", r.jnd_level_db},
          {"acceptance_k", r.acceptance_k},
          {"passed", group(r.passed)},
          {"failed", group(r.failed)},
          {"tail", r.tail == Tail::kTwo ? "two" : "one"},
          {"significance",
           {{"z_pcc", opt(s.z_pcc)},
            {"p_pcc", opt(s.p_pcc)},
            {"z_srcc", opt(s.z_srcc)},
            {"p_srcc", opt(s.p_srcc)},
            {"f_rmse", opt(s.f_rmse)},
            {"p_rmse", opt(s.p_rmse)}}}};
}

std::string render_comparison_table(std::span<const ComparisonReport> reports) {
  std::string out;
  out += fmt::format("{:<8}{:<11}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", "JND in", "Acceptance", "PCC", "", "SRCC", "",
                     "RMSE", "");
  out += fmt::format("{:<8}{:<11}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", "SNR", "criterion", "Passed", "Failed", "Passed",
                     "Failed", "Passed", "Failed");
  out += std::string(67, '-') + "\n";
  int last_level = reports.empty() ? 0 : reports.front().jnd_level_db;
  for (const auto& r : reports) {
    if (r.jnd_level_db != last_level) {
      out += std::string(67, '-') + "\n";
      last_level = r.jnd_level_db;
    }
    const auto& s = r.significance;
    out += fmt::format("{:<8}{:<11}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", r.jnd_level_db,
                       fmt::format("{}/4", r.acceptance_k), short_decimal(r.passed.pcc) + mark(s.p_pcc),
                       short_decimal(r.failed.pcc), short_decimal(r.passed.srcc) + mark(s.p_srcc),
                       short_decimal(r.failed.srcc), short_decimal(r.passed.rmse) + mark(s.p_rmse),
                       short_decimal(r.failed.rmse));
  }
  out += std::string(67, '-') + "\n";
  out += "a Significant at alpha=.05   b Significant at alpha=.1\n";
  return out;
}

std::vector<PassRateRow> pass_rate_table(std::span<const SessionOutcome> sessions, int n_questions) {
  std::map<int, std::vector<int>> by_level;
  for (const auto& s : sessions) by_level[s.jnd_level_db].push_back(s.n_correct);
  std::vector<PassRateRow> rows;
  for (const auto& [level, counts] : by_level) {
    PassRateRow row{level, counts.size(), {}};
    for (int k = 1; k <= n_questions; ++k) {
      const auto passed = std::count_if(counts.begin(), counts.end(), [k](int c) { return c >= k; });
      row.percent.push_back(100.0 * static_cast<double>(passed) / static_cast<double>(counts.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_pass_rate_table(std::span<const PassRateRow> rows) {
  std::string out = fmt::format("{:<8}{:>6}", "JND", "n");
  const std::size_t n_k = rows.empty() ? 4 : rows.front().percent.size();
  for (std::size_t k = 1; k <= n_k; ++k) out += fmt::format("{:>9}", fmt::format("+{}/{}", k, n_k));
  out += "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:<8}{:>6}", r.jnd_level_db, r.n_sessions);
    for (double p : r.percent) out += fmt::format("{:>8.1f}%", p);
    out += "\n";
  }
  return out;
}

RatingsFile parse_ratings_csv(const std::string& text) {
  static constexpr const char* kColumns[] = {"worker_id", "assignment_id", "condition_id", "stimulus_id",
                                             "score",     "jnd_level_db",  "n_correct",    "trapping_ok",
                                             "gold_ok",   "headphone_ok"};
  const auto table = parse_csv(text);
  if (table.header.empty()) throw Error(ErrorCode::kSchema, "ratings: empty file");
  RatingsFile out;
  const auto idx = column_index(table, kColumns, "ratings", &out.warnings);
  for (const auto& [line, f] : table.rows) {
    if (f.size() != table.header.size()) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("line {}: expected {} fields, found {}", line, table.header.size(), f.size()));
    }
    auto at = [&](const char* col) -> const std::string& { return f[idx.at(col)]; };
    RatingRecord r;
    r.worker_id = at("worker_id");
    r.assignment_id = at("assignment_id");
    r.condition_id = at("condition_id");
    r.stimulus_id = at("stimulus_id");
    r.score = parse_int(at("score"), line, "score");
    r.jnd_level_db = parse_int(at("jnd_level_db"), line, "jnd_level_db");
    r.n_correct = parse_int(at("n_correct"), line, "n_correct");
    r.trapping_ok = parse_flag(at("trapping_ok"), line, "trapping_ok");
    r.gold_ok = parse_flag(at("gold_ok"), line, "gold_ok");
    r.headphone_ok = parse_flag(at("headphone_ok"), line, "headphone_ok");
    if (r.score < 1 || r.score > 5) {
      throw Error(ErrorCode::kSchema, fmt::format("line {}: score {} outside 1..5", line, r.score));
    }
    if (r.n_correct < 0 || r.n_correct > 4) {
      throw Error(ErrorCode::kSchema, fmt::format("line {}: n_correct {} outside 0..4", line, r.n_correct));
    }
    if (r.condition_id.empty() || r.assignment_id.empty()) {
      throw Error(ErrorCode::kSchema, fmt::format("line {}: empty condition_id or assignment_id", line));
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.empty()) throw Error(ErrorCode::kSchema, "ratings: no data rows");
  return out;
}

RatingsFile read_ratings_csv(const std::filesystem::path& path) { return parse_ratings_csv(read_text(path)); }

std::vector<LabMOS> parse_lab_mos_csv(const std::string& text) {
  static constexpr const char* kColumns[] = {"condition_id", "mos"};
  const auto table = parse_csv(text);
  if (table.header.empty()) throw Error(ErrorCode::kSchema, "lab mos: empty file");
  const auto idx = column_index(table, kColumns, "lab mos", nullptr);
  std::vector<LabMOS> out;
  std::set<std::string> seen;
  for (const auto& [line, f] : table.rows) {
    if (f.size() != table.header.size()) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("line {}: expected {} fields, found {}", line, table.header.size(), f.size()));
    }
    LabMOS m{f[idx.at("condition_id")], parse_double(f[idx.at("mos")], line, "mos")};
    if (!seen.insert(m.condition_id).second) {
      throw Error(ErrorCode::kSchema, fmt::format("line {}: duplicate condition '{}'", line, m.condition_id));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LabMOS> read_lab_mos_csv(const std::filesystem::path& path) { return parse_lab_mos_csv(read_text(path)); }

std::vector<SessionOutcome> sessions_from_ratings(std::span<const RatingRecord> records) {
  std::map<std::string, SessionOutcome> by_assignment;
  for (const auto& r : records) {
    const SessionOutcome o{r.jnd_level_db, r.n_correct};
    auto [it, inserted] = by_assignment.emplace(r.assignment_id, o);
    if (!inserted && (it->second.jnd_level_db != o.jnd_level_db || it->second.n_correct != o.n_correct)) {
      throw Error(ErrorCode::kSchema, "assignment '" + r.assignment_id + "' carries inconsistent screening data");
    }
  }
  std::vector<SessionOutcome> out;
  for (const auto& [id, o] : by_assignment) out.push_back(o);
  return out;
}

}  // namespace jndq::analysis
