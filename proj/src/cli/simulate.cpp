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

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "commands.hpp"
#include "jndq/error.hpp"
#include "jndq/listenersim.hpp"
#include "jndq/seeding.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kZ99 = 2.5758293035489004;

struct NamedListener {
  std::string name;
  listenersim::ListenerParams params;
};

NamedListener listener_from_json(const json& j, std::size_t index) {
  NamedListener l;
  if (j.contains("preset")) {
    l.name = j.at("preset").get<std::string>();
    const auto p = listenersim::find_preset(l.name);
    if (!p) throw Error(ErrorCode::kSchema, "scenario: unknown listener preset '" + l.name + "'");
    l.params = *p;
  } else {
    l.name = j.value("name", fmt::format("listener{}", index + 1));
  }
  l.params.mu_db = j.value("mu_db", l.params.mu_db);
  l.params.sigma_db = j.value("sigma_db", l.params.sigma_db);
  l.params.guess_rate = j.value("guess_rate", l.params.guess_rate);
  l.params.lapse_rate = j.value("lapse_rate", l.params.lapse_rate);
  l.params.validate();
  return l;
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.6f}", v) : std::string("nan"); }

}  // namespace

int cmd_simulate(const SimulateOptions& o, Streams io) {
  const fs::path scenario_path = resolve_path(o.scenario);
  const fs::path out_dir = resolve_path(o.out_dir);
  std::ifstream in(scenario_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario " + scenario_path.string());

  json scenario;
  std::vector<NamedListener> listeners;
  std::uint64_t seed = 0;
  std::size_t n_runs = 0;
  try {
    scenario = json::parse(in);
    seed = o.seed_set ? o.seed : scenario.value("seed", std::uint64_t{1});
    const auto runs = scenario.at("n_runs").get<long long>();
    if (runs < 1) throw Error(ErrorCode::kSchema, "scenario: n_runs must be >= 1");
    n_runs = static_cast<std::size_t>(runs);
    const auto& ls = scenario.at("listeners");
    if (!ls.is_array() || ls.empty()) throw Error(ErrorCode::kSchema, "scenario: listeners must be a non-empty list");
    for (std::size_t i = 0; i < ls.size(); ++i) listeners.push_back(listener_from_json(ls[i], i));
    if (!scenario.at("procedures").is_array() || scenario.at("procedures").empty()) {
      throw Error(ErrorCode::kSchema, "scenario: procedures must be a non-empty list");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what());
  }

  fs::create_directories(out_dir);
  std::string runs_csv = "listener,run,valid,threshold_snr_db,jnd_db,n_reversals_used\n";
  std::string stair_csv = "listener,mu_db,sigma_db,convergence_point_db,mean_jnd_db,sd_jnd_db,n_valid,n_invalid\n";
  std::string screen_csv = "listener,jnd_level_db,k,pass_rate,ci99_low,ci99_high,expected_pass_rate,n_runs\n";
  json summary = {{"seed", seed}, {"n_runs", n_runs}, {"staircase", json::array()}, {"screening", json::array()}};

  for (std::size_t li = 0; li < listeners.size(); ++li) {
    auto params = listeners[li].params;
    params.rng_seed = combine_seed(seed, 2 * li);
    const std::uint64_t order_seed = combine_seed(seed, 2 * li + 1);
    const auto& name = listeners[li].name;

    for (const auto& proc : scenario.at("procedures")) {
      const std::string type = proc.value("type", std::string());
      if (type == "staircase") {
        auto cfg_json = proc.value("config", json::object());
        cfg_json["order_seed"] = order_seed;
        const auto cfg = staircase::config_from_json(cfg_json);
        const auto result = listenersim::simulate_staircase(params, cfg, n_runs, o.threads);
        std::optional<double> conv;
        try {
          conv = listenersim::convergence_point(params);
        } catch (const Error&) {
        }
        for (std::size_t r = 0; r < result.runs.size(); ++r) {
          const auto& t = result.runs[r];
          runs_csv += fmt::format("{},{},{},{},{},{}\n", name, r, t.valid ? 1 : 0, num(t.threshold_snr_db),
                                  num(t.jnd_db), t.n_reversals_used);
        }
        const auto& s = result.summary;
        stair_csv += fmt::format("{},{},{},{},{},{},{},{}\n", name, num(params.mu_db), num(params.sigma_db),
                                 conv ? num(*conv) : "nan", num(s.mean_jnd_db), num(s.sd_jnd_db), s.n_valid,
                                 s.n_invalid);
        summary["staircase"].push_back({{"listener", name},
                                        {"convergence_point_db", conv ? json(*conv) : json(nullptr)},
                                        {"mean_jnd_db", std::isfinite(s.mean_jnd_db) ? json(s.mean_jnd_db) : json(nullptr)},
                                        {"sd_jnd_db", s.sd_jnd_db},
                                        {"n_valid", s.n_valid},
                                        {"n_invalid", s.n_invalid}});
      } else if (type == "screening") {
        const auto levels = proc.value("levels", std::vector<int>{10, 8, 6});
        const auto criteria = proc.value("criteria", std::vector<int>{1, 2, 3, 4});
        for (int level : levels) {
          screening::ScreeningConfig cfg;
          cfg.jnd_level_db = level;
          cfg.acceptance_k = 1;
          cfg.order_seed = combine_seed(order_seed, static_cast<std::uint64_t>(level));
          cfg.validate();
          auto level_params = params;
          level_params.rng_seed = combine_seed(params.rng_seed, static_cast<std::uint64_t>(level));
          const auto result = listenersim::simulate_screening_sessions(level_params, cfg, n_runs, o.threads);
          const double p = listenersim::p_correct(params, level);
          for (int k : criteria) {
            if (k < 1 || k > cfg.n_questions) throw Error(ErrorCode::kSchema, fmt::format("scenario: criterion {} out of range", k));
            const double rate = result.pass_rate(k);
            const auto ci = listenersim::wilson_interval(
                static_cast<std::size_t>(std::llround(rate * static_cast<double>(n_runs))), n_runs, kZ99);
            const double expected = listenersim::binomial_tail(cfg.n_questions, k, p);
            screen_csv += fmt::format("{},{},{},{},{},{},{},{}\n", name, level, k, num(rate), num(ci.low),
                                      num(ci.high), num(expected), n_runs);
            summary["screening"].push_back({{"listener", name},
                                            {"jnd_level_db", level},
                                            {"k", k},
                                            {"pass_rate", rate},
                                            {"ci99", {ci.low, ci.high}},
                                            {"expected_pass_rate", expected}});
          }
        }
      } else {
        throw Error(ErrorCode::kSchema, "scenario: unknown procedure type '" + type + "'");
      }
    }
  }

  RunManifest rm;
  rm.command = "simulate";
  rm.config = {{"scenario", scenario}, {"threads_independent", true}};
  rm.seeds = {{"seed", seed}};
  rm.inputs = {scenario_path};
  const std::pair<const char*, const std::string*> files[] = {{"staircase_runs.csv", &runs_csv},
                                                              {"staircase_summary.csv", &stair_csv},
                                                              {"screening_summary.csv", &screen_csv}};
  for (const auto& [file, text] : files) {
    write_text(out_dir / file, *text);
    rm.outputs.push_back(out_dir / file);
  }
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  rm.outputs.push_back(out_dir / "summary.json");
  rm.write(out_dir);

  for (const auto& s : summary["staircase"]) {
    io.out << fmt::format("{}: mean JND {} dB (convergence point {})\n", s["listener"].get<std::string>(),
                          s["mean_jnd_db"].dump(), s["convergence_point_db"].dump());
  }
  io.out << "wrote simulation summaries to " << out_dir.string() << "\n";
  return 0;
}

}  // namespace jndq::cli
