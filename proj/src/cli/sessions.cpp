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

#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "commands.hpp"
#include "jndq/audio.hpp"
#include "jndq/error.hpp"
#include "jndq/listenersim.hpp"
#include "jndq/screening.hpp"
#include "jndq/staircase.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

listenersim::ListenerParams listener_params(const ListenerFlags& f, std::uint64_t seed) {
  listenersim::ListenerParams p;
  if (!f.preset.empty()) {
    const auto preset = listenersim::find_preset(f.preset);
    if (!preset) throw Error(ErrorCode::kInvalidArgument, "unknown listener preset '" + f.preset + "'");
    p = *preset;
  } else {
    p.mu_db = f.mu_db;
    p.sigma_db = f.sigma_db;
    p.guess_rate = f.guess_rate;
    p.lapse_rate = f.lapse_rate;
  }
  p.rng_seed = seed;
  p.validate();
  return p;
}

// Presents trials either to a simulated listener or to the person at the
// terminal, optionally playing both stimuli through an external command.
class Presenter {
 public:
  Presenter(const ListenerFlags& flags, const std::string& manifest, std::string play_cmd, std::uint64_t seed,
            Streams io)
      : play_cmd_(std::move(play_cmd)), io_(io) {
    if (flags.simulate) listener_.emplace(listener_params(flags, seed));
    if (!manifest.empty()) manifest_ = audio::read_manifest(resolve_path(manifest));
    if (!play_cmd_.empty() && !manifest_) {
      throw Error(ErrorCode::kInvalidArgument, "--play-cmd needs --manifest");
    }
  }

  std::optional<fs::path> manifest_path() const {
    if (!manifest_) return std::nullopt;
    return manifest_->directory / audio::kManifestFileName;
  }

  std::optional<Answer> ask(const TrialSpec& t, int total) {
    if (listener_) return listener_->respond(t);
    io_.out << fmt::format("trial {}/{}\n", t.trial_index, total);
    if (manifest_) {
      play(t, 1, t.first_snr_db());
      play(t, 2, t.second_snr_db());
    }
    for (;;) {
      io_.out << "which sounds better? [1/2/n] " << std::flush;
      std::string line;
      if (!std::getline(io_.in, line)) return std::nullopt;
      if (line == "1") return Answer::kFirstBetter;
      if (line == "2") return Answer::kSecondBetter;
      if (line == "n" || line == "N") return Answer::kNotDetectable;
      io_.out << "please type 1, 2 or n\n";
    }
  }

 private:
  void play(const TrialSpec& t, int slot, int snr_db) {
    const auto& source = manifest_->sources.at(t.source_index % manifest_->sources.size());
    const auto* entry = manifest_->find(source, snr_db);
    if (!entry) throw Error(ErrorCode::kMissingStimuli, fmt::format("no stimulus for {} at {} dB", source, snr_db));
    const fs::path wav = manifest_->directory / entry->file;
    if (play_cmd_.empty()) {
      io_.out << fmt::format("  stimulus {}: {}\n", slot, wav.string());
      return;
    }
    std::string cmd = play_cmd_;
    const auto pos = cmd.find("{}");
    if (pos == std::string::npos) cmd += " '" + wav.string() + "'";
    else cmd.replace(pos, 2, "'" + wav.string() + "'");
    if (std::system(cmd.c_str()) != 0) io_.err << "warning: playback command failed: " << cmd << "\n";
  }

  std::string play_cmd_;
  Streams io_;
  std::optional<listenersim::SimulatedListener> listener_;
  std::optional<audio::StimulusManifest> manifest_;
};

void finish(const std::string& command, const json& state, const json& config, std::uint64_t seed,
            const Presenter& presenter, const std::string& out, Streams io) {
  if (out.empty()) {
    io.out << state.dump(2) << "\n";
    return;
  }
  const fs::path path = resolve_path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, state.dump(2) + "\n");
  RunManifest rm;
  rm.command = command;
  rm.config = config;
  rm.seeds = {{"seed", seed}};
  if (auto m = presenter.manifest_path()) rm.inputs.push_back(*m);
  rm.outputs.push_back(path);
  rm.write(path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace

int cmd_run_staircase(const RunStaircaseOptions& o, Streams io) {
  Presenter presenter(o.listener, o.manifest, o.play_cmd, o.seed, io);
  staircase::StaircaseConfig cfg;
  cfg.order_seed = o.seed;
  auto state = staircase::new_session(cfg);
  while (!state.complete()) {
    const auto answer = presenter.ask(state.current_trial(), cfg.max_trials);
    if (!answer) throw Error(ErrorCode::kInvalidArgument, "input ended before the session completed");
    state.submit(*answer);
  }
  const auto t = state.threshold();
  if (t.valid) {
    io.out << fmt::format("threshold {:.3f} dB SNR, JND {:.3f} dB ({} trials, {} reversals)\n", t.threshold_snr_db,
                          t.jnd_db, state.trials().size(), state.reversals().size());
  } else {
    io.out << fmt::format("no threshold: only {} reversal(s) in {} trials\n", state.reversals().size(),
                          state.trials().size());
  }
  json doc = state.to_json();
  doc["result"] = staircase::threshold_to_json(t);
  json config = {{"listener", o.listener.simulate ? "simulated" : "interactive"}, {"preset", o.listener.preset}};
  finish("run-staircase", doc, config, o.seed, presenter, o.out, io);
  return 0;
}

int cmd_run_screening(const RunScreeningOptions& o, Streams io) {
  Presenter presenter(o.listener, o.manifest, o.play_cmd, o.seed, io);
  screening::ScreeningConfig cfg;
  cfg.jnd_level_db = o.level;
  cfg.acceptance_k = o.k;
  cfg.order_seed = o.seed;
  cfg.validate();
  auto session = screening::new_screening(cfg);
  while (!session.complete()) {
    const auto answer = presenter.ask(session.current_trial(), cfg.n_questions);
    if (!answer) throw Error(ErrorCode::kInvalidArgument, "input ended before the session completed");
    session.submit(*answer);
  }
  io.out << fmt::format("{} ({} of {} correct, need {})\n", screening::to_string(session.verdict()),
                        session.n_correct(), cfg.n_questions, cfg.acceptance_k);
  json config = {{"listener", o.listener.simulate ? "simulated" : "interactive"},
                 {"preset", o.listener.preset},
                 {"level", o.level},
                 {"k", o.k}};
  finish("run-screening", session.to_json(), config, o.seed, presenter, o.out, io);
  return 0;
}

}  // namespace jndq::cli
