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

#include "jndq/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "jndq/error.hpp"

namespace jndq::cli {
namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return kExitRuntime;
    default: return kExitData;
  }
}

void add_listener_flags(CLI::App* sub, ListenerFlags& l) {
  sub->add_flag("--simulate", l.simulate, "Answer with a simulated listener instead of the terminal");
  sub->add_option("--preset", l.preset, "Listener preset (silent-headphone, noisy, loudspeaker)");
  sub->add_option("--mu", l.mu_db, "Psychometric midpoint in dB");
  sub->add_option("--sigma", l.sigma_db, "Psychometric slope in dB");
  sub->add_option("--guess", l.guess_rate, "Guess rate");
  sub->add_option("--lapse", l.lapse_rate, "Lapse rate");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"jndq: just-noticeable difference of quality toolkit", "jndq"};
  app.set_config("--config", "", "TOML file with option defaults; flags take precedence");
  app.set_version_flag("--version", std::string(JNDQ_VERSION));
  app.require_subcommand(1);

  GenStimuliOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-stimuli", "Render the SNR-graded stimulus set and manifest");
  gen_cmd->add_option("--sources", gen.sources_dir, "Directory of mono WAV source utterances")->required();
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Master noise seed");
  gen_cmd->add_option("--levels", gen.levels, "SNR levels in dB, e.g. 35-50");

  SynthSourcesOptions synth;
  auto* synth_cmd = app.add_subcommand("synth-sources", "Write synthetic voiced test utterances");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--count", synth.count, "Number of utterances")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--duration", synth.duration_s, "Seconds per utterance")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--rate", synth.sample_rate, "Sample rate in Hz")->check(CLI::PositiveNumber);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo validation with simulated listeners");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  auto* sim_seed = sim_cmd->add_option("--seed", sim.seed, "Overrides the scenario seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (results do not depend on it)");

  RunStaircaseOptions stair;
  auto* stair_cmd = app.add_subcommand("run-staircase", "Run one adaptive 2-down/1-up session");
  add_listener_flags(stair_cmd, stair.listener);
  stair_cmd->add_option("--manifest", stair.manifest, "Stimulus manifest for audio playback");
  stair_cmd->add_option("--play-cmd", stair.play_cmd, "Playback command; {} is replaced by the WAV path");
  stair_cmd->add_option("--out", stair.out, "Write the final session JSON here");
  stair_cmd->add_option("--seed", stair.seed, "Presentation-order seed (and listener seed)");

  RunScreeningOptions scr;
  auto* scr_cmd = app.add_subcommand("run-screening", "Run one 4-question screening session");
  add_listener_flags(scr_cmd, scr.listener);
  scr_cmd->add_option("--level", scr.level, "JND level in dB (10, 8 or 6)");
  scr_cmd->add_option("--k", scr.k, "Minimum correct answers to pass");
  scr_cmd->add_option("--manifest", scr.manifest, "Stimulus manifest for audio playback");
  scr_cmd->add_option("--play-cmd", scr.play_cmd, "Playback command; {} is replaced by the WAV path");
  scr_cmd->add_option("--out", scr.out, "Write the final session JSON here");
  scr_cmd->add_option("--seed", scr.seed, "Presentation-order seed (and listener seed)");

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Passed/failed group comparison against laboratory MOS");
  an_cmd->add_option("--ratings", an.ratings, "Ratings CSV")->required();
  an_cmd->add_option("--lab-mos", an.lab_mos, "Laboratory MOS CSV")->required();
  an_cmd->add_option("--out", an.out_dir, "Output directory")->required();
  an_cmd->add_option("--levels", an.levels, "JND levels to report (default: all in data)");
  an_cmd->add_option("--criteria", an.criteria, "Acceptance criteria k");
  an_cmd->add_option("--tail", an.tail, "Fisher-z tail: two or one")->check(CLI::IsMember({"two", "one"}));
  an_cmd->add_option("--seed", an.seed, "Unused; analysis is deterministic");

  ServeOptions srv;
  auto* srv_cmd = app.add_subcommand("serve", "Run the HTTP session service");
  srv_cmd->add_option("--manifest", srv.manifest, "Stimulus manifest")->required();
  srv_cmd->add_option("--data-dir", srv.data_dir, "Session storage directory");
  srv_cmd->add_option("--host", srv.host, "Bind address");
  srv_cmd->add_option("--port", srv.port, "Port (0 picks a free one)");
  srv_cmd->add_option("--port-file", srv.port_file, "Write the bound port to this file");
  srv_cmd->add_flag("--gate-on-fail", srv.gate_on_fail, "Failed screenings do not proceed to ratings");
  srv_cmd->add_option("--session-ttl", srv.session_ttl_s, "Session lifetime in seconds");
  srv_cmd->add_option("--snapshot-every", srv.snapshot_every, "Snapshot interval in events");
  srv_cmd->add_option("--seed", srv.seed, "Unused; clients may pin order_seed per session");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const Streams io{in, out, err};
  try {
    if (*gen_cmd) return cmd_gen_stimuli(gen, io);
    if (*synth_cmd) return cmd_synth_sources(synth, io);
    if (*sim_cmd) {
      sim.seed_set = sim_seed->count() > 0;
      return cmd_simulate(sim, io);
    }
    if (*stair_cmd) return cmd_run_staircase(stair, io);
    if (*scr_cmd) return cmd_run_screening(scr, io);
    if (*an_cmd) return cmd_analyze(an, io);
    if (*srv_cmd) return cmd_serve(srv, io);
  } catch (const Error& e) {
    err << "jndq: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "jndq: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace jndq::cli
