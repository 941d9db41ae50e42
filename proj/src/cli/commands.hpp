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

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace jndq::cli {

struct GenStimuliOptions {
  std::string sources_dir;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::string levels = "35-50";
};
int cmd_gen_stimuli(const GenStimuliOptions& o, Streams io);

struct SynthSourcesOptions {
  std::string out_dir;
  int count = 4;
  std::uint64_t seed = 1;
  double duration_s = 2.0;
  int sample_rate = 16000;
};
int cmd_synth_sources(const SynthSourcesOptions& o, Streams io);

struct SimulateOptions {
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 1;
};
int cmd_simulate(const SimulateOptions& o, Streams io);

struct ListenerFlags {
  bool simulate = false;
  std::string preset;
  double mu_db = 10.0;
  double sigma_db = 1.0;
  double guess_rate = 0.5;
  double lapse_rate = 0.02;
};

struct RunStaircaseOptions {
  ListenerFlags listener;
  std::string manifest;
  std::string play_cmd;
  std::string out;
  std::uint64_t seed = 1;
};
int cmd_run_staircase(const RunStaircaseOptions& o, Streams io);

struct RunScreeningOptions {
  ListenerFlags listener;
  std::string manifest;
  std::string play_cmd;
  std::string out;
  std::uint64_t seed = 1;
  int level = 10;
  int k = 3;
};
int cmd_run_screening(const RunScreeningOptions& o, Streams io);

struct AnalyzeOptions {
  std::string ratings;
  std::string lab_mos;
  std::string out_dir;
  std::string levels;  // empty: every level in the data
  std::string criteria = "1,2,3";
  std::string tail = "two";
  std::uint64_t seed = 0;  // accepted for uniformity; analysis is deterministic
};
int cmd_analyze(const AnalyzeOptions& o, Streams io);

struct ServeOptions {
  std::string manifest;
  std::string data_dir = "service-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string port_file;
  bool gate_on_fail = false;
  long long session_ttl_s = 24 * 3600;
  int snapshot_every = 8;
  std::uint64_t seed = 0;  // sessions draw their own order seeds unless the client pins one
};
int cmd_serve(const ServeOptions& o, Streams io);

}  // namespace jndq::cli
