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
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "commands.hpp"
#include "jndq/audio.hpp"
#include "jndq/error.hpp"
#include "jndq/seeding.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;

int cmd_gen_stimuli(const GenStimuliOptions& o, Streams io) {
  const fs::path src_dir = resolve_path(o.sources_dir);
  const fs::path out_dir = resolve_path(o.out_dir);
  if (!fs::is_directory(src_dir)) throw Error(ErrorCode::kInvalidArgument, "not a directory: " + src_dir.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(src_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kInvalidArgument, "no .wav sources in " + src_dir.string());

  std::vector<audio::Source> sources;
  for (const auto& f : files) sources.push_back({f.stem().string(), audio::load_wav(f)});
  const auto levels = parse_int_list(o.levels);

  const auto set = audio::build_stimulus_set(std::move(sources), levels, o.seed);
  const auto manifest = audio::write_stimulus_set(set, out_dir);

  double worst = 0.0;
  for (const auto& e : manifest.entries) worst = std::max(worst, std::abs(e.measured_snr_db - e.snr_db));
  io.out << fmt::format("wrote {} stimuli ({} sources x {} levels) to {}; max |measured - label| = {:.4f} dB\n",
                        manifest.entries.size(), manifest.sources.size(), manifest.levels.size(), out_dir.string(),
                        worst);

  RunManifest rm;
  rm.command = "gen-stimuli";
  rm.config = {{"levels", manifest.levels}, {"sources_dir", src_dir.string()}};
  rm.seeds = {{"master_seed", o.seed}};
  rm.inputs = files;
  rm.outputs.push_back(out_dir / audio::kManifestFileName);
  for (const auto& e : manifest.entries) rm.outputs.push_back(out_dir / e.file);
  rm.write(out_dir);
  return 0;
}

int cmd_synth_sources(const SynthSourcesOptions& o, Streams io) {
  const fs::path out_dir = resolve_path(o.out_dir);
  fs::create_directories(out_dir);
  RunManifest rm;
  rm.command = "synth-sources";
  rm.config = {{"count", o.count}, {"duration_s", o.duration_s}, {"sample_rate", o.sample_rate}};
  rm.seeds = {{"seed", o.seed}};

  const auto n = static_cast<std::size_t>(o.duration_s * o.sample_rate);
  for (int i = 0; i < o.count; ++i) {
    // Voiced harmonic complex with a drifting f0 and a syllable-rate envelope.
    std::mt19937_64 rng(combine_seed(o.seed, static_cast<std::uint64_t>(i)));
    const bool low_voice = i % 2 == 0;
    const double f0 = (low_voice ? 110.0 : 200.0) * (0.9 + 0.2 * unit_interval(rng()));
    const double syllable_hz = 3.5 + unit_interval(rng());
    const double drift_hz = 0.3 + 0.4 * unit_interval(rng());
    audio::AudioBuffer buf{std::vector<double>(n), o.sample_rate};
    double phase = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double time = static_cast<double>(t) / o.sample_rate;
      const double f = f0 * (1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * drift_hz * time));
      phase += 2.0 * std::numbers::pi * f / o.sample_rate;
      double v = 0.0;
      for (int h = 1; h * f0 < 0.45 * o.sample_rate && h <= 30; ++h) v += std::sin(h * phase) / h;
      const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * syllable_hz * time);
      buf.samples[t] = 0.25 * env * v;
    }
    const auto path = out_dir / fmt::format("src{:02d}_{}.wav", i + 1, low_voice ? "m" : "f");
    audio::save_wav(audio::quantize_pcm16(buf), path);
    rm.outputs.push_back(path);
  }
  rm.write(out_dir);
  io.out << fmt::format("wrote {} synthetic sources to {}\n", o.count, out_dir.string());
  return 0;
}

}  // namespace jndq::cli
