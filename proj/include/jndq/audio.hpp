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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace jndq::audio {

/// Mono PCM signal with samples normalized to [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

inline constexpr int kMinSnrDb = 35;
inline constexpr int kMaxSnrDb = 50;
inline constexpr int kReferenceSnrDb = 50;

/// Highest fraction of clipped samples tolerated by mix_at_snr.
inline constexpr double kMaxClippedFraction = 0.001;

// ---------------------------------------------------------------------------
// WAV I/O

/// Reads a mono RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
/// 16-bit samples are scaled by 1/32768.
AudioBuffer load_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

struct EncodedWav {
  std::vector<std::uint8_t> bytes;
  std::size_t clamped = 0;  // samples outside [-1, 1]
};

/// Encodes as 16-bit little-endian mono PCM. Out-of-range samples are clamped
/// and counted.
EncodedWav encode_wav_pcm16(const AudioBuffer& buffer);

/// Writes a 16-bit PCM mono WAV and returns the number of clamped samples.
std::size_t save_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

/// Snaps every sample onto the 16-bit grid used by save_wav.
AudioBuffer quantize_pcm16(const AudioBuffer& buffer);

// ---------------------------------------------------------------------------
// Signal measures and degradation

/// Mean of squared samples over the whole buffer.
double signal_power(std::span<const double> samples);
inline double signal_power(const AudioBuffer& buffer) { return signal_power(buffer.samples); }

/// Zero-mean Gaussian white noise, unit variance, fully determined by seed.
AudioBuffer generate_white_noise(std::size_t n_samples, std::uint64_t seed, int sample_rate = 16000);

/// Amplitude applied to unit-power noise so that speech/noise power equals snr_db.
double noise_gain(double speech_power, double snr_db);

struct MixResult {
  AudioBuffer audio;
  double gain = 0.0;
  std::size_t clipped = 0;
};

/// speech + gain * noise, where noise is generate_white_noise(seed) rescaled
/// to exactly unit mean-square. Fails on silent speech or when more than
/// kMaxClippedFraction of the output had to be clamped.
MixResult mix_at_snr(const AudioBuffer& speech, double snr_db, std::uint64_t seed);

/// 10*log10(P_clean / P_(degraded - clean)); +infinity when the two are equal.
double measure_snr(const AudioBuffer& clean, const AudioBuffer& degraded);

// ---------------------------------------------------------------------------
// Stimulus sets

struct StimulusSpec {
  std::string source_id;
  int snr_db = 0;
  std::uint64_t noise_seed = 0;

  friend bool operator==(const StimulusSpec&, const StimulusSpec&) = default;
};

struct Source {
  std::string id;
  AudioBuffer audio;
};

struct Stimulus {
  StimulusSpec spec;
  std::string stimulus_id;
  AudioBuffer audio;  // already on the 16-bit grid
  double measured_snr_db = 0.0;
  std::size_t clipped = 0;
};

struct StimulusSet {
  std::vector<Source> sources;
  std::vector<int> levels;
  int reference_level = kReferenceSnrDb;
  std::uint64_t master_seed = 0;
  std::vector<Stimulus> stimuli;  // source-major, levels ascending
};

/// Per-stimulus noise seed; any single stimulus can be re-rendered from it.
std::uint64_t stimulus_seed(std::uint64_t master_seed, const std::string& source_id, int snr_db);

std::string stimulus_id(const std::string& source_id, int snr_db);

/// Default 35..50 dB in 1 dB steps.
std::vector<int> default_levels();

StimulusSet build_stimulus_set(std::vector<Source> sources, std::vector<int> levels,
                               std::uint64_t master_seed);

struct ManifestEntry {
  std::string stimulus_id;
  std::string source_id;
  int snr_db = 0;
  std::uint64_t seed = 0;
  std::string file;  // relative to the manifest directory
  double measured_snr_db = 0.0;
  std::string sha256;
};

struct StimulusManifest {
  std::uint64_t master_seed = 0;
  int reference_level = kReferenceSnrDb;
  int sample_rate = 0;
  std::vector<std::string> sources;
  std::vector<int> levels;
  std::vector<ManifestEntry> entries;
  std::filesystem::path directory;  // where the files live; not serialized

  const ManifestEntry* find(const std::string& source_id, int snr_db) const;
};

inline constexpr const char* kManifestFileName = "manifest.json";

/// Writes every stimulus as WAV plus manifest.json into out_dir.
StimulusManifest write_stimulus_set(const StimulusSet& set, const std::filesystem::path& out_dir);

StimulusManifest read_manifest(const std::filesystem::path& manifest_path);

}  // namespace jndq::audio
