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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "jndq/audio.hpp"
#include "jndq/error.hpp"
#include "jndq/hash.hpp"
#include "test_support.hpp"

namespace jndq::audio {
namespace {

using test::TempDir;

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void tag(std::vector<std::uint8_t>& b, const char* t) { b.insert(b.end(), t, t + 4); }

// Minimal RIFF/WAVE writer for hand-made fixtures.
std::vector<std::uint8_t> wav(std::uint16_t format, std::uint16_t channels, std::uint16_t bits,
                              const std::vector<std::uint8_t>& payload, std::uint32_t declared_size = 0) {
  std::vector<std::uint8_t> b;
  tag(b, "RIFF");
  put32(b, 36 + static_cast<std::uint32_t>(payload.size()));
  tag(b, "WAVE");
  tag(b, "fmt ");
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, 16000);
  put32(b, 16000u * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  tag(b, "data");
  put32(b, declared_size ? declared_size : static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_wav(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode_wav accepted the input";
  return ErrorCode::kInvalidArgument;
}

TEST(Wav, MaxPositiveSampleScalesBy32768) {
  std::vector<std::uint8_t> payload;
  put16(payload, 32767);
  put16(payload, 0x8000);
  const auto buf = decode_wav(wav(1, 1, 16, payload));
  ASSERT_EQ(buf.samples.size(), 2u);
  EXPECT_EQ(buf.samples[0], 32767.0 / 32768.0);
  EXPECT_EQ(buf.samples[1], -1.0);
  EXPECT_EQ(buf.sample_rate, 16000);
}

TEST(Wav, ReadsFloat32) {
  std::vector<std::uint8_t> payload(8);
  const float v[2] = {0.25f, -0.5f};
  std::memcpy(payload.data(), v, 8);
  const auto buf = decode_wav(wav(3, 1, 32, payload));
  EXPECT_EQ(buf.samples, (std::vector<double>{0.25, -0.5}));
}

TEST(Wav, DistinctDiagnostics) {
  std::vector<std::uint8_t> four(4, 0);
  EXPECT_EQ(decode_error(wav(1, 2, 16, four)), ErrorCode::kUnsupportedChannels);
  EXPECT_EQ(decode_error(wav(1, 1, 24, std::vector<std::uint8_t>(6, 0))), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(decode_error(wav(1, 1, 16, four, 400)), ErrorCode::kTruncatedFile);
  auto bytes = wav(1, 1, 16, four);
  bytes.resize(20);
  EXPECT_EQ(decode_error(bytes), ErrorCode::kTruncatedFile);
  bytes = wav(1, 1, 16, four);
  std::memcpy(bytes.data(), "RIFX", 4);
  EXPECT_EQ(decode_error(bytes), ErrorCode::kUnsupportedFormat);
}

TEST(Wav, StereoFileNamesChannelError) {
  TempDir dir;
  const auto bytes = wav(1, 2, 16, std::vector<std::uint8_t>(8, 0));
  std::ofstream(dir / "st.wav", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  try {
    load_wav(dir / "st.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedChannels);
    EXPECT_EQ(to_string(e.code()), "channels_unsupported");
  }
  EXPECT_THROW(load_wav(dir / "missing.wav"), Error);
}

TEST(Wav, SaveSilentAndClamped) {
  TempDir dir;
  AudioBuffer zero{std::vector<double>(100, 0.0), 16000};
  EXPECT_EQ(save_wav(zero, dir / "z.wav"), 0u);
  const auto back = load_wav(dir / "z.wav");
  EXPECT_EQ(back.samples, zero.samples);

  AudioBuffer hot{{0.1, 1.5, -0.2}, 16000};
  EXPECT_EQ(save_wav(hot, dir / "h.wav"), 1u);
  EXPECT_EQ(load_wav(dir / "h.wav").samples[1], 32767.0 / 32768.0);
}

TEST(Wav, RoundTripIsExactOnTheGrid) {
  TempDir dir;
  const auto q = quantize_pcm16(test::tone(220, 0.1));
  save_wav(q, dir / "t.wav");
  EXPECT_EQ(load_wav(dir / "t.wav").samples, q.samples);
  EXPECT_EQ(quantize_pcm16(q).samples, q.samples);
}

TEST(Power, MeanSquare) {
  AudioBuffer c{std::vector<double>(1000, 0.1), 16000};
  EXPECT_NEAR(signal_power(c), 0.01, 1e-15);
  EXPECT_EQ(signal_power(AudioBuffer{std::vector<double>(10, 0.0), 16000}), 0.0);
}

TEST(Noise, UnitPowerAgainstDirectSummation) {
  const auto n = generate_white_noise(1'000'000, 5);
  long double acc = 0;
  for (double v : n.samples) acc += static_cast<long double>(v) * v;
  const double direct = static_cast<double>(acc / n.samples.size());
  EXPECT_NEAR(direct, 1.0, 0.005);
  EXPECT_NEAR(signal_power(n), direct, 1e-9);
}

TEST(Noise, DeterministicPerSeed) {
  EXPECT_EQ(generate_white_noise(1000, 3).samples, generate_white_noise(1000, 3).samples);
  EXPECT_NE(generate_white_noise(1000, 3).samples, generate_white_noise(1000, 4).samples);
}

TEST(Noise, NoSerialCorrelation) {
  const auto n = generate_white_noise(1'000'000, 77).samples;
  long double mean = 0;
  for (double v : n) mean += v;
  mean /= n.size();
  long double var = 0;
  for (double v : n) var += (v - mean) * (v - mean);
  for (std::size_t lag = 1; lag <= 5; ++lag) {
    long double c = 0;
    for (std::size_t i = lag; i < n.size(); ++i) c += (n[i] - mean) * (n[i - lag] - mean);
    EXPECT_LT(std::fabs(static_cast<double>(c / var)), 0.01) << "lag " << lag;
  }
}

TEST(Mix, GainFormula) {
  EXPECT_NEAR(noise_gain(0.01, 40.0), 0.001, 1e-15);
  EXPECT_NEAR(noise_gain(0.01, 0.0), 0.1, 1e-15);
}

TEST(Mix, RealizedSnrMatchesTarget) {
  const auto speech = test::tone(150, 0.5);
  for (double snr : {0.0, 20.0, 35.0, 42.0, 50.0}) {
    const auto m = mix_at_snr(speech, snr, 9);
    EXPECT_NEAR(measure_snr(speech, m.audio), snr, 1e-9);
    EXPECT_NEAR(m.gain, noise_gain(signal_power(speech), snr), 1e-15);
  }
  // At 0 dB the added noise carries the speech power.
  const auto m = mix_at_snr(speech, 0.0, 9);
  std::vector<double> diff(speech.samples.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m.audio.samples[i] - speech.samples[i];
  EXPECT_NEAR(signal_power(diff), signal_power(speech), 1e-12);
}

TEST(Mix, RejectsSilenceAndHeavyClipping) {
  AudioBuffer silent{std::vector<double>(1000, 0.0), 16000};
  try {
    mix_at_snr(silent, 40, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSilentInput);
  }
  AudioBuffer square(std::vector<double>(4000), 16000);
  for (std::size_t i = 0; i < square.samples.size(); ++i) square.samples[i] = (i / 20) % 2 ? 1.0 : -1.0;
  try {
    mix_at_snr(square, 35, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExcessiveClipping);
  }
}

TEST(MeasureSnr, Sentinels) {
  const auto s = test::tone(100, 0.05);
  EXPECT_EQ(measure_snr(s, s), std::numeric_limits<double>::infinity());
  AudioBuffer shorter{std::vector<double>(10, 0.1), 16000};
  try {
    measure_snr(s, shorter);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(StimulusSet, FourSourcesSixteenLevels) {
  const auto set = build_stimulus_set(test::tone_sources(4), default_levels(), 3);
  ASSERT_EQ(set.stimuli.size(), 64u);
  EXPECT_EQ(default_levels().front(), 35);
  EXPECT_EQ(default_levels().back(), 50);
  for (const auto& st : set.stimuli) {
    EXPECT_NEAR(st.measured_snr_db, st.spec.snr_db, 0.05) << st.stimulus_id;
    EXPECT_EQ(st.stimulus_id, stimulus_id(st.spec.source_id, st.spec.snr_db));
    EXPECT_EQ(st.spec.noise_seed, stimulus_seed(3, st.spec.source_id, st.spec.snr_db));
  }
}

TEST(StimulusSet, SingleReferenceStimulus) {
  const auto set = build_stimulus_set(test::tone_sources(1), {50}, 3);
  ASSERT_EQ(set.stimuli.size(), 1u);
  EXPECT_EQ(set.stimuli[0].spec.snr_db, set.reference_level);
}

TEST(StimulusSet, RejectsBadInputs) {
  EXPECT_THROW(build_stimulus_set(test::tone_sources(1), {34}, 1), Error);
  EXPECT_THROW(build_stimulus_set(test::tone_sources(1), {51}, 1), Error);
  EXPECT_THROW(build_stimulus_set({}, {40}, 1), Error);
  auto dup = test::tone_sources(2);
  dup[1].id = dup[0].id;
  EXPECT_THROW(build_stimulus_set(dup, {40}, 1), Error);
}

TEST(StimulusSet, RebuildIsByteIdentical) {
  TempDir a, b, c;
  const auto ma = write_stimulus_set(build_stimulus_set(test::tone_sources(2), {35, 40, 50}, 8), a.path());
  const auto mb = write_stimulus_set(build_stimulus_set(test::tone_sources(2), {35, 40, 50}, 8), b.path());
  const auto mc = write_stimulus_set(build_stimulus_set(test::tone_sources(2), {35, 40, 50}, 9), c.path());
  ASSERT_EQ(ma.entries.size(), 6u);
  for (std::size_t i = 0; i < ma.entries.size(); ++i) {
    EXPECT_EQ(ma.entries[i].sha256, mb.entries[i].sha256);
    EXPECT_EQ(sha256_file(a.path() / ma.entries[i].file), ma.entries[i].sha256);
  }
  EXPECT_EQ(test::read_file(a / "manifest.json"), test::read_file(b / "manifest.json"));
  EXPECT_NE(ma.entries[0].sha256, mc.entries[0].sha256);
}

TEST(Manifest, RoundTripAndLookup) {
  TempDir dir;
  const auto written = write_stimulus_set(build_stimulus_set(test::tone_sources(2), {35, 50}, 4), dir.path());
  const auto m = read_manifest(dir / "manifest.json");
  EXPECT_EQ(m.master_seed, 4u);
  EXPECT_EQ(m.sources, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(m.levels, (std::vector<int>{35, 50}));
  ASSERT_NE(m.find("s2", 35), nullptr);
  EXPECT_EQ(m.find("s2", 35)->sha256, written.find("s2", 35)->sha256);
  EXPECT_EQ(m.find("s2", 36), nullptr);
  // File names carry no level once served: that is the service's job, but the
  // manifest itself must resolve relative to its own directory.
  EXPECT_TRUE(std::filesystem::exists(m.directory / m.find("s1", 50)->file));
}

TEST(Manifest, MissingOrMalformed) {
  TempDir dir;
  try {
    read_manifest(dir / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingStimuli);
  }
  std::ofstream(dir / "manifest.json") << "{\"format_version\": 1}";
  try {
    read_manifest(dir / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
}

}  // namespace
}  // namespace jndq::audio
