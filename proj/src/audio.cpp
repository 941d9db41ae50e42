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

#include "jndq/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "jndq/error.hpp"
#include "jndq/hash.hpp"
#include "jndq/seeding.hpp"

namespace jndq::audio {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile, std::string("wav: truncated ") + what);
    }
  }

  template <typename T>
  T read(const char* what) {
    require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string tag() {
    require(4, "chunk id");
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    require(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) { pos_ += std::min(n, remaining()); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::int16_t to_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.tag() != "RIFF") throw Error(ErrorCode::kUnsupportedFormat, "wav: missing RIFF header");
  r.read<std::uint32_t>("riff size");
  if (r.tag() != "WAVE") throw Error(ErrorCode::kUnsupportedFormat, "wav: not a WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;

  while (r.remaining() > 0) {
    const std::string id = r.tag();
    const auto size = r.read<std::uint32_t>("chunk size");
    if (id == "fmt ") {
      auto fmt = ByteReader(r.take(size, "fmt chunk"));
      format = fmt.read<std::uint16_t>("fmt chunk");
      channels = fmt.read<std::uint16_t>("fmt chunk");
      rate = fmt.read<std::uint32_t>("fmt chunk");
      fmt.read<std::uint32_t>("fmt chunk");  // byte rate
      fmt.read<std::uint16_t>("fmt chunk");  // block align
      bits = fmt.read<std::uint16_t>("fmt chunk");
      if (format == kFormatExtensible) {
        fmt.read<std::uint16_t>("fmt extension");  // cbSize
        fmt.read<std::uint16_t>("fmt extension");  // valid bits
        fmt.read<std::uint32_t>("fmt extension");  // channel mask
        format = fmt.read<std::uint16_t>("fmt extension");  // first two bytes of the subformat GUID
      }
      if (size % 2 == 1) r.skip(1);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorCode::kUnsupportedFormat, "wav: data chunk before fmt chunk");
      if (channels != 1) {
        throw Error(ErrorCode::kUnsupportedChannels,
                    "wav: channels unsupported (" + std::to_string(channels) + "), mono only");
      }
      if (rate == 0) throw Error(ErrorCode::kUnsupportedFormat, "wav: zero sample rate");
      const auto payload = r.take(size, "data chunk");
      AudioBuffer buf;
      buf.sample_rate = static_cast<int>(rate);
      if (format == kFormatPcm && bits == 16) {
        if (size % 2 != 0) throw Error(ErrorCode::kTruncatedFile, "wav: truncated 16-bit sample");
        buf.samples.resize(size / 2);
        for (std::size_t i = 0; i < buf.samples.size(); ++i) {
          std::int16_t v;
          std::memcpy(&v, payload.data() + 2 * i, 2);
          buf.samples[i] = v / 32768.0;
        }
      } else if (format == kFormatFloat && bits == 32) {
        if (size % 4 != 0) throw Error(ErrorCode::kTruncatedFile, "wav: truncated float sample");
        buf.samples.resize(size / 4);
        for (std::size_t i = 0; i < buf.samples.size(); ++i) {
          float v;
          std::memcpy(&v, payload.data() + 4 * i, 4);
          buf.samples[i] = v;
        }
      } else {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "wav: unsupported sample format " + std::to_string(format) + "/" +
                        std::to_string(bits) + " bit");
      }
      return buf;
    } else {
      r.take(size, "chunk body");
      if (size % 2 == 1) r.skip(1);
    }
  }
  throw Error(ErrorCode::kTruncatedFile, "wav: no data chunk");
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

EncodedWav encode_wav_pcm16(const AudioBuffer& buffer) {
  if (buffer.sample_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "wav: sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(buffer.size() * 2);
  EncodedWav enc;
  auto& out = enc.bytes;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put<std::uint32_t>(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, kFormatPcm);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
  put<std::uint16_t>(out, 2);
  put<std::uint16_t>(out, 16);
  put_tag(out, "data");
  put<std::uint32_t>(out, data_bytes);
  for (double x : buffer.samples) {
    if (x > 1.0 || x < -1.0) ++enc.clamped;
    put<std::int16_t>(out, to_pcm16(x));
  }
  return enc;
}

std::size_t save_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  const auto enc = encode_wav_pcm16(buffer);
  write_all(path, enc.bytes);
  return enc.clamped;
}

AudioBuffer quantize_pcm16(const AudioBuffer& buffer) {
  AudioBuffer out{std::vector<double>(buffer.size()), buffer.sample_rate};
  std::transform(buffer.samples.begin(), buffer.samples.end(), out.samples.begin(),
                 [](double x) { return to_pcm16(x) / 32768.0; });
  return out;
}

double signal_power(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "signal_power: empty buffer");
  double acc = 0.0;
  for (double x : samples) acc += x * x;
  return acc / static_cast<double>(samples.size());
}

AudioBuffer generate_white_noise(std::size_t n_samples, std::uint64_t seed, int sample_rate) {
  if (n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "generate_white_noise: n_samples must be > 0");
  // Box-Muller over mt19937_64 keeps the sequence identical across standard libraries.
  std::mt19937_64 engine(seed);
  AudioBuffer out{std::vector<double>(n_samples), sample_rate};
  for (std::size_t i = 0; i < n_samples; i += 2) {
    const double u1 = 1.0 - unit_interval(engine());  // (0, 1]
    const double u2 = unit_interval(engine());
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out.samples[i] = radius * std::cos(angle);
    if (i + 1 < n_samples) out.samples[i + 1] = radius * std::sin(angle);
  }
  return out;
}

double noise_gain(double speech_power, double snr_db) {
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::kInvalidArgument, "noise_gain: snr must be finite");
  return std::sqrt(speech_power / std::pow(10.0, snr_db / 10.0));
}

MixResult mix_at_snr(const AudioBuffer& speech, double snr_db, std::uint64_t seed) {
  if (speech.empty()) throw Error(ErrorCode::kInvalidArgument, "mix_at_snr: empty speech buffer");
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::kInvalidArgument, "mix_at_snr: snr must be finite");
  const double p_speech = signal_power(speech);
  if (p_speech <= 0.0) throw Error(ErrorCode::kSilentInput, "mix_at_snr: speech is silent");

  auto noise = generate_white_noise(speech.size(), seed, speech.sample_rate);
  const double unit = 1.0 / std::sqrt(signal_power(noise));

  MixResult result;
  result.gain = noise_gain(p_speech, snr_db);
  result.audio.sample_rate = speech.sample_rate;
  result.audio.samples.resize(speech.size());
  const double scale = result.gain * unit;
  for (std::size_t i = 0; i < speech.size(); ++i) {
    double y = speech.samples[i] + scale * noise.samples[i];
    if (y > 1.0 || y < -1.0) {
      ++result.clipped;
      y = std::clamp(y, -1.0, 1.0);
    }
    result.audio.samples[i] = y;
  }
  if (static_cast<double>(result.clipped) > kMaxClippedFraction * static_cast<double>(speech.size())) {
    throw Error(ErrorCode::kExcessiveClipping,
                "mix_at_snr: " + std::to_string(result.clipped) + " of " + std::to_string(speech.size()) +
                    " samples clipped");
  }
  return result;
}

double measure_snr(const AudioBuffer& clean, const AudioBuffer& degraded) {
  if (clean.size() != degraded.size()) throw Error(ErrorCode::kLengthMismatch, "measure_snr: length mismatch");
  if (clean.sample_rate != degraded.sample_rate) {
    throw Error(ErrorCode::kLengthMismatch, "measure_snr: sample rate mismatch");
  }
  if (clean.empty()) throw Error(ErrorCode::kInvalidArgument, "measure_snr: empty buffers");
  double p_clean = 0.0, p_noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = degraded.samples[i] - clean.samples[i];
    p_clean += clean.samples[i] * clean.samples[i];
    p_noise += d * d;
  }
  if (p_noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(p_clean / p_noise);
}

std::uint64_t stimulus_seed(std::uint64_t master_seed, const std::string& source_id, int snr_db) {
  return combine_seed(combine_seed(master_seed, fnv1a64(source_id)), static_cast<std::uint64_t>(snr_db));
}

std::string stimulus_id(const std::string& source_id, int snr_db) {
  return source_id + "_snr" + std::to_string(snr_db);
}

std::vector<int> default_levels() {
  std::vector<int> levels;
  for (int l = kMinSnrDb; l <= kMaxSnrDb; ++l) levels.push_back(l);
  return levels;
}

StimulusSet build_stimulus_set(std::vector<Source> sources, std::vector<int> levels, std::uint64_t master_seed) {
  if (sources.empty()) throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: no sources");
  if (levels.empty()) throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: no levels");
  std::sort(levels.begin(), levels.end());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
    throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: duplicate level");
  }
  if (levels.front() < kMinSnrDb || levels.back() > kMaxSnrDb) {
    throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: levels must lie in [35, 50] dB");
  }
  std::set<std::string> ids;
  for (const auto& s : sources) {
    if (s.id.empty() || !ids.insert(s.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: source ids must be unique and non-empty");
    }
    if (s.audio.empty() || s.audio.sample_rate <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "build_stimulus_set: source '" + s.id + "' is empty");
    }
  }

  StimulusSet set;
  set.levels = levels;
  set.reference_level = levels.back();
  set.master_seed = master_seed;
  for (const auto& src : sources) {
    for (int level : levels) {
      Stimulus st;
      st.spec = {src.id, level, stimulus_seed(master_seed, src.id, level)};
      st.stimulus_id = stimulus_id(src.id, level);
      try {
        auto mixed = mix_at_snr(src.audio, level, st.spec.noise_seed);
        st.clipped = mixed.clipped;
        st.audio = quantize_pcm16(mixed.audio);
      } catch (const Error& e) {
        throw Error(e.code(), "stimulus " + st.stimulus_id + ": " + e.what());
      }
      st.measured_snr_db = measure_snr(src.audio, st.audio);
      set.stimuli.push_back(std::move(st));
    }
  }
  set.sources = std::move(sources);
  return set;
}

const ManifestEntry* StimulusManifest::find(const std::string& source_id, int snr_db) const {
  for (const auto& e : entries) {
    if (e.source_id == source_id && e.snr_db == snr_db) return &e;
  }
  return nullptr;
}

StimulusManifest write_stimulus_set(const StimulusSet& set, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  StimulusManifest m;
  m.master_seed = set.master_seed;
  m.reference_level = set.reference_level;
  m.sample_rate = set.sources.front().audio.sample_rate;
  m.levels = set.levels;
  m.directory = out_dir;
  for (const auto& s : set.sources) m.sources.push_back(s.id);

  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["master_seed"] = m.master_seed;
  doc["reference_level"] = m.reference_level;
  doc["sample_rate"] = m.sample_rate;
  doc["sources"] = m.sources;
  doc["levels"] = m.levels;
  doc["stimuli"] = nlohmann::json::array();
  for (const auto& st : set.stimuli) {
    const auto enc = encode_wav_pcm16(st.audio);
    ManifestEntry e{st.stimulus_id, st.spec.source_id, st.spec.snr_db, st.spec.noise_seed,
                    st.stimulus_id + ".wav", st.measured_snr_db, sha256_hex(enc.bytes)};
    write_all(out_dir / e.file, enc.bytes);
    doc["stimuli"].push_back({{"stimulus_id", e.stimulus_id},
                              {"source_id", e.source_id},
                              {"snr_db", e.snr_db},
                              {"seed", e.seed},
                              {"file", e.file},
                              {"measured_snr_db", e.measured_snr_db},
                              {"sha256", e.sha256}});
    m.entries.push_back(std::move(e));
  }
  const std::string text = doc.dump(2) + "\n";
  write_all(out_dir / kManifestFileName,
            std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return m;
}

StimulusManifest read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kMissingStimuli, "stimulus manifest not found: " + manifest_path.string());
  StimulusManifest m;
  try {
    const auto doc = nlohmann::json::parse(in);
    m.master_seed = doc.at("master_seed").get<std::uint64_t>();
    m.reference_level = doc.at("reference_level").get<int>();
    m.sample_rate = doc.at("sample_rate").get<int>();
    m.sources = doc.at("sources").get<std::vector<std::string>>();
    m.levels = doc.at("levels").get<std::vector<int>>();
    for (const auto& s : doc.at("stimuli")) {
      m.entries.push_back({s.at("stimulus_id").get<std::string>(), s.at("source_id").get<std::string>(),
                           s.at("snr_db").get<int>(), s.at("seed").get<std::uint64_t>(),
                           s.at("file").get<std::string>(), s.at("measured_snr_db").get<double>(),
                           s.at("sha256").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, "malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  m.directory = manifest_path.parent_path();
  return m;
}

}  // namespace jndq::audio
