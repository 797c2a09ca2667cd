// core/src/synthdata.cc

// Copyright 2026 The MoCoVox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mocovox/synthdata.h"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "mocovox/common.h"

namespace mocovox {

namespace {

constexpr double kF0Lo = 90.0, kF0Hi = 280.0;
constexpr double kPeakLevel = 0.9;
// Highest synthesized harmonic frequency; keeps everything under Nyquist
// at 16 kHz and inside the default mel range.
constexpr double kMaxHarmonicHz = 7800.0;

// Per-utterance intra-speaker variation. Together with the +-3% f0 jitter
// these control how much two utterances of one speaker differ; the corpus
// separability oracle (>= 90% of triples same-speaker-closer in mean
// log-mel) bounds how far they can be pushed.
constexpr double kUttF0Jitter = 0.03;          // fractional, spec'd at 3%
constexpr double kUttResonanceJitter = 0.08;   // fractional center shift
constexpr double kUttBandwidthJitter = 0.30;   // fractional bandwidth shift
constexpr double kUttTiltMax = 0.8;            // spectral tilt exponent
constexpr double kUttDecayJitter = 0.25;       // fractional decay-rate shift

std::string IndexedId(const char* prefix, int width, int index) {
  std::string digits = std::to_string(index);
  std::string out(prefix);
  out.append(width > static_cast<int>(digits.size()) ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

}  // namespace

void SpeakerSpec::Validate(int sample_rate) const {
  if (!(f0_hz >= kF0Lo && f0_hz <= kF0Hi))
    MOCOVOX_ERR(kData) << "speaker f0 " << f0_hz << " outside [" << kF0Lo << ", " << kF0Hi << "]";
  const double nyquist = sample_rate / 2.0;
  for (int i = 0; i < 3; ++i) {
    if (resonance_hz[i] >= nyquist)
      MOCOVOX_ERR(kData) << "resonance " << i << " at " << resonance_hz[i] << " Hz >= Nyquist";
    if (i > 0 && resonance_hz[i] <= resonance_hz[i - 1])
      MOCOVOX_ERR(kData) << "resonance centers must be strictly increasing";
    if (resonance_bw_hz[i] <= 0.0)
      MOCOVOX_ERR(kData) << "resonance bandwidth must be positive";
  }
}

SpeakerSpec GenSpeaker(Rng& rng, std::string speaker_id) {
  SpeakerSpec spec;
  spec.speaker_id = std::move(speaker_id);
  spec.f0_hz = rng.Uniform(kF0Lo, kF0Hi);
  spec.resonance_hz[0] = rng.Uniform(350.0, 900.0);
  spec.resonance_hz[1] = rng.Uniform(1000.0, 2200.0);
  spec.resonance_hz[2] = rng.Uniform(2400.0, 4200.0);
  for (int i = 0; i < 3; ++i) spec.resonance_bw_hz[i] = rng.Uniform(80.0, 300.0);
  spec.harmonic_decay = rng.Uniform(0.015, 0.10);
  return spec;
}

Waveform SynthUtterance(const SpeakerSpec& spec, double duration_s, Rng& rng,
                        int sample_rate) {
  if (duration_s < 3.6)
    MOCOVOX_ERR(kConfig) << "utterance duration " << duration_s
                         << " s below the 3.6 s minimum (two disjoint 1.8 s segments)";
  spec.Validate(sample_rate);
  const int64_t n = std::llround(duration_s * sample_rate);

  const double f0 = spec.f0_hz * (1.0 + rng.Uniform(-kUttF0Jitter, kUttF0Jitter));
  const int n_harmonics = static_cast<int>(kMaxHarmonicHz / f0);

  // Utterance-level rendering of the speaker: jittered resonances and source
  // decay plus a random spectral tilt, constant within the utterance.
  std::array<double, 3> res_hz, res_bw;
  for (int r = 0; r < 3; ++r) {
    res_hz[r] = spec.resonance_hz[r] *
                (1.0 + rng.Uniform(-kUttResonanceJitter, kUttResonanceJitter));
    res_bw[r] = spec.resonance_bw_hz[r] *
                (1.0 + rng.Uniform(-kUttBandwidthJitter, kUttBandwidthJitter));
  }
  const double decay =
      spec.harmonic_decay * (1.0 + rng.Uniform(-kUttDecayJitter, kUttDecayJitter));
  const double tilt = rng.Uniform(-kUttTiltMax, kUttTiltMax);

  // Per-harmonic amplitude: source decay times the resonance envelope, with
  // a small direct term so inter-resonance harmonics stay audible.
  std::vector<std::complex<double>> state(n_harmonics), step(n_harmonics);
  for (int h = 0; h < n_harmonics; ++h) {
    const double freq = f0 * (h + 1);
    double shape = 0.05;
    for (int r = 0; r < 3; ++r) {
      const double d = (freq - res_hz[r]) / res_bw[r];
      shape += 1.0 / (1.0 + d * d);
    }
    const double amp =
        std::exp(-decay * h) * shape * std::pow(freq / 1000.0, tilt);
    const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    state[h] = std::polar(amp, phase);
    step[h] = std::polar(1.0, 2.0 * std::numbers::pi * freq / sample_rate);
  }

  // Slow amplitude envelope: three random sub-2 Hz components, depth capped
  // so the envelope stays positive.
  std::array<double, 3> env_freq, env_amp, env_phase;
  for (int j = 0; j < 3; ++j) {
    env_freq[j] = rng.Uniform(0.3, 1.6);
    env_amp[j] = 0.25 * rng.Uniform(0.3, 1.0);
    env_phase[j] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  }

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int h = 0; h < n_harmonics; ++h) {
      acc += state[h].imag();
      state[h] *= step[h];
    }
    const double t = static_cast<double>(i) / sample_rate;
    double env = 1.0;
    for (int j = 0; j < 3; ++j)
      env += env_amp[j] * std::sin(2.0 * std::numbers::pi * env_freq[j] * t + env_phase[j]);
    w.samples[i] = acc * env;
  }

  const double peak = PeakAbs(w);
  if (peak <= 0.0) MOCOVOX_ERR(kNumeric) << "synthesized utterance is silent";
  const double gain = kPeakLevel / peak;
  for (double& s : w.samples) s *= gain;
  return w;
}

std::vector<UtteranceRecord> Manifest::Split(const std::string& split) const {
  std::vector<UtteranceRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

const UtteranceRecord& Manifest::Find(const std::string& utterance_id) const {
  for (const auto& r : records)
    if (r.utterance_id == utterance_id) return r;
  MOCOVOX_ERR(kData) << "utterance_id '" << utterance_id << "' not in manifest";
}

Manifest Manifest::Read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open manifest " << path;
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = SplitString(line, '\t');
    if (fields.size() != 5)
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": expected 5 tab-separated fields, got "
                           << fields.size();
    UtteranceRecord r;
    r.speaker_id = fields[0];
    r.utterance_id = fields[1];
    r.path = fields[2];
    r.duration_s = ParseDouble(fields[3], "manifest duration");
    r.split = fields[4];
    if (r.split != "dev" && r.split != "test")
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": split must be dev|test, got '"
                           << r.split << "'";
    m.records.push_back(std::move(r));
  }
  return m;
}

void Manifest::Write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  for (const auto& r : records) {
    out << r.speaker_id << '\t' << r.utterance_id << '\t' << r.path << '\t'
        << FormatDouble(r.duration_s) << '\t' << r.split << '\n';
  }
  if (!out) MOCOVOX_ERR(kIo) << "short write to " << path;
}

TrialList ReadTrials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open trial list " << path;
  TrialList trials;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = SplitString(line, '\t');
    if (fields.size() != 3)
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": expected 3 tab-separated fields";
    TrialPair t;
    const int64_t label = ParseInt(fields[0], "trial label");
    if (label != 0 && label != 1)
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": label must be 0 or 1";
    t.label = static_cast<int>(label);
    t.utt_a = fields[1];
    t.utt_b = fields[2];
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteTrials(const std::filesystem::path& path, const TrialList& trials) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  for (const auto& t : trials) out << t.label << '\t' << t.utt_a << '\t' << t.utt_b << '\n';
  if (!out) MOCOVOX_ERR(kIo) << "short write to " << path;
}

Manifest BuildCorpus(const CorpusConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.n_speakers < 2)
    MOCOVOX_ERR(kConfig) << "need at least 2 speakers, got " << cfg.n_speakers;
  if (cfg.utts_per_speaker < 2)
    MOCOVOX_ERR(kConfig) << "need at least 2 utterances per speaker, got "
                         << cfg.utts_per_speaker;
  if (cfg.utterance_duration_s < 3.6)
    MOCOVOX_ERR(kConfig) << "utterance duration must be >= 3.6 s";
  if (!(cfg.dev_fraction > 0.0 && cfg.dev_fraction < 1.0))
    MOCOVOX_ERR(kConfig) << "dev_fraction must be in (0, 1)";

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) MOCOVOX_ERR(kIo) << "cannot create " << (out_dir / "wav") << ": " << ec.message();

  const int n_test = std::max<int>(
      1, static_cast<int>(std::llround(cfg.n_speakers * (1.0 - cfg.dev_fraction))));
  const int n_dev = cfg.n_speakers - n_test;
  if (n_dev < 1) MOCOVOX_ERR(kConfig) << "split leaves no dev speakers";

  std::vector<SpeakerSpec> speakers(cfg.n_speakers);
  for (int s = 0; s < cfg.n_speakers; ++s) {
    Rng rng(DeriveSeed(cfg.seed, "speaker", static_cast<uint64_t>(s)));
    speakers[s] = GenSpeaker(rng, IndexedId("spk", 4, s));
  }

  Manifest manifest;
  manifest.records.resize(static_cast<size_t>(cfg.n_speakers) * cfg.utts_per_speaker);
  const int64_t total = static_cast<int64_t>(manifest.records.size());
  ParallelFor(total, [&](int64_t idx) {
    const int s = static_cast<int>(idx / cfg.utts_per_speaker);
    const int u = static_cast<int>(idx % cfg.utts_per_speaker);
    const SpeakerSpec& spec = speakers[s];
    UtteranceRecord rec;
    rec.speaker_id = spec.speaker_id;
    rec.utterance_id = spec.speaker_id + "_" + IndexedId("u", 3, u);
    rec.path = "wav/" + rec.utterance_id + ".wav";
    rec.duration_s = cfg.utterance_duration_s;
    rec.split = s < n_dev ? "dev" : "test";
    Rng rng(HashStr(HashStr(DeriveSeed(cfg.seed, "utterance"), spec.speaker_id),
                    rec.utterance_id));
    Waveform w = SynthUtterance(spec, cfg.utterance_duration_s, rng, cfg.sample_rate);
    WriteWav(out_dir / rec.path, w);
    manifest.records[idx] = std::move(rec);
  });

  manifest.Write(out_dir / "manifest.tsv");
  return manifest;
}

TrialList BuildTrials(const Manifest& manifest, int n_pairs, uint64_t seed) {
  if (n_pairs < 1) MOCOVOX_ERR(kConfig) << "n_pairs must be positive, got " << n_pairs;
  const auto test = manifest.Split("test");

  // Group test utterances by speaker.
  std::vector<std::string> speaker_ids;
  std::vector<std::vector<std::string>> utts;
  for (const auto& r : test) {
    size_t i = 0;
    for (; i < speaker_ids.size(); ++i)
      if (speaker_ids[i] == r.speaker_id) break;
    if (i == speaker_ids.size()) {
      speaker_ids.push_back(r.speaker_id);
      utts.emplace_back();
    }
    utts[i].push_back(r.utterance_id);
  }
  if (speaker_ids.size() < 2)
    MOCOVOX_ERR(kConfig) << "trial generation needs >= 2 test speakers, got "
                         << speaker_ids.size();
  for (size_t i = 0; i < speaker_ids.size(); ++i)
    if (utts[i].size() < 2)
      MOCOVOX_ERR(kConfig) << "test speaker " << speaker_ids[i]
                           << " has fewer than 2 utterances";

  Rng rng(DeriveSeed(seed, "trials"));
  const int n_same = n_pairs - n_pairs / 2;
  TrialList trials;
  trials.reserve(n_pairs);
  for (int i = 0; i < n_same; ++i) {
    const int64_t s = rng.UniformInt(static_cast<int64_t>(speaker_ids.size()));
    const auto& pool = utts[s];
    const int64_t a = rng.UniformInt(static_cast<int64_t>(pool.size()));
    int64_t b = rng.UniformInt(static_cast<int64_t>(pool.size() - 1));
    if (b >= a) ++b;
    trials.push_back({1, pool[a], pool[b]});
  }
  for (int i = 0; i < n_pairs / 2; ++i) {
    const int64_t s1 = rng.UniformInt(static_cast<int64_t>(speaker_ids.size()));
    int64_t s2 = rng.UniformInt(static_cast<int64_t>(speaker_ids.size() - 1));
    if (s2 >= s1) ++s2;
    const auto& pa = utts[s1];
    const auto& pb = utts[s2];
    trials.push_back({0, pa[rng.UniformInt(static_cast<int64_t>(pa.size()))],
                      pb[rng.UniformInt(static_cast<int64_t>(pb.size()))]});
  }
  return trials;
}

}  // namespace mocovox
