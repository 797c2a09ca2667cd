// core/include/mocovox/synthdata.h

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

#ifndef MOCOVOX_SYNTHDATA_H_
#define MOCOVOX_SYNTHDATA_H_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mocovox/audio.h"
#include "mocovox/rng.h"

namespace mocovox {

// A synthetic voice: harmonic source at f0 shaped by three resonances.
// Ranges give controllable intra/inter-speaker variance with a known oracle.
struct SpeakerSpec {
  std::string speaker_id;
  double f0_hz = 0.0;                       // fundamental, in [90, 280]
  std::array<double, 3> resonance_hz{};     // strictly increasing centers
  std::array<double, 3> resonance_bw_hz{};  // bandwidths
  double harmonic_decay = 0.0;              // per-harmonic amplitude decay rate

  void Validate(int sample_rate) const;
};

struct UtteranceRecord {
  std::string speaker_id;
  std::string utterance_id;
  std::string path;        // relative to the corpus directory
  double duration_s = 0.0;
  std::string split;       // "dev" or "test"
};

struct Manifest {
  std::vector<UtteranceRecord> records;

  std::vector<UtteranceRecord> Split(const std::string& split) const;
  const UtteranceRecord& Find(const std::string& utterance_id) const;

  static Manifest Read(const std::filesystem::path& path);
  void Write(const std::filesystem::path& path) const;
};

// Verification trial: label 1 = same speaker, 0 = different.
struct TrialPair {
  int label = 0;
  std::string utt_a;
  std::string utt_b;
};

using TrialList = std::vector<TrialPair>;

TrialList ReadTrials(const std::filesystem::path& path);
void WriteTrials(const std::filesystem::path& path, const TrialList& trials);

// Draws all speaker fields uniformly from their invariant ranges.
SpeakerSpec GenSpeaker(Rng& rng, std::string speaker_id = {});

// Harmonic additive synthesis: f0 jittered per utterance by up to 3 percent,
// per-harmonic amplitudes shaped by the speaker's resonances, slow random
// amplitude envelope, peak-normalized to 0.9. Needs duration >= 3.6 s so two
// disjoint 1.8 s segments always exist.
Waveform SynthUtterance(const SpeakerSpec& spec, double duration_s, Rng& rng,
                        int sample_rate = 16000);

struct CorpusConfig {
  int n_speakers = 32;
  int utts_per_speaker = 20;
  double utterance_duration_s = 4.0;
  double dev_fraction = 0.8;  // split by speaker, never by utterance
  int sample_rate = 16000;
  uint64_t seed = 0;
};

// Writes WAV files under out_dir/wav/ plus manifest.tsv; returns the
// manifest. Pure function of (config, seed): regeneration is byte-identical.
Manifest BuildCorpus(const CorpusConfig& cfg, const std::filesystem::path& out_dir);

// Balanced verification trials over the manifest's test split: n_pairs
// trials, half same / half different (+-1), never pairing an utterance with
// itself.
TrialList BuildTrials(const Manifest& manifest, int n_pairs, uint64_t seed);

}  // namespace mocovox

#endif  // MOCOVOX_SYNTHDATA_H_
