// core/include/mocovox/augment.h

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

#ifndef MOCOVOX_AUGMENT_H_
#define MOCOVOX_AUGMENT_H_

#include <array>
#include <string>

#include "mocovox/audio.h"
#include "mocovox/rng.h"

namespace mocovox {

enum class AugmentMode { kNone, kOneSegment, kBothSegments };
enum class AugmentKind { kNoiseOnly, kNoiseOrRir };
enum class NoiseKind { kWhite, kBabbleProxy, kMusicProxy };
// Which member of the positive pair gets augmented in one-segment mode.
// Default is the key segment, the one the momentum encoder sees.
enum class AugmentTarget { kKey, kQuery };

struct AugmentPolicy {
  AugmentMode mode = AugmentMode::kNone;
  AugmentKind kind = AugmentKind::kNoiseOrRir;
  double noise_prob = 0.75;  // P(noise) vs P(rir) when kind = kNoiseOrRir
  double snr_db_lo = 5.0;
  double snr_db_hi = 20.0;
  double rt60_lo = 0.2;
  double rt60_hi = 0.8;
  AugmentTarget one_segment_target = AugmentTarget::kKey;

  void Validate() const;
};

// The sampled plan for one positive pair. Index 0 is the query segment,
// index 1 the key segment.
struct SegmentAugment {
  bool use_noise = true;
  NoiseKind noise_kind = NoiseKind::kWhite;
  double snr_db = 0.0;
  double rt60_s = 0.0;
};

struct AugmentDecision {
  std::array<bool, 2> apply{false, false};
  std::array<SegmentAugment, 2> segment{};
};

// clean + g * noise with g chosen so the output SNR is snr_db exactly.
// The noise must be at least as long as the clean signal; silent inputs are
// degenerate (no SNR is defined) and raise a data error.
Waveform MixNoise(const Waveform& clean, const Waveform& noise, double snr_db);

// Synthetic MUSAN stand-ins: white = uniform noise, babble = six random
// synthetic speakers summed, music = slowly modulated harmonic chord.
Waveform GenNoise(NoiseKind kind, double duration_s, Rng& rng, int sample_rate = 16000);

// Exponentially decaying white noise, -60 dB at rt60, first sample forced to
// 1 before unit-energy normalization. rt60 must be in [0.05, 2.0] s.
Waveform GenRir(double rt60_s, Rng& rng, int sample_rate = 16000);

// Full convolution truncated to the input length, peak-matched to the input.
Waveform ApplyRir(const Waveform& wave, const Waveform& rir);

AugmentDecision SampleDecision(const AugmentPolicy& policy, Rng& rng);

const char* NoiseKindName(NoiseKind kind);

}  // namespace mocovox

#endif  // MOCOVOX_AUGMENT_H_
