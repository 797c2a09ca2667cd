// core/include/mocovox/audio.h

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

#ifndef MOCOVOX_AUDIO_H_
#define MOCOVOX_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mocovox {

// Mono audio signal. Samples are dimensionless amplitudes, nominally in
// [-1, 1]; the sample rate is carried everywhere so that mixed-rate bugs
// surface as errors instead of pitch shifts.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  int64_t NumSamples() const { return static_cast<int64_t>(samples.size()); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws kData if any sample is NaN/Inf or the rate is not positive.
void ValidateWaveform(const Waveform& w, const char* what);

double Rms(const Waveform& w);
double PeakAbs(const Waveform& w);

// Mono 16-bit PCM little-endian WAV. Anything else in the header is a
// format error; quantization on write is round-to-nearest at 32767 full
// scale, so regenerating a corpus from the same seed is byte-identical.
Waveform ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const Waveform& w);

}  // namespace mocovox

#endif  // MOCOVOX_AUDIO_H_
