// core/include/mocovox/dsp.h

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

#ifndef MOCOVOX_DSP_H_
#define MOCOVOX_DSP_H_

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "mocovox/audio.h"
#include "mocovox/common.h"

namespace mocovox {

// Log-mel front end configuration. Defaults: 40 mel bands, 25 ms Hamming
// window, 10 ms hop, 512-point FFT at 16 kHz, HTK mel scale between 20 Hz
// and 7600 Hz, natural-log energies floored at 1e-10.
struct FeatureConfig {
  int sample_rate = 16000;
  double win_len = 0.025;   // seconds
  double hop_len = 0.010;   // seconds
  int n_mels = 40;
  int fft_size = 512;
  double fmin = 20.0;       // Hz
  double fmax = 7600.0;     // Hz
  double log_floor = 1e-10;
  // Per-segment mean/variance normalization; off by default. When on, the
  // ln(log_floor) lower bound no longer applies to the output values.
  bool mean_var_norm = false;

  int WindowSamples() const { return static_cast<int>(std::lround(win_len * sample_rate)); }
  int HopSamples() const { return static_cast<int>(std::lround(hop_len * sample_rate)); }
  void Validate() const;
  uint64_t Hash() const;
};

// A frames x n_mels block of log mel-filterbank energies; the encoder input.
struct LogMelSegment {
  Matrix values;            // T x n_mels
  uint64_t config_hash = 0;
};

// Returns exactly round(duration * sample_rate) samples starting at `start`.
Waveform ChopSegment(const Waveform& utterance, int64_t start, double duration_s);

double MelFromHz(double hz);
double HzFromMel(double mel);

// Triangular filters, n_mels x (fft_size/2 + 1), centers equally spaced on
// the mel scale between fmin and fmax. Every row has a positive entry.
Matrix MelFilterbank(const FeatureConfig& cfg);

// Linear mel energies before the log, T x n_mels. Framing: Hamming window,
// T = floor((N - W) / H) + 1.
Matrix MelPowerSpectrogram(const Waveform& segment, const FeatureConfig& cfg);

LogMelSegment LogMel(const Waveform& segment, const FeatureConfig& cfg);

// In-place radix-2 FFT (n must be a power of two). Inverse includes the 1/n
// factor. Shared by the front end and the FFT-based convolution in augment.
void Fft(std::vector<std::complex<double>>& x, bool inverse = false);

}  // namespace mocovox

#endif  // MOCOVOX_DSP_H_
