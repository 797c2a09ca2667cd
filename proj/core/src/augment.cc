// core/src/augment.cc

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

#include "mocovox/augment.h"

#include <cmath>
#include <numbers>

#include "mocovox/common.h"
#include "mocovox/dsp.h"
#include "mocovox/synthdata.h"

namespace mocovox {

namespace {

// -60 dB amplitude decay constant: exp(-kDecay60) = 1e-3.
constexpr double kDecay60 = 6.908;

Waveform DirectConvolveTruncated(const Waveform& wave, const Waveform& rir) {
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(wave.samples.size(), 0.0);
  const int64_t n = wave.NumSamples(), m = rir.NumSamples();
  for (int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const int64_t k_max = std::min<int64_t>(m - 1, i);
    for (int64_t k = 0; k <= k_max; ++k) acc += rir.samples[k] * wave.samples[i - k];
    out.samples[i] = acc;
  }
  return out;
}

Waveform FftConvolveTruncated(const Waveform& wave, const Waveform& rir) {
  const int64_t n = wave.NumSamples(), m = rir.NumSamples();
  size_t size = 1;
  while (size < static_cast<size_t>(n + m - 1)) size <<= 1;
  std::vector<std::complex<double>> a(size), b(size);
  for (int64_t i = 0; i < n; ++i) a[i] = wave.samples[i];
  for (int64_t i = 0; i < m; ++i) b[i] = rir.samples[i];
  Fft(a);
  Fft(b);
  for (size_t i = 0; i < size; ++i) a[i] *= b[i];
  Fft(a, /*inverse=*/true);
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.resize(n);
  for (int64_t i = 0; i < n; ++i) out.samples[i] = a[i].real();
  return out;
}

}  // namespace

void AugmentPolicy::Validate() const {
  if (!(noise_prob >= 0.0 && noise_prob <= 1.0))
    MOCOVOX_ERR(kConfig) << "noise_prob must be in [0, 1], got " << noise_prob;
  if (snr_db_lo > snr_db_hi)
    MOCOVOX_ERR(kConfig) << "snr range [" << snr_db_lo << ", " << snr_db_hi << "] is empty";
  if (rt60_lo > rt60_hi)
    MOCOVOX_ERR(kConfig) << "rt60 range [" << rt60_lo << ", " << rt60_hi << "] is empty";
}

Waveform MixNoise(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (clean.sample_rate != noise.sample_rate)
    MOCOVOX_ERR(kConfig) << "sample-rate mismatch: clean " << clean.sample_rate << " vs noise "
                         << noise.sample_rate;
  if (noise.NumSamples() < clean.NumSamples())
    MOCOVOX_ERR(kBounds) << "noise of " << noise.NumSamples()
                         << " samples shorter than clean signal of " << clean.NumSamples();
  const double clean_rms = Rms(clean);
  Waveform noise_head;
  noise_head.sample_rate = noise.sample_rate;
  noise_head.samples.assign(noise.samples.begin(),
                            noise.samples.begin() + clean.NumSamples());
  const double noise_rms = Rms(noise_head);
  if (clean_rms <= 0.0 || noise_rms <= 0.0)
    MOCOVOX_ERR(kData) << "cannot define SNR for a silent signal (clean rms=" << clean_rms
                       << ", noise rms=" << noise_rms << ")";
  const double gain = clean_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  Waveform out;
  out.sample_rate = clean.sample_rate;
  out.samples.resize(clean.samples.size());
  for (size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = clean.samples[i] + gain * noise_head.samples[i];
  return out;
}

Waveform GenNoise(NoiseKind kind, double duration_s, Rng& rng, int sample_rate) {
  if (duration_s <= 0.0) MOCOVOX_ERR(kConfig) << "noise duration must be positive";
  const int64_t n = std::llround(duration_s * sample_rate);
  Waveform w;
  w.sample_rate = sample_rate;

  switch (kind) {
    case NoiseKind::kWhite: {
      w.samples.resize(n);
      for (int64_t i = 0; i < n; ++i) w.samples[i] = rng.Uniform(-1.0, 1.0);
      return w;
    }
    case NoiseKind::kBabbleProxy: {
      w.samples.assign(n, 0.0);
      // Babble needs enough length for SynthUtterance; synthesize at the
      // generator's minimum and keep the head.
      const double synth_dur = std::max(duration_s, 3.6);
      for (int v = 0; v < 6; ++v) {
        SpeakerSpec spec = GenSpeaker(rng);
        Waveform voice = SynthUtterance(spec, synth_dur, rng, sample_rate);
        for (int64_t i = 0; i < n; ++i) w.samples[i] += voice.samples[i];
      }
      break;
    }
    case NoiseKind::kMusicProxy: {
      w.samples.assign(n, 0.0);
      const double root = rng.Uniform(150.0, 400.0);
      const double ratios[4] = {1.0, 1.25, 1.5, 2.0};
      for (int note = 0; note < 4; ++note) {
        const double mod_freq = rng.Uniform(0.3, 1.0);
        const double mod_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        for (int harmonic = 1; harmonic <= 3; ++harmonic) {
          const double freq = root * ratios[note] * harmonic;
          const double amp = 1.0 / harmonic;
          const double omega = 2.0 * std::numbers::pi * freq / sample_rate;
          for (int64_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            const double mod =
                0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * mod_freq * t + mod_phase);
            w.samples[i] += amp * mod * std::sin(omega * i + phase);
          }
        }
      }
      break;
    }
  }
  const double peak = PeakAbs(w);
  if (peak > 0.0) {
    const double gain = 0.9 / peak;
    for (double& s : w.samples) s *= gain;
  }
  return w;
}

Waveform GenRir(double rt60_s, Rng& rng, int sample_rate) {
  if (!(rt60_s >= 0.05 && rt60_s <= 2.0))
    MOCOVOX_ERR(kConfig) << "rt60 " << rt60_s << " s outside [0.05, 2.0]";
  const int64_t n = std::llround(rt60_s * sample_rate);
  Waveform h;
  h.sample_rate = sample_rate;
  h.samples.resize(n);
  const double rate = kDecay60 / (rt60_s * sample_rate);
  for (int64_t i = 0; i < n; ++i)
    h.samples[i] = rng.Uniform(-1.0, 1.0) * std::exp(-rate * static_cast<double>(i));
  h.samples[0] = 1.0;  // direct path
  double energy = 0.0;
  for (double s : h.samples) energy += s * s;
  const double gain = 1.0 / std::sqrt(energy);
  for (double& s : h.samples) s *= gain;
  return h;
}

Waveform ApplyRir(const Waveform& wave, const Waveform& rir) {
  if (wave.samples.empty() || rir.samples.empty())
    MOCOVOX_ERR(kBounds) << "ApplyRir needs non-empty signals";
  if (wave.sample_rate != rir.sample_rate)
    MOCOVOX_ERR(kConfig) << "sample-rate mismatch: wave " << wave.sample_rate << " vs rir "
                         << rir.sample_rate;
  // Direct convolution below ~1e6 multiply-adds, FFT overlap above.
  const double ops = static_cast<double>(wave.NumSamples()) * rir.NumSamples();
  Waveform out =
      ops <= 1e6 ? DirectConvolveTruncated(wave, rir) : FftConvolveTruncated(wave, rir);
  const double in_peak = PeakAbs(wave);
  const double out_peak = PeakAbs(out);
  if (out_peak > 0.0) {
    const double gain = in_peak / out_peak;
    for (double& s : out.samples) s *= gain;
  }
  return out;
}

AugmentDecision SampleDecision(const AugmentPolicy& policy, Rng& rng) {
  policy.Validate();
  AugmentDecision d;
  switch (policy.mode) {
    case AugmentMode::kNone:
      return d;
    case AugmentMode::kOneSegment:
      d.apply[policy.one_segment_target == AugmentTarget::kQuery ? 0 : 1] = true;
      break;
    case AugmentMode::kBothSegments:
      d.apply[0] = d.apply[1] = true;
      break;
  }
  for (int s = 0; s < 2; ++s) {
    if (!d.apply[s]) continue;
    SegmentAugment& a = d.segment[s];
    a.use_noise =
        policy.kind == AugmentKind::kNoiseOnly || rng.Uniform() < policy.noise_prob;
    if (a.use_noise) {
      const int64_t k = rng.UniformInt(3);
      a.noise_kind = k == 0   ? NoiseKind::kWhite
                     : k == 1 ? NoiseKind::kBabbleProxy
                              : NoiseKind::kMusicProxy;
      a.snr_db = rng.Uniform(policy.snr_db_lo, policy.snr_db_hi);
    } else {
      a.rt60_s = rng.Uniform(policy.rt60_lo, policy.rt60_hi);
    }
  }
  return d;
}

const char* NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kBabbleProxy: return "babble_proxy";
    case NoiseKind::kMusicProxy: return "music_proxy";
  }
  return "unknown";
}

}  // namespace mocovox
