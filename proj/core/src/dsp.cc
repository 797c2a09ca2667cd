// core/src/dsp.cc

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

#include "mocovox/dsp.h"

#include <cmath>
#include <cstring>
#include <numbers>

namespace mocovox {

void FeatureConfig::Validate() const {
  if (sample_rate <= 0)
    MOCOVOX_ERR(kConfig) << "sample_rate must be positive, got " << sample_rate;
  if (n_mels < 1) MOCOVOX_ERR(kConfig) << "n_mels must be >= 1, got " << n_mels;
  if (log_floor <= 0.0)
    MOCOVOX_ERR(kConfig) << "log_floor must be > 0, got " << log_floor;
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
    MOCOVOX_ERR(kConfig) << "fft_size must be a power of two >= 2, got " << fft_size;
  if (WindowSamples() <= 0 || HopSamples() <= 0)
    MOCOVOX_ERR(kConfig) << "win_len and hop_len must give positive sample counts";
  if (WindowSamples() > fft_size)
    MOCOVOX_ERR(kConfig) << "window of " << WindowSamples()
                         << " samples exceeds fft_size " << fft_size;
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    MOCOVOX_ERR(kConfig) << "need 0 <= fmin < fmax <= sample_rate/2, got fmin=" << fmin
                         << " fmax=" << fmax << " rate=" << sample_rate;
}

uint64_t FeatureConfig::Hash() const {
  uint64_t h = HashU64(0x9e3779b97f4a7c15ull, static_cast<uint64_t>(sample_rate));
  auto mix = [&h](double v) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = HashU64(h, bits);
  };
  mix(win_len);
  mix(hop_len);
  h = HashU64(h, static_cast<uint64_t>(n_mels));
  h = HashU64(h, static_cast<uint64_t>(fft_size));
  mix(fmin);
  mix(fmax);
  mix(log_floor);
  h = HashU64(h, mean_var_norm ? 1 : 0);
  return h;
}

Waveform ChopSegment(const Waveform& utterance, int64_t start, double duration_s) {
  const int64_t want = std::llround(duration_s * utterance.sample_rate);
  const int64_t have = utterance.NumSamples();
  if (start < 0 || want < 0 || start + want > have)
    MOCOVOX_ERR(kBounds) << "segment [" << start << ", " << start + want
                         << ") out of range for utterance of " << have << " samples";
  Waveform out;
  out.sample_rate = utterance.sample_rate;
  out.samples.assign(utterance.samples.begin() + start,
                     utterance.samples.begin() + start + want);
  return out;
}

double MelFromHz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double HzFromMel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix MelFilterbank(const FeatureConfig& cfg) {
  cfg.Validate();
  const int n_bins = cfg.fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  const double mel_lo = MelFromHz(cfg.fmin);
  const double mel_hi = MelFromHz(cfg.fmax);

  // n_mels + 2 breakpoints, equally spaced in mel.
  std::vector<double> edges_hz(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges_hz[i] = HzFromMel(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

  Matrix fb(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges_hz[m], center = edges_hz[m + 1], right = edges_hz[m + 2];
    bool any = false;
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f < center) {
        w = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        w = (right - f) / (right - center);
      }
      if (w > 0.0) any = true;
      fb(m, k) = w;
    }
    if (!any)
      MOCOVOX_ERR(kConfig) << "mel filter " << m << " covers no FFT bin; "
                           << "reduce n_mels or increase fft_size";
  }
  return fb;
}

void Fft(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    MOCOVOX_ERR(kConfig) << "FFT length must be a power of two, got " << n;
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv;
  }
}

namespace {

// Power spectrum of a real frame via one half-length complex FFT: pack
// x[2n] + i x[2n+1], transform, then unpick even/odd parts.
void RealPowerSpectrum(const std::vector<double>& padded,
                       const std::vector<std::complex<double>>& twiddle,
                       std::vector<std::complex<double>>& scratch,
                       std::vector<double>& power) {
  const int n = static_cast<int>(padded.size());
  const int half = n / 2;
  scratch.resize(half);
  for (int i = 0; i < half; ++i) scratch[i] = {padded[2 * i], padded[2 * i + 1]};
  Fft(scratch);
  power.resize(half + 1);
  for (int k = 0; k <= half; ++k) {
    const std::complex<double> zk = k == half ? scratch[0] : scratch[k];
    const std::complex<double> znk =
        std::conj(k == 0 || k == half ? scratch[0] : scratch[half - k]);
    const std::complex<double> even = 0.5 * (zk + znk);
    const std::complex<double> odd = std::complex<double>(0.0, -0.5) * (zk - znk);
    power[k] = std::norm(even + twiddle[k] * odd);
  }
}

}  // namespace

Matrix MelPowerSpectrogram(const Waveform& segment, const FeatureConfig& cfg) {
  cfg.Validate();
  if (segment.sample_rate != cfg.sample_rate)
    MOCOVOX_ERR(kConfig) << "segment rate " << segment.sample_rate
                         << " != feature config rate " << cfg.sample_rate;
  const int W = cfg.WindowSamples();
  const int H = cfg.HopSamples();
  const int64_t N = segment.NumSamples();
  if (N < W)
    MOCOVOX_ERR(kBounds) << "segment of " << N << " samples shorter than one window (" << W
                         << " samples)";
  const int64_t T = (N - W) / H + 1;
  const int n_bins = cfg.fft_size / 2 + 1;

  std::vector<double> window(W);
  for (int i = 0; i < W; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (W - 1));

  std::vector<std::complex<double>> twiddle(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    const double ang = -2.0 * std::numbers::pi * k / cfg.fft_size;
    twiddle[k] = {std::cos(ang), std::sin(ang)};
  }

  const Matrix fb = MelFilterbank(cfg);
  // Sparse band per filter: first and last nonzero bin, for the inner loop.
  std::vector<std::pair<int, int>> band(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    int lo = n_bins, hi = -1;
    for (int k = 0; k < n_bins; ++k) {
      if (fb(m, k) > 0.0) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    }
    band[m] = {lo, hi};
  }

  Matrix out(T, cfg.n_mels);
  std::vector<double> padded(cfg.fft_size, 0.0);
  std::vector<std::complex<double>> scratch;
  std::vector<double> power;
  for (int64_t t = 0; t < T; ++t) {
    const double* frame = segment.samples.data() + t * H;
    for (int i = 0; i < W; ++i) padded[i] = frame[i] * window[i];
    RealPowerSpectrum(padded, twiddle, scratch, power);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      for (int k = band[m].first; k <= band[m].second; ++k) acc += fb(m, k) * power[k];
      out(t, m) = acc;
    }
  }
  return out;
}

LogMelSegment LogMel(const Waveform& segment, const FeatureConfig& cfg) {
  LogMelSegment out;
  out.values = MelPowerSpectrogram(segment, cfg);
  out.config_hash = cfg.Hash();
  for (double& v : out.values.data) v = std::log(std::max(v, cfg.log_floor));
  if (cfg.mean_var_norm) {
    const int64_t n = out.values.rows * out.values.cols;
    double mean = 0.0;
    for (double v : out.values.data) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : out.values.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + 1e-12);
    for (double& v : out.values.data) v = (v - mean) * inv;
  }
  return out;
}

}  // namespace mocovox
