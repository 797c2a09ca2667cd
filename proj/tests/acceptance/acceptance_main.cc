// tests/acceptance/acceptance_main.cc

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
//
// Acceptance suite. Runs ten numbered criteria and prints one PASS/FAIL
// line each; exits nonzero if any fail. Criteria 1-7 are oracle and
// invariant checks computed in-process; criteria 8-10 drive the mocovox
// binary end to end (pass its path with --cli).
//
// Usage: mocovox_acceptance --cli PATH [--work DIR] [--only 1,4,8]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mocovox/augment.h"
#include "mocovox/contrast.h"
#include "mocovox/dsp.h"
#include "mocovox/eval.h"
#include "mocovox/synthdata.h"
#include "mocovox/trainer.h"
#include "testing_util.h"

namespace {

namespace fs = std::filesystem;
using namespace mocovox;
using mocovox_test::MaxGradRelErr;
using mocovox_test::NaiveDft;
using mocovox_test::NaiveInfoNce;
using mocovox_test::RandomUnitRows;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: InfoNCE oracle equivalence.
Outcome Criterion1() {
  Rng rng(10001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t b = 1 + rng.UniformInt(64);
    const int64_t d = 2 + rng.UniformInt(31);
    const int64_t n = 1 + rng.UniformInt(256);
    const double tau = 0.05 + rng.Uniform() * 0.95;
    Matrix q = RandomUnitRows(b, d, rng);
    Matrix k_pos = RandomUnitRows(b, d, rng);
    Matrix negatives = RandomUnitRows(n, d, rng);
    const double got = InfoNceLoss(q, k_pos, negatives, tau).loss;
    const double want = NaiveInfoNce(q, k_pos, negatives, tau);
    worst = std::max(worst, std::fabs(got - want));
    if (worst > 1e-10)
      return {false, Fmt("naive-oracle deviation %.3e > 1e-10 at instance %d", worst, trial)};
  }
  // Symmetric case: all logits equal -> exactly ln(N + 1).
  double worst_sym = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t d = 2 + rng.UniformInt(31);
    const int64_t n = 1 + rng.UniformInt(256);
    Matrix u = RandomUnitRows(1, d, rng);
    Matrix v = RandomUnitRows(1, d, rng);
    Matrix q(3, d), k_pos(3, d), negatives(n, d);
    for (int i = 0; i < 3; ++i) std::copy(u.Row(0), u.Row(0) + d, q.Row(i));
    for (int i = 0; i < 3; ++i) std::copy(v.Row(0), v.Row(0) + d, k_pos.Row(i));
    for (int64_t i = 0; i < n; ++i) std::copy(v.Row(0), v.Row(0) + d, negatives.Row(i));
    const double got = InfoNceLoss(q, k_pos, negatives, 0.07).loss;
    worst_sym = std::max(worst_sym, std::fabs(got - std::log(static_cast<double>(n + 1))));
  }
  if (worst_sym > 1e-12)
    return {false, Fmt("symmetric case deviates from ln(N+1) by %.3e", worst_sym)};
  return {true, Fmt("1000 instances, max |loss - oracle| %.2e; ln(N+1) dev %.2e", worst,
                    worst_sym)};
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient correctness against central finite differences.
Outcome Criterion2() {
  double worst = 0.0;
  const double h = 1e-5;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(20000 + seed);
    // InfoNCE grad_q.
    {
      const int64_t B = 4, d = 8, N = 16;
      Matrix q = RandomUnitRows(B, d, rng);
      Matrix k_pos = RandomUnitRows(B, d, rng);
      Matrix negatives = RandomUnitRows(N, d, rng);
      InfoNceResult r = InfoNceLoss(q, k_pos, negatives, 0.2);
      auto f = [&](const std::vector<double>& flat) {
        Matrix m(B, d);
        m.data = flat;
        return InfoNceLoss(m, k_pos, negatives, 0.2).loss;
      };
      worst = std::max(worst, MaxGradRelErr(f, q.data, r.grad_q.data, h));
    }
    // Prototypical: both gradients.
    {
      const int64_t B = 4, d = 6;
      Matrix queries = RandomUnitRows(B, d, rng);
      Matrix supports = RandomUnitRows(B, d, rng);
      PrototypicalResult r = PrototypicalLoss(queries, supports);
      auto fq = [&](const std::vector<double>& flat) {
        Matrix m(B, d);
        m.data = flat;
        return PrototypicalLoss(m, supports).loss;
      };
      auto fs = [&](const std::vector<double>& flat) {
        Matrix m(B, d);
        m.data = flat;
        return PrototypicalLoss(queries, m).loss;
      };
      worst = std::max(worst, MaxGradRelErr(fq, queries.data, r.grad_queries.data, h));
      worst = std::max(worst, MaxGradRelErr(fs, supports.data, r.grad_supports.data, h));
    }
    // Angular prototypical: embeddings plus w and b.
    {
      const int64_t B = 4, d = 6;
      const double w = 8.0, bias = -3.0;
      Matrix queries = RandomUnitRows(B, d, rng);
      Matrix supports = RandomUnitRows(B, d, rng);
      AngularPrototypicalResult r = AngularPrototypicalLoss(queries, supports, w, bias);
      auto fq = [&](const std::vector<double>& flat) {
        Matrix m(B, d);
        m.data = flat;
        return AngularPrototypicalLoss(m, supports, w, bias).loss;
      };
      auto fs = [&](const std::vector<double>& flat) {
        Matrix m(B, d);
        m.data = flat;
        return AngularPrototypicalLoss(queries, m, w, bias).loss;
      };
      worst = std::max(worst, MaxGradRelErr(fq, queries.data, r.grad_queries.data, h));
      worst = std::max(worst, MaxGradRelErr(fs, supports.data, r.grad_supports.data, h));
      const double fd_w = (AngularPrototypicalLoss(queries, supports, w + h, bias).loss -
                           AngularPrototypicalLoss(queries, supports, w - h, bias).loss) /
                          (2 * h);
      const double fd_b = (AngularPrototypicalLoss(queries, supports, w, bias + h).loss -
                           AngularPrototypicalLoss(queries, supports, w, bias - h).loss) /
                          (2 * h);
      worst = std::max(worst, mocovox_test::RelErr(fd_w, r.grad_w));
      worst = std::max(worst, mocovox_test::RelErr(fd_b, r.grad_b));
    }
    // Encoder backward on a sub-2000-parameter config.
    {
      EncoderConfig cfg;
      cfg.n_mels = 6;
      cfg.embed_dim = 4;
      cfg.conv_channels = {2};
      cfg.kernel_sizes = {3};
      cfg.normalization =
          seed % 2 == 0 ? NormKind::kNone : NormKind::kPerChannelInstance;
      if (NumParams(cfg) > 2000) return {false, "encoder gradcheck config too large"};
      Rng init_rng(777 + seed);
      EncoderParams params = InitParams(cfg, init_rng);
      std::vector<LogMelSegment> batch(3);
      for (auto& seg : batch) {
        seg.values = Matrix(9, cfg.n_mels);
        for (auto& v : seg.values.data) v = rng.Uniform(-2.0, 2.0);
      }
      Matrix upstream(3, cfg.embed_dim);
      for (auto& v : upstream.data) v = rng.Uniform(-1.0, 1.0);
      ForwardTape tape;
      Forward(cfg, params, batch, &tape);
      auto analytic = Backward(cfg, params, tape, upstream);
      auto f = [&](const std::vector<double>& theta) {
        EncoderParams p{theta};
        Matrix out = Forward(cfg, p, batch);
        double acc = 0.0;
        for (int64_t i = 0; i < out.rows; ++i)
          for (int64_t j = 0; j < out.cols; ++j) acc += upstream(i, j) * out(i, j);
        return acc;
      };
      worst = std::max(worst, MaxGradRelErr(f, params.theta, analytic, h));
    }
  }
  if (worst >= 1e-4) return {false, Fmt("max relative gradient error %.3e >= 1e-4", worst)};
  return {true, Fmt("5 seeds, all gradients: max relative error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// Criterion 3: Eq.-2 EMA law and bit-exact momentum bookkeeping.
Outcome Criterion3() {
  for (double m : {0.0, 0.9, 0.999, 1.0}) {
    Rng rng(30000 + static_cast<uint64_t>(m * 1000));
    const int n = 64;
    EncoderParams theta_q, theta_k;
    theta_q.theta.resize(n);
    theta_k.theta.resize(n);
    for (int i = 0; i < n; ++i) {
      theta_q.theta[i] = rng.Uniform(-1.0, 1.0);
      theta_k.theta[i] = rng.Uniform(-1.0, 1.0);
    }
    double base = 0.0;
    for (int i = 0; i < n; ++i)
      base = std::max(base, std::fabs(theta_k.theta[i] - theta_q.theta[i]));
    double factor = 1.0;
    for (int t = 1; t <= 100; ++t) {
      MomentumUpdate(theta_k, theta_q, m);
      factor *= m;
      double inf_norm = 0.0;
      for (int i = 0; i < n; ++i)
        inf_norm = std::max(inf_norm, std::fabs(theta_k.theta[i] - theta_q.theta[i]));
      if (std::fabs(inf_norm - factor * base) > 1e-12)
        return {false, Fmt("EMA law violated at m=%.3f t=%d: |dev| %.3e", m, t,
                           std::fabs(inf_norm - factor * base))};
    }
  }
  // theta_k after a MoCo step equals MomentumUpdate(pre-step theta_k,
  // post-step theta_q), bitwise.
  EncoderConfig cfg;
  cfg.n_mels = 6;
  cfg.embed_dim = 4;
  cfg.conv_channels = {2};
  cfg.kernel_sizes = {3};
  Rng rng(31337);
  EncoderParams init = InitParams(cfg, rng);
  MoCoState state(cfg, init, 8, 4, 0.97, 0.07);
  auto features = [&](uint64_t seed) {
    Rng frng(seed);
    std::vector<LogMelSegment> batch(4);
    for (auto& seg : batch) {
      seg.values = Matrix(9, cfg.n_mels);
      for (auto& v : seg.values.data) v = frng.Uniform(-2.0, 2.0);
    }
    return batch;
  };
  BootstrapQueue(state, features(1));
  OptState opt;
  SgdConfig sgd{0.05, 0.9, 1e-4};
  for (int step = 0; step < 3; ++step) {
    EncoderParams k_before = state.theta_k;
    MoCoStep(state, features(10 + step), features(20 + step), opt, sgd);
    EncoderParams expect = k_before;
    MomentumUpdate(expect, state.theta_q, 0.97);
    if (expect.theta != state.theta_k.theta)
      return {false, Fmt("theta_k after step %d is not the bit-exact EMA", step)};
  }
  return {true, "EMA decay law to 1e-12 for m in {0, 0.9, 0.999, 1}; step EMA bit-exact"};
}

// ---------------------------------------------------------------------------
// Criterion 4: queue vs list-based FIFO oracle, 10,000 sequences.
Outcome Criterion4() {
  Rng rng(40001);
  for (int seq = 0; seq < 10000; ++seq) {
    const int64_t K = 8 + rng.UniformInt(1017);  // in {8, ..., 1024}
    std::vector<int64_t> divisors;
    for (int64_t b = 1; b * b <= K; ++b) {
      if (K % b == 0) {
        divisors.push_back(b);
        divisors.push_back(K / b);
      }
    }
    const int64_t B = divisors[rng.UniformInt(static_cast<int64_t>(divisors.size()))];
    const int dim = 2 + static_cast<int>(rng.UniformInt(3));
    DictionaryQueue queue(K, dim, B);
    std::deque<std::vector<double>> oracle;
    const int64_t n_batches = 1 + rng.UniformInt(std::min<int64_t>(2 * K / B + 1, 24));
    for (int64_t t = 0; t < n_batches; ++t) {
      Matrix keys = RandomUnitRows(B, dim, rng);
      queue.Enqueue(keys);
      for (int64_t i = 0; i < B; ++i)
        oracle.emplace_back(keys.Row(i), keys.Row(i) + dim);
      while (oracle.size() > static_cast<size_t>(K)) oracle.pop_front();
    }
    if (queue.filled() != static_cast<int64_t>(oracle.size()))
      return {false, Fmt("sequence %d: fill %lld != oracle %zu", seq,
                         static_cast<long long>(queue.filled()), oracle.size())};
    const int64_t start = queue.filled() == K ? queue.ptr() : 0;
    for (int64_t i = 0; i < queue.filled(); ++i) {
      const double* row = queue.buffer().Row((start + i) % K);
      for (int d = 0; d < dim; ++d)
        if (row[d] != oracle[i][d])
          return {false, Fmt("sequence %d: content mismatch at logical row %lld", seq,
                             static_cast<long long>(i))};
    }
  }
  return {true, "10,000 randomized enqueue sequences match the FIFO oracle exactly"};
}

// ---------------------------------------------------------------------------
// Criterion 5: EER vs exhaustive sweep oracle, hand case, rank invariance.
Outcome Criterion5() {
  auto make_records = [](const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<ScoreRecord> records;
    int id = 0;
    for (double s : pos) records.push_back({{1, "a" + std::to_string(id++), "b"}, s});
    for (double s : neg) records.push_back({{0, "a" + std::to_string(id++), "b"}, s});
    return records;
  };
  auto oracle = [](const std::vector<ScoreRecord>& records) {
    std::vector<double> pos, neg, all;
    for (const auto& r : records) {
      (r.trial.label == 1 ? pos : neg).push_back(r.score);
      all.push_back(r.score);
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    double best_gap = 1e300, eer = 0.0, thr = 0.0;
    for (double t : all) {
      int64_t fr = 0, fa = 0;
      for (double p : pos)
        if (p < t) ++fr;
      for (double n : neg)
        if (n >= t) ++fa;
      const double frr = static_cast<double>(fr) / pos.size();
      const double far = static_cast<double>(fa) / neg.size();
      if (std::fabs(far - frr) < best_gap) {
        best_gap = std::fabs(far - frr);
        eer = 0.5 * (far + frr);
        thr = t;
      }
    }
    return std::pair<double, double>(eer, thr);
  };

  // Hand case.
  {
    auto records = make_records({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1});
    EerResult r = ComputeEer(records);
    if (std::fabs(r.eer - 1.0 / 3.0) > 1e-15 || r.threshold != 0.7)
      return {false, Fmt("hand case gave eer=%.6f thr=%.3f", r.eer, r.threshold)};
  }

  Rng rng(50001);
  for (int trial = 0; trial < 500; ++trial) {
    const int np = 1 + static_cast<int>(rng.UniformInt(500));
    const int nn = 1 + static_cast<int>(rng.UniformInt(std::min(1000 - np, 500)));
    std::vector<double> pos(np), neg(nn);
    for (auto& v : pos) v = rng.Uniform(-0.3, 1.0);
    for (auto& v : neg) v = rng.Uniform(-1.0, 0.5);
    if (trial % 4 == 0) {  // force ties
      for (auto& v : pos) v = std::round(v * 16) / 16;
      for (auto& v : neg) v = std::round(v * 16) / 16;
    }
    auto records = make_records(pos, neg);
    EerResult got = ComputeEer(records);
    auto [want_eer, want_thr] = oracle(records);
    if (got.eer != want_eer || got.threshold != want_thr)
      return {false, Fmt("list %d: eer %.9f vs oracle %.9f", trial, got.eer, want_eer)};

    auto transformed = records;
    for (auto& r : transformed) r.score = std::exp(0.8 * r.score) + 2.0 * r.score;
    if (ComputeEer(transformed).eer != got.eer)
      return {false, Fmt("list %d: EER not invariant under a monotone transform", trial)};
  }
  return {true, "500 random lists equal the exhaustive sweep; hand case 1/3; rank-invariant"};
}

// ---------------------------------------------------------------------------
// Criterion 6: feature recipe.
Outcome Criterion6() {
  FeatureConfig cfg;
  Waveform tone;
  tone.sample_rate = 16000;
  tone.samples.resize(28800);
  for (int64_t i = 0; i < tone.NumSamples(); ++i)
    tone.samples[i] = 0.5 * std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);

  LogMelSegment feat = LogMel(tone, cfg);
  if (feat.values.rows != 178 || feat.values.cols != 40)
    return {false, Fmt("1.8 s segment gave %lldx%lld, expected 178x40",
                       static_cast<long long>(feat.values.rows),
                       static_cast<long long>(feat.values.cols))};

  Waveform silence;
  silence.sample_rate = 16000;
  silence.samples.assign(28800, 0.0);
  LogMelSegment quiet = LogMel(silence, cfg);
  for (double v : quiet.values.data)
    if (v != std::log(1e-10))
      return {false, "silence did not map to uniform ln(1e-10)"};

  // 1 kHz tone vs naive DFT + formula-built filterbank, three frames.
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const int n_bins = cfg.fft_size / 2 + 1;
  std::vector<double> edges(cfg.n_mels + 2);
  const double lo = mel(cfg.fmin), hi = mel(cfg.fmax);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = hz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  Matrix powers = MelPowerSpectrogram(tone, cfg);
  for (int frame : {0, 88, 177}) {
    std::vector<double> buf(cfg.fft_size, 0.0);
    for (int i = 0; i < 400; ++i)
      buf[i] = tone.samples[frame * 160 + i] * (0.54 - 0.46 * std::cos(2.0 * M_PI * i / 399.0));
    const auto spectrum = NaiveDft(buf);
    std::vector<double> oracle_mel(cfg.n_mels, 0.0);
    for (int m = 0; m < cfg.n_mels; ++m) {
      for (int k = 0; k < n_bins; ++k) {
        const double f = k * 16000.0 / cfg.fft_size;
        double w = 0.0;
        if (f > edges[m] && f < edges[m + 1]) {
          w = (f - edges[m]) / (edges[m + 1] - edges[m]);
        } else if (f >= edges[m + 1] && f < edges[m + 2]) {
          w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        }
        oracle_mel[m] += w * std::norm(spectrum[k]);
      }
    }
    int got_arg = 0, want_arg = 0;
    for (int m = 1; m < cfg.n_mels; ++m) {
      if (powers(frame, m) > powers(frame, got_arg)) got_arg = m;
      if (oracle_mel[m] > oracle_mel[want_arg]) want_arg = m;
    }
    if (got_arg != want_arg)
      return {false, Fmt("frame %d: peak mel bin %d != oracle %d", frame, got_arg, want_arg)};
    // The winning filter's passband must straddle 1 kHz.
    if (!(edges[got_arg] < 1000.0 && 1000.0 < edges[got_arg + 2]))
      return {false, Fmt("peak filter %d does not contain 1 kHz", got_arg)};
    for (int m = 0; m < cfg.n_mels; ++m) {
      const double rel = std::fabs(powers(frame, m) - oracle_mel[m]) /
                         std::max(1e-300, std::fabs(oracle_mel[m]));
      if (rel > 1e-9)
        return {false, Fmt("frame %d mel %d: relative DFT-oracle error %.2e", frame, m, rel)};
    }
  }
  return {true, "178x40 framing; silence = ln(1e-10); 1 kHz peak bin matches the DFT oracle"};
}

// ---------------------------------------------------------------------------
// Criterion 7: augmentation contracts.
Outcome Criterion7() {
  Rng rng(70001);
  Waveform clean;
  clean.sample_rate = 16000;
  clean.samples.resize(28800);
  for (auto& s : clean.samples) s = rng.Uniform(-0.8, 0.8);
  Waveform noise;
  noise.sample_rate = 16000;
  noise.samples.resize(32000);
  for (auto& s : noise.samples) s = rng.Uniform(-1.0, 1.0);

  for (double snr : {-3.0, 0.0, 7.5, 18.0}) {
    Waveform mixed = MixNoise(clean, noise, snr);
    double diff_sq = 0.0;
    for (size_t i = 0; i < clean.samples.size(); ++i) {
      const double d = mixed.samples[i] - clean.samples[i];
      diff_sq += d * d;
    }
    const double measured =
        20.0 * std::log10(Rms(clean) / std::sqrt(diff_sq / clean.samples.size()));
    if (std::fabs(measured - snr) / std::max(1.0, std::fabs(snr)) > 1e-9)
      return {false, Fmt("SNR %.1f dB measured as %.12f", snr, measured)};
  }

  Waveform delta;
  delta.sample_rate = 16000;
  delta.samples = {1.0};
  Waveform same = ApplyRir(clean, delta);
  for (size_t i = 0; i < clean.samples.size(); ++i)
    if (std::fabs(same.samples[i] - clean.samples[i]) > 1e-12)
      return {false, "identity impulse is not the identity map"};

  AugmentPolicy policy;
  policy.mode = AugmentMode::kBothSegments;
  policy.kind = AugmentKind::kNoiseOrRir;
  Rng drng(70002);
  int64_t noise_count = 0, total = 0;
  for (int i = 0; i < 10000; ++i) {
    AugmentDecision d = SampleDecision(policy, drng);
    for (int s = 0; s < 2; ++s) {
      ++total;
      if (d.segment[s].use_noise) ++noise_count;
    }
  }
  const double fraction = static_cast<double>(noise_count) / static_cast<double>(total);
  if (fraction < 0.73 || fraction > 0.77)
    return {false, Fmt("noise fraction %.4f outside [0.73, 0.77]", fraction)};
  return {true, Fmt("SNR exact to 1e-9; identity RIR; noise fraction %.4f", fraction)};
}

// ---------------------------------------------------------------------------
// End-to-end machinery shared by criteria 8-10.

struct Cli {
  std::string binary;
  fs::path work;

  struct Result {
    int exit_code = -1;
    std::string output;
  };

  Result Run(const std::string& args, int threads) const {
    static int counter = 0;
    const fs::path log = work / ("cli_" + std::to_string(counter++) + ".log");
    const std::string cmd = "MOCOVOX_THREADS=" + std::to_string(threads) + " " + binary +
                            " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(log);
    r.output.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return r;
  }
};

double ParseEerPercent(const std::string& output) {
  const size_t pos = output.find("EER=");
  if (pos == std::string::npos) MOCOVOX_ERR(kFormat) << "no EER= line in CLI output";
  return std::strtod(output.c_str() + pos + 4, nullptr);
}

std::string ReadFileBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) MOCOVOX_ERR(kIo) << "cannot read " << p;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

constexpr uint64_t kCommittedSeed = 20260810;

void WriteTrainCfg(const fs::path& path, uint64_t seed, int64_t batch, int64_t queue,
                   int64_t epochs, const std::string& augment_mode) {
  std::ofstream out(path, std::ios::trunc);
  out << "seed=" << seed << "\n"
      << "batch_size=" << batch << "\n"
      << "queue_size=" << queue << "\n"
      << "epochs=" << epochs << "\n"
      << "lr=0.03\n"
      << "m=0.999\n"
      << "tau=0.07\n"
      << "sgd_momentum=0.9\n"
      << "weight_decay=1e-4\n"
      << "pretext=instance_discrimination\n"
      << "augment.mode=" << augment_mode << "\n"
      << "augment.kind=noise_or_rir\n";
}

// Raw-feature separability gate over the generated corpus: same-speaker
// utterances must be closer in time-averaged log-mel for >= 90% of triples.
Outcome SeparabilityGate(const fs::path& corpus) {
  Manifest manifest = Manifest::Read(corpus / "manifest.tsv");
  std::vector<std::string> speakers;
  std::vector<std::vector<const UtteranceRecord*>> by_speaker;
  for (const auto& r : manifest.records) {
    size_t i = 0;
    for (; i < speakers.size(); ++i)
      if (speakers[i] == r.speaker_id) break;
    if (i == speakers.size()) {
      speakers.push_back(r.speaker_id);
      by_speaker.emplace_back();
    }
    by_speaker[i].push_back(&r);
  }
  FeatureConfig fc;
  std::vector<std::vector<double>> cache(manifest.records.size());
  std::vector<bool> have(manifest.records.size(), false);
  auto signature = [&](const UtteranceRecord* rec) -> const std::vector<double>& {
    const size_t idx = rec - manifest.records.data();
    if (!have[idx]) {
      LogMelSegment f = LogMel(ReadWav(corpus / rec->path), fc);
      std::vector<double> mean(fc.n_mels, 0.0);
      for (int64_t t = 0; t < f.values.rows; ++t)
        for (int m = 0; m < fc.n_mels; ++m) mean[m] += f.values(t, m);
      for (auto& v : mean) v /= static_cast<double>(f.values.rows);
      cache[idx] = std::move(mean);
      have[idx] = true;
    }
    return cache[idx];
  };
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
  };
  Rng rng(80808);
  int wins = 0;
  const int n_triples = 200;
  for (int t = 0; t < n_triples; ++t) {
    const int64_t s = rng.UniformInt(static_cast<int64_t>(speakers.size()));
    int64_t o = rng.UniformInt(static_cast<int64_t>(speakers.size() - 1));
    if (o >= s) ++o;
    const auto& mine = by_speaker[s];
    const auto& theirs = by_speaker[o];
    const int64_t a1 = rng.UniformInt(static_cast<int64_t>(mine.size()));
    int64_t a2 = rng.UniformInt(static_cast<int64_t>(mine.size() - 1));
    if (a2 >= a1) ++a2;
    const int64_t b = rng.UniformInt(static_cast<int64_t>(theirs.size()));
    if (dist(signature(mine[a1]), signature(mine[a2])) <
        dist(signature(mine[a1]), signature(theirs[b])))
      ++wins;
  }
  if (wins < static_cast<int>(0.9 * n_triples))
    return {false, Fmt("separability %d/%d below 90%%", wins, n_triples)};
  return {true, Fmt("separability %d/%d", wins, n_triples)};
}

struct EndToEndState {
  fs::path corpus;
  fs::path run_dir;
  double trained_eer = -1.0;     // percent
  double untrained_eer = -1.0;   // percent
  bool ready = false;
};

Outcome Criterion8(const Cli& cli, EndToEndState& state) {
  state.corpus = cli.work / "corpus";
  state.run_dir = cli.work / "c8_run";
  fs::remove_all(state.corpus);
  fs::remove_all(state.run_dir);

  auto synth = cli.Run("synth --speakers 32 --utts 20 --out " + state.corpus.string() +
                           " --seed " + std::to_string(kCommittedSeed) + " --trials 500",
                       4);
  if (synth.exit_code != 0) return {false, "synth failed:\n" + synth.output};

  Outcome gate = SeparabilityGate(state.corpus);
  if (!gate.pass) return gate;

  // 520 dev utterances -> 9 steps/epoch; 67 epochs -> 603 steps (<= 2000).
  const fs::path cfg = cli.work / "c8.cfg";
  WriteTrainCfg(cfg, kCommittedSeed, 64, 1024, 67, "none");
  auto train = cli.Run("train --config " + cfg.string() + " --data " +
                           state.corpus.string() + " --out " + state.run_dir.string(),
                       4);
  if (train.exit_code != 0) return {false, "train failed:\n" + train.output};

  auto eval_trained = cli.Run(
      "eval --checkpoint " + (state.run_dir / "checkpoint.mcvx").string() + " --data " +
          state.corpus.string() + " --trials " + (state.corpus / "trials.tsv").string() +
          " --out " + (cli.work / "c8_eval").string(),
      4);
  if (eval_trained.exit_code != 0) return {false, "eval failed:\n" + eval_trained.output};
  auto eval_init = cli.Run(
      "eval --checkpoint " + (state.run_dir / "checkpoint_init.mcvx").string() + " --data " +
          state.corpus.string() + " --trials " + (state.corpus / "trials.tsv").string() +
          " --out " + (cli.work / "c8_eval_init").string(),
      4);
  if (eval_init.exit_code != 0) return {false, "init eval failed:\n" + eval_init.output};

  state.trained_eer = ParseEerPercent(eval_trained.output);
  state.untrained_eer = ParseEerPercent(eval_init.output);
  state.ready = true;

  const std::string detail =
      Fmt("%s; trained EER %.2f%%, untrained %.2f%% (gap %.2f)", gate.detail.c_str(),
          state.trained_eer, state.untrained_eer, state.untrained_eer - state.trained_eer);
  if (state.untrained_eer < 35.0 || state.untrained_eer > 65.0)
    return {false, detail + " -- untrained baseline outside [35, 65]"};
  if (state.trained_eer > 25.0) return {false, detail + " -- trained EER above 25%"};
  if (state.untrained_eer - state.trained_eer < 15.0)
    return {false, detail + " -- improvement below 15 points"};
  return {true, detail};
}

Outcome Criterion9(const Cli& cli, const EndToEndState& state) {
  if (!state.ready) return {false, "criterion 8 corpus unavailable"};
  // Three seeds, identical config except the augmentation regime; a smaller
  // batch/queue/step budget keeps the six runs inside the time box.
  const uint64_t seeds[3] = {101, 202, 303};
  std::vector<double> eer_none, eer_aug;
  for (int which = 0; which < 2; ++which) {
    const std::string mode = which == 0 ? "none" : "both_segments";
    for (uint64_t seed : seeds) {
      const fs::path cfg = cli.work / Fmt("c9_%s_%llu.cfg", mode.c_str(),
                                          static_cast<unsigned long long>(seed));
      // 520 dev utterances at B=32 -> 17 steps/epoch; 20 epochs -> 340 steps.
      WriteTrainCfg(cfg, seed, 32, 256, 20, mode);
      const fs::path run = cli.work / Fmt("c9_%s_%llu", mode.c_str(),
                                          static_cast<unsigned long long>(seed));
      auto train = cli.Run("train --config " + cfg.string() + " --data " +
                               state.corpus.string() + " --out " + run.string(),
                           4);
      if (train.exit_code != 0) return {false, "train failed:\n" + train.output};
      auto eval = cli.Run("eval --checkpoint " + (run / "checkpoint.mcvx").string() +
                              " --data " + state.corpus.string() + " --trials " +
                              (state.corpus / "trials.tsv").string() + " --out " +
                              (run / "eval").string(),
                          4);
      if (eval.exit_code != 0) return {false, "eval failed:\n" + eval.output};
      (which == 0 ? eer_none : eer_aug).push_back(ParseEerPercent(eval.output));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double med_none = median(eer_none), med_aug = median(eer_aug);
  int inversions = 0;
  for (int i = 0; i < 3; ++i)
    if (eer_aug[i] > eer_none[i]) ++inversions;
  std::string detail = Fmt(
      "median EER aug %.2f%% vs none %.2f%% (per-seed aug: %.2f/%.2f/%.2f, none: "
      "%.2f/%.2f/%.2f)",
      med_aug, med_none, eer_aug[0], eer_aug[1], eer_aug[2], eer_none[0], eer_none[1],
      eer_none[2]);
  if (inversions > 0) detail += Fmt("; warning: %d single-seed inversion(s)", inversions);
  if (med_aug > med_none) return {false, detail + " -- median inversion"};
  return {true, detail};
}

Outcome Criterion10(const Cli& cli, const EndToEndState& state) {
  if (!state.ready) return {false, "criterion 8 run unavailable"};
  // Re-run criterion 8's training and evaluation single-threaded
  // (MOCOVOX_THREADS=0) with the same seed and compare bytes: two runs must
  // agree, and the per-sample seeding makes the thread count immaterial.
  const fs::path rerun = cli.work / "c10_run";
  fs::remove_all(rerun);
  const fs::path cfg = cli.work / "c8.cfg";
  auto train = cli.Run("train --config " + cfg.string() + " --data " +
                           state.corpus.string() + " --out " + rerun.string(),
                       0);
  if (train.exit_code != 0) return {false, "train failed:\n" + train.output};
  const std::string metrics_a = ReadFileBytes(state.run_dir / "metrics.csv");
  const std::string metrics_b = ReadFileBytes(rerun / "metrics.csv");
  if (metrics_a != metrics_b) return {false, "metrics.csv differs between runs"};
  const std::string ckpt_a = ReadFileBytes(state.run_dir / "checkpoint.mcvx");
  const std::string ckpt_b = ReadFileBytes(rerun / "checkpoint.mcvx");
  if (ckpt_a != ckpt_b) return {false, "checkpoint.mcvx differs between runs"};

  auto eval = cli.Run("eval --checkpoint " + (rerun / "checkpoint.mcvx").string() +
                          " --data " + state.corpus.string() + " --trials " +
                          (state.corpus / "trials.tsv").string() + " --out " +
                          (rerun / "eval").string(),
                      0);
  if (eval.exit_code != 0) return {false, "eval failed:\n" + eval.output};
  const double eer = ParseEerPercent(eval.output);
  if (std::fabs(eer - state.trained_eer) > 1e-9)
    return {false, Fmt("EER %.4f%% differs from criterion 8's %.4f%%", eer,
                       state.trained_eer)};
  const std::string scores_a = ReadFileBytes(cli.work / "c8_eval" / "scores.csv");
  const std::string scores_b = ReadFileBytes(rerun / "eval" / "scores.csv");
  if (scores_a != scores_b) return {false, "scores.csv differs between runs"};
  return {true, Fmt("bit-identical metrics, checkpoint and scores; EER %.2f%%", eer)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli_path;
  fs::path work = fs::temp_directory_path() / "mocovox_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli_path = argv[++i];
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      for (const auto& tok : SplitString(argv[++i], ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: mocovox_acceptance --cli PATH [--work DIR] [--only 1,2]\n";
      return 2;
    }
  }
  if (cli_path.empty()) {
    std::cerr << "mocovox_acceptance: --cli PATH is required\n";
    return 2;
  }
  fs::create_directories(work);
  Cli cli{cli_path, work};
  EndToEndState e2e;

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> criteria = {
      {1, "InfoNCE oracle equivalence", [&] { return Criterion1(); }},
      {2, "Gradient correctness vs finite differences", [&] { return Criterion2(); }},
      {3, "Momentum EMA law", [&] { return Criterion3(); }},
      {4, "Queue FIFO oracle", [&] { return Criterion4(); }},
      {5, "EER oracle", [&] { return Criterion5(); }},
      {6, "Feature recipe", [&] { return Criterion6(); }},
      {7, "Augmentation contracts", [&] { return Criterion7(); }},
      {8, "End-to-end desk-scale learning", [&] { return Criterion8(cli, e2e); }},
      {9, "Augmentation trend (median over 3 seeds)", [&] { return Criterion9(cli, e2e); }},
      {10, "Train/eval determinism", [&] { return Criterion10(cli, e2e); }},
  };

  int failures = 0;
  for (const auto& entry : criteria) {
    if (!only.empty() && only.count(entry.id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] C%-2d %s - %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", entry.id,
                entry.name, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
