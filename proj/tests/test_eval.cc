// tests/test_eval.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "mocovox/eval.h"
#include "testing_util.h"

using namespace mocovox;
using mocovox_test::RandomUnitRows;
namespace fs = std::filesystem;

namespace {

std::vector<ScoreRecord> MakeRecords(const std::vector<double>& pos,
                                     const std::vector<double>& neg) {
  std::vector<ScoreRecord> records;
  int id = 0;
  for (double s : pos) {
    ScoreRecord r;
    r.trial = {1, "a" + std::to_string(id), "b" + std::to_string(id)};
    r.score = s;
    records.push_back(r);
    ++id;
  }
  for (double s : neg) {
    ScoreRecord r;
    r.trial = {0, "a" + std::to_string(id), "b" + std::to_string(id)};
    r.score = s;
    records.push_back(r);
    ++id;
  }
  return records;
}

// Exhaustive re-count oracle with the same decision rule.
EerResult OracleEer(const std::vector<ScoreRecord>& records) {
  std::vector<double> pos, neg, all;
  for (const auto& r : records) {
    (r.trial.label == 1 ? pos : neg).push_back(r.score);
    all.push_back(r.score);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  EerResult best;
  double best_gap = 1e300;
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
      best.eer = 0.5 * (far + frr);
      best.threshold = t;
    }
  }
  best.n_pos = static_cast<int64_t>(pos.size());
  best.n_neg = static_cast<int64_t>(neg.size());
  return best;
}

}  // namespace

TEST_CASE("UtteranceScore extremes, oracle and symmetry") {
  Rng rng(2);
  Matrix one = RandomUnitRows(1, 4, rng);
  Matrix copies(10, 4);
  for (int i = 0; i < 10; ++i) std::copy(one.Row(0), one.Row(0) + 4, copies.Row(i));
  CHECK(UtteranceScore(copies, copies) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix ea(10, 4), eb(10, 4);
  for (int i = 0; i < 10; ++i) {
    ea(i, 0) = 1.0;  // all along axis 0
    eb(i, 1) = 1.0;  // all along axis 1
  }
  CHECK(UtteranceScore(ea, eb) == 0.0);

  Matrix ra = RandomUnitRows(10, 4, rng);
  Matrix rb = RandomUnitRows(10, 4, rng);
  double oracle = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      double dot = 0.0;
      for (int e = 0; e < 4; ++e) dot += ra(i, e) * rb(j, e);
      oracle += dot;
    }
  oracle /= 100.0;
  CHECK(std::fabs(UtteranceScore(ra, rb) - oracle) < 1e-12);
  CHECK(std::fabs(UtteranceScore(ra, rb) - UtteranceScore(rb, ra)) < 1e-12);

  Matrix bad = ra;
  bad(0, 0) += 0.1;
  CHECK_THROWS_AS(UtteranceScore(bad, rb), Error);
}

TEST_CASE("ComputeEer separation, hand case and degenerate distributions") {
  auto separated = MakeRecords({0.8, 0.9, 0.95}, {0.1, 0.2, 0.3});
  EerResult s = ComputeEer(separated);
  CHECK(s.eer == 0.0);

  // pos {0.9, 0.8, 0.3} / neg {0.7, 0.2, 0.1}: EER = 1/3 at t = 0.7.
  auto hand = MakeRecords({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1});
  EerResult h = ComputeEer(hand);
  CHECK(h.eer == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(h.threshold == 0.7);
  CHECK(h.n_pos == 3);
  CHECK(h.n_neg == 3);

  // Indistinguishable distributions.
  auto same = MakeRecords({0.1, 0.5, 0.9}, {0.1, 0.5, 0.9});
  CHECK(ComputeEer(same).eer == doctest::Approx(0.5).epsilon(1e-15));

  auto single_class = MakeRecords({0.5}, {});
  CHECK_THROWS_AS(ComputeEer(single_class), Error);
}

TEST_CASE("ComputeEer equals the exhaustive oracle and is rank-invariant") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const int np = 1 + static_cast<int>(rng.UniformInt(200));
    const int nn = 1 + static_cast<int>(rng.UniformInt(200));
    std::vector<double> pos(np), neg(nn);
    for (auto& v : pos) v = rng.Uniform(-0.2, 1.0);
    for (auto& v : neg) v = rng.Uniform(-1.0, 0.4);
    // Occasionally quantize to force score ties.
    if (trial % 3 == 0) {
      for (auto& v : pos) v = std::round(v * 8) / 8;
      for (auto& v : neg) v = std::round(v * 8) / 8;
    }
    auto records = MakeRecords(pos, neg);
    EerResult got = ComputeEer(records);
    EerResult want = OracleEer(records);
    CHECK(got.eer == want.eer);
    CHECK(got.threshold == want.threshold);

    // Strictly increasing transform preserves the EER (rank statistic).
    auto transformed = records;
    for (auto& r : transformed) r.score = std::exp(1.7 * r.score) + r.score;
    CHECK(ComputeEer(transformed).eer == got.eer);
  }
}

TEST_CASE("Lower overlap strictly lowers the EER on a fixed list") {
  // Ten interleaved scores; removing the most-overlapping negatives (the
  // highest ones) must strictly reduce the EER.
  auto records = MakeRecords({0.9, 0.7, 0.5, 0.35, 0.2}, {0.8, 0.6, 0.4, 0.1, 0.0});
  const double before = ComputeEer(records).eer;
  std::vector<ScoreRecord> trimmed;
  for (const auto& r : records)
    if (!(r.trial.label == 0 && r.score >= 0.6)) trimmed.push_back(r);
  const double after = ComputeEer(trimmed).eer;
  CHECK(after < before);
}

TEST_CASE("ScoreHistogram conservation and degenerate ranges") {
  Rng rng(9);
  std::vector<double> pos(120), neg(80);
  for (auto& v : pos) v = rng.Uniform(0.0, 1.0);
  for (auto& v : neg) v = rng.Uniform(-1.0, 0.5);
  auto records = MakeRecords(pos, neg);

  for (int bins : {1, 7, 50, 100}) {
    auto hist = ScoreHistogram(records, bins);
    int64_t total_pos = 0, total_neg = 0;
    for (const auto& b : hist) {
      total_pos += b.pos_count;
      total_neg += b.neg_count;
    }
    CHECK(total_pos == 120);
    CHECK(total_neg == 80);
  }

  auto single = ScoreHistogram(MakeRecords({0.42}, {}), 50);
  REQUIRE(single.size() == 1);
  CHECK(single[0].pos_count == 1);

  auto equal_scores = ScoreHistogram(MakeRecords({0.5, 0.5}, {0.5}), 10);
  REQUIRE(equal_scores.size() == 1);
  CHECK(equal_scores[0].pos_count == 2);
  CHECK(equal_scores[0].neg_count == 1);
}

TEST_CASE("EmbedUtterance shape, determinism and short input") {
  EncoderConfig ec;
  ec.n_mels = 40;
  ec.embed_dim = 16;
  ec.conv_channels = {4};
  ec.kernel_sizes = {3};
  FeatureConfig fc;
  Rng rng(77);
  EncoderParams params = InitParams(ec, rng);

  Rng wav_rng(5);
  Waveform utt;
  utt.sample_rate = 16000;
  utt.samples.resize(64000);
  for (auto& s : utt.samples) s = wav_rng.Uniform(-0.5, 0.5);

  Matrix e1 = EmbedUtterance(ec, params, fc, utt, "utt_x", 10, 0);
  Matrix e2 = EmbedUtterance(ec, params, fc, utt, "utt_x", 10, 0);
  REQUIRE(e1.rows == 10);
  REQUIRE(e1.cols == 16);
  CHECK(e1.data == e2.data);
  for (int64_t i = 0; i < e1.rows; ++i) {
    double norm_sq = 0.0;
    for (int64_t j = 0; j < e1.cols; ++j) norm_sq += e1(i, j) * e1(i, j);
    CHECK(std::fabs(std::sqrt(norm_sq) - 1.0) < 1e-6);
  }
  // Different utterance id draws different segments.
  Matrix e3 = EmbedUtterance(ec, params, fc, utt, "utt_y", 10, 0);
  CHECK(e3.data != e1.data);

  Waveform tiny;
  tiny.sample_rate = 16000;
  tiny.samples.assign(1000, 0.1);
  CHECK_THROWS_AS(EmbedUtterance(ec, params, fc, tiny, "short", 10, 0), Error);
}

TEST_CASE("Evaluate embeds each distinct utterance once and is deterministic") {
  const fs::path dir = fs::temp_directory_path() / "mocovox_tests" / "eval_corpus";
  fs::remove_all(dir);
  CorpusConfig cc;
  cc.n_speakers = 8;
  cc.utts_per_speaker = 3;
  cc.seed = 31415;
  Manifest manifest = BuildCorpus(cc, dir);
  TrialList trials = BuildTrials(manifest, 60, 7);

  EncoderConfig ec;
  ec.n_mels = 40;
  ec.embed_dim = 16;
  ec.conv_channels = {4};
  ec.kernel_sizes = {3};
  FeatureConfig fc;
  Rng rng(99);
  EncoderParams params = InitParams(ec, rng);

  EvalResult r1 = Evaluate(ec, params, fc, manifest, trials, dir, 0);
  std::set<std::string> distinct;
  for (const auto& t : trials) {
    distinct.insert(t.utt_a);
    distinct.insert(t.utt_b);
  }
  CHECK(r1.n_utterances_embedded == static_cast<int64_t>(distinct.size()));
  CHECK(r1.records.size() == trials.size());

  EvalResult r2 = Evaluate(ec, params, fc, manifest, trials, dir, 0);
  CHECK(r1.eer.eer == r2.eer.eer);
  for (size_t i = 0; i < r1.records.size(); ++i)
    CHECK(r1.records[i].score == r2.records[i].score);

  // CSV round trip.
  WriteScoresCsv(dir / "scores.csv", r1.records);
  auto loaded = ReadScoresCsv(dir / "scores.csv");
  REQUIRE(loaded.size() == r1.records.size());
  CHECK(loaded[5].trial.utt_a == r1.records[5].trial.utt_a);
  CHECK(ComputeEer(loaded).eer == r1.eer.eer);

  CHECK_THROWS_AS(ReadScoresCsv(dir / "missing.csv"), Error);
}

TEST_CASE("FormatEerSummary format contract") {
  EerResult r;
  r.eer = 0.16394;
  r.threshold = 0.523456789;
  const std::string s = FormatEerSummary(r);
  CHECK(s.rfind("EER=16.39%", 0) == 0);
  CHECK(s.find(" threshold=0.5234") != std::string::npos);
}
