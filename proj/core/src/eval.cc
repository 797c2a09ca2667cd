// core/src/eval.cc

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

#include "mocovox/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "mocovox/rng.h"

namespace mocovox {

Matrix EmbedUtterance(const EncoderConfig& encoder, const EncoderParams& theta_q,
                      const FeatureConfig& features, const Waveform& utterance,
                      const std::string& utterance_id, int n_segments, uint64_t seed_base,
                      double segment_s) {
  if (n_segments < 1) MOCOVOX_ERR(kConfig) << "n_segments must be >= 1";
  const int64_t seg = std::llround(segment_s * utterance.sample_rate);
  if (seg > utterance.NumSamples())
    MOCOVOX_ERR(kData) << "utterance " << utterance_id << " of " << utterance.NumSamples()
                       << " samples is shorter than one " << segment_s << " s segment";
  Rng rng(DeriveSeed(seed_base, "eval", HashStr(0, utterance_id)));
  const int64_t span = utterance.NumSamples() - seg + 1;
  std::vector<LogMelSegment> feats(n_segments);
  for (int i = 0; i < n_segments; ++i) {
    const int64_t start = rng.UniformInt(span);
    feats[i] = LogMel(ChopSegment(utterance, start, segment_s), features);
  }
  return Forward(encoder, theta_q, feats, nullptr);
}

double UtteranceScore(const Matrix& emb_a, const Matrix& emb_b) {
  if (emb_a.cols != emb_b.cols)
    MOCOVOX_ERR(kShape) << "embedding dims differ: " << emb_a.cols << " vs " << emb_b.cols;
  if (emb_a.rows < 1 || emb_b.rows < 1)
    MOCOVOX_ERR(kShape) << "UtteranceScore needs non-empty embedding sets";
  for (const Matrix* m : {&emb_a, &emb_b}) {
    for (int64_t i = 0; i < m->rows; ++i) {
      double norm_sq = 0.0;
      for (int64_t j = 0; j < m->cols; ++j) norm_sq += (*m)(i, j) * (*m)(i, j);
      if (std::fabs(std::sqrt(norm_sq) - 1.0) > 1e-4)
        MOCOVOX_ERR(kContract) << "UtteranceScore expects unit-norm rows, got norm "
                               << std::sqrt(norm_sq);
    }
  }
  double acc = 0.0;
  for (int64_t i = 0; i < emb_a.rows; ++i) {
    const double* a = emb_a.Row(i);
    for (int64_t j = 0; j < emb_b.rows; ++j) {
      const double* b = emb_b.Row(j);
      double dot = 0.0;
      for (int64_t e = 0; e < emb_a.cols; ++e) dot += a[e] * b[e];
      acc += dot;
    }
  }
  return acc / static_cast<double>(emb_a.rows * emb_b.rows);
}

EerResult ComputeEer(const std::vector<ScoreRecord>& records) {
  std::vector<double> pos, neg;
  for (const auto& r : records) {
    if (!std::isfinite(r.score)) MOCOVOX_ERR(kData) << "non-finite trial score";
    (r.trial.label == 1 ? pos : neg).push_back(r.score);
  }
  if (pos.empty() || neg.empty())
    MOCOVOX_ERR(kData) << "EER needs at least one positive and one negative trial, got "
                       << pos.size() << " / " << neg.size();
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  // Candidate thresholds: every distinct score value, ascending.
  std::vector<double> candidates;
  candidates.reserve(pos.size() + neg.size());
  candidates.insert(candidates.end(), pos.begin(), pos.end());
  candidates.insert(candidates.end(), neg.begin(), neg.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  EerResult best;
  double best_gap = -1.0;
  for (double t : candidates) {
    // FRR: positives rejected (score < t). FAR: negatives accepted (>= t).
    const auto frr_count = std::lower_bound(pos.begin(), pos.end(), t) - pos.begin();
    const auto far_count = neg.end() - std::lower_bound(neg.begin(), neg.end(), t);
    const double frr = static_cast<double>(frr_count) / static_cast<double>(pos.size());
    const double far = static_cast<double>(far_count) / static_cast<double>(neg.size());
    const double gap = std::fabs(far - frr);
    if (best_gap < 0.0 || gap < best_gap) {  // ties keep the lower threshold
      best_gap = gap;
      best.eer = 0.5 * (far + frr);
      best.threshold = t;
    }
  }
  best.n_pos = static_cast<int64_t>(pos.size());
  best.n_neg = static_cast<int64_t>(neg.size());
  return best;
}

EvalResult Evaluate(const EncoderConfig& encoder, const EncoderParams& theta_q,
                    const FeatureConfig& features, const Manifest& manifest,
                    const TrialList& trials, const std::filesystem::path& data_dir,
                    uint64_t seed_base, int n_segments, double segment_s) {
  if (trials.empty()) MOCOVOX_ERR(kData) << "empty trial list";

  // Distinct utterances referenced by the trials, embedded exactly once.
  std::vector<std::string> utt_ids;
  std::map<std::string, int64_t> index;
  for (const auto& t : trials) {
    for (const std::string* id : {&t.utt_a, &t.utt_b}) {
      if (index.emplace(*id, static_cast<int64_t>(utt_ids.size())).second)
        utt_ids.push_back(*id);
    }
  }
  std::vector<Matrix> embeddings(utt_ids.size());
  ParallelFor(static_cast<int64_t>(utt_ids.size()), [&](int64_t i) {
    const UtteranceRecord& rec = manifest.Find(utt_ids[i]);
    const Waveform utt = ReadWav(data_dir / rec.path);
    embeddings[i] = EmbedUtterance(encoder, theta_q, features, utt, utt_ids[i], n_segments,
                                   seed_base, segment_s);
  });

  EvalResult result;
  result.n_utterances_embedded = static_cast<int64_t>(utt_ids.size());
  result.records.reserve(trials.size());
  for (const auto& t : trials) {
    ScoreRecord r;
    r.trial = t;
    r.score = UtteranceScore(embeddings[index.at(t.utt_a)], embeddings[index.at(t.utt_b)]);
    result.records.push_back(std::move(r));
  }
  result.eer = ComputeEer(result.records);
  return result;
}

std::vector<HistogramBin> ScoreHistogram(const std::vector<ScoreRecord>& records,
                                         int n_bins) {
  if (records.empty()) MOCOVOX_ERR(kData) << "cannot histogram an empty score list";
  if (n_bins < 1) MOCOVOX_ERR(kConfig) << "n_bins must be >= 1, got " << n_bins;
  double lo = records[0].score, hi = records[0].score;
  for (const auto& r : records) {
    lo = std::min(lo, r.score);
    hi = std::max(hi, r.score);
  }
  // All-equal scores: one epsilon-wide bin, no division by zero.
  if (hi <= lo) {
    HistogramBin bin;
    bin.lo = lo;
    bin.hi = lo + 1e-12;
    for (const auto& r : records) (r.trial.label == 1 ? bin.pos_count : bin.neg_count)++;
    return {bin};
  }
  std::vector<HistogramBin> bins(n_bins);
  const double width = (hi - lo) / n_bins;
  for (int b = 0; b < n_bins; ++b) {
    bins[b].lo = lo + b * width;
    bins[b].hi = b + 1 == n_bins ? hi : lo + (b + 1) * width;
  }
  for (const auto& r : records) {
    int b = static_cast<int>((r.score - lo) / width);
    if (b >= n_bins) b = n_bins - 1;
    (r.trial.label == 1 ? bins[b].pos_count : bins[b].neg_count)++;
  }
  return bins;
}

void WriteScoresCsv(const std::filesystem::path& path,
                    const std::vector<ScoreRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  out << "label,utt_a,utt_b,score\n";
  for (const auto& r : records)
    out << r.trial.label << ',' << r.trial.utt_a << ',' << r.trial.utt_b << ','
        << FormatDouble(r.score) << '\n';
  if (!out) MOCOVOX_ERR(kIo) << "short write to " << path;
}

std::vector<ScoreRecord> ReadScoresCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open scores file " << path;
  std::vector<ScoreRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("label,", 0) == 0) continue;  // header
    auto fields = SplitString(line, ',');
    if (fields.size() != 4)
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": expected 4 comma-separated fields";
    ScoreRecord r;
    const int64_t label = ParseInt(fields[0], "score label");
    if (label != 0 && label != 1)
      MOCOVOX_ERR(kFormat) << path << ":" << lineno << ": label must be 0 or 1";
    r.trial.label = static_cast<int>(label);
    r.trial.utt_a = fields[1];
    r.trial.utt_b = fields[2];
    r.score = ParseDouble(fields[3], "score");
    records.push_back(std::move(r));
  }
  return records;
}

void WriteHistogramCsv(const std::filesystem::path& path,
                       const std::vector<HistogramBin>& bins) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  out << "bin_lo,bin_hi,pos_count,neg_count\n";
  for (const auto& b : bins)
    out << FormatDouble(b.lo) << ',' << FormatDouble(b.hi) << ',' << b.pos_count << ','
        << b.neg_count << '\n';
  if (!out) MOCOVOX_ERR(kIo) << "short write to " << path;
}

std::string FormatEerSummary(const EerResult& result) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "EER=%.2f%% threshold=%s", 100.0 * result.eer,
                FormatDouble(result.threshold).c_str());
  return buf;
}

}  // namespace mocovox
