// core/include/mocovox/eval.h

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

#ifndef MOCOVOX_EVAL_H_
#define MOCOVOX_EVAL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "mocovox/dsp.h"
#include "mocovox/encoder.h"
#include "mocovox/synthdata.h"

namespace mocovox {

struct ScoreRecord {
  TrialPair trial;
  double score = 0.0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  int64_t n_pos = 0;
  int64_t n_neg = 0;
};

// n_segments random 1.8 s chops of the utterance (seeded per utterance id),
// each embedded through the query encoder. Returns n_segments x embed_dim
// unit-norm rows.
Matrix EmbedUtterance(const EncoderConfig& encoder, const EncoderParams& theta_q,
                      const FeatureConfig& features, const Waveform& utterance,
                      const std::string& utterance_id, int n_segments = 10,
                      uint64_t seed_base = 0, double segment_s = 1.8);

// Mean over all pairwise cosine similarities (dot products on unit rows).
double UtteranceScore(const Matrix& emb_a, const Matrix& emb_b);

// Threshold sweep over all distinct score values with the decision rule
// "same if score >= t": FRR(t) = frac(pos < t), FAR(t) = frac(neg >= t).
// EER = (FAR + FRR) / 2 at the t minimizing |FAR - FRR|, ties to lower t.
EerResult ComputeEer(const std::vector<ScoreRecord>& records);

struct EvalResult {
  EerResult eer;
  std::vector<ScoreRecord> records;
  int64_t n_utterances_embedded = 0;  // each distinct utterance exactly once
};

// Full verification protocol over the manifest's test split: embed each
// distinct trial utterance once, score every trial, compute the EER.
EvalResult Evaluate(const EncoderConfig& encoder, const EncoderParams& theta_q,
                    const FeatureConfig& features, const Manifest& manifest,
                    const TrialList& trials, const std::filesystem::path& data_dir,
                    uint64_t seed_base = 0, int n_segments = 10, double segment_s = 1.8);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  int64_t pos_count = 0;
  int64_t neg_count = 0;
};

// Uniform bins over [min score, max score] with separate positive/negative
// counts. A degenerate all-equal score range collapses to one epsilon bin.
std::vector<HistogramBin> ScoreHistogram(const std::vector<ScoreRecord>& records,
                                         int n_bins = 50);

// CSV surfaces: scores as `label,utt_a,utt_b,score`, histogram as
// `bin_lo,bin_hi,pos_count,neg_count`, both with a header row.
void WriteScoresCsv(const std::filesystem::path& path,
                    const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> ReadScoresCsv(const std::filesystem::path& path);
void WriteHistogramCsv(const std::filesystem::path& path,
                       const std::vector<HistogramBin>& bins);

// "EER=<percent, 2 decimals>% threshold=<value>"
std::string FormatEerSummary(const EerResult& result);

}  // namespace mocovox

#endif  // MOCOVOX_EVAL_H_
