// core/include/mocovox/contrast.h

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

#ifndef MOCOVOX_CONTRAST_H_
#define MOCOVOX_CONTRAST_H_

#include <cstdint>

#include "mocovox/common.h"
#include "mocovox/encoder.h"
#include "mocovox/optim.h"

namespace mocovox {

// Embedding rows must be unit-norm within this tolerance wherever a contract
// requires it (loss inputs, queue rows).
constexpr double kUnitNormTol = 1e-4;

// Fixed-capacity ring buffer of key embeddings. The capacity must be a
// multiple of the batch size so wraparound writes never split a batch.
class DictionaryQueue {
 public:
  DictionaryQueue(int64_t capacity, int dim, int64_t batch_size);

  // Writes the rows at [ptr, ptr + B), advances the pointer modulo K, and
  // saturates the fill count. B must divide the capacity.
  void Enqueue(const Matrix& keys);

  // The filled rows only; row order inside the view is irrelevant to the
  // loss. Empty queue is a state error (see MoCoTrainState bootstrap).
  ConstMatrixView NegativesView() const;

  int64_t capacity() const { return buffer_.rows; }
  int dim() const { return static_cast<int>(buffer_.cols); }
  int64_t ptr() const { return ptr_; }
  int64_t filled() const { return filled_; }
  const Matrix& buffer() const { return buffer_; }

  // Restores serialized state (checkpoint loading).
  void Restore(const Matrix& buffer, int64_t ptr, int64_t filled);

 private:
  Matrix buffer_;
  int64_t ptr_ = 0;
  int64_t filled_ = 0;
};

struct InfoNceResult {
  double loss = 0.0;
  Matrix grad_q;           // exact d loss / d q; keys get no gradient
  double pos_logit_mean = 0.0;
};

// (N+1)-way softmax cross-entropy per query: logits are the dot products of
// q_i with its positive key and the N negatives, divided by tau. Loss is the
// batch mean; gradients treat all keys as constants. Numerically stabilized
// by max-logit subtraction.
InfoNceResult InfoNceLoss(const Matrix& q, const Matrix& k_pos, ConstMatrixView negatives,
                          double tau);

// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise.
void MomentumUpdate(EncoderParams& theta_k, const EncoderParams& theta_q, double m);

struct PrototypicalResult {
  double loss = 0.0;
  Matrix grad_queries;
  Matrix grad_supports;
  double diag_logit_mean = 0.0;
};

// Negative squared Euclidean distance logits S[i][j] = -|q_i - s_j|^2 with
// softmax cross-entropy against the matched support. With one support
// segment per utterance the class centroid is the support itself.
PrototypicalResult PrototypicalLoss(const Matrix& queries, const Matrix& supports);

struct AngularPrototypicalResult {
  double loss = 0.0;
  Matrix grad_queries;
  Matrix grad_supports;
  double grad_w = 0.0;
  double grad_b = 0.0;
  double diag_logit_mean = 0.0;
};

constexpr double kAngularScaleMin = 1e-6;

// Scaled-and-shifted cosine logits S[i][j] = w * cos(q_i, s_j) + b. The
// cosine is differentiated exactly (including the norms), so finite
// differences on raw inputs agree with the analytic gradients. Callers clamp
// w to kAngularScaleMin after each update.
AngularPrototypicalResult AngularPrototypicalLoss(const Matrix& queries,
                                                  const Matrix& supports, double w,
                                                  double b);

// Full momentum-contrast state: two same-architecture parameter vectors
// linked by the EMA update, plus the negatives queue.
struct MoCoState {
  EncoderConfig config;
  EncoderParams theta_q;
  EncoderParams theta_k;
  DictionaryQueue queue;
  double m = 0.999;
  double tau = 0.07;

  MoCoState(const EncoderConfig& cfg, EncoderParams init, int64_t queue_size,
            int64_t batch_size, double momentum = 0.999, double temperature = 0.07);
};

struct StepMetrics {
  double loss = 0.0;
  double pos_logit_mean = 0.0;
  int64_t queue_filled = 0;
};

// One training step: forward queries through theta_q (with tape), keys
// through theta_k (no tape, no gradient), InfoNCE against the queue view,
// backprop and SGD on theta_q only, then the EMA update, then enqueue the
// new keys. That order is fixed. The queue must be non-empty; see
// BootstrapQueue for the first batch.
StepMetrics MoCoStep(MoCoState& state, const std::vector<LogMelSegment>& query_segments,
                     const std::vector<LogMelSegment>& key_segments, OptState& opt,
                     const SgdConfig& sgd);

// Encodes one batch of key segments with theta_k and enqueues it without any
// parameter update, so the first MoCoStep has negatives to contrast against.
void BootstrapQueue(MoCoState& state, const std::vector<LogMelSegment>& key_segments);

}  // namespace mocovox

#endif  // MOCOVOX_CONTRAST_H_
