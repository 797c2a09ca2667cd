// core/src/contrast.cc

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

#include "mocovox/contrast.h"

#include <cmath>

namespace mocovox {

namespace {

void CheckUnitRows(ConstMatrixView m, const char* what) {
  for (int64_t i = 0; i < m.rows; ++i) {
    double norm_sq = 0.0;
    const double* row = m.Row(i);
    for (int64_t j = 0; j < m.cols; ++j) norm_sq += row[j] * row[j];
    const double norm = std::sqrt(norm_sq);
    if (std::fabs(norm - 1.0) > kUnitNormTol)
      MOCOVOX_ERR(kContract) << what << " row " << i << " has norm " << norm
                             << ", expected 1 within " << kUnitNormTol;
  }
}

double Dot(const double* a, const double* b, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Softmax cross-entropy over a logit matrix with target class = row index.
// Returns the mean loss and writes the (p - onehot)/B coefficient matrix.
double SoftmaxCeDiag(const Matrix& logits, Matrix* coeff, double* diag_mean) {
  const int64_t B = logits.rows;
  *coeff = Matrix(B, logits.cols);
  double loss = 0.0;
  double diag = 0.0;
  for (int64_t i = 0; i < B; ++i) {
    const double* row = logits.Row(i);
    double max_logit = row[0];
    for (int64_t j = 1; j < logits.cols; ++j) max_logit = std::max(max_logit, row[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < logits.cols; ++j) denom += std::exp(row[j] - max_logit);
    const double log_denom = std::log(denom);
    loss += -(row[i] - max_logit - log_denom);
    diag += row[i];
    double* crow = coeff->Row(i);
    for (int64_t j = 0; j < logits.cols; ++j) {
      const double p = std::exp(row[j] - max_logit) / denom;
      crow[j] = (p - (j == i ? 1.0 : 0.0)) / static_cast<double>(B);
    }
  }
  *diag_mean = diag / static_cast<double>(B);
  return loss / static_cast<double>(B);
}

}  // namespace

DictionaryQueue::DictionaryQueue(int64_t capacity, int dim, int64_t batch_size) {
  if (capacity < 1) MOCOVOX_ERR(kConfig) << "queue capacity must be >= 1, got " << capacity;
  if (dim < 1) MOCOVOX_ERR(kConfig) << "queue dim must be >= 1, got " << dim;
  if (batch_size < 1 || capacity % batch_size != 0)
    MOCOVOX_ERR(kConfig) << "queue capacity " << capacity << " must be a multiple of the batch size "
                         << batch_size;
  buffer_ = Matrix(capacity, dim);
}

void DictionaryQueue::Enqueue(const Matrix& keys) {
  if (keys.cols != buffer_.cols)
    MOCOVOX_ERR(kShape) << "enqueue dim " << keys.cols << " != queue dim " << buffer_.cols;
  const int64_t B = keys.rows;
  if (B < 1 || buffer_.rows % B != 0)
    MOCOVOX_ERR(kConfig) << "enqueue batch " << B << " must divide queue capacity "
                         << buffer_.rows;
  CheckUnitRows(keys, "enqueue keys");
  for (int64_t i = 0; i < B; ++i) {
    double* dst = buffer_.Row(ptr_ + i);
    const double* src = keys.Row(i);
    std::copy(src, src + keys.cols, dst);
  }
  ptr_ = (ptr_ + B) % buffer_.rows;
  filled_ = std::min(filled_ + B, buffer_.rows);
}

ConstMatrixView DictionaryQueue::NegativesView() const {
  if (filled_ < 1)
    MOCOVOX_ERR(kState) << "queue is empty; bootstrap it with one key batch before training";
  // Rows [0, filled) are exactly the valid ones: the fill grows from the
  // front, and once saturated every row is valid.
  return ConstMatrixView(buffer_.data.data(), filled_, buffer_.cols);
}

void DictionaryQueue::Restore(const Matrix& buffer, int64_t ptr, int64_t filled) {
  if (buffer.rows != buffer_.rows || buffer.cols != buffer_.cols)
    MOCOVOX_ERR(kShape) << "restore buffer is " << buffer.rows << "x" << buffer.cols
                        << ", queue is " << buffer_.rows << "x" << buffer_.cols;
  if (ptr < 0 || ptr >= buffer_.rows || filled < 0 || filled > buffer_.rows)
    MOCOVOX_ERR(kBounds) << "restore ptr/filled out of range";
  buffer_ = buffer;
  ptr_ = ptr;
  filled_ = filled;
}

InfoNceResult InfoNceLoss(const Matrix& q, const Matrix& k_pos, ConstMatrixView negatives,
                          double tau) {
  if (tau <= 0.0) MOCOVOX_ERR(kConfig) << "tau must be positive, got " << tau;
  if (q.rows != k_pos.rows || q.cols != k_pos.cols)
    MOCOVOX_ERR(kShape) << "q is " << q.rows << "x" << q.cols << ", k_pos is " << k_pos.rows
                        << "x" << k_pos.cols;
  if (negatives.rows < 1) MOCOVOX_ERR(kShape) << "need at least one negative key";
  if (negatives.cols != q.cols)
    MOCOVOX_ERR(kShape) << "negative dim " << negatives.cols << " != query dim " << q.cols;
  CheckUnitRows(q, "q");
  CheckUnitRows(k_pos, "k_pos");
  CheckUnitRows(negatives, "negatives");

  const int64_t B = q.rows, d = q.cols, N = negatives.rows;
  InfoNceResult result;
  result.grad_q = Matrix(B, d);
  double loss = 0.0, pos_mean = 0.0;
  for (int64_t i = 0; i < B; ++i) {
    const double* qi = q.Row(i);
    std::vector<double> logits(N + 1);
    logits[0] = Dot(qi, k_pos.Row(i), d) / tau;
    for (int64_t j = 0; j < N; ++j) logits[j + 1] = Dot(qi, negatives.Row(j), d) / tau;

    double max_logit = logits[0];
    for (int64_t j = 1; j <= N; ++j) max_logit = std::max(max_logit, logits[j]);
    double denom = 0.0;
    for (int64_t j = 0; j <= N; ++j) denom += std::exp(logits[j] - max_logit);
    loss += -(logits[0] - max_logit - std::log(denom));
    pos_mean += logits[0];

    // d loss_i / d q_i = (1 / tau) * [(p_0 - 1) k_pos_i + sum_j p_j neg_j],
    // averaged over the batch.
    const double scale = 1.0 / (tau * static_cast<double>(B));
    double* grow = result.grad_q.Row(i);
    const double p0 = std::exp(logits[0] - max_logit) / denom;
    const double* kp = k_pos.Row(i);
    for (int64_t e = 0; e < d; ++e) grow[e] = scale * (p0 - 1.0) * kp[e];
    for (int64_t j = 0; j < N; ++j) {
      const double pj = std::exp(logits[j + 1] - max_logit) / denom;
      const double* nj = negatives.Row(j);
      const double c = scale * pj;
      for (int64_t e = 0; e < d; ++e) grow[e] += c * nj[e];
    }
  }
  result.loss = loss / static_cast<double>(B);
  result.pos_logit_mean = pos_mean / static_cast<double>(B);
  return result;
}

void MomentumUpdate(EncoderParams& theta_k, const EncoderParams& theta_q, double m) {
  if (theta_k.theta.size() != theta_q.theta.size())
    MOCOVOX_ERR(kShape) << "momentum update layout mismatch: " << theta_k.theta.size()
                        << " vs " << theta_q.theta.size();
  if (!(m >= 0.0 && m <= 1.0))
    MOCOVOX_ERR(kConfig) << "momentum coefficient must be in [0, 1], got " << m;
  for (size_t i = 0; i < theta_k.theta.size(); ++i)
    theta_k.theta[i] = m * theta_k.theta[i] + (1.0 - m) * theta_q.theta[i];
}

PrototypicalResult PrototypicalLoss(const Matrix& queries, const Matrix& supports) {
  if (queries.rows != supports.rows || queries.cols != supports.cols)
    MOCOVOX_ERR(kShape) << "queries " << queries.rows << "x" << queries.cols
                        << " vs supports " << supports.rows << "x" << supports.cols;
  if (queries.rows < 2)
    MOCOVOX_ERR(kConfig) << "prototypical loss needs B >= 2 (no negatives otherwise)";
  CheckUnitRows(queries, "queries");
  CheckUnitRows(supports, "supports");

  const int64_t B = queries.rows, d = queries.cols;
  Matrix logits(B, B);
  for (int64_t i = 0; i < B; ++i) {
    const double* qi = queries.Row(i);
    for (int64_t j = 0; j < B; ++j) {
      const double* sj = supports.Row(j);
      double dist_sq = 0.0;
      for (int64_t e = 0; e < d; ++e) {
        const double diff = qi[e] - sj[e];
        dist_sq += diff * diff;
      }
      logits(i, j) = -dist_sq;
    }
  }

  PrototypicalResult result;
  Matrix coeff;
  result.loss = SoftmaxCeDiag(logits, &coeff, &result.diag_logit_mean);
  result.grad_queries = Matrix(B, d);
  result.grad_supports = Matrix(B, d);
  for (int64_t i = 0; i < B; ++i) {
    const double* qi = queries.Row(i);
    double* gq = result.grad_queries.Row(i);
    for (int64_t j = 0; j < B; ++j) {
      const double c = coeff(i, j);
      if (c == 0.0) continue;
      const double* sj = supports.Row(j);
      double* gs = result.grad_supports.Row(j);
      for (int64_t e = 0; e < d; ++e) {
        const double two_diff = 2.0 * (qi[e] - sj[e]);
        gq[e] += c * -two_diff;  // dS/dq = -2 (q - s)
        gs[e] += c * two_diff;   // dS/ds = +2 (q - s)
      }
    }
  }
  return result;
}

AngularPrototypicalResult AngularPrototypicalLoss(const Matrix& queries,
                                                  const Matrix& supports, double w,
                                                  double b) {
  if (queries.rows != supports.rows || queries.cols != supports.cols)
    MOCOVOX_ERR(kShape) << "queries " << queries.rows << "x" << queries.cols
                        << " vs supports " << supports.rows << "x" << supports.cols;
  if (queries.rows < 2)
    MOCOVOX_ERR(kConfig) << "angular prototypical loss needs B >= 2";
  if (w < kAngularScaleMin)
    MOCOVOX_ERR(kContract) << "scale w=" << w << " below minimum " << kAngularScaleMin;

  const int64_t B = queries.rows, d = queries.cols;
  std::vector<double> qnorm(B), snorm(B);
  for (int64_t i = 0; i < B; ++i) {
    qnorm[i] = std::sqrt(Dot(queries.Row(i), queries.Row(i), d));
    snorm[i] = std::sqrt(Dot(supports.Row(i), supports.Row(i), d));
    if (qnorm[i] < 1e-12 || snorm[i] < 1e-12)
      MOCOVOX_ERR(kNumeric) << "zero-norm row in angular prototypical inputs";
  }
  Matrix cos(B, B), logits(B, B);
  for (int64_t i = 0; i < B; ++i)
    for (int64_t j = 0; j < B; ++j) {
      cos(i, j) = Dot(queries.Row(i), supports.Row(j), d) / (qnorm[i] * snorm[j]);
      logits(i, j) = w * cos(i, j) + b;
    }

  AngularPrototypicalResult result;
  Matrix coeff;
  result.loss = SoftmaxCeDiag(logits, &coeff, &result.diag_logit_mean);
  result.grad_queries = Matrix(B, d);
  result.grad_supports = Matrix(B, d);
  for (int64_t i = 0; i < B; ++i) {
    const double* qi = queries.Row(i);
    double* gq = result.grad_queries.Row(i);
    for (int64_t j = 0; j < B; ++j) {
      const double c = coeff(i, j);
      result.grad_w += c * cos(i, j);
      result.grad_b += c;
      const double cw = c * w;
      const double* sj = supports.Row(j);
      double* gs = result.grad_supports.Row(j);
      // d cos / d q = s / (|q||s|) - cos * q / |q|^2, and symmetrically for s.
      const double inv_qs = 1.0 / (qnorm[i] * snorm[j]);
      const double cq = cos(i, j) / (qnorm[i] * qnorm[i]);
      const double cs = cos(i, j) / (snorm[j] * snorm[j]);
      for (int64_t e = 0; e < d; ++e) {
        gq[e] += cw * (sj[e] * inv_qs - cq * qi[e]);
        gs[e] += cw * (qi[e] * inv_qs - cs * sj[e]);
      }
    }
  }
  return result;
}

MoCoState::MoCoState(const EncoderConfig& cfg, EncoderParams init, int64_t queue_size,
                     int64_t batch_size, double momentum, double temperature)
    : config(cfg),
      theta_q(std::move(init)),
      theta_k(theta_q),  // exact copy at start
      queue(queue_size, cfg.embed_dim, batch_size),
      m(momentum),
      tau(temperature) {
  if (!(m >= 0.0 && m <= 1.0)) MOCOVOX_ERR(kConfig) << "momentum m must be in [0, 1]";
  if (tau <= 0.0) MOCOVOX_ERR(kConfig) << "temperature tau must be positive";
}

void BootstrapQueue(MoCoState& state, const std::vector<LogMelSegment>& key_segments) {
  Matrix keys = Forward(state.config, state.theta_k, key_segments, nullptr);
  state.queue.Enqueue(keys);
}

StepMetrics MoCoStep(MoCoState& state, const std::vector<LogMelSegment>& query_segments,
                     const std::vector<LogMelSegment>& key_segments, OptState& opt,
                     const SgdConfig& sgd) {
  if (query_segments.size() != key_segments.size())
    MOCOVOX_ERR(kShape) << "query/key batch size mismatch: " << query_segments.size()
                        << " vs " << key_segments.size();

  // (1) queries through theta_q, recording the tape.
  ForwardTape tape;
  Matrix q = Forward(state.config, state.theta_q, query_segments, &tape);
  // (2) keys through theta_k; no tape, no gradient.
  Matrix k = Forward(state.config, state.theta_k, key_segments, nullptr);
  // (3) InfoNCE against the current queue contents.
  InfoNceResult nce = InfoNceLoss(q, k, state.queue.NegativesView(), state.tau);
  if (!std::isfinite(nce.loss)) MOCOVOX_ERR(kNumeric) << "non-finite InfoNCE loss";
  // (4) backprop and update theta_q only.
  std::vector<double> grad = Backward(state.config, state.theta_q, tape, nce.grad_q);
  SgdStep(state.theta_q.theta, grad, opt, sgd);
  // (5) EMA update of theta_k.
  MomentumUpdate(state.theta_k, state.theta_q, state.m);
  // (6) enqueue the new keys.
  state.queue.Enqueue(k);

  StepMetrics metrics;
  metrics.loss = nce.loss;
  metrics.pos_logit_mean = nce.pos_logit_mean;
  metrics.queue_filled = state.queue.filled();
  return metrics;
}

}  // namespace mocovox
