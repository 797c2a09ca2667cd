// core/include/mocovox/encoder.h

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

#ifndef MOCOVOX_ENCODER_H_
#define MOCOVOX_ENCODER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mocovox/common.h"
#include "mocovox/dsp.h"
#include "mocovox/rng.h"

namespace mocovox {

enum class NormKind { kNone, kPerChannelInstance };

// Small convolutional encoder over time x mel: per block conv (same padding,
// odd square kernel) -> optional per-channel instance norm -> ReLU -> 2x2
// mean pool; then temporal mean pooling, a linear layer to embed_dim, and L2
// normalization. An empty block list degenerates to linear-on-mean-features.
struct EncoderConfig {
  int n_mels = 40;
  int embed_dim = 256;
  std::vector<int> conv_channels = {8, 16, 32};
  std::vector<int> kernel_sizes = {3, 3, 3};
  NormKind normalization = NormKind::kNone;

  void Validate() const;
  int NumBlocks() const { return static_cast<int>(conv_channels.size()); }
  // Mel extent after the pooling cascade.
  int MelOutDim() const;
  // Input dimension of the final linear layer.
  int FeatureDim() const;

  std::string Serialize() const;
  static EncoderConfig Deserialize(const std::vector<std::pair<std::string, std::string>>& kv);
  bool operator==(const EncoderConfig&) const = default;
};

// Named slice of the flat parameter vector.
struct LayoutEntry {
  std::string name;
  int64_t offset = 0;
  int64_t size = 0;
};

struct ParamLayout {
  std::vector<LayoutEntry> entries;
  int64_t total = 0;
};

ParamLayout MakeLayout(const EncoderConfig& cfg);
int64_t NumParams(const EncoderConfig& cfg);

// Flat parameter vector; the layout is implied by the EncoderConfig.
struct EncoderParams {
  std::vector<double> theta;
};

// Glorot-uniform weights, zero biases. Deterministic per rng state.
EncoderParams InitParams(const EncoderConfig& cfg, Rng& rng);

// Activations recorded by one forward call, sufficient for an exact backward
// pass of that (params, batch) pair.
struct SampleTape {
  std::vector<std::vector<double>> block_inputs;   // activation entering conv b
  std::vector<std::vector<double>> block_preact;   // post-norm, pre-ReLU
  std::vector<std::vector<double>> block_inv_std;  // per channel, if instance norm
  std::vector<double> features;                    // linear layer input
  std::vector<double> pre_norm;                    // z before L2 normalization
  double z_norm = 0.0;
};

struct ForwardTape {
  uint64_t params_hash = 0;
  int64_t batch = 0;
  int64_t frames = 0;
  std::vector<SampleTape> samples;
};

// Batch forward pass. All segments must share T and n_mels. Returns B x
// embed_dim unit-norm embeddings; fills *tape when non-null.
Matrix Forward(const EncoderConfig& cfg, const EncoderParams& params,
               const std::vector<LogMelSegment>& batch, ForwardTape* tape = nullptr);

// Exact gradient of sum_i <grad_embeddings_i, embedding_i> with respect to
// theta, including the L2-normalization Jacobian. The tape must come from a
// Forward call with these exact parameter values.
std::vector<double> Backward(const EncoderConfig& cfg, const EncoderParams& params,
                             const ForwardTape& tape, const Matrix& grad_embeddings);

// Gradient through e = z / |z|: (upstream - <upstream, e> e) / |z|.
std::vector<double> L2NormalizeBackward(const std::vector<double>& z,
                                        const std::vector<double>& upstream);

uint64_t ParamsHash(const EncoderParams& params);

}  // namespace mocovox

#endif  // MOCOVOX_ENCODER_H_
