// core/include/mocovox/trainer.h

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

#ifndef MOCOVOX_TRAINER_H_
#define MOCOVOX_TRAINER_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mocovox/augment.h"
#include "mocovox/contrast.h"
#include "mocovox/dsp.h"
#include "mocovox/encoder.h"
#include "mocovox/optim.h"
#include "mocovox/synthdata.h"

namespace mocovox {

enum class Pretext { kInstanceDiscrimination, kPrototypical, kAngularPrototypical };

// Full training configuration. File form: UTF-8 key=value lines, '#'
// comments; every field is addressable (see Serialize for the key names).
struct TrainConfig {
  double lr = 0.03;
  double sgd_momentum = 0.9;
  double weight_decay = 1e-4;
  int64_t batch_size = 64;
  int64_t epochs = 10;
  int64_t queue_size = 1024;
  double m = 0.999;
  double tau = 0.07;
  double segment_s = 1.8;
  Pretext pretext = Pretext::kInstanceDiscrimination;
  AugmentPolicy augment;
  uint64_t seed = 0;
  EncoderConfig encoder;
  FeatureConfig features;

  void Validate() const;
  std::string Serialize() const;
  static TrainConfig Parse(std::istream& in, const std::string& origin);
  static TrainConfig FromFile(const std::filesystem::path& path);
};

// One batch of positive pairs: two segments chopped from each of B distinct
// dev utterances. Index i of both segment vectors belongs to utterance i.
struct PairBatch {
  std::vector<int64_t> utterance_indices;
  std::vector<std::string> utterance_ids;
  std::vector<Waveform> query_segments;
  std::vector<Waveform> key_segments;
};

// B distinct utterances uniformly without replacement, two uniform segment
// starts each (they may overlap in time). `audio` is aligned with `records`.
PairBatch SamplePairBatch(const std::vector<UtteranceRecord>& records,
                          const std::vector<Waveform>& audio, int64_t batch_size,
                          double segment_s, Rng& rng);

// MCVX1 checkpoint: magic line, UTF-8 key=value config block terminated by a
// blank line, then theta_q, theta_k and the queue buffer as little-endian
// 32-bit floats in layout order.
struct Checkpoint {
  EncoderConfig encoder;
  FeatureConfig features;
  double segment_s = 1.8;
  double m = 0.999;
  double tau = 0.07;
  std::vector<double> theta_q;
  std::vector<double> theta_k;
  int64_t queue_ptr = 0;
  int64_t queue_filled = 0;
  Matrix queue_buffer;  // capacity x embed_dim

  static constexpr const char* kMagic = "MCVX1";
};

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Raises a config error naming the first differing field.
void RequireSameEncoderConfig(const EncoderConfig& expected, const EncoderConfig& actual);

struct TrainResult {
  std::filesystem::path checkpoint_path;       // final state
  std::filesystem::path init_checkpoint_path;  // untrained parameters
  std::filesystem::path metrics_path;          // CSV step log
  int64_t steps = 0;
  double final_loss = 0.0;
};

// Runs cfg.epochs passes over the dev split (ceil(n_dev / B) steps each):
// sample pairs, augment per policy, extract log-mel features, then one
// MoCoStep (instance discrimination) or an in-batch prototypical step with
// the EMA and queue maintained for parity. Deterministic per seed with
// MOCOVOX_THREADS=0; per-sample seeding keeps any thread count bit-identical.
TrainResult Train(const TrainConfig& cfg, const Manifest& manifest,
                  const std::filesystem::path& data_dir,
                  const std::filesystem::path& out_dir);

}  // namespace mocovox

#endif  // MOCOVOX_TRAINER_H_
