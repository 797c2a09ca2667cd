// core/include/mocovox/rng.h

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

#ifndef MOCOVOX_RNG_H_
#define MOCOVOX_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mocovox {

// Seeded generator with hand-written draw methods. std::mt19937_64 output is
// fully specified by the standard; the standard distributions are not, so the
// uniform/int draws below are spelled out to keep every artifact (corpus,
// metrics, checkpoints) reproducible per seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t NextU64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform in [0, n) without modulo bias.
  int64_t UniformInt(int64_t n);

 private:
  std::mt19937_64 gen_;
};

// Deterministic seed derivation for fan-out work (per utterance, per segment,
// per epoch). Results are independent of scheduling order by construction.
uint64_t DeriveSeed(uint64_t base, std::string_view tag);
uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a);
uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a, uint64_t b);
uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a, uint64_t b, uint64_t c);

}  // namespace mocovox

#endif  // MOCOVOX_RNG_H_
