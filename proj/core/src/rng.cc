// core/src/rng.cc

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

#include "mocovox/rng.h"

#include "mocovox/common.h"

namespace mocovox {

int64_t Rng::UniformInt(int64_t n) {
  if (n <= 0) MOCOVOX_ERR(kBounds) << "UniformInt needs n > 0, got " << n;
  const uint64_t un = static_cast<uint64_t>(n);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return static_cast<int64_t>(v % un);
}

uint64_t DeriveSeed(uint64_t base, std::string_view tag) {
  return HashStr(HashU64(0xcbf29ce484222325ull, base), tag);
}

uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a) {
  return HashU64(DeriveSeed(base, tag), a);
}

uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a, uint64_t b) {
  return HashU64(HashU64(DeriveSeed(base, tag), a), b);
}

uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t a, uint64_t b,
                    uint64_t c) {
  return HashU64(HashU64(HashU64(DeriveSeed(base, tag), a), b), c);
}

}  // namespace mocovox
