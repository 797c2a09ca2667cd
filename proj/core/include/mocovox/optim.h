// core/include/mocovox/optim.h

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

#ifndef MOCOVOX_OPTIM_H_
#define MOCOVOX_OPTIM_H_

#include <vector>

namespace mocovox {

// SGD with classical momentum and L2 weight decay; lr 0.03 by default.
struct SgdConfig {
  double lr = 0.03;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

struct OptState {
  std::vector<double> velocity;
};

// g' = grad + weight_decay * theta; v <- momentum * v + g'; theta <- theta - lr * v.
// The velocity buffer is lazily sized on first use.
void SgdStep(std::vector<double>& theta, const std::vector<double>& grad, OptState& opt,
             const SgdConfig& cfg);

}  // namespace mocovox

#endif  // MOCOVOX_OPTIM_H_
