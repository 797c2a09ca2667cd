// core/src/optim.cc

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

#include "mocovox/optim.h"

#include "mocovox/common.h"

namespace mocovox {

void SgdStep(std::vector<double>& theta, const std::vector<double>& grad, OptState& opt,
             const SgdConfig& cfg) {
  if (theta.size() != grad.size())
    MOCOVOX_ERR(kShape) << "SgdStep: theta has " << theta.size() << " values, grad has "
                        << grad.size();
  if (opt.velocity.empty()) opt.velocity.assign(theta.size(), 0.0);
  if (opt.velocity.size() != theta.size())
    MOCOVOX_ERR(kShape) << "SgdStep: velocity has " << opt.velocity.size()
                        << " values, theta has " << theta.size();
  for (size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i] + cfg.weight_decay * theta[i];
    opt.velocity[i] = cfg.momentum * opt.velocity[i] + g;
    theta[i] -= cfg.lr * opt.velocity[i];
  }
}

}  // namespace mocovox
