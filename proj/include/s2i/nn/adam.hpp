// Copyright 2026 The S2I Authors.
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

#pragma once

#include <vector>

#include "s2i/nn/params.hpp"

namespace s2i::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global gradient-norm clip; 0 disables
};

/// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t n, AdamConfig cfg = {});

  /// Returns the pre-clip gradient norm.
  double step(Buffer& params, Buffer& grads, double lr);
  long steps() const { return t_; }

  /// Parameters [0, end) step with lr × scale.
  void set_prefix_scale(std::size_t end, double scale);

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
  std::size_t prefix_end_ = 0;
  double prefix_scale_ = 1.0;
};

}  // namespace s2i::nn
