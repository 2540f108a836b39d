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

#include "s2i/nn/adam.hpp"

#include <cmath>

#include "s2i/core/error.hpp"

namespace s2i::nn {

Adam::Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

double Adam::step(Buffer& params, Buffer& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw TrainingError("optimizer state size mismatch");
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw TrainingError("non-finite gradient norm");
  const double scale = cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm ? cfg_.clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] * scale;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double rate = i < prefix_end_ ? lr * prefix_scale_ : lr;
    params[i] -= rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
  }
  return norm;
}

void Adam::set_prefix_scale(std::size_t end, double scale) {
  if (end > m_.size() || scale < 0.0) throw ConfigError("bad learning-rate prefix");
  prefix_end_ = end;
  prefix_scale_ = scale;
}

}  // namespace s2i::nn
