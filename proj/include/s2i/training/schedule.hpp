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

#include <cstdint>
#include <string>
#include <vector>

#include "s2i/core/json_io.hpp"
#include "s2i/core/rng.hpp"

namespace s2i::training {

/// Triangular cyclical or constant learning rate.
struct LrPolicy {
  enum class Kind { kCyclical, kConstant } kind = Kind::kConstant;
  double min_lr = 1e-4;
  double max_lr = 1e-3;
  long period_steps = 1;  // one full triangle (up and down)
  double lr = 5e-4;       // constant policy

  static LrPolicy cyclical(double min_lr, double max_lr, long period_steps);
  static LrPolicy constant(double lr);
  double at(long step) const;
};

enum class Phase { kAsrPretrain, kS2IV1, kS2IV2, kPseudo };
const char* phase_name(Phase p);
Phase parse_phase(const std::string& s);

struct TrainSchedule {
  Phase phase = Phase::kAsrPretrain;
  int epochs = 1;
  double batch_audio_minutes = 0.42;
  double min_lr = 1e-4;
  double max_lr = 1e-3;  // cyclical bounds (ASR pretraining)
  double lr = 5e-4;      // constant rate (S2I phases)

  /// Cyclical for ASR pretraining, constant for the S2I phases; the cycle
  /// length is one epoch.
  LrPolicy policy(long steps_per_epoch) const;
  Json to_json() const;
  static TrainSchedule from_json(const Json& j, Phase default_phase);
};

struct Batching {
  std::vector<std::vector<int>> batches;
  std::vector<int> dropped;  // could not be placed without breaking the bounds
};

/// Packs shuffled utterances into batches whose total duration lies in
/// [0.8, 1.2] × target_seconds. Utterances longer than 1.2 × target and
/// leftovers that fit nowhere are reported as dropped.
Batching duration_batches(const std::vector<double>& durations, double target_seconds, Rng& rng);

}  // namespace s2i::training
