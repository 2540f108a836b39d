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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "s2i/models/s2i_model.hpp"
#include "s2i/training/data.hpp"

namespace s2i::training {

struct SelectionResult {
  std::vector<int> indices;       // into the pool, sorted ascending
  std::vector<double> confidence;  // max softmax probability, one per pool item
  bool clipped = false;            // k exceeded the eligible pool
};

/// Low-confidence sampling for annotation. With a threshold the candidates
/// are the pool items whose confidence is below it, otherwise the k least
/// confident; k of them are then drawn uniformly with a seeded RNG. Items
/// whose id is in `labeled_ids` are never returned.
SelectionResult select_low_confidence(const models::S2IModel& model, const std::vector<Example>& pool, int k,
                                      std::optional<double> threshold, std::uint64_t seed,
                                      const std::set<std::string>& labeled_ids = {});

/// Same selection on precomputed confidences.
SelectionResult select_by_confidence(const std::vector<double>& confidence, const std::vector<std::string>& ids,
                                     int k, std::optional<double> threshold, std::uint64_t seed,
                                     const std::set<std::string>& labeled_ids = {});

struct PseudoLabelResult {
  std::vector<Example> labeled;
  double kept_fraction = 0.0;
};

/// Labels every pool item whose confidence is at least `min_confidence`
/// with its predicted intent; the rest are dropped.
PseudoLabelResult pseudo_label(const models::S2IModel& model, const std::vector<Example>& pool,
                               double min_confidence = 0.9);

}  // namespace s2i::training
