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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "s2i/dsp/features.hpp"
#include "s2i/models/s2i_model.hpp"
#include "s2i/nn/adam.hpp"
#include "s2i/training/data.hpp"
#include "s2i/training/schedule.hpp"

namespace s2i::training {

struct TrainOptions {
  TrainSchedule schedule;
  nn::AdamConfig adam;
  std::optional<dsp::MaskingConfig> masking = dsp::MaskingConfig{};
  std::uint64_t seed = 0;
  int freeze_blocks = 0;         // S2I only: first k trunk blocks stay fixed
  double trunk_lr_scale = 1.0;   // S2I only: trunk learning rate relative to the head
  int head_warmup_epochs = 0;    // S2I only: leading epochs with the whole trunk frozen
  std::function<void(const std::string&)> log;
};

struct TrainReport {
  std::vector<double> epoch_loss;                  // mean per-utterance loss
  std::vector<std::array<double, models::kLevels>> epoch_level_loss;  // ASR only
  std::vector<double> step_lr;
  long steps = 0;
  int dropped_per_epoch = 0;
  int skipped_targets = 0;  // level targets too long for their utterance
  double first_batch_loss = 0.0;
  Json to_json() const;
};

/// Sum of the three CTC losses (equal weights) per utterance. Computes the
/// input normalisation from `data` when the model has none yet. Throws
/// TrainingError on a non-finite loss.
TrainReport train_asr(models::HctcModel& model, const std::vector<Example>& data,
                      const TrainOptions& opt);

/// Cross-entropy fine-tuning of pooling + classifier (+ trunk blocks from
/// `freeze_blocks` on). Computes normalisation when the model has none.
TrainReport train_s2i(models::S2IModel& model, const std::vector<Example>& data,
                      const TrainOptions& opt);

/// Builds an S2I model either on top of an ASR checkpoint or from scratch
/// and fine-tunes it.
models::S2IModel finetune_s2i(const models::HctcModel* asr, const models::S2IConfig& cfg,
                              const dsp::FeatureConfig& features, const std::vector<Example>& labeled,
                              const TrainOptions& opt, TrainReport* report = nullptr);

std::vector<models::IntentPrediction> predict_all(const models::S2IModel& model,
                                                  const std::vector<Example>& data);

}  // namespace s2i::training
