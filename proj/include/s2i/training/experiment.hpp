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

#include "s2i/harness/metrics.hpp"
#include "s2i/harness/synth.hpp"
#include "s2i/models/s2i_model.hpp"
#include "s2i/models/transcribe.hpp"
#include "s2i/training/data.hpp"
#include "s2i/training/schedule.hpp"

namespace s2i::training {

/// Sizes and noise of the synthetic splits. All splits are drawn from
/// `corpus_seed`, so they stay fixed while the training seed varies.
struct DataPlan {
  std::uint64_t corpus_seed = 17;
  int asr_train = 2000;
  std::vector<double> asr_noise{0.0, 0.0, 0.25, 0.5, 1.0};
  int v1 = 1000;
  int pool = 10000;
  std::vector<double> train_noise{0.0, 0.25, 0.5, 1.0};
  int test_per_level = 140;
  std::vector<double> test_noise{0.0, 0.5, 1.0, 2.0};

  Json to_json() const;
  static DataPlan from_json(const Json& j);
};

enum class SelectMode { kBottomK, kThreshold, kRandom };
const char* select_mode_name(SelectMode m);
SelectMode parse_select_mode(const std::string& s);

struct PhaseSpec {
  TrainSchedule schedule;
  bool masking = false;
  // S2I phases
  bool from_scratch = false;
  models::PoolKind pool = models::PoolKind::kMha;
  int freeze_blocks = 0;
  double trunk_lr_scale = 0.3;
  int head_warmup_epochs = 2;
  // s2i_v2
  int select_k = 2500;
  SelectMode select_mode = SelectMode::kBottomK;
  double select_threshold = 0.9;
  // pseudo
  double min_confidence = 0.9;

  Json to_json() const;
  static PhaseSpec from_json(const Json& j);
};

struct ExperimentPlan {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  harness::SynthSpec synth = harness::SynthSpec::desk_default();
  dsp::FeatureConfig features;
  models::HctcConfig model;
  models::DecodeConfig decode;
  int lm_order = 3;
  DataPlan data;
  std::vector<PhaseSpec> phases;

  Json to_json() const;
  static ExperimentPlan from_json(const Json& j);
  static ExperimentPlan load(const std::string& path);
};

enum class Split { kAsrTrain, kV1, kPool, kTest };

/// Manifest records of one split. Test records carry the noise level of
/// their slice; `test_per_level` records are drawn for each level.
std::vector<harness::ManifestRecord> split_records(const ExperimentPlan& plan, Split split);

/// Intent metrics over a test set, plus F1 per noise level.
struct Evaluation {
  harness::MetricsReport report;
  std::vector<std::pair<double, double>> f1_by_noise;
  Json to_json() const;
};

Evaluation evaluate_intents(const std::vector<int>& preds, const std::vector<Example>& test);
Evaluation evaluate_s2i(const models::S2IModel& model, const std::vector<Example>& test);

/// Corpus WER of the long-level transcription.
double evaluate_wer(const models::HctcModel& asr, const text::SubwordVocab& vocab, const text::NgramLm* lm,
                    const models::DecodeConfig& cfg, const std::vector<Example>& test);

/// Runs the phases in order under `run_dir` (checkpoints/, manifests/,
/// reports/). Each finished phase appends one row to
/// reports/ledger.jsonl; the rows are also returned. A failing phase
/// leaves the rows written so far and rethrows.
std::vector<Json> run_experiment(const ExperimentPlan& plan, const std::string& run_dir,
                                 const std::function<void(const std::string&)>& log = {});

}  // namespace s2i::training
