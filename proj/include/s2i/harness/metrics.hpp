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

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "s2i/core/json_io.hpp"
#include "s2i/models/intents.hpp"

namespace s2i::harness {

/// Word-level Levenshtein distance.
int word_edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);
std::vector<std::string> split_words(const std::string& s);

/// Edits / reference words. Empty reference: 0 for an empty hypothesis,
/// otherwise the hypothesis length.
double wer(const std::string& ref, const std::string& hyp);

/// Total edits over total reference words.
double corpus_wer(const std::vector<std::string>& refs, const std::vector<std::string>& hyps);

struct ClassStats {
  int support = 0;
  int predicted = 0;
  int correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SliceMetrics {
  int n = 0;
  double accuracy = 0.0;
  double f1_weighted = 0.0;  // macro F1 weighted by gold support
  double f1_macro = 0.0;     // unweighted mean over classes seen in gold or predictions
  double f1_micro = 0.0;
  std::array<ClassStats, models::kNumIntents> per_class{};
};

struct MetricsReport {
  SliceMetrics all;
  SliceMetrics excl;  // gold blank and others removed
  double wer = -1.0;  // negative when no transcripts were scored

  double f1_all() const { return all.f1_weighted; }
  double f1_excl() const { return excl.f1_weighted; }
  Json to_json() const;
};

SliceMetrics slice_metrics(const std::vector<int>& preds, const std::vector<int>& golds);

/// Throws InputError on unequal lengths or labels outside [0, 28).
MetricsReport intent_metrics(const std::vector<int>& preds, const std::vector<int>& golds);

struct LatencyReport {
  int measured = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
  double qps = 0.0;
  Json to_json() const;
};

/// Runs `run(i)` on every item `warmup` times untimed, then `reps` timed
/// passes. Percentiles are over the timed calls only; qps is timed calls
/// per second of total timed wall clock.
LatencyReport latency_bench(int n_items, const std::function<void(int)>& run, int warmup, int reps);

double percentile(std::vector<double> values, double q);

}  // namespace s2i::harness
