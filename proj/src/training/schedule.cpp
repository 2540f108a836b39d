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

#include "s2i/training/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s2i/core/error.hpp"

namespace s2i::training {

LrPolicy LrPolicy::cyclical(double min_lr, double max_lr, long period_steps) {
  if (period_steps < 1 || min_lr <= 0 || max_lr < min_lr) throw ConfigError("bad cyclical LR bounds");
  LrPolicy p;
  p.kind = Kind::kCyclical;
  p.min_lr = min_lr;
  p.max_lr = max_lr;
  p.period_steps = period_steps;
  return p;
}

LrPolicy LrPolicy::constant(double lr) {
  if (lr <= 0) throw ConfigError("learning rate must be positive");
  LrPolicy p;
  p.kind = Kind::kConstant;
  p.lr = lr;
  return p;
}

double LrPolicy::at(long step) const {
  if (kind == Kind::kConstant) return lr;
  const double half = period_steps / 2.0;
  const double cycle = std::floor(1.0 + step / (2.0 * half));
  const double x = std::abs(step / half - 2.0 * cycle + 1.0);
  return min_lr + (max_lr - min_lr) * std::max(0.0, 1.0 - x);
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kAsrPretrain: return "asr_pretrain";
    case Phase::kS2IV1: return "s2i_v1";
    case Phase::kS2IV2: return "s2i_v2";
    case Phase::kPseudo: return "pseudo";
  }
  return "?";
}

Phase parse_phase(const std::string& s) {
  for (Phase p : {Phase::kAsrPretrain, Phase::kS2IV1, Phase::kS2IV2, Phase::kPseudo})
    if (s == phase_name(p)) return p;
  throw ConfigError("unknown phase: " + s);
}

LrPolicy TrainSchedule::policy(long steps_per_epoch) const {
  if (phase == Phase::kAsrPretrain) return LrPolicy::cyclical(min_lr, max_lr, std::max(1L, steps_per_epoch));
  return LrPolicy::constant(lr);
}

Json TrainSchedule::to_json() const {
  return {{"phase", phase_name(phase)}, {"epochs", epochs}, {"batch_audio_minutes", batch_audio_minutes},
          {"min_lr", min_lr},           {"max_lr", max_lr}, {"lr", lr}};
}

TrainSchedule TrainSchedule::from_json(const Json& j, Phase default_phase) {
  TrainSchedule s;
  s.phase = j.contains("phase") ? parse_phase(j.at("phase").get<std::string>()) : default_phase;
  if (s.phase != Phase::kAsrPretrain) s.batch_audio_minutes = 0.26;
  s.epochs = j.value("epochs", s.epochs);
  s.batch_audio_minutes = j.value("batch_audio_minutes", s.batch_audio_minutes);
  s.min_lr = j.value("min_lr", s.min_lr);
  s.max_lr = j.value("max_lr", s.max_lr);
  s.lr = j.value("lr", s.lr);
  if (s.epochs < 0 || s.batch_audio_minutes <= 0) throw ConfigError("bad schedule");
  return s;
}

Batching duration_batches(const std::vector<double>& durations, double target_seconds, Rng& rng) {
  if (target_seconds <= 0) throw ConfigError("batch duration must be positive");
  const double lo = 0.8 * target_seconds, hi = 1.2 * target_seconds;
  std::vector<int> order(durations.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Batching out;
  std::vector<double> totals;
  std::vector<int> current;
  double total = 0.0;
  std::vector<int> leftovers;
  for (int i : order) {
    const double d = durations[i];
    if (d > hi) {
      out.dropped.push_back(i);
      continue;
    }
    if (total + d > hi) {
      leftovers.push_back(i);  // retried below
      continue;
    }
    current.push_back(i);
    total += d;
    if (total >= target_seconds) {
      out.batches.push_back(std::move(current));
      totals.push_back(total);
      current.clear();
      total = 0.0;
    }
  }
  for (int i : current) leftovers.push_back(i);
  if (!current.empty() && total >= lo) {
    out.batches.push_back(current);
    totals.push_back(total);
    leftovers.resize(leftovers.size() - current.size());
  }
  // Spread what is left over batches with room to spare.
  for (int i : leftovers) {
    bool placed = false;
    for (std::size_t b = 0; b < out.batches.size() && !placed; ++b)
      if (totals[b] + durations[i] <= hi) {
        out.batches[b].push_back(i);
        totals[b] += durations[i];
        placed = true;
      }
    if (!placed) out.dropped.push_back(i);
  }
  return out;
}

}  // namespace s2i::training
