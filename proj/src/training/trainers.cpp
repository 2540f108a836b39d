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

#include "s2i/training/trainers.hpp"

#include <cmath>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/ctc/ctc.hpp"

namespace s2i::training {

Json TrainReport::to_json() const {
  Json j{{"epoch_loss", epoch_loss},
         {"steps", steps},
         {"dropped_per_epoch", dropped_per_epoch},
         {"skipped_targets", skipped_targets},
         {"first_batch_loss", first_batch_loss}};
  if (!epoch_level_loss.empty()) j["epoch_level_loss"] = epoch_level_loss;
  return j;
}

namespace {

constexpr std::size_t kPoolCalibration = 256;

std::vector<double> durations_of(const std::vector<Example>& data) {
  std::vector<double> d;
  d.reserve(data.size());
  for (const auto& e : data) d.push_back(e.duration_s);
  return d;
}

Matrix network_input(const Example& e, const dsp::FeatureStats& stats,
                     const std::optional<dsp::MaskingConfig>& masking, std::uint64_t seed) {
  dsp::FeatureMatrix f = e.features();
  if (!stats.empty()) stats.apply(f.frames);
  if (masking) f = dsp::apply_masking(f, *masking, seed);
  return std::move(f.frames);
}

void log_line(const TrainOptions& opt, const std::string& s) {
  if (opt.log) opt.log(s);
}

}  // namespace

TrainReport train_asr(models::HctcModel& model, const std::vector<Example>& data,
                      const TrainOptions& opt) {
  if (data.empty()) throw InputError("train_asr: empty dataset");
  if (model.stats.empty()) model.stats = feature_stats(data);
  TrainReport report;
  Rng rng(mix_seed(opt.seed, 1));
  const auto durations = durations_of(data);
  const double target_s = opt.schedule.batch_audio_minutes * 60.0;
  nn::Adam adam(model.params.size(), opt.adam);
  nn::Grads g = model.params.zeros_like();

  for (int epoch = 0; epoch < opt.schedule.epochs; ++epoch) {
    auto batching = duration_batches(durations, target_s, rng);
    report.dropped_per_epoch = static_cast<int>(batching.dropped.size());
    const auto policy = opt.schedule.policy(static_cast<long>(batching.batches.size()));
    double epoch_total = 0.0;
    std::array<double, models::kLevels> level_total{};
    int counted = 0;
    for (const auto& batch : batching.batches) {
      std::fill(g.begin(), g.end(), 0.0);
      double batch_loss = 0.0;
      for (int idx : batch) {
        const Example& e = data[idx];
        const auto seed = mix_seed(opt.seed, static_cast<std::uint64_t>(report.steps) * 1000003ULL + idx);
        Matrix x = network_input(e, model.stats, opt.masking, seed);
        models::HctcNet::Cache cache;
        model.net.forward(model.params, x, cache, true);
        std::array<Matrix, models::kLevels> d;
        double utt_loss = 0.0;
        for (int l = 0; l < models::kLevels; ++l) {
          if (ctc::min_frames(e.targets[l]) > cache.logprobs[l].rows()) {
            ++report.skipped_targets;
            continue;
          }
          auto r = ctc::ctc_loss(cache.logprobs[l], e.targets[l]);
          utt_loss += r.loss;
          level_total[l] += r.loss;
          d[l] = r.grad / static_cast<double>(batch.size());
        }
        if (!std::isfinite(utt_loss)) {
          std::ostringstream msg;
          msg << "ASR loss diverged at step " << report.steps << " on " << e.id << " (loss " << utt_loss << ")";
          throw TrainingError(msg.str());
        }
        model.net.backward(model.params, cache, d, Matrix(), RowVector(), g);
        batch_loss += utt_loss;
        ++counted;
      }
      if (report.steps == 0) report.first_batch_loss = batch_loss / batch.size();
      const double lr = policy.at(report.steps);
      report.step_lr.push_back(lr);
      adam.step(model.params.values(), g, lr);
      ++report.steps;
      epoch_total += batch_loss;
    }
    report.epoch_loss.push_back(counted ? epoch_total / counted : 0.0);
    for (auto& v : level_total) v = counted ? v / counted : 0.0;
    report.epoch_level_loss.push_back(level_total);
    std::ostringstream msg;
    msg << "asr epoch " << epoch + 1 << "/" << opt.schedule.epochs << " loss " << report.epoch_loss.back()
        << " (" << level_total[0] << " / " << level_total[1] << " / " << level_total[2] << ")";
    log_line(opt, msg.str());
  }
  return report;
}

TrainReport train_s2i(models::S2IModel& model, const std::vector<Example>& data,
                      const TrainOptions& opt) {
  if (data.empty()) throw InputError("train_s2i: empty labeled pool");
  if (opt.freeze_blocks < 0 || opt.freeze_blocks > models::kLevels)
    throw ConfigError("freeze_blocks must be within [0, 3]");
  if (opt.trunk_lr_scale < 0 || opt.head_warmup_epochs < 0) throw ConfigError("bad fine-tuning options");
  if (model.stats.empty()) model.stats = feature_stats(data);
  TrainReport report;
  Rng rng(mix_seed(opt.seed, 2));
  const auto durations = durations_of(data);
  const double target_s = opt.schedule.batch_audio_minutes * 60.0;
  nn::Adam adam(model.params.size(), opt.adam);
  adam.set_prefix_scale(model.trunk_size(), opt.trunk_lr_scale);
  nn::Grads g = model.params.zeros_like();

  for (int epoch = 0; epoch < opt.schedule.epochs; ++epoch) {
    auto batching = duration_batches(durations, target_s, rng);
    report.dropped_per_epoch = static_cast<int>(batching.dropped.size());
    const auto policy = opt.schedule.policy(static_cast<long>(batching.batches.size()));
    const int frozen = epoch < opt.head_warmup_epochs ? models::kLevels : opt.freeze_blocks;
    double epoch_total = 0.0;
    int counted = 0;
    for (const auto& batch : batching.batches) {
      std::fill(g.begin(), g.end(), 0.0);
      double batch_loss = 0.0;
      for (int idx : batch) {
        const Example& e = data[idx];
        if (e.intent < 0 || e.intent >= models::kNumIntents)
          throw InputError("labeled example without a valid intent: " + e.id);
        const auto seed = mix_seed(opt.seed, static_cast<std::uint64_t>(report.steps) * 1000003ULL + idx);
        Matrix x = network_input(e, model.stats, opt.masking, seed);
        models::S2INet::Cache cache;
        Matrix lp = nn::log_softmax_rows(model.net.forward(model.params, x, cache));
        const double loss = -lp(0, e.intent);
        if (!std::isfinite(loss)) throw TrainingError("S2I loss diverged on " + e.id);
        Matrix d = Matrix::Zero(1, models::kNumIntents);
        d(0, e.intent) = -1.0 / static_cast<double>(batch.size());
        model.net.backward(model.params, cache, nn::log_softmax_backward(lp, d), g, frozen);
        batch_loss += loss;
        ++counted;
      }
      if (report.steps == 0) report.first_batch_loss = batch_loss / batch.size();
      const double lr = policy.at(report.steps);
      report.step_lr.push_back(lr);
      adam.step(model.params.values(), g, lr);
      ++report.steps;
      epoch_total += batch_loss;
    }
    report.epoch_loss.push_back(counted ? epoch_total / counted : 0.0);
    std::ostringstream msg;
    msg << "s2i epoch " << epoch + 1 << "/" << opt.schedule.epochs << " loss " << report.epoch_loss.back();
    log_line(opt, msg.str());
  }
  return report;
}

models::S2IModel finetune_s2i(const models::HctcModel* asr, const models::S2IConfig& cfg,
                              const dsp::FeatureConfig& features, const std::vector<Example>& labeled,
                              const TrainOptions& opt, TrainReport* report) {
  auto model = models::S2IModel::create(cfg, features, mix_seed(opt.seed, 3));
  if (asr) model.attach_trunk(*asr);
  if (model.stats.empty()) model.stats = feature_stats(labeled);
  std::vector<Matrix> sample;
  for (std::size_t i = 0; i < labeled.size() && sample.size() < kPoolCalibration; ++i)
    sample.push_back(labeled[i].frames.cast<double>());
  model.calibrate_pooling(sample);
  auto r = train_s2i(model, labeled, opt);
  if (report) *report = std::move(r);
  return model;
}

std::vector<models::IntentPrediction> predict_all(const models::S2IModel& model,
                                                  const std::vector<Example>& data) {
  std::vector<models::IntentPrediction> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(models::predict_intent(e.features(), model));
  return out;
}

}  // namespace s2i::training
