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

#include "s2i/training/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

#include "s2i/core/error.hpp"
#include "s2i/core/json_io.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/text/ngram.hpp"
#include "s2i/training/selection.hpp"
#include "s2i/training/trainers.hpp"

namespace s2i::training {

namespace fs = std::filesystem;

Json DataPlan::to_json() const {
  return {{"corpus_seed", corpus_seed}, {"asr_train", asr_train}, {"asr_noise", asr_noise},
          {"v1", v1}, {"pool", pool}, {"train_noise", train_noise},
          {"test_per_level", test_per_level}, {"test_noise", test_noise}};
}

DataPlan DataPlan::from_json(const Json& j) {
  DataPlan d;
  d.corpus_seed = j.value("corpus_seed", d.corpus_seed);
  d.asr_train = j.value("asr_train", d.asr_train);
  d.asr_noise = j.value("asr_noise", d.asr_noise);
  d.v1 = j.value("v1", d.v1);
  d.pool = j.value("pool", d.pool);
  d.train_noise = j.value("train_noise", d.train_noise);
  d.test_per_level = j.value("test_per_level", d.test_per_level);
  d.test_noise = j.value("test_noise", d.test_noise);
  if (d.asr_train < 0 || d.v1 < 0 || d.pool < 0 || d.test_per_level < 0)
    throw ConfigError("split sizes must be non-negative");
  for (const auto* levels : {&d.asr_noise, &d.train_noise, &d.test_noise}) {
    if (levels->empty()) throw ConfigError("noise level lists must be non-empty");
    for (double v : *levels)
      if (v < 0) throw ConfigError("noise levels must be non-negative");
  }
  return d;
}

const char* select_mode_name(SelectMode m) {
  switch (m) {
    case SelectMode::kBottomK: return "bottom_k";
    case SelectMode::kThreshold: return "threshold";
    case SelectMode::kRandom: return "random";
  }
  return "?";
}

SelectMode parse_select_mode(const std::string& s) {
  if (s == "bottom_k") return SelectMode::kBottomK;
  if (s == "threshold") return SelectMode::kThreshold;
  if (s == "random") return SelectMode::kRandom;
  throw ConfigError("unknown selection mode: " + s);
}

Json PhaseSpec::to_json() const {
  Json j = schedule.to_json();
  j["masking"] = masking;
  j["from_scratch"] = from_scratch;
  j["pool"] = models::pool_name(pool);
  j["freeze_blocks"] = freeze_blocks;
  j["trunk_lr_scale"] = trunk_lr_scale;
  j["head_warmup_epochs"] = head_warmup_epochs;
  j["select_k"] = select_k;
  j["select_mode"] = select_mode_name(select_mode);
  j["select_threshold"] = select_threshold;
  j["min_confidence"] = min_confidence;
  return j;
}

PhaseSpec PhaseSpec::from_json(const Json& j) {
  if (!j.contains("phase")) throw ConfigError("every plan phase needs a \"phase\" name");
  PhaseSpec p;
  p.schedule = TrainSchedule::from_json(j, Phase::kAsrPretrain);
  p.masking = j.value("masking", p.masking);
  p.from_scratch = j.value("from_scratch", p.from_scratch);
  if (j.contains("pool")) p.pool = models::parse_pool(j.at("pool").get<std::string>());
  p.freeze_blocks = j.value("freeze_blocks", p.freeze_blocks);
  p.trunk_lr_scale = j.value("trunk_lr_scale", p.trunk_lr_scale);
  p.head_warmup_epochs = j.value("head_warmup_epochs", p.head_warmup_epochs);
  p.select_k = j.value("select_k", p.select_k);
  if (j.contains("select_mode")) p.select_mode = parse_select_mode(j.at("select_mode").get<std::string>());
  p.select_threshold = j.value("select_threshold", p.select_threshold);
  p.min_confidence = j.value("min_confidence", p.min_confidence);
  if (p.freeze_blocks < 0 || p.freeze_blocks > models::kLevels) throw ConfigError("freeze_blocks out of range");
  if (p.trunk_lr_scale < 0.0) throw ConfigError("trunk_lr_scale must be non-negative");
  if (p.head_warmup_epochs < 0) throw ConfigError("head_warmup_epochs must be non-negative");
  if (p.select_k < 0) throw ConfigError("select_k must be non-negative");
  return p;
}

Json ExperimentPlan::to_json() const {
  Json phases_json = Json::array();
  for (const auto& p : phases) phases_json.push_back(p.to_json());
  return {{"name", name}, {"seed", seed}, {"synth", synth.to_json()},
          {"features", models::feature_config_to_json(features)}, {"model", model.to_json()},
          {"decode", decode.to_json()}, {"lm_order", lm_order}, {"data", data.to_json()},
          {"phases", phases_json}};
}

ExperimentPlan ExperimentPlan::from_json(const Json& j) {
  try {
    ExperimentPlan p;
    p.name = j.value("name", p.name);
    p.seed = j.value("seed", p.seed);
    if (j.contains("synth")) p.synth = harness::SynthSpec::from_json(j.at("synth"));
    if (j.contains("features")) p.features = models::feature_config_from_json(j.at("features"));
    if (j.contains("model")) p.model = models::HctcConfig::from_json(j.at("model"));
    if (j.contains("decode")) p.decode = models::DecodeConfig::from_json(j.at("decode"));
    p.lm_order = j.value("lm_order", p.lm_order);
    if (j.contains("data")) p.data = DataPlan::from_json(j.at("data"));
    for (const auto& ph : j.value("phases", Json::array())) p.phases.push_back(PhaseSpec::from_json(ph));
    if (p.lm_order < 0) throw ConfigError("lm_order must be non-negative");
    return p;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed experiment plan: ") + e.what());
  }
}

ExperimentPlan ExperimentPlan::load(const std::string& path) { return from_json(read_json_file(path)); }

std::vector<harness::ManifestRecord> split_records(const ExperimentPlan& plan, Split split) {
  const auto& d = plan.data;
  harness::CorpusOptions o;
  switch (split) {
    case Split::kAsrTrain:
      o = {d.asr_train, mix_seed(d.corpus_seed, 1), "train", "asr", d.asr_noise, true};
      return harness::make_records(plan.synth, o);
    case Split::kV1:
      o = {d.v1, mix_seed(d.corpus_seed, 2), "train", "v1", d.train_noise, true};
      return harness::make_records(plan.synth, o);
    case Split::kPool:
      o = {d.pool, mix_seed(d.corpus_seed, 3), "train", "pool", d.train_noise, true};
      return harness::make_records(plan.synth, o);
    case Split::kTest: break;
  }
  // One slice per noise level over the same transcripts and render seeds.
  std::vector<harness::ManifestRecord> out;
  for (std::size_t li = 0; li < d.test_noise.size(); ++li) {
    o = {d.test_per_level, mix_seed(d.corpus_seed, 4), "test", "test" + std::to_string(li), {d.test_noise[li]}, true};
    auto recs = harness::make_records(plan.synth, o);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

Json Evaluation::to_json() const {
  Json j = report.to_json();
  Json by = Json::array();
  for (const auto& [level, f1] : f1_by_noise) by.push_back({{"noise", level}, {"f1", f1}});
  j["f1_by_noise"] = by;
  return j;
}

Evaluation evaluate_intents(const std::vector<int>& preds, const std::vector<Example>& test) {
  if (preds.size() != test.size()) throw InputError("prediction and test set sizes differ");
  Evaluation ev;
  std::vector<int> golds;
  for (const auto& e : test) golds.push_back(e.intent);
  ev.report = harness::intent_metrics(preds, golds);
  std::vector<double> levels;
  for (const auto& e : test)
    if (std::find(levels.begin(), levels.end(), e.noise_level) == levels.end()) levels.push_back(e.noise_level);
  for (double lv : levels) {
    std::vector<int> p, g;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (test[i].noise_level == lv) {
        p.push_back(preds[i]);
        g.push_back(golds[i]);
      }
    ev.f1_by_noise.emplace_back(lv, harness::slice_metrics(p, g).f1_weighted);
  }
  return ev;
}

Evaluation evaluate_s2i(const models::S2IModel& model, const std::vector<Example>& test) {
  std::vector<int> preds;
  for (const auto& p : predict_all(model, test)) preds.push_back(p.intent);
  return evaluate_intents(preds, test);
}

double evaluate_wer(const models::HctcModel& asr, const text::SubwordVocab& vocab, const text::NgramLm* lm,
                    const models::DecodeConfig& cfg, const std::vector<Example>& test) {
  std::vector<std::string> refs, hyps;
  for (const auto& e : test) {
    refs.push_back(e.transcript);
    hyps.push_back(models::transcribe(e.features(), asr, vocab, lm, cfg).text);
  }
  return harness::corpus_wer(refs, hyps);
}

namespace {

struct State {
  std::optional<Vocabs> vocabs;
  std::optional<models::HctcModel> asr;
  std::optional<text::NgramLm> lm;
  std::optional<models::S2IModel> s2i;
  std::vector<Example> labeled;
  std::optional<std::vector<Example>> pool;
  std::optional<std::vector<Example>> test;
};

class Runner {
 public:
  Runner(const ExperimentPlan& plan, std::string run_dir, const std::function<void(const std::string&)>& log)
      : plan_(plan), dir_(std::move(run_dir)), log_(log) {
    for (const char* sub : {"checkpoints", "manifests", "reports"}) fs::create_directories(fs::path(dir_) / sub);
    write_json_file((fs::path(dir_) / "reports" / "plan.json").string(), plan_.to_json());
  }

  Json run_phase(std::size_t index) {
    const PhaseSpec& spec = plan_.phases[index];
    Json row{{"plan", plan_.name}, {"seed", plan_.seed}, {"index", index},
             {"phase", phase_name(spec.schedule.phase)}};
    switch (spec.schedule.phase) {
      case Phase::kAsrPretrain: asr_pretrain(spec, index, row); break;
      case Phase::kS2IV1: s2i_v1(spec, index, row); break;
      case Phase::kS2IV2: s2i_v2(spec, index, row); break;
      case Phase::kPseudo: pseudo(spec, index, row); break;
    }
    return row;
  }

 private:
  void say(const std::string& s) const {
    if (log_) log_(s);
  }

  std::string path(const std::string& sub, const std::string& name) const {
    return (fs::path(dir_) / sub / name).string();
  }

  std::vector<Example> featurize(Split split, const char* manifest) {
    auto recs = split_records(plan_, split);
    harness::write_manifest(path("manifests", manifest), recs);
    return featurize_records(plan_.synth, recs, plan_.features);
  }

  const std::vector<Example>& test() {
    if (!st_.test) st_.test = featurize(Split::kTest, "test.jsonl");
    return *st_.test;
  }

  TrainOptions options(const PhaseSpec& spec, std::size_t index) const {
    TrainOptions opt;
    opt.schedule = spec.schedule;
    if (!spec.masking) opt.masking.reset();
    opt.seed = mix_seed(plan_.seed, 100 + index);
    opt.freeze_blocks = spec.freeze_blocks;
    opt.trunk_lr_scale = spec.trunk_lr_scale;
    opt.head_warmup_epochs = spec.head_warmup_epochs;
    opt.log = log_;
    return opt;
  }

  void asr_pretrain(const PhaseSpec& spec, std::size_t index, Json& row) {
    auto data = featurize(Split::kAsrTrain, "asr_train.jsonl");
    std::vector<std::string> transcripts;
    for (const auto& e : data) transcripts.push_back(e.transcript);
    st_.vocabs = build_vocabs(transcripts, plan_.model.vocab_sizes);
    attach_targets(data, *st_.vocabs);
    models::HctcConfig cfg = plan_.model;
    for (int l = 0; l < models::kLevels; ++l) cfg.vocab_sizes[l] = (*st_.vocabs)[l].size();
    st_.asr = models::HctcModel::create(cfg, plan_.features, mix_seed(plan_.seed, 1));
    for (int l = 0; l < models::kLevels; ++l) st_.asr->vocab_hashes[l] = (*st_.vocabs)[l].hash();
    const auto report = train_asr(*st_.asr, data, options(spec, index));

    const std::string ckpt = "checkpoints/asr_pretrain.ckpt";
    models::save_checkpoint(*st_.asr, (fs::path(dir_) / ckpt).string());
    for (int l = 0; l < models::kLevels; ++l)
      (*st_.vocabs)[l].save(path("checkpoints", std::string("vocab_") + text::level_name(text::Level(l)) + ".tsv"));
    if (plan_.lm_order > 0) {
      std::vector<std::vector<int>> corpus;
      for (const auto& e : data)
        if (!e.targets[2].empty()) corpus.push_back(e.targets[2]);
      st_.lm = text::train_ngram(corpus, (*st_.vocabs)[2].size(), plan_.lm_order);
      st_.lm->write_arpa(path("checkpoints", "lm.arpa"));
    }
    const double wer = evaluate_wer(*st_.asr, (*st_.vocabs)[2], st_.lm ? &*st_.lm : nullptr, plan_.decode, test());
    say("asr_pretrain WER " + std::to_string(wer));
    row["checkpoint"] = ckpt;
    row["wer"] = wer;
    row["train"] = report.to_json();
  }

  const models::HctcModel* donor(const PhaseSpec& spec) const {
    if (spec.from_scratch) return nullptr;
    if (!st_.asr) throw ConfigError("S2I fine-tuning needs an asr_pretrain phase first (or from_scratch)");
    return &*st_.asr;
  }

  void finish_s2i(const char* name, const TrainReport& report, Json& row) {
    const std::string ckpt = std::string("checkpoints/") + name + ".ckpt";
    models::save_checkpoint(*st_.s2i, (fs::path(dir_) / ckpt).string());
    const auto ev = evaluate_s2i(*st_.s2i, test());
    say(std::string(name) + " F1 " + std::to_string(ev.report.f1_all()));
    row["checkpoint"] = ckpt;
    row["n_train"] = static_cast<long>(st_.labeled.size());
    row["metrics"] = ev.to_json();
    row["train"] = report.to_json();
  }

  void s2i_v1(const PhaseSpec& spec, std::size_t index, Json& row) {
    st_.labeled = featurize(Split::kV1, "v1.jsonl");
    const auto* asr = donor(spec);
    models::S2IConfig cfg{asr ? asr->net.config : plan_.model, spec.pool};
    TrainReport report;
    st_.s2i = finetune_s2i(asr, cfg, plan_.features, st_.labeled, options(spec, index), &report);
    row["from_scratch"] = spec.from_scratch;
    row["pool"] = models::pool_name(spec.pool);
    finish_s2i("s2i_v1", report, row);
  }

  std::vector<Example>& pool() {
    if (!st_.pool) st_.pool = featurize(Split::kPool, "pool.jsonl");
    return *st_.pool;
  }

  std::set<std::string> labeled_ids() const {
    std::set<std::string> ids;
    for (const auto& e : st_.labeled) ids.insert(e.id);
    return ids;
  }

  void require_s2i() const {
    if (!st_.s2i) throw ConfigError("this phase needs a trained S2I model from an earlier phase");
  }

  void s2i_v2(const PhaseSpec& spec, std::size_t index, Json& row) {
    require_s2i();
    auto& candidates = pool();
    std::vector<double> conf;
    std::vector<std::string> ids;
    for (const auto& e : candidates) {
      conf.push_back(models::predict_intent(e.features(), *st_.s2i).confidence);
      ids.push_back(e.id);
    }
    std::optional<double> threshold;
    if (spec.select_mode == SelectMode::kThreshold) threshold = spec.select_threshold;
    if (spec.select_mode == SelectMode::kRandom) threshold = std::numeric_limits<double>::infinity();
    const auto sel = select_by_confidence(conf, ids, spec.select_k, threshold, mix_seed(plan_.seed, 200 + index),
                                          labeled_ids());
    double sel_conf = 0.0, pool_conf = 0.0;
    for (int i : sel.indices) sel_conf += conf[i];
    for (double c : conf) pool_conf += c;
    std::vector<std::string> chosen;
    for (int i : sel.indices) {
      st_.labeled.push_back(candidates[i]);
      chosen.push_back(candidates[i].id);
    }
    write_json_file(path("manifests", "selected.json"), chosen);
    const auto report = train_s2i(*st_.s2i, st_.labeled, options(spec, index));
    row["select_mode"] = select_mode_name(spec.select_mode);
    row["n_selected"] = static_cast<long>(sel.indices.size());
    row["mean_confidence_selected"] = sel.indices.empty() ? 0.0 : sel_conf / sel.indices.size();
    row["mean_confidence_pool"] = conf.empty() ? 0.0 : pool_conf / conf.size();
    finish_s2i("s2i_v2", report, row);
  }

  void pseudo(const PhaseSpec& spec, std::size_t index, Json& row) {
    require_s2i();
    const auto taken = labeled_ids();
    std::vector<Example> rest;
    for (const auto& e : pool())
      if (!taken.count(e.id)) rest.push_back(e);
    auto pl = pseudo_label(*st_.s2i, rest, spec.min_confidence);
    std::map<std::string, int> gold;
    for (const auto& e : rest) gold[e.id] = e.intent;
    int agree = 0;
    for (const auto& e : pl.labeled) agree += gold[e.id] == e.intent;
    std::vector<Example> train = st_.labeled;
    train.insert(train.end(), pl.labeled.begin(), pl.labeled.end());
    const auto report = train_s2i(*st_.s2i, train, options(spec, index));
    row["min_confidence"] = spec.min_confidence;
    row["kept_fraction"] = pl.kept_fraction;
    row["pseudo_label_accuracy"] = pl.labeled.empty() ? 0.0 : static_cast<double>(agree) / pl.labeled.size();
    finish_s2i("pseudo", report, row);
    row["n_train"] = static_cast<long>(train.size());
  }

  const ExperimentPlan& plan_;
  std::string dir_;
  std::function<void(const std::string&)> log_;
  State st_;
};

}  // namespace

std::vector<Json> run_experiment(const ExperimentPlan& plan, const std::string& run_dir,
                                 const std::function<void(const std::string&)>& log) {
  Runner runner(plan, run_dir, log);
  const std::string ledger = (fs::path(run_dir) / "reports" / "ledger.jsonl").string();
  std::vector<Json> rows;
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    Json row = runner.run_phase(i);
    append_jsonl(ledger, row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace s2i::training
