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

// Command-line front end: data generation, training, decoding, prediction,
// active learning, evaluation and benchmarking under one run directory.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "s2i/baseline/builder.hpp"
#include "s2i/baseline/pipeline.hpp"
#include "s2i/core/error.hpp"
#include "s2i/core/json_io.hpp"
#include "s2i/core/rng.hpp"
#include "s2i/dsp/wav.hpp"
#include "s2i/harness/metrics.hpp"
#include "s2i/harness/synth.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/models/intents.hpp"
#include "s2i/models/transcribe.hpp"
#include "s2i/training/data.hpp"
#include "s2i/training/experiment.hpp"
#include "s2i/training/selection.hpp"
#include "s2i/training/trainers.hpp"

namespace fs = std::filesystem;
using namespace s2i;
using training::Example;

namespace {

void info(const std::string& msg) { std::cerr << "[s2i] " << msg << "\n"; }

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string run_dir = "runs/default";
};

struct BenchSettings {
  int items = 50;
  int warmup = 1;
  int reps = 3;
};

struct Config {
  training::ExperimentPlan plan;
  baseline::BaselineConfig baseline;
  BenchSettings bench;

  training::PhaseSpec phase(training::Phase p) const {
    for (const auto& s : plan.phases)
      if (s.schedule.phase == p) return s;
    training::PhaseSpec s;
    s.schedule.phase = p;
    return s;
  }
};

Config load_config(const Common& c) {
  std::string path = c.config;
  if (path.empty())
    if (const char* env = std::getenv("S2I_CONFIG")) path = env;
  Json j = path.empty() ? Json::object() : read_json_file(path);
  Config cfg;
  cfg.plan = training::ExperimentPlan::from_json(j);
  try {
    if (j.contains("baseline")) cfg.baseline = baseline::BaselineConfig::from_json(j.at("baseline"));
    if (j.contains("bench")) {
      const Json& b = j.at("bench");
      cfg.bench.items = b.value("items", cfg.bench.items);
      cfg.bench.warmup = b.value("warmup", cfg.bench.warmup);
      cfg.bench.reps = b.value("reps", cfg.bench.reps);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.seed) {
    cfg.plan.seed = *c.seed;
    cfg.baseline.seed = *c.seed;
  }
  if (cfg.bench.items < 1 || cfg.bench.warmup < 0 || cfg.bench.reps < 1) throw ConfigError("bad bench settings");
  return cfg;
}

class RunDir {
 public:
  explicit RunDir(std::string root) : root_(std::move(root)) {
    for (const char* sub : {"checkpoints", "manifests", "reports"}) fs::create_directories(fs::path(root_) / sub);
  }
  std::string operator()(const std::string& sub, const std::string& name) const {
    return (fs::path(root_) / sub / name).string();
  }
  const std::string& root() const { return root_; }

 private:
  std::string root_;
};

const std::map<std::string, training::Split>& split_names() {
  static const std::map<std::string, training::Split> m{{"asr_train", training::Split::kAsrTrain},
                                                        {"v1", training::Split::kV1},
                                                        {"pool", training::Split::kPool},
                                                        {"test", training::Split::kTest}};
  return m;
}

bool is_feature_cache(const std::string& path) { return fs::path(path).extension() == ".feat"; }

// Loaded examples with their manifest records when the input was a manifest.
// With `expand` off the two lists are aligned one to one.
struct Dataset {
  std::vector<Example> examples;
  std::vector<harness::ManifestRecord> records;
};

// `input` is a manifest, a feature cache, or empty for the named split of the
// plan (its manifest is written under the run directory).
Dataset load_data(const Config& cfg, const RunDir& run, const std::string& input, const std::string& split,
                  bool expand = true) {
  Dataset d;
  if (!input.empty() && is_feature_cache(input)) {
    d.examples = training::load_examples(input);
    return d;
  }
  if (input.empty()) {
    d.records = training::split_records(cfg.plan, split_names().at(split));
    harness::write_manifest(run("manifests", split + ".jsonl"), d.records);
  } else {
    d.records = harness::read_manifest(input);
  }
  const auto t0 = std::chrono::steady_clock::now();
  d.examples = training::featurize_records(cfg.plan.synth, d.records, cfg.plan.features, expand);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  info("featurized " + std::to_string(d.examples.size()) + " utterances in " + std::to_string(s) + " s");
  return d;
}

std::string checkpoint_or(const RunDir& run, const std::string& given, const std::string& name) {
  return given.empty() ? run("checkpoints", name) : given;
}

training::Vocabs load_vocabs(const std::string& dir) {
  training::Vocabs v;
  for (int l = 0; l < models::kLevels; ++l) {
    const auto level = text::Level(l);
    v[l] = text::SubwordVocab::load((fs::path(dir) / (std::string("vocab_") + text::level_name(level) + ".tsv")).string(),
                                    level);
  }
  return v;
}

std::optional<text::NgramLm> load_lm_if_present(const std::string& path, bool disabled) {
  if (disabled || !fs::exists(path)) return std::nullopt;
  return text::NgramLm::read_arpa(path);
}

training::TrainOptions options_for(const training::PhaseSpec& spec, std::uint64_t seed) {
  training::TrainOptions opt;
  opt.schedule = spec.schedule;
  if (!spec.masking) opt.masking.reset();
  opt.seed = seed;
  opt.freeze_blocks = spec.freeze_blocks;
  opt.trunk_lr_scale = spec.trunk_lr_scale;
  opt.head_warmup_epochs = spec.head_warmup_epochs;
  opt.log = info;
  return opt;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

// ---- subcommands ------------------------------------------------------

struct DatagenArgs {
  std::string split = "all";
  bool wav = false;
};

int cmd_datagen(const Common& c, const DatagenArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  std::vector<std::string> splits;
  if (a.split == "all") {
    for (const auto& [name, _] : split_names()) splits.push_back(name);
  } else {
    if (!split_names().count(a.split)) throw ConfigError("unknown split: " + a.split);
    splits.push_back(a.split);
  }
  Json summary = Json::object();
  for (const auto& name : splits) {
    auto recs = training::split_records(cfg.plan, split_names().at(name));
    if (a.wav) {
      const fs::path dir = fs::path(run.root()) / "audio" / name;
      fs::create_directories(dir);
      for (auto& r : recs) {
        const std::string path = (dir / (r.utterance_id + ".wav")).string();
        dsp::write_wav(path, harness::synthesize(cfg.plan.synth, r));
        r.audio = path;
      }
    }
    harness::write_manifest(run("manifests", name + ".jsonl"), recs);
    summary[name] = recs.size();
  }
  write_json_file(run("reports", "datagen.json"), summary);
  print_json(summary);
  return 0;
}

struct FeaturizeArgs {
  std::string data;
  std::string split = "test";
  std::string out;
};

int cmd_featurize(const Common& c, const FeaturizeArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  const auto d = load_data(cfg, run, a.data, a.split);
  const std::string stem = a.data.empty() ? a.split : fs::path(a.data).stem().string();
  const std::string out = a.out.empty() ? run("manifests", stem + ".feat") : a.out;
  Json meta{{"features", models::feature_config_to_json(cfg.plan.features)}, {"source", a.data.empty() ? a.split : a.data}};
  training::save_examples(out, d.examples, meta);
  print_json({{"examples", d.examples.size()}, {"output", out}});
  return 0;
}

struct TrainAsrArgs {
  std::string data;
  std::string eval;
  std::optional<int> epochs;
};

int cmd_train_asr(const Common& c, const TrainAsrArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  auto spec = cfg.phase(training::Phase::kAsrPretrain);
  if (a.epochs) spec.schedule.epochs = *a.epochs;
  auto data = load_data(cfg, run, a.data, "asr_train").examples;
  std::vector<std::string> transcripts;
  for (const auto& e : data) transcripts.push_back(e.transcript);
  const auto vocabs = training::build_vocabs(transcripts, cfg.plan.model.vocab_sizes);
  training::attach_targets(data, vocabs);

  models::HctcConfig mc = cfg.plan.model;
  for (int l = 0; l < models::kLevels; ++l) mc.vocab_sizes[l] = vocabs[l].size();
  auto asr = models::HctcModel::create(mc, cfg.plan.features, mix_seed(cfg.plan.seed, 1));
  for (int l = 0; l < models::kLevels; ++l) asr.vocab_hashes[l] = vocabs[l].hash();
  const auto report = training::train_asr(asr, data, options_for(spec, mix_seed(cfg.plan.seed, 100)));

  models::save_checkpoint(asr, run("checkpoints", "asr_pretrain.ckpt"));
  for (int l = 0; l < models::kLevels; ++l)
    vocabs[l].save(run("checkpoints", std::string("vocab_") + text::level_name(text::Level(l)) + ".tsv"));
  std::optional<text::NgramLm> lm;
  if (cfg.plan.lm_order > 0) {
    std::vector<std::vector<int>> corpus;
    for (const auto& e : data)
      if (!e.targets[2].empty()) corpus.push_back(e.targets[2]);
    lm = text::train_ngram(corpus, vocabs[2].size(), cfg.plan.lm_order);
    lm->write_arpa(run("checkpoints", "lm.arpa"));
  }
  Json out{{"checkpoint", run("checkpoints", "asr_pretrain.ckpt")},
           {"vocab_sizes", {vocabs[0].size(), vocabs[1].size(), vocabs[2].size()}},
           {"train", report.to_json()}};
  if (!a.eval.empty()) {
    const auto test = load_data(cfg, run, a.eval, "test").examples;
    out["wer"] = training::evaluate_wer(asr, vocabs[2], lm ? &*lm : nullptr, cfg.plan.decode, test);
  }
  write_json_file(run("reports", "train_asr.json"), out);
  out.erase("train");
  print_json(out);
  return 0;
}

struct TrainS2IArgs {
  std::vector<std::string> data;
  std::string asr;
  std::string init;
  std::string out = "s2i_v1.ckpt";
  std::string eval;
  std::optional<std::string> pool;
  std::optional<int> epochs;
  std::optional<double> lr;
  bool from_scratch = false;
};

int cmd_train_s2i(const Common& c, const TrainS2IArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  auto spec = cfg.phase(a.init.empty() ? training::Phase::kS2IV1 : training::Phase::kS2IV2);
  if (a.epochs) spec.schedule.epochs = *a.epochs;
  if (a.lr) spec.schedule.lr = *a.lr;
  if (a.pool) spec.pool = models::parse_pool(*a.pool);
  if (a.from_scratch) spec.from_scratch = true;

  std::vector<Example> labeled;
  if (a.data.empty()) {
    labeled = load_data(cfg, run, "", "v1").examples;
  } else {
    for (const auto& input : a.data) {
      auto part = load_data(cfg, run, input, "v1").examples;
      labeled.insert(labeled.end(), part.begin(), part.end());
    }
  }
  const auto opt = options_for(spec, mix_seed(cfg.plan.seed, 101));
  training::TrainReport report;
  std::optional<models::S2IModel> model;
  if (!a.init.empty()) {
    model = models::load_s2i(a.init);
    report = training::train_s2i(*model, labeled, opt);
  } else {
    std::optional<models::HctcModel> asr;
    if (!spec.from_scratch) asr = models::load_hctc(checkpoint_or(run, a.asr, "asr_pretrain.ckpt"));
    const models::S2IConfig sc{asr ? asr->net.config : cfg.plan.model, spec.pool};
    model = training::finetune_s2i(asr ? &*asr : nullptr, sc, cfg.plan.features, labeled, opt, &report);
  }
  const std::string out = fs::path(a.out).has_parent_path() ? a.out : run("checkpoints", a.out);
  models::save_checkpoint(*model, out);
  Json summary{{"checkpoint", out}, {"n_train", labeled.size()}, {"pool", models::pool_name(model->net.pool)},
               {"from_scratch", spec.from_scratch && a.init.empty()}, {"train", report.to_json()}};
  if (!a.eval.empty()) {
    const auto test = load_data(cfg, run, a.eval, "test").examples;
    summary["metrics"] = training::evaluate_s2i(*model, test).to_json();
  }
  write_json_file(run("reports", fs::path(out).stem().string() + "_train.json"), summary);
  summary.erase("train");
  print_json(summary);
  return 0;
}

int cmd_train_baseline(const Common& c) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = baseline::train_baseline(cfg.plan.synth, cfg.baseline);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.table.save(run("checkpoints", "translit_table.tsv"));
  m.translit.save(run("checkpoints", "translit.ckpt"));
  m.intent.save(run("checkpoints", "tfidf.ckpt"));
  const auto held = baseline::heldout_tokens(cfg.plan.synth, cfg.baseline);
  Json out{{"seconds", s},
           {"table_entries", m.table.size()},
           {"tfidf_terms", m.intent.vocab_size()},
           {"heldout_tokens", held.size()},
           {"heldout_token_error", baseline::token_error_rate(held, m.script, m.table, &m.translit)},
           {"translit_loss_curve", m.translit_curve},
           {"config", cfg.baseline.to_json()}};
  write_json_file(run("reports", "train_baseline.json"), out);
  out.erase("translit_loss_curve");
  out.erase("config");
  print_json(out);
  return 0;
}

struct DecodeArgs {
  std::string asr;
  std::string wav;
  std::string data;
  bool no_lm = false;
  bool greedy = false;
};

int cmd_decode(const Common& c, const DecodeArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  const std::string ckpt = checkpoint_or(run, a.asr, "asr_pretrain.ckpt");
  const auto asr = models::load_hctc(ckpt);
  const auto vocabs = load_vocabs(fs::path(ckpt).parent_path().string());
  const auto lm = load_lm_if_present((fs::path(ckpt).parent_path() / "lm.arpa").string(), a.no_lm);
  models::DecodeConfig dc = cfg.plan.decode;
  if (a.greedy) dc.beam_width = dc.n_best = 1;
  if (!a.wav.empty()) {
    const auto t = models::transcribe(dsp::read_wav(a.wav), asr, vocabs[2], lm ? &*lm : nullptr, dc);
    print_json({{"audio", a.wav}, {"text", t.text}});
    return 0;
  }
  const auto test = load_data(cfg, run, a.data, "test").examples;
  std::vector<Json> rows;
  std::vector<std::string> refs, hyps;
  for (const auto& e : test) {
    const auto t = models::transcribe(e.features(), asr, vocabs[2], lm ? &*lm : nullptr, dc);
    refs.push_back(e.transcript);
    hyps.push_back(t.text);
    rows.push_back({{"id", e.id}, {"ref", e.transcript}, {"hyp", t.text}, {"noise_level", e.noise_level}});
  }
  write_jsonl(run("reports", "decode.jsonl"), rows);
  Json summary{{"n", test.size()}, {"wer", harness::corpus_wer(refs, hyps)}, {"lm", lm.has_value()}};
  write_json_file(run("reports", "decode_summary.json"), summary);
  print_json(summary);
  return 0;
}

// Everything the text pipeline needs, loaded from a checkpoint directory.
struct PipelineBundle {
  models::HctcModel asr;
  training::Vocabs vocabs;
  std::optional<text::NgramLm> lm;
  baseline::TranslitTable table;
  baseline::Seq2SeqTranslit translit;
  baseline::TfidfIntentModel intent;

  baseline::PipelineSystem system(const models::DecodeConfig& dc) const {
    baseline::PipelineSystem s;
    s.asr = &asr;
    s.vocab = &vocabs[2];
    s.lm = lm ? &*lm : nullptr;
    s.decode = dc;
    s.table = &table;
    s.translit = &translit;
    s.intent = &intent;
    return s;
  }
};

PipelineBundle load_pipeline(const RunDir& run, const std::string& asr_path, bool no_lm) {
  const std::string ckpt = checkpoint_or(run, asr_path, "asr_pretrain.ckpt");
  const std::string dir = fs::path(ckpt).parent_path().string();
  return PipelineBundle{models::load_hctc(ckpt),
                        load_vocabs(dir),
                        load_lm_if_present((fs::path(dir) / "lm.arpa").string(), no_lm),
                        baseline::TranslitTable::load(run("checkpoints", "translit_table.tsv")),
                        baseline::Seq2SeqTranslit::load(run("checkpoints", "translit.ckpt")),
                        baseline::TfidfIntentModel::load(run("checkpoints", "tfidf.ckpt"))};
}

struct PredictArgs {
  std::string system = "e2e";
  std::string s2i;
  std::string asr;
  std::string wav;
  std::string data;
  bool no_lm = false;
};

Json prediction_row(const std::string& id, int intent, double confidence) {
  return {{"id", id}, {"intent", intent}, {"intent_name", models::intent_name(intent)}, {"confidence", confidence}};
}

int cmd_predict(const Common& c, const PredictArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  if (a.system != "e2e" && a.system != "pipeline") throw ConfigError("--system must be e2e or pipeline");
  std::optional<models::S2IModel> e2e;
  std::optional<PipelineBundle> pipe;
  if (a.system == "e2e")
    e2e = models::load_s2i(checkpoint_or(run, a.s2i, "s2i_v1.ckpt"));
  else
    pipe = load_pipeline(run, a.asr, a.no_lm);
  const auto sys = pipe ? pipe->system(cfg.plan.decode) : baseline::PipelineSystem{};

  if (!a.wav.empty()) {
    const auto audio = dsp::read_wav(a.wav);
    Json row;
    if (e2e) {
      const auto p = models::predict_intent(audio, *e2e);
      row = prediction_row(a.wav, p.intent, p.confidence);
    } else {
      const auto p = baseline::pipeline_predict(audio, sys);
      row = prediction_row(a.wav, p.intent, p.confidence);
      row["transcript"] = p.transcript;
      row["transliterated"] = p.transliterated;
    }
    print_json(row);
    return 0;
  }
  const auto test = load_data(cfg, run, a.data, "test").examples;
  std::vector<Json> rows;
  for (const auto& e : test) {
    if (e2e) {
      const auto p = models::predict_intent(e.features(), *e2e);
      rows.push_back(prediction_row(e.id, p.intent, p.confidence));
    } else {
      const auto p = baseline::pipeline_predict(e.features(), sys);
      auto row = prediction_row(e.id, p.intent, p.confidence);
      row["transcript"] = p.transcript;
      rows.push_back(std::move(row));
    }
  }
  const std::string out = run("reports", "predictions_" + a.system + ".jsonl");
  write_jsonl(out, rows);
  print_json({{"n", rows.size()}, {"output", out}});
  return 0;
}

struct SelectArgs {
  std::string s2i;
  std::string pool;
  std::string labeled;
  std::string mode = "bottom_k";
  std::optional<int> k;
  std::optional<double> threshold;
};

// Writes the chosen pool items in the pool's own format, with `intents`
// replacing the stored labels when given.
void write_subset(const std::string& path_stem, const Dataset& pool, const std::vector<int>& idx,
                  const std::vector<int>* intents, std::string* written) {
  if (pool.records.empty()) {
    std::vector<Example> out;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      out.push_back(pool.examples[idx[j]]);
      if (intents) out.back().intent = (*intents)[j];
    }
    *written = path_stem + ".feat";
    training::save_examples(*written, out);
  } else {
    std::vector<harness::ManifestRecord> out;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      out.push_back(pool.records[idx[j]]);
      if (intents) out.back().intent = (*intents)[j];
    }
    *written = path_stem + ".jsonl";
    harness::write_manifest(*written, out);
  }
}

std::set<std::string> ids_of(const std::string& path) {
  std::set<std::string> ids;
  if (path.empty()) return ids;
  if (is_feature_cache(path)) {
    for (const auto& e : training::load_examples(path)) ids.insert(e.id);
  } else {
    for (const auto& r : harness::read_manifest(path)) ids.insert(r.utterance_id);
  }
  return ids;
}

int cmd_al_select(const Common& c, const SelectArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  auto spec = cfg.phase(training::Phase::kS2IV2);
  if (a.k) spec.select_k = *a.k;
  if (a.threshold) spec.select_threshold = *a.threshold;
  spec.select_mode = training::parse_select_mode(a.mode);
  const auto model = models::load_s2i(checkpoint_or(run, a.s2i, "s2i_v1.ckpt"));
  const auto pool = load_data(cfg, run, a.pool, "pool", false);
  std::vector<double> conf;
  std::vector<std::string> ids;
  for (const auto& e : pool.examples) {
    conf.push_back(models::predict_intent(e.features(), model).confidence);
    ids.push_back(e.id);
  }
  std::optional<double> threshold;
  if (spec.select_mode == training::SelectMode::kThreshold) threshold = spec.select_threshold;
  if (spec.select_mode == training::SelectMode::kRandom) threshold = std::numeric_limits<double>::infinity();
  const auto sel = training::select_by_confidence(conf, ids, spec.select_k, threshold, mix_seed(cfg.plan.seed, 200),
                                                  ids_of(a.labeled));
  std::string written;
  write_subset(run("manifests", "selected"), pool, sel.indices, nullptr, &written);
  double sel_conf = 0.0, pool_conf = 0.0;
  for (int i : sel.indices) sel_conf += conf[i];
  for (double x : conf) pool_conf += x;
  Json summary{{"mode", training::select_mode_name(spec.select_mode)},
               {"k", spec.select_k},
               {"n_selected", sel.indices.size()},
               {"clipped", sel.clipped},
               {"mean_confidence_selected", sel.indices.empty() ? 0.0 : sel_conf / sel.indices.size()},
               {"mean_confidence_pool", conf.empty() ? 0.0 : pool_conf / conf.size()},
               {"output", written}};
  write_json_file(run("reports", "al_select.json"), summary);
  print_json(summary);
  return 0;
}

struct PseudoArgs {
  std::string s2i;
  std::string pool;
  std::string labeled;
  std::optional<double> min_confidence;
};

int cmd_pseudo_label(const Common& c, const PseudoArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  auto spec = cfg.phase(training::Phase::kPseudo);
  if (a.min_confidence) spec.min_confidence = *a.min_confidence;
  const auto model = models::load_s2i(checkpoint_or(run, a.s2i, "s2i_v1.ckpt"));
  auto pool = load_data(cfg, run, a.pool, "pool", false);
  const auto taken = ids_of(a.labeled);
  std::vector<int> idx, labels;
  int agree = 0;
  for (std::size_t i = 0; i < pool.examples.size(); ++i) {
    const auto& e = pool.examples[i];
    if (taken.count(e.id)) continue;
    const auto p = models::predict_intent(e.features(), model);
    if (p.confidence < spec.min_confidence) continue;
    idx.push_back(static_cast<int>(i));
    labels.push_back(p.intent);
    agree += p.intent == e.intent;
  }
  const std::size_t candidates = pool.examples.size() - taken.size();
  std::string written;
  write_subset(run("manifests", "pseudo"), pool, idx, &labels, &written);
  Json summary{{"min_confidence", spec.min_confidence},
               {"n_kept", idx.size()},
               {"kept_fraction", candidates ? static_cast<double>(idx.size()) / candidates : 0.0},
               {"label_agreement", idx.empty() ? 0.0 : static_cast<double>(agree) / idx.size()},
               {"output", written}};
  write_json_file(run("reports", "pseudo_label.json"), summary);
  print_json(summary);
  return 0;
}

struct EvaluateArgs {
  std::string predictions;
  std::string data;
  std::string decode;
};

int cmd_evaluate(const Common& c, const EvaluateArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  std::map<std::string, int> pred;
  for (const auto& row : read_jsonl(a.predictions)) pred[row.at("id").get<std::string>()] = row.at("intent").get<int>();
  std::vector<Example> gold;
  if (!a.data.empty() && is_feature_cache(a.data)) {
    gold = training::load_examples(a.data);
  } else {
    const auto recs = a.data.empty() ? training::split_records(cfg.plan, training::Split::kTest)
                                     : harness::read_manifest(a.data);
    for (const auto& r : recs) {
      Example e;
      e.id = r.utterance_id;
      e.transcript = r.transcript;
      e.intent = r.intent.value_or(-1);
      e.noise_level = r.noise_level;
      gold.push_back(std::move(e));
    }
  }
  std::vector<int> preds;
  std::vector<Example> matched;
  for (auto& e : gold) {
    const auto it = pred.find(e.id);
    if (it == pred.end() || e.intent < 0) continue;
    preds.push_back(it->second);
    matched.push_back(std::move(e));
  }
  if (matched.empty()) throw InputError("no prediction matches a labeled reference id");
  auto ev = training::evaluate_intents(preds, matched);
  if (!a.decode.empty()) {
    std::vector<std::string> refs, hyps;
    for (const auto& row : read_jsonl(a.decode)) {
      refs.push_back(row.at("ref").get<std::string>());
      hyps.push_back(row.at("hyp").get<std::string>());
    }
    ev.report.wer = harness::corpus_wer(refs, hyps);
  }
  Json out = ev.to_json();
  out["n"] = matched.size();
  out["unmatched_references"] = gold.size() - matched.size();
  write_json_file(run("reports", "metrics_" + fs::path(a.predictions).stem().string() + ".json"), out);
  Json brief{{"n", matched.size()},
             {"f1_all", ev.report.f1_all()},
             {"f1_excl", ev.report.f1_excl()},
             {"accuracy", ev.report.all.accuracy}};
  for (const auto& [noise, f1] : ev.f1_by_noise) brief["f1_by_noise"].push_back({noise, f1});
  if (ev.report.wer >= 0.0) brief["wer"] = ev.report.wer;
  print_json(brief);
  return 0;
}

struct BenchArgs {
  std::string s2i;
  std::string asr;
  std::string data;
  std::optional<int> items;
  bool no_lm = false;
};

int cmd_bench(const Common& c, const BenchArgs& a) {
  const Config cfg = load_config(c);
  RunDir run(c.run_dir);
  const int n_items = a.items.value_or(cfg.bench.items);
  auto data = load_data(cfg, run, a.data, "test", false);
  if (data.records.empty()) throw ConfigError("bench needs a manifest so it can time featurisation from audio");
  if (static_cast<int>(data.records.size()) > n_items) data.records.resize(n_items);
  std::vector<dsp::AudioBuffer> audio;
  for (const auto& r : data.records) audio.push_back(harness::load_audio(cfg.plan.synth, r));
  const int n = static_cast<int>(audio.size());

  Json out{{"items", n}, {"warmup", cfg.bench.warmup}, {"reps", cfg.bench.reps}};
  const auto e2e = models::load_s2i(checkpoint_or(run, a.s2i, "s2i_v1.ckpt"));
  out["e2e"] = harness::latency_bench(n, [&](int i) { models::predict_intent(audio[i], e2e); }, cfg.bench.warmup,
                                      cfg.bench.reps)
                   .to_json();
  if (fs::exists(run("checkpoints", "tfidf.ckpt"))) {
    const auto bundle = load_pipeline(run, a.asr, a.no_lm);
    const auto sys = bundle.system(cfg.plan.decode);
    std::array<double, 4> stage{};
    long timed = 0;
    int call = 0;
    const int untimed = cfg.bench.warmup * n;
    out["pipeline"] = harness::latency_bench(
                          n,
                          [&](int i) {
                            const auto r = baseline::pipeline_predict(audio[i], sys);
                            if (call++ < untimed) return;
                            stage[0] += r.featurize_ms;
                            stage[1] += r.asr_ms;
                            stage[2] += r.translit_ms;
                            stage[3] += r.classify_ms;
                            ++timed;
                          },
                          cfg.bench.warmup, cfg.bench.reps)
                          .to_json();
    const char* names[] = {"featurize_ms", "asr_ms", "translit_ms", "classify_ms"};
    for (int s = 0; s < 4; ++s) out["pipeline_stages"][names[s]] = timed ? stage[s] / timed : 0.0;
  } else {
    info("no baseline checkpoints in the run directory; timing the end-to-end model only");
  }
  write_json_file(run("reports", "bench.json"), out);
  print_json(out);
  return 0;
}

struct RunPlanArgs {
  std::string plan;
};

int cmd_run_plan(const Common& c, const RunPlanArgs& a) {
  Config cfg = load_config(c);
  if (!a.plan.empty()) {
    cfg.plan = training::ExperimentPlan::load(a.plan);
    if (c.seed) cfg.plan.seed = *c.seed;
  }
  if (cfg.plan.phases.empty()) throw ConfigError("the plan has no phases");
  const auto rows = training::run_experiment(cfg.plan, c.run_dir, info);
  for (const auto& r : rows) std::cout << r.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-to-intent toolkit", "s2i"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "JSON configuration (default: $S2I_CONFIG, else built-in defaults)");
  app.add_option("--seed", common.seed, "Overrides the training seed of the configuration");
  app.add_option("--run-dir", common.run_dir, "Output directory (checkpoints/, manifests/, reports/)")
      ->capture_default_str();

  std::function<int()> action;

  DatagenArgs dg;
  auto* sc = app.add_subcommand("datagen", "Write the synthetic split manifests (optionally rendered WAVs)");
  sc->add_option("--split", dg.split, "asr_train, v1, pool, test or all")->capture_default_str();
  sc->add_flag("--wav", dg.wav, "Render every utterance to a WAV file");
  sc->callback([&] { action = [&] { return cmd_datagen(common, dg); }; });

  FeaturizeArgs fz;
  sc = app.add_subcommand("featurize", "Cache stacked log-mel features of a manifest");
  sc->add_option("--data", fz.data, "Input manifest (default: the plan split)");
  sc->add_option("--split", fz.split, "Plan split used when --data is absent")->capture_default_str();
  sc->add_option("--out", fz.out, "Output .feat path");
  sc->callback([&] { action = [&] { return cmd_featurize(common, fz); }; });

  TrainAsrArgs ta;
  sc = app.add_subcommand("train-asr", "Pretrain the hierarchical CTC model, its vocabularies and the LM");
  sc->add_option("--data", ta.data, "Training manifest or .feat (default: the asr_train split)");
  sc->add_option("--eval", ta.eval, "Manifest or .feat to report WER on");
  sc->add_option("--epochs", ta.epochs);
  sc->callback([&] { action = [&] { return cmd_train_asr(common, ta); }; });

  TrainS2IArgs ts;
  sc = app.add_subcommand("train-s2i", "Fine-tune the speech-to-intent model");
  sc->add_option("--data", ts.data, "Labeled manifests or .feat files (default: the v1 split)");
  sc->add_option("--asr", ts.asr, "Pretrained ASR checkpoint");
  sc->add_option("--init", ts.init, "Continue training this S2I checkpoint");
  sc->add_option("--out", ts.out, "Output checkpoint name or path")->capture_default_str();
  sc->add_option("--eval", ts.eval, "Manifest or .feat to report intent metrics on");
  sc->add_option("--pool", ts.pool, "mha or time_average");
  sc->add_option("--epochs", ts.epochs);
  sc->add_option("--lr", ts.lr);
  sc->add_flag("--from-scratch", ts.from_scratch, "Random trunk instead of the pretrained one");
  sc->callback([&] { action = [&] { return cmd_train_s2i(common, ts); }; });

  sc = app.add_subcommand("train-baseline", "Train the transliteration and text-classifier pipeline components");
  sc->callback([&] { action = [&] { return cmd_train_baseline(common); }; });

  DecodeArgs dc;
  sc = app.add_subcommand("decode", "Transcribe a WAV file or a dataset");
  sc->add_option("--asr", dc.asr, "ASR checkpoint (vocabularies and LM are read from its directory)");
  sc->add_option("--wav", dc.wav);
  sc->add_option("--data", dc.data, "Manifest or .feat (default: the test split)");
  sc->add_flag("--no-lm", dc.no_lm, "Skip LM reranking");
  sc->add_flag("--greedy", dc.greedy, "Beam width 1");
  sc->callback([&] { action = [&] { return cmd_decode(common, dc); }; });

  PredictArgs pr;
  sc = app.add_subcommand("predict", "Predict intents with the end-to-end model or the pipeline");
  sc->add_option("--system", pr.system, "e2e or pipeline")->capture_default_str();
  sc->add_option("--s2i", pr.s2i, "S2I checkpoint");
  sc->add_option("--asr", pr.asr, "ASR checkpoint for the pipeline");
  sc->add_option("--wav", pr.wav);
  sc->add_option("--data", pr.data, "Manifest or .feat (default: the test split)");
  sc->add_flag("--no-lm", pr.no_lm);
  sc->callback([&] { action = [&] { return cmd_predict(common, pr); }; });

  SelectArgs sa;
  sc = app.add_subcommand("al-select", "Pick pool utterances for annotation by model confidence");
  sc->add_option("--s2i", sa.s2i, "S2I checkpoint");
  sc->add_option("--pool", sa.pool, "Pool manifest or .feat (default: the pool split)");
  sc->add_option("--labeled", sa.labeled, "Already labeled manifest or .feat to exclude");
  sc->add_option("--mode", sa.mode, "bottom_k, threshold or random")->capture_default_str();
  sc->add_option("--k", sa.k);
  sc->add_option("--threshold", sa.threshold);
  sc->callback([&] { action = [&] { return cmd_al_select(common, sa); }; });

  PseudoArgs pl;
  sc = app.add_subcommand("pseudo-label", "Label confident pool utterances with the model's own predictions");
  sc->add_option("--s2i", pl.s2i, "S2I checkpoint");
  sc->add_option("--pool", pl.pool, "Pool manifest or .feat (default: the pool split)");
  sc->add_option("--labeled", pl.labeled, "Already labeled manifest or .feat to exclude");
  sc->add_option("--min-confidence", pl.min_confidence);
  sc->callback([&] { action = [&] { return cmd_pseudo_label(common, pl); }; });

  EvaluateArgs ev;
  sc = app.add_subcommand("evaluate", "Score intent predictions against references");
  sc->add_option("--predictions", ev.predictions, "JSONL from predict")->required();
  sc->add_option("--data", ev.data, "Reference manifest or .feat (default: the test split)");
  sc->add_option("--decode", ev.decode, "JSONL from decode, for WER");
  sc->callback([&] { action = [&] { return cmd_evaluate(common, ev); }; });

  BenchArgs bn;
  sc = app.add_subcommand("bench", "Latency of both systems from audio");
  sc->add_option("--s2i", bn.s2i);
  sc->add_option("--asr", bn.asr);
  sc->add_option("--data", bn.data, "Manifest (default: the test split)");
  sc->add_option("--items", bn.items);
  sc->add_flag("--no-lm", bn.no_lm);
  sc->callback([&] { action = [&] { return cmd_bench(common, bn); }; });

  RunPlanArgs rp;
  sc = app.add_subcommand("run-plan", "Run every phase of an experiment plan");
  sc->add_option("--plan", rp.plan, "Plan JSON (default: the configuration itself)");
  sc->callback([&] { action = [&] { return cmd_run_plan(common, rp); }; });

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
      known = known || sub->get_name() == argv[1];
    if (!known) {
      std::cerr << "unknown subcommand: " << argv[1] << "\n\n" << app.help();
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return 2;
  }
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
