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

// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-4 and 11 are
// exact property checks against independent oracles; 5-10 train the desk
// system on the synthetic corpus and compare directions.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "s2i/baseline/builder.hpp"
#include "s2i/baseline/pipeline.hpp"
#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"
#include "s2i/core/json_io.hpp"
#include "s2i/core/rng.hpp"
#include "s2i/ctc/ctc.hpp"
#include "s2i/harness/metrics.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/models/transcribe.hpp"
#include "s2i/nn/attention.hpp"
#include "s2i/nn/layers.hpp"
#include "s2i/nn/lstm.hpp"
#include "s2i/text/ngram.hpp"
#include "s2i/text/vocab.hpp"
#include "s2i/training/experiment.hpp"
#include "s2i/training/selection.hpp"
#include "s2i/training/trainers.hpp"

namespace fs = std::filesystem;
using namespace s2i;
using training::Example;

namespace {

// ---- pinned tolerances and budgets -------------------------------------

constexpr double kCtcTol = 1e-9;
constexpr double kCtcSeconds = 10.0;
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kBeamTol = 1e-9;
constexpr double kTextTol = 1e-9;
constexpr double kLedgerTol = 1e-6;
constexpr double kPretrainMargin = 0.05;   // F1 points as a fraction
constexpr int kPretrainWins = 4;
constexpr double kPretrainMinutes = 30.0;
constexpr int kNoiseWins = 4;
constexpr double kPoolingGap = 0.02;
constexpr int kPoolingSeeds = 3;
constexpr int kActiveWins = 3;
constexpr double kTranslitTer = 0.01;
constexpr int kSeeds = 5;
constexpr int kLatencyItems = 50;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

struct Ledger {
  int failures = 0;
  Json report = Json::object();

  void line(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
    report[std::to_string(id)] = {{"name", name}, {"pass", pass}, {"detail", detail}};
  }
};

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

Matrix random_logprobs(int T, int n_labels, Rng& rng, double scale = 2.0) {
  Matrix z(T, n_labels);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = uniform(rng, -scale, scale);
  return nn::log_softmax_rows(z);
}

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

std::vector<std::vector<int>> all_sequences(int V, int max_len) {
  std::vector<std::vector<int>> out{{}}, frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier)
      for (int v = 0; v < V; ++v) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// ---- 1: CTC loss against path enumeration ------------------------------

void criterion_ctc(Ledger& L) {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  long checked = 0;
  for (int trial = 0; trial < 5; ++trial)
    for (int T = 1; T <= 4; ++T)
      for (int V = 1; V <= 3; ++V) {
        const Matrix lp = random_logprobs(T, V + 1, rng);
        for (const auto& target : all_sequences(V, T)) {
          if (ctc::min_frames(target) > T) continue;
          worst = std::max(worst, std::abs(ctc::ctc_loss(lp, target).loss - oracle::ctc_brute_force(lp, target)));
          ++checked;
        }
      }
  const double s = seconds_since(t0);
  L.line(1, "CTC loss equals path enumeration", worst < kCtcTol && s < kCtcSeconds,
         std::to_string(checked) + " cases, max |diff| " + fmt(worst, 15) + ", " + fmt(s, 2) + " s");
}

// ---- 2: gradient suite -------------------------------------------------

template <class LossFn>
double check_params(nn::ParamStore& ps, LossFn&& loss) {
  nn::Grads g = ps.zeros_like();
  loss(&g);
  return s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr); }).max_rel_error;
}

double weighted_sum(const Matrix& y, const Matrix& w) { return (y.array() * w.array()).sum(); }

void criterion_gradients(Ledger& L) {
  const auto t0 = Clock::now();
  Rng rng(202);
  std::map<std::string, double> err;

  {
    nn::ParamStore ps;
    auto lin = nn::Linear::create(ps, "lin", 5, 4, rng);
    const Matrix x = random_matrix(3, 5, rng), w = random_matrix(3, 4, rng);
    err["linear"] = check_params(ps, [&](nn::Grads* g) {
      if (g) lin.backward(ps, x, w, *g);
      return weighted_sum(lin.forward(ps, x), w);
    });
  }
  {
    nn::ParamStore ps;
    auto layer = nn::BiLstm::create(ps, "lstm", 3, 4, rng);
    const Matrix x = random_matrix(6, 3, rng), wy = random_matrix(6, 8, rng);
    const RowVector wc = random_matrix(1, 8, rng).row(0);
    err["bilstm"] = check_params(ps, [&](nn::Grads* g) {
      nn::BiLstm::Cache cache;
      auto out = layer.forward(ps, x, cache);
      if (g) layer.backward(ps, x, cache, wy, wc, *g);
      return weighted_sum(out.y, wy) + out.final_cell.dot(wc);
    });
  }
  {
    nn::ParamStore ps;
    auto mha = nn::MultiHeadAttention::create(ps, "mha", 6, 2, rng);
    const Matrix q = random_matrix(1, 6, rng), kv = random_matrix(5, 6, rng), w = random_matrix(1, 6, rng);
    err["mha"] = check_params(ps, [&](nn::Grads* g) {
      nn::MultiHeadAttention::Cache cache;
      Matrix out = mha.forward(ps, q, kv, false, cache);
      if (g) {
        Matrix dq, dkv;
        mha.backward(ps, q, kv, cache, w, dq, dkv, *g);
      }
      return weighted_sum(out, w);
    });
  }
  {
    // CTC through log-softmax, with respect to the logits.
    Matrix z = random_matrix(7, 5, rng, 2.0);
    const std::vector<int> target{0, 2, 2, 1};
    const Matrix lp = nn::log_softmax_rows(z);
    const auto res = ctc::ctc_loss(lp, target);
    const Matrix analytic = nn::log_softmax_backward(lp, res.grad);
    std::vector<double> zv(z.data(), z.data() + z.size()), gv(analytic.data(), analytic.data() + analytic.size());
    err["ctc"] = s2i::testing::grad_check(zv, gv, [&] {
                   return ctc::ctc_loss(nn::log_softmax_rows(Eigen::Map<Matrix>(zv.data(), 7, 5)), target).loss;
                 }).max_rel_error;
  }
  models::HctcConfig tiny;
  tiny.feature_dim = 10;
  tiny.block_layers = {1, 1, 1};
  tiny.hidden = 4;
  tiny.heads = 2;
  tiny.vocab_sizes = {3, 4, 5};
  const Matrix x = random_matrix(5, 10, rng);
  for (auto pool : {models::PoolKind::kMha, models::PoolKind::kTimeAverage}) {
    nn::ParamStore ps;
    auto net = models::S2INet::create(ps, {tiny, pool}, rng);
    // Move the standardisation away from the identity so its gradients are exercised.
    for (auto* slot : {&net.seq_center, &net.seq_scale, &net.cell_center, &net.cell_scale})
      if (slot->size() > 0)
        for (std::size_t i = 0; i < slot->size(); ++i) ps.values()[slot->offset + i] += uniform(rng, -0.3, 0.3);
    const int label = 5;
    err[std::string("s2i_") + models::pool_name(pool)] = check_params(ps, [&](nn::Grads* g) {
      models::S2INet::Cache cache;
      const Matrix lp = nn::log_softmax_rows(net.forward(ps, x, cache));
      if (g) {
        Matrix d = Matrix::Zero(1, models::kNumIntents);
        d(0, label) = -1.0;
        net.backward(ps, cache, nn::log_softmax_backward(lp, d), *g);
      }
      return -lp(0, label);
    });
  }
  const double s = seconds_since(t0);
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, e] : err) {
    worst = std::max(worst, e);
    detail += name + " " + fmt(e, 8) + ", ";
  }
  L.line(2, "finite-difference gradient suite", worst < kGradTol && s < kGradSeconds,
         detail + "max " + fmt(worst, 8) + ", " + fmt(s, 2) + " s");
}

// ---- 3: beam search exactness ------------------------------------------

void criterion_beam(Ledger& L) {
  Rng rng(303);
  double worst = 0.0;
  bool same_support = true, monotone = true;
  int cases = 0;
  for (int trial = 0; trial < 20; ++trial)
    for (int T = 1; T <= 3; ++T)
      for (int V = 1; V <= 2; ++V) {
        const Matrix lp = random_logprobs(T, V + 1, rng);
        const auto truth = oracle::collapsed_log_probs(lp);
        const int full = static_cast<int>(truth.size()) + 8;
        const auto hyps = ctc::prefix_beam_search(lp, {full, full});
        same_support = same_support && hyps.size() == truth.size();
        for (const auto& h : hyps) {
          const auto it = truth.find(h.ids);
          if (it == truth.end()) {
            same_support = false;
            continue;
          }
          worst = std::max(worst, std::abs(h.acoustic_logp - it->second));
        }
        double prev = -std::numeric_limits<double>::infinity();
        for (int beam = 1; beam <= full; ++beam) {
          const double best = ctc::prefix_beam_search(lp, {beam, 1}).front().acoustic_logp;
          monotone = monotone && best >= prev - kBeamTol;
          prev = best;
        }
        ++cases;
      }
  L.line(3, "beam search exactness", same_support && monotone && worst < kBeamTol,
         std::to_string(cases) + " cases, max |diff| " + fmt(worst, 15) + ", support " +
             (same_support ? "exact" : "differs") + ", beam monotone " + (monotone ? "yes" : "no"));
}

// ---- 4: segmentation optimality and LM normalisation -------------------

void criterion_text(Ledger& L) {
  const auto spec = harness::SynthSpec::desk_default();
  harness::CorpusOptions co;
  co.n = 400;
  co.seed = 404;
  std::vector<std::string> corpus;
  for (const auto& r : harness::make_records(spec, co)) corpus.push_back(r.transcript);

  double seg_worst = 0.0;
  int seg_cases = 0;
  Rng rng(404);
  for (auto [level, size] : {std::pair{text::Level::kShort, 100}, std::pair{text::Level::kLong, 200}}) {
    const auto vocab = text::build_vocab(corpus, size, level);
    std::map<std::string, double> table;
    for (int id = 1; id < vocab.size(); ++id) table[vocab.piece(id).text] = vocab.piece(id).log_prob;
    for (int trial = 0; trial < 200; ++trial) {
      const std::string& sent = corpus[uniform_int(rng, 0, static_cast<int>(corpus.size()) - 1)];
      if (sent.empty()) continue;
      const int start = uniform_int(rng, 0, static_cast<int>(sent.size()) - 1);
      const std::string s = sent.substr(start, uniform_int(rng, 1, 12));
      bool covered = true;
      for (char c : s) covered = covered && table.count(std::string(1, c));
      if (!covered) continue;
      const auto seg = text::segment(s, vocab);
      seg_worst = std::max(seg_worst, std::abs(text::segmentation_log_prob(seg.ids, vocab) -
                                               oracle::best_segmentation_brute_force(s, table)));
      ++seg_cases;
    }
  }

  const auto vocab = text::build_vocab(corpus, 120, text::Level::kLong);
  std::vector<std::vector<int>> ids;
  for (const auto& s : corpus) ids.push_back(text::segment(s, vocab).ids);
  const auto lm = text::train_ngram(ids, vocab.size(), 3);
  double mass_worst = 0.0;
  int contexts = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> ctx;
    if (trial % 3 == 0) ctx.push_back(lm.bos());
    for (int i = 0, n = uniform_int(rng, 0, 2); i < n; ++i) ctx.push_back(uniform_int(rng, 0, vocab.size() - 1));
    double mass = std::exp(lm.log_prob(lm.eos(), ctx));
    for (int w = 0; w < vocab.size(); ++w) mass += std::exp(lm.log_prob(w, ctx));
    mass_worst = std::max(mass_worst, std::abs(mass - 1.0));
    ++contexts;
  }
  L.line(4, "segmentation optimality and LM normalisation", seg_worst < kTextTol && mass_worst < kTextTol,
         std::to_string(seg_cases) + " segmentations max |diff| " + fmt(seg_worst, 15) + ", " +
             std::to_string(contexts) + " LM contexts max |mass-1| " + fmt(mass_worst, 15));
}

// ---- 11: metric axioms, checkpoint round trip, ledger reproducibility --

bool json_close(const Json& a, const Json& b, double tol, std::string& where) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= tol || (std::isnan(x) && std::isnan(y))) return true;
    where = fmt(x, 10) + " vs " + fmt(y, 10);
    return false;
  }
  if (a.type() != b.type()) {
    where = "type";
    return false;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) return (where = "keys", false);
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) return (where = it.key(), false);
      if (!json_close(it.value(), b.at(it.key()), tol, where)) return (where = it.key() + "." + where, false);
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return (where = "length", false);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], tol, where)) return (where = "[" + std::to_string(i) + "]" + where, false);
    return true;
  }
  if (a != b) where = "value";
  return a == b;
}

void criterion_axioms(Ledger& L, const fs::path& work) {
  Rng rng(1111);
  const std::vector<std::string> words{"a", "b", "c", "d"};
  int wer_cases = 0, wer_bad = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::string> ref, hyp;
    for (int i = 0, n = uniform_int(rng, 0, 6); i < n; ++i) ref.push_back(words[uniform_int(rng, 0, 3)]);
    for (int i = 0, n = uniform_int(rng, 0, 6); i < n; ++i) hyp.push_back(words[uniform_int(rng, 0, 3)]);
    const int brute = oracle::edit_distance_brute_force(ref, 0, hyp, 0);
    wer_bad += harness::word_edit_distance(ref, hyp) != brute;
    ++wer_cases;
  }

  const auto asr_path = (work / "roundtrip_asr.ckpt").string(), s2i_path = (work / "roundtrip_s2i.ckpt").string();
  auto asr = models::HctcModel::create(models::HctcConfig{}, dsp::FeatureConfig{}, 11);
  asr.stats.mean = Vector::Random(asr.net.config.feature_dim);
  asr.stats.inv_std = Vector::Random(asr.net.config.feature_dim).cwiseAbs() + Vector::Constant(asr.net.config.feature_dim, 0.5);
  auto s2i = models::S2IModel::create({models::HctcConfig{}, models::PoolKind::kMha}, dsp::FeatureConfig{}, 12);
  s2i.attach_trunk(asr);
  models::save_checkpoint(asr, asr_path);
  models::save_checkpoint(s2i, s2i_path);
  const auto asr2 = models::load_hctc(asr_path);
  const auto s2i2 = models::load_s2i(s2i_path);
  dsp::FeatureMatrix f;
  f.frames = random_matrix(17, asr.net.config.feature_dim, rng);
  bool bitwise = asr2.params.values() == asr.params.values() && s2i2.params.values() == s2i.params.values();
  const auto a1 = models::asr_forward(f, asr), a2 = models::asr_forward(f, asr2);
  for (int l = 0; l < models::kLevels; ++l) bitwise = bitwise && a1.logprobs[l] == a2.logprobs[l];
  bitwise = bitwise && models::predict_intent(f, s2i).distribution == models::predict_intent(f, s2i2).distribution;

  Json plan_json = {
      {"name", "reproducibility"},
      {"seed", 5},
      {"features", {{"n_mels", 8}}},
      {"model", {{"feature_dim", 40}, {"block_layers", {1, 1, 1}}, {"hidden", 6}, {"heads", 2},
                 {"vocab_sizes", {30, 40, 50}}}},
      {"decode", {{"beam_width", 4}, {"n_best", 4}}},
      {"data", {{"asr_train", 40}, {"v1", 40}, {"pool", 30}, {"test_per_level", 6}, {"test_noise", {0.0, 1.0}}}},
      {"phases",
       {{{"phase", "asr_pretrain"}, {"epochs", 1}, {"batch_audio_minutes", 0.1}},
        {{"phase", "s2i_v1"}, {"epochs", 2}, {"batch_audio_minutes", 0.1}},
        {{"phase", "s2i_v2"}, {"epochs", 1}, {"batch_audio_minutes", 0.1}, {"select_k", 10}},
        {{"phase", "pseudo"}, {"epochs", 1}, {"batch_audio_minutes", 0.1}, {"min_confidence", 0.0}}}}};
  const auto plan = training::ExperimentPlan::from_json(plan_json);
  const auto dir_a = work / "plan_a", dir_b = work / "plan_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  training::run_experiment(plan, dir_a.string());
  training::run_experiment(plan, dir_b.string());
  const auto la = read_jsonl((dir_a / "reports" / "ledger.jsonl").string());
  const auto lb = read_jsonl((dir_b / "reports" / "ledger.jsonl").string());
  std::string where;
  const bool reproducible = la.size() == plan.phases.size() && json_close(Json(la), Json(lb), kLedgerTol, where);

  L.line(11, "metric axioms, checkpoint round trip, seeded ledger", wer_bad == 0 && bitwise && reproducible,
         std::to_string(wer_cases - wer_bad) + "/" + std::to_string(wer_cases) + " WER cases match the oracle, checkpoint " +
             (bitwise ? "bitwise" : "NOT bitwise") + ", ledger " +
             (reproducible ? "reproduced within " + fmt(kLedgerTol, 6) : "differs at " + where));
}

// ---- 5-10: desk experiment ---------------------------------------------

struct Desk {
  training::ExperimentPlan plan;
  training::PhaseSpec asr, v1, v2;
  baseline::BaselineConfig baseline;
  int latency_items = kLatencyItems;
};

Desk desk_settings(bool small) {
  Desk d;
  d.plan.name = "acceptance";
  d.asr.schedule.phase = training::Phase::kAsrPretrain;
  d.asr.schedule.epochs = 30;
  d.asr.schedule.batch_audio_minutes = 0.42;
  d.asr.schedule.min_lr = 1e-4;
  d.asr.schedule.max_lr = 3e-3;
  d.v1.schedule.phase = training::Phase::kS2IV1;
  d.v1.schedule.epochs = 10;
  d.v1.schedule.batch_audio_minutes = 0.26;
  d.v1.schedule.lr = 2e-3;
  d.v1.trunk_lr_scale = 0.1;
  d.v1.head_warmup_epochs = 2;
  d.v2 = d.v1;
  d.v2.schedule.phase = training::Phase::kS2IV2;
  d.v2.schedule.epochs = 6;
  d.v2.head_warmup_epochs = 0;
  d.v2.select_k = 2500;
  if (small) {
    d.plan.data.asr_train = 300;
    d.plan.data.v1 = 200;
    d.plan.data.pool = 400;
    d.plan.data.test_per_level = 30;
    d.asr.schedule.epochs = 4;
    d.v1.schedule.epochs = 3;
    d.v2.schedule.epochs = 2;
    d.v2.select_k = 100;
    d.baseline.translit_pairs = 600;
    d.baseline.translit_train.epochs = 4;
    d.latency_items = 10;
  }
  d.plan.phases = {d.asr, d.v1, d.v2};
  return d;
}

training::TrainOptions options(const training::PhaseSpec& spec, std::uint64_t seed) {
  training::TrainOptions opt;
  opt.schedule = spec.schedule;
  if (!spec.masking) opt.masking.reset();
  opt.seed = seed;
  opt.freeze_blocks = spec.freeze_blocks;
  opt.trunk_lr_scale = spec.trunk_lr_scale;
  opt.head_warmup_epochs = spec.head_warmup_epochs;
  return opt;
}

// F1 (weighted over gold support) on the test utterances at `noise`.
double f1_at(const std::vector<int>& preds, const std::vector<Example>& test, double noise) {
  std::vector<int> p, g;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test[i].noise_level == noise) {
      p.push_back(preds[i]);
      g.push_back(test[i].intent);
    }
  return harness::intent_metrics(p, g).f1_all();
}

std::vector<int> e2e_predictions(const models::S2IModel& m, const std::vector<Example>& test) {
  std::vector<int> out;
  for (const auto& p : training::predict_all(m, test)) out.push_back(p.intent);
  return out;
}

double f1_all(const models::S2IModel& m, const std::vector<Example>& test) {
  return training::evaluate_s2i(m, test).report.f1_all();
}

std::string join(const std::vector<double>& v, int prec = 3) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i], prec);
  return s;
}

void desk_criteria(Ledger& L, const fs::path& work, bool small, const std::set<int>& only) {
  const Desk d = desk_settings(small);
  const auto& plan = d.plan;
  auto wanted = [&](int id) { return only.empty() || only.count(id); };
  Json numbers = Json::object();

  // Criterion 5 times everything from featurisation to the last fine-tune.
  const auto t_start = Clock::now();
  progress("featurising the ASR, V1 and test splits");
  auto asr_data = training::featurize_records(plan.synth, training::split_records(plan, training::Split::kAsrTrain),
                                              plan.features);
  const auto v1 = training::featurize_records(plan.synth, training::split_records(plan, training::Split::kV1),
                                              plan.features);
  const auto test_records = training::split_records(plan, training::Split::kTest);
  const auto test = training::featurize_records(plan.synth, test_records, plan.features, false);

  progress("pretraining the ASR model (" + std::to_string(d.asr.schedule.epochs) + " epochs)");
  std::vector<std::string> transcripts;
  for (const auto& e : asr_data) transcripts.push_back(e.transcript);
  const auto vocabs = training::build_vocabs(transcripts, plan.model.vocab_sizes);
  training::attach_targets(asr_data, vocabs);
  models::HctcConfig mc = plan.model;
  for (int l = 0; l < models::kLevels; ++l) mc.vocab_sizes[l] = vocabs[l].size();
  auto asr = models::HctcModel::create(mc, plan.features, mix_seed(plan.seed, 1));
  for (int l = 0; l < models::kLevels; ++l) asr.vocab_hashes[l] = vocabs[l].hash();
  training::train_asr(asr, asr_data, options(d.asr, mix_seed(plan.seed, 100)));
  std::vector<std::vector<int>> lm_corpus;
  for (const auto& e : asr_data)
    if (!e.targets[2].empty()) lm_corpus.push_back(e.targets[2]);
  const auto lm = text::train_ngram(lm_corpus, vocabs[2].size(), plan.lm_order);
  asr_data.clear();
  asr_data.shrink_to_fit();
  models::save_checkpoint(asr, (work / "asr.ckpt").string());

  const models::S2IConfig mha_cfg{asr.net.config, models::PoolKind::kMha};
  std::vector<models::S2IModel> pretrained;
  std::vector<double> f1_pre, f1_scr;
  for (int s = 1; s <= kSeeds; ++s) {
    progress("fine-tuning seed " + std::to_string(s) + " (pretrained and from scratch)");
    const auto opt = options(d.v1, mix_seed(plan.seed, 1000 + s));
    pretrained.push_back(training::finetune_s2i(&asr, mha_cfg, plan.features, v1, opt));
    f1_pre.push_back(f1_all(pretrained.back(), test));
    // From scratch: no trunk to protect, so the whole model trains at the full rate from the start.
    auto scratch_spec = d.v1;
    scratch_spec.trunk_lr_scale = 1.0;
    scratch_spec.head_warmup_epochs = 0;
    const auto scratch = training::finetune_s2i(nullptr, mha_cfg, plan.features, v1,
                                                options(scratch_spec, mix_seed(plan.seed, 1000 + s)));
    f1_scr.push_back(f1_all(scratch, test));
    progress("  pretrained F1 " + fmt(f1_pre.back(), 3) + ", scratch F1 " + fmt(f1_scr.back(), 3));
  }
  const double pretrain_minutes = seconds_since(t_start) / 60.0;
  int wins = 0;
  for (int s = 0; s < kSeeds; ++s) wins += f1_pre[s] - f1_scr[s] >= kPretrainMargin;
  numbers["pretrained_f1"] = f1_pre;
  numbers["scratch_f1"] = f1_scr;
  numbers["pretrain_minutes"] = pretrain_minutes;
  if (wanted(5))
    L.line(5, "pretraining advantage", wins >= kPretrainWins && pretrain_minutes < kPretrainMinutes,
           "pretrained F1 [" + join(f1_pre) + "] vs scratch [" + join(f1_scr) + "], " + std::to_string(wins) + "/" +
               std::to_string(kSeeds) + " seeds ahead by >= " + fmt(100 * kPretrainMargin, 0) + " points, " +
               fmt(pretrain_minutes, 1) + " min");

  // ---- 6, 9, 10: the text pipeline ----
  progress("training the pipeline text models and decoding the test set");
  std::vector<baseline::BaselineModels> baselines;
  for (int s = 1; s <= kSeeds; ++s) {
    auto cfg = d.baseline;
    cfg.seed = mix_seed(plan.seed, 2000 + s);
    baselines.push_back(baseline::train_baseline(plan.synth, cfg));
  }
  auto system_for = [&](const baseline::BaselineModels& b) {
    baseline::PipelineSystem sys;
    sys.asr = &asr;
    sys.vocab = &vocabs[2];
    sys.lm = &lm;
    sys.decode = plan.decode;
    sys.table = &b.table;
    sys.translit = &b.translit;
    sys.intent = &b.intent;
    return sys;
  };
  // The ASR stage is shared by every seed, so it runs once; the text half runs per seed.
  std::vector<baseline::PipelineResult> first;
  for (const auto& e : test) first.push_back(baseline::pipeline_predict(e.features(), system_for(baselines[0])));

  const std::vector<double>& levels = plan.data.test_noise;
  std::vector<double> top{levels[levels.size() - 2], levels.back()};
  int noise_wins = 0;
  std::vector<std::string> per_seed;
  Json pipe_numbers = Json::array();
  for (int s = 0; s < kSeeds; ++s) {
    std::vector<int> pipe;
    const auto sys = system_for(baselines[s]);
    for (const auto& r : first) pipe.push_back(s == 0 ? r.intent : baseline::classify_transcript(r.transcript, sys).intent);
    const auto e2e = e2e_predictions(pretrained[s], test);
    bool ok = true;
    std::string row;
    Json seed_row = Json::object();
    for (double lv : top) {
      const double fe = f1_at(e2e, test, lv), fp = f1_at(pipe, test, lv);
      ok = ok && fe >= fp;
      row += "noise " + fmt(lv, 2) + " e2e " + fmt(fe, 3) + " pipe " + fmt(fp, 3) + "; ";
      seed_row[fmt(lv, 2)] = {fe, fp};
    }
    seed_row["all_e2e"] = f1_pre[s];
    seed_row["all_pipeline"] = harness::intent_metrics(pipe, [&] {
                                 std::vector<int> g;
                                 for (const auto& e : test) g.push_back(e.intent);
                                 return g;
                               }()).f1_all();
    pipe_numbers.push_back(seed_row);
    noise_wins += ok;
    per_seed.push_back(row);
  }
  numbers["e2e_vs_pipeline"] = pipe_numbers;
  int exact_rows = 0, exact_agree = 0;
  std::vector<std::string> refs, hyps;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test[i].noise_level != 0.0) continue;
    refs.push_back(test[i].transcript);
    hyps.push_back(first[i].transcript);
    if (models::normalize_text(first[i].transcript) != models::normalize_text(test[i].transcript)) continue;
    ++exact_rows;
    const auto gold = baseline::classify_transcript(test[i].transcript, system_for(baselines[0]));
    exact_agree += gold.intent == first[i].intent && gold.confidence == first[i].confidence;
  }
  const double clean_wer = harness::corpus_wer(refs, hyps);
  numbers["clean_wer"] = clean_wer;
  if (wanted(6)) {
    std::cerr << "  .. per seed: \n";
    for (const auto& r : per_seed) std::cerr << "       " << r << "\n";
    L.line(6, "end-to-end vs pipeline under noise", noise_wins >= kNoiseWins && exact_rows > 0 && exact_agree == exact_rows,
           std::to_string(noise_wins) + "/" + std::to_string(kSeeds) + " seeds with e2e >= pipeline at noise " +
               fmt(top[0], 2) + " and " + fmt(top[1], 2) + " (" + per_seed[0] + "...), clean slice WER " +
               fmt(clean_wer, 3) + ", " + std::to_string(exact_agree) + "/" + std::to_string(exact_rows) +
               " exact transcripts give the gold-text intent");
  }

  if (wanted(9)) {
    progress("latency benchmark");
    std::vector<dsp::AudioBuffer> audio;
    for (int i = 0; i < d.latency_items && i < static_cast<int>(test_records.size()); ++i)
      audio.push_back(harness::load_audio(plan.synth, test_records[i]));
    const int n = static_cast<int>(audio.size());
    const auto sys = system_for(baselines[0]);
    const auto& model = pretrained[0];
    counters().reset();
    const auto e2e = harness::latency_bench(n, [&](int i) { models::predict_intent(audio[i], model); }, 1, 3);
    for (const auto& e : test) models::predict_intent(e.features(), model);
    const auto beams = counters().beam_expansions.load(), lm_q = counters().lm_queries.load();
    const auto pipe = harness::latency_bench(n, [&](int i) { baseline::pipeline_predict(audio[i], sys); }, 1, 3);
    numbers["latency"] = {{"e2e", e2e.to_json()}, {"pipeline", pipe.to_json()}};
    L.line(9, "latency direction and decode-free intent path", e2e.p50_ms < pipe.p50_ms && beams == 0 && lm_q == 0,
           "p50 e2e " + fmt(e2e.p50_ms, 2) + " ms vs pipeline " + fmt(pipe.p50_ms, 2) + " ms over " +
               std::to_string(n) + " utterances, e2e beam expansions " + std::to_string(beams) + ", LM queries " +
               std::to_string(lm_q));
  }

  if (wanted(10)) {
    std::vector<double> ter;
    for (int s = 0; s < kSeeds; ++s) {
      auto cfg = d.baseline;
      cfg.seed = mix_seed(plan.seed, 2000 + s + 1);
      const auto held = baseline::heldout_tokens(plan.synth, cfg);
      ter.push_back(baseline::token_error_rate(held, baselines[s].script, baselines[s].table, &baselines[s].translit));
    }
    numbers["translit_ter"] = ter;
    const double worst = *std::max_element(ter.begin(), ter.end());
    L.line(10, "transliteration held-out token error", worst < kTranslitTer,
           "token error per seed [" + join(ter, 4) + "], limit " + fmt(kTranslitTer, 3));
  }

  // ---- 7: pooling ablation ----
  if (wanted(7)) {
    std::vector<double> mha, avg;
    for (int s = 1; s <= kPoolingSeeds; ++s) {
      progress("time-average pooling, seed " + std::to_string(s));
      const auto m = training::finetune_s2i(&asr, {asr.net.config, models::PoolKind::kTimeAverage}, plan.features, v1,
                                            options(d.v1, mix_seed(plan.seed, 1000 + s)));
      avg.push_back(f1_all(m, test));
      mha.push_back(f1_pre[s - 1]);
    }
    const double m_mha = std::accumulate(mha.begin(), mha.end(), 0.0) / mha.size();
    const double m_avg = std::accumulate(avg.begin(), avg.end(), 0.0) / avg.size();
    numbers["pooling"] = {{"mha", mha}, {"time_average", avg}};
    L.line(7, "pooling ablation", std::abs(m_mha - m_avg) <= kPoolingGap,
           "mean F1 mha " + fmt(m_mha, 4) + " [" + join(mha) + "] vs time_average " + fmt(m_avg, 4) + " [" + join(avg) +
               "], gap " + fmt(100 * std::abs(m_mha - m_avg), 2) + " points");
  }

  // ---- 8: active learning ----
  if (wanted(8)) {
    progress("featurising the unlabeled pool");
    const auto pool = training::featurize_records(plan.synth, training::split_records(plan, training::Split::kPool),
                                                  plan.features, false);
    std::set<std::string> labeled;
    for (const auto& e : v1) labeled.insert(e.id);
    std::vector<double> f1_sel, f1_rand;
    int al_wins = 0;
    for (int s = 1; s <= kSeeds; ++s) {
      progress("active learning, seed " + std::to_string(s));
      const auto& base = pretrained[s - 1];
      std::vector<double> conf;
      std::vector<std::string> ids;
      for (const auto& p : training::predict_all(base, pool)) conf.push_back(p.confidence);
      for (const auto& e : pool) ids.push_back(e.id);
      const auto sel_seed = mix_seed(plan.seed, 3000 + s);
      const auto chosen = training::select_by_confidence(conf, ids, d.v2.select_k, std::nullopt, sel_seed, labeled);
      const auto random = training::select_by_confidence(conf, ids, d.v2.select_k,
                                                         std::numeric_limits<double>::infinity(), sel_seed, labeled);
      double results[2];
      int which = 0;
      for (const auto* sel : {&chosen, &random}) {
        auto train = v1;
        for (int i : sel->indices) train.push_back(pool[i]);
        auto model = base;
        training::train_s2i(model, train, options(d.v2, mix_seed(plan.seed, 4000 + s)));
        results[which++] = f1_all(model, test);
      }
      f1_sel.push_back(results[0]);
      f1_rand.push_back(results[1]);
      al_wins += results[0] >= results[1];
      progress("  selected F1 " + fmt(results[0], 3) + ", random F1 " + fmt(results[1], 3));
    }
    numbers["active_learning"] = {{"selected", f1_sel}, {"random", f1_rand}};
    L.line(8, "active-learning direction", al_wins >= kActiveWins,
           "V1+selected F1 [" + join(f1_sel) + "] vs V1+random [" + join(f1_rand) + "], " + std::to_string(al_wins) + "/" +
               std::to_string(kSeeds) + " seeds selected >= random");
  }
  L.report["numbers"] = numbers;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "s2i_acceptance").string();
  std::vector<int> only_list;
  bool small = false;
  app.add_option("--work", work, "Scratch directory")->capture_default_str();
  app.add_option("--only", only_list, "Run only these criteria")->delimiter(',');
  app.add_flag("--small", small, "Scaled-down desk experiment for smoke runs; its results do not count");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> only(only_list.begin(), only_list.end());
  auto wanted = [&](int id) { return only.empty() || only.count(id); };
  fs::create_directories(work);

  Ledger L;
  const auto t0 = Clock::now();
  try {
    if (wanted(1)) criterion_ctc(L);
    if (wanted(2)) criterion_gradients(L);
    if (wanted(3)) criterion_beam(L);
    if (wanted(4)) criterion_text(L);
    if (std::any_of(only_list.begin(), only_list.end(), [](int id) { return id >= 5 && id <= 10; }) || only.empty()) {
      if (small) std::cout << "note: --small run, desk results are indicative only" << std::endl;
      desk_criteria(L, work, small, only);
    }
    if (wanted(11)) criterion_axioms(L, work);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  L.report["minutes"] = seconds_since(t0) / 60.0;
  L.report["small"] = small;
  write_json_file((fs::path(work) / "acceptance_report.json").string(), L.report);
  std::cout << (L.failures ? "acceptance: " + std::to_string(L.failures) + " criteria failed" : "acceptance: all criteria passed")
            << " (" << fmt(seconds_since(t0) / 60.0, 1) << " min)" << std::endl;
  return L.failures ? 1 : 0;
}
