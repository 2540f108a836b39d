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

#include "s2i/models/s2i_model.hpp"

#include <algorithm>

#include "s2i/core/error.hpp"

namespace s2i::models {

const char* pool_name(PoolKind kind) { return kind == PoolKind::kMha ? "mha" : "time_average"; }

PoolKind parse_pool(std::string_view name) {
  if (name == "mha") return PoolKind::kMha;
  if (name == "time_average") return PoolKind::kTimeAverage;
  throw ConfigError("unknown pooling: " + std::string(name));
}

namespace {

Matrix standardize(const nn::ParamStore& ps, const Matrix& x, nn::ParamSlot center, nn::ParamSlot scale) {
  const RowVector c = ps(center).row(0), k = ps(scale).row(0);
  return ((x.rowwise() - c).array().rowwise() * k.array()).matrix();
}

Matrix standardize_backward(const nn::ParamStore& ps, const Matrix& x, const Matrix& dy, nn::ParamSlot center,
                            nn::ParamSlot scale, nn::Grads& g) {
  const RowVector c = ps(center).row(0), k = ps(scale).row(0);
  const Matrix dx = (dy.array().rowwise() * k.array()).matrix();
  nn::grad_view(g, center).row(0) -= dx.colwise().sum();
  nn::grad_view(g, scale).row(0) += (dy.array() * (x.rowwise() - c).array()).colwise().sum().matrix();
  return dx;
}

}  // namespace

S2INet S2INet::create(nn::ParamStore& ps, const S2IConfig& cfg, Rng& rng) {
  S2INet net;
  net.trunk = HctcNet::create(ps, cfg.trunk, rng);
  net.pool = cfg.pool;
  const int dm = cfg.trunk.model_dim();
  net.seq_center = ps.add("pool.center", 1, dm);
  net.seq_scale = ps.add("pool.scale", 1, dm);
  ps.fill(net.seq_scale, 1.0);
  if (cfg.pool == PoolKind::kMha) {
    net.cell_center = ps.add("pool.cell_center", 1, dm);
    net.cell_scale = ps.add("pool.cell_scale", 1, dm);
    ps.fill(net.cell_scale, 1.0);
    net.query = nn::Linear::create(ps, "pool.query", dm, dm, rng);
    net.attention = nn::MultiHeadAttention::create(ps, "pool.attn", dm, cfg.trunk.heads, rng);
  }
  net.classifier = nn::Linear::create(ps, "intent", dm, kNumIntents, rng);
  return net;
}

Matrix S2INet::forward(const nn::ParamStore& ps, const Matrix& x, Cache& cache) const {
  trunk.forward(ps, x, cache.trunk, false);
  cache.seq = standardize(ps, cache.trunk.outputs[kLevels - 1], seq_center, seq_scale);
  const Matrix& seq = cache.seq;
  if (pool == PoolKind::kMha) {
    cache.query_in = standardize(ps, cache.trunk.final_cell, cell_center, cell_scale);
    cache.query = query.forward(ps, cache.query_in);
    cache.pooled = attention.forward(ps, cache.query, seq, false, cache.attention);
  } else {
    cache.pooled = seq.colwise().mean();
  }
  cache.logits = classifier.forward(ps, cache.pooled);
  return cache.logits;
}

void S2INet::backward(const nn::ParamStore& ps, const Cache& cache, const Matrix& d_logits,
                      nn::Grads& g, int trainable_from) const {
  Matrix d_pooled = classifier.backward(ps, cache.pooled, d_logits, g);
  const Matrix& seq = cache.seq;
  Matrix d_seq;
  RowVector d_cell;
  if (pool == PoolKind::kMha) {
    Matrix d_query;
    attention.backward(ps, cache.query, seq, cache.attention, d_pooled, d_query, d_seq, g);
    d_cell = standardize_backward(ps, cache.trunk.final_cell, query.backward(ps, cache.query_in, d_query, g),
                                  cell_center, cell_scale, g)
                 .row(0);
  } else {
    d_seq = d_pooled.replicate(seq.rows(), 1) / static_cast<double>(seq.rows());
  }
  d_seq = standardize_backward(ps, cache.trunk.outputs[kLevels - 1], d_seq, seq_center, seq_scale, g);
  if (trainable_from >= kLevels) return;
  // Frozen blocks get no gradient, so backprop stops at the first trainable one.
  std::array<Matrix, kLevels> no_ctc;
  if (trainable_from == 0) {
    trunk.backward(ps, cache.trunk, no_ctc, d_seq, d_cell, g);
    return;
  }
  Matrix d_out = d_seq;
  for (int i = kLevels - 1; i >= trainable_from; --i) {
    const RowVector dfc = i == kLevels - 1 ? d_cell : RowVector();
    Matrix d_in = trunk.blocks[i].backward(ps, cache.trunk.blocks[i], d_out, dfc, g);
    d_out = std::move(d_in);
  }
}

S2IModel S2IModel::create(const S2IConfig& cfg, const dsp::FeatureConfig& features,
                          std::uint64_t seed) {
  features.validate();
  if (features.stacked_dim() != cfg.trunk.feature_dim)
    throw ConfigError("feature_dim does not match the stacked feature width");
  S2IModel m;
  Rng rng(seed);
  m.net = S2INet::create(m.params, cfg, rng);
  m.features = features;
  return m;
}

std::size_t S2IModel::trunk_size() const {
  std::size_t n = 0;
  for (const auto& e : params.entries())
    if (e.name.rfind("block", 0) == 0 || e.name.rfind("head", 0) == 0)
      n = std::max(n, e.slot.offset + e.slot.size());
  return n;
}

void S2IModel::attach_trunk(const HctcModel& asr) {
  const auto& donor = asr.params.entries();
  const auto& mine = params.entries();
  if (donor.size() > mine.size()) throw ConfigError("ASR checkpoint does not fit this trunk");
  for (std::size_t i = 0; i < donor.size(); ++i) {
    const auto& a = donor[i];
    const auto& b = mine[i];
    if (a.name != b.name || a.slot.rows != b.slot.rows || a.slot.cols != b.slot.cols ||
        a.slot.offset != b.slot.offset)
      throw ConfigError("ASR parameter '" + a.name + "' does not match the S2I trunk");
  }
  std::copy(asr.params.values().begin(), asr.params.values().end(), params.values().begin());
  features = asr.features;
  stats = asr.stats;
  vocab_hashes = asr.vocab_hashes;
}

void S2IModel::calibrate_pooling(const std::vector<Matrix>& frames) {
  if (frames.empty()) return;
  const int dm = net.trunk.config.model_dim();
  Vector sum = Vector::Zero(dm), sq = Vector::Zero(dm), csum = Vector::Zero(dm), csq = Vector::Zero(dm);
  double rows = 0;
  for (const auto& f : frames) {
    HctcNet::Cache c;
    net.trunk.forward(params, prepare(f), c, false);
    const Matrix& y = c.outputs[kLevels - 1];
    sum += y.colwise().sum().transpose();
    sq += y.array().square().colwise().sum().matrix().transpose();
    rows += static_cast<double>(y.rows());
    csum += c.final_cell.transpose();
    csq += c.final_cell.array().square().matrix().transpose();
  }
  auto set = [&](nn::ParamSlot center, nn::ParamSlot scale, const Vector& s1, const Vector& s2, double n) {
    const Vector mean = s1 / n;
    const Vector var = (s2 / n - mean.cwiseProduct(mean)).cwiseMax(1e-6);
    params.mut(center).row(0) = mean.transpose();
    params.mut(scale).row(0) = var.cwiseSqrt().cwiseInverse().transpose();
  };
  set(net.seq_center, net.seq_scale, sum, sq, rows);
  if (net.pool == PoolKind::kMha) set(net.cell_center, net.cell_scale, csum, csq, static_cast<double>(frames.size()));
}

Matrix S2IModel::prepare(const Matrix& frames) const {
  if (frames.cols() != net.trunk.config.feature_dim) throw InputError("feature width mismatch");
  Matrix x = frames;
  if (!stats.empty()) stats.apply(x);
  return x;
}

IntentPrediction predict_intent(const dsp::FeatureMatrix& f, const S2IModel& m) {
  S2INet::Cache cache;
  Matrix logits = m.net.forward(m.params, m.prepare(f.frames), cache);
  IntentPrediction p;
  p.distribution = nn::softmax_rows(logits).row(0);
  Eigen::Index best = 0;
  p.confidence = p.distribution.maxCoeff(&best);
  p.intent = static_cast<int>(best);
  return p;
}

IntentPrediction predict_intent(const dsp::AudioBuffer& audio, const S2IModel& m) {
  return predict_intent(dsp::featurize(audio, m.features), m);
}

}  // namespace s2i::models
