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

#include "s2i/baseline/translit.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/nn/adam.hpp"

namespace s2i::baseline {

void TranslitTable::add(const std::string& source, const std::string& target) {
  if (source.empty() || source.find_first_of("\t\n") != std::string::npos ||
      target.find_first_of("\t\n") != std::string::npos)
    throw InputError("transliteration entries must be non-empty and tab-free");
  map_[source] = target;
}

std::optional<std::string> TranslitTable::lookup(const std::string& source) const {
  auto it = map_.find(source);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void TranslitTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  for (const auto& [s, t] : map_) out << s << '\t' << t << '\n';
}

TranslitTable TranslitTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  TranslitTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected two tab-separated columns");
    t.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return t;
}

Json TranslitConfig::to_json() const {
  return {{"dim", dim}, {"heads", heads}, {"ffn", ffn}, {"max_positions", max_positions}};
}

TranslitConfig TranslitConfig::from_json(const Json& j) {
  TranslitConfig c;
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.ffn = j.value("ffn", c.ffn);
  c.max_positions = j.value("max_positions", c.max_positions);
  if (c.dim < 1 || c.ffn < 1 || c.max_positions < 2) throw ConfigError("bad transliteration model config");
  return c;
}

struct Seq2SeqTranslit::EncoderCache {
  std::vector<int> pos;
  Matrix h0, h1;
  nn::MultiHeadAttention::Cache attn;
  nn::LayerNorm::Cache ln1, ln2;
  nn::FeedForward::Cache ffn;
};

struct Seq2SeqTranslit::DecoderCache {
  std::vector<int> pos;
  Matrix d0, d1, d2, d3;
  nn::MultiHeadAttention::Cache self, cross;
  nn::LayerNorm::Cache ln1, ln2, ln3;
  nn::FeedForward::Cache ffn;
};

Seq2SeqTranslit Seq2SeqTranslit::create(const TranslitConfig& cfg, std::uint64_t seed) {
  Seq2SeqTranslit m;
  m.cfg_ = cfg;
  Rng rng(seed);
  auto& ps = m.params_;
  m.src_emb_ = nn::Embedding::create(ps, "src_emb", kSymbols, cfg.dim, rng);
  m.src_pos_ = nn::Embedding::create(ps, "src_pos", cfg.max_positions, cfg.dim, rng);
  m.tgt_emb_ = nn::Embedding::create(ps, "tgt_emb", kSymbols, cfg.dim, rng);
  m.tgt_pos_ = nn::Embedding::create(ps, "tgt_pos", cfg.max_positions, cfg.dim, rng);
  m.enc_self_ = nn::MultiHeadAttention::create(ps, "enc.self", cfg.dim, cfg.heads, rng);
  m.enc_ln1_ = nn::LayerNorm::create(ps, "enc.ln1", cfg.dim);
  m.enc_ffn_ = nn::FeedForward::create(ps, "enc.ffn", cfg.dim, cfg.ffn, rng);
  m.enc_ln2_ = nn::LayerNorm::create(ps, "enc.ln2", cfg.dim);
  m.dec_self_ = nn::MultiHeadAttention::create(ps, "dec.self", cfg.dim, cfg.heads, rng);
  m.dec_ln1_ = nn::LayerNorm::create(ps, "dec.ln1", cfg.dim);
  m.dec_cross_ = nn::MultiHeadAttention::create(ps, "dec.cross", cfg.dim, cfg.heads, rng);
  m.dec_ln2_ = nn::LayerNorm::create(ps, "dec.ln2", cfg.dim);
  m.dec_ffn_ = nn::FeedForward::create(ps, "dec.ffn", cfg.dim, cfg.ffn, rng);
  m.dec_ln3_ = nn::LayerNorm::create(ps, "dec.ln3", cfg.dim);
  m.out_ = nn::Linear::create(ps, "out", cfg.dim, kSymbols, rng);
  return m;
}

namespace {

std::vector<int> to_symbols(const std::string& s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(c);
  return out;
}

std::vector<int> positions(std::size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace

Matrix Seq2SeqTranslit::encode(const std::vector<int>& src, EncoderCache& c) const {
  if (static_cast<int>(src.size()) > cfg_.max_positions)
    throw InputError("token longer than the transliteration position table");
  const auto& ps = params_;
  c.pos = positions(src.size());
  c.h0 = src_emb_.forward(ps, src) + src_pos_.forward(ps, c.pos);
  Matrix a = enc_self_.forward(ps, c.h0, c.h0, false, c.attn);
  c.h1 = enc_ln1_.forward(ps, c.h0 + a, &c.ln1);
  Matrix f = enc_ffn_.forward(ps, c.h1, &c.ffn);
  return enc_ln2_.forward(ps, c.h1 + f, &c.ln2);
}

Matrix Seq2SeqTranslit::decode_logits(const std::vector<int>& tgt_in, const Matrix& memory,
                                      DecoderCache& c) const {
  const auto& ps = params_;
  c.pos = positions(tgt_in.size());
  c.d0 = tgt_emb_.forward(ps, tgt_in) + tgt_pos_.forward(ps, c.pos);
  Matrix s = dec_self_.forward(ps, c.d0, c.d0, true, c.self);
  c.d1 = dec_ln1_.forward(ps, c.d0 + s, &c.ln1);
  Matrix x = dec_cross_.forward(ps, c.d1, memory, false, c.cross);
  c.d2 = dec_ln2_.forward(ps, c.d1 + x, &c.ln2);
  Matrix f = dec_ffn_.forward(ps, c.d2, &c.ffn);
  c.d3 = dec_ln3_.forward(ps, c.d2 + f, &c.ln3);
  return out_.forward(ps, c.d3);
}

double Seq2SeqTranslit::loss(const std::string& source, const std::string& target, nn::Grads* g) const {
  if (source.empty()) throw InputError("empty transliteration source");
  const auto src = to_symbols(source);
  auto tgt_in = to_symbols(target);
  tgt_in.insert(tgt_in.begin(), kBos);
  auto tgt_out = to_symbols(target);
  tgt_out.push_back(kEos);
  if (static_cast<int>(tgt_in.size()) > cfg_.max_positions)
    throw InputError("target longer than the transliteration position table");

  EncoderCache ec;
  DecoderCache dc;
  Matrix memory = encode(src, ec);
  Matrix lp = nn::log_softmax_rows(decode_logits(tgt_in, memory, dc));
  double total = 0.0;
  Matrix d_lp = Matrix::Zero(lp.rows(), lp.cols());
  for (std::size_t t = 0; t < tgt_out.size(); ++t) {
    total -= lp(static_cast<Eigen::Index>(t), tgt_out[t]);
    d_lp(static_cast<Eigen::Index>(t), tgt_out[t]) = -1.0;
  }
  if (!g) return total;

  const auto& ps = params_;
  Matrix d3 = out_.backward(ps, dc.d3, nn::log_softmax_backward(lp, d_lp), *g);
  Matrix u3 = dec_ln3_.backward(ps, dc.ln3, d3, *g);
  Matrix dd2 = u3 + dec_ffn_.backward(ps, dc.d2, dc.ffn, u3, *g);
  Matrix u2 = dec_ln2_.backward(ps, dc.ln2, dd2, *g);
  Matrix dq, dmem;
  dec_cross_.backward(ps, dc.d1, memory, dc.cross, u2, dq, dmem, *g);
  Matrix dd1 = u2 + dq;
  Matrix u1 = dec_ln1_.backward(ps, dc.ln1, dd1, *g);
  Matrix dsq, dskv;
  dec_self_.backward(ps, dc.d0, dc.d0, dc.self, u1, dsq, dskv, *g);
  Matrix dd0 = u1 + dsq + dskv;
  tgt_emb_.backward(tgt_in, dd0, *g);
  tgt_pos_.backward(dc.pos, dd0, *g);

  Matrix v2 = enc_ln2_.backward(ps, ec.ln2, dmem, *g);
  Matrix dh1 = v2 + enc_ffn_.backward(ps, ec.h1, ec.ffn, v2, *g);
  Matrix v1 = enc_ln1_.backward(ps, ec.ln1, dh1, *g);
  Matrix daq, dakv;
  enc_self_.backward(ps, ec.h0, ec.h0, ec.attn, v1, daq, dakv, *g);
  Matrix dh0 = v1 + daq + dakv;
  src_emb_.backward(src, dh0, *g);
  src_pos_.backward(ec.pos, dh0, *g);
  return total;
}

DecodeResult Seq2SeqTranslit::decode(const std::string& source) const {
  if (source.empty()) throw InputError("empty transliteration source");
  ++counters().translit_model_calls;
  const auto src = to_symbols(source);
  EncoderCache ec;
  Matrix memory = encode(src, ec);
  const int cap = std::min<int>(4 * static_cast<int>(src.size()), cfg_.max_positions - 1);
  std::vector<int> tgt{kBos};
  DecodeResult r;
  for (int step = 0; step < cap; ++step) {
    DecoderCache dc;
    Matrix logits = decode_logits(tgt, memory, dc);
    Eigen::Index best = 0;
    logits.row(logits.rows() - 1).maxCoeff(&best);
    if (best == kEos) return r;
    if (best < 256) r.text.push_back(static_cast<char>(best));
    tgt.push_back(static_cast<int>(best));
  }
  r.truncated = true;
  return r;
}

void Seq2SeqTranslit::save(const std::string& path) const {
  models::write_checkpoint(path, {{"kind", "translit"}, {"config", cfg_.to_json()}}, params_);
}

Seq2SeqTranslit Seq2SeqTranslit::load(const std::string& path) {
  auto raw = models::read_checkpoint(path);
  try {
    if (raw.header.at("kind") != "translit") throw FormatError(path + ": not a transliteration checkpoint");
    auto m = create(TranslitConfig::from_json(raw.header.at("config")), 0);
    models::load_params(m.params_, raw, path);
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
}

std::vector<double> train_translit(Seq2SeqTranslit& model,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const TranslitTrainConfig& cfg) {
  if (pairs.empty()) throw InputError("train_translit: no training pairs");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be positive");
  Rng rng(mix_seed(cfg.seed, 7));
  nn::Adam adam(model.params().size());
  nn::Grads g = model.params().zeros_like();
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = start; i < end; ++i)
        total += model.loss(pairs[order[i]].first, pairs[order[i]].second, &g);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (double& v : g) v *= scale;
      adam.step(model.params().values(), g, cfg.lr);
    }
    curve.push_back(total / pairs.size());
  }
  return curve;
}

TranslitResult transliterate(const std::string& token, const TranslitTable& table,
                             const Seq2SeqTranslit* model) {
  if (token.empty()) throw InputError("empty token");
  TranslitResult r;
  if (auto hit = table.lookup(token)) {
    r.text = *hit;
    r.from_table = true;
    return r;
  }
  if (!model) {
    r.text = token;
    return r;
  }
  auto d = model->decode(token);
  r.text = std::move(d.text);
  r.truncated = d.truncated;
  return r;
}

std::string transliterate_text(const std::string& text, const TranslitTable& table,
                               const Seq2SeqTranslit* model, bool* any_truncated) {
  std::istringstream in(text);
  std::string word, out;
  bool truncated = false;
  while (in >> word) {
    auto r = transliterate(word, table, model);
    truncated = truncated || r.truncated;
    if (!out.empty()) out += ' ';
    out += r.text;
  }
  if (any_truncated) *any_truncated = truncated;
  return out;
}

ScriptMap ScriptMap::synthetic(std::uint64_t seed, const std::vector<std::string>& exception_tokens) {
  ScriptMap m;
  std::string letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  Rng rng(mix_seed(seed, 11));
  std::shuffle(letters.begin(), letters.end(), rng);
  for (int i = 0; i < 26; ++i) m.chars['a' + i] = letters[i];
  for (const auto& tok : exception_tokens) {
    // Irregular spelling: regular rendering, reversed, with a marker suffix.
    std::string regular;
    for (char c : tok) {
      auto it = m.chars.find(c);
      regular.push_back(it == m.chars.end() ? c : it->second);
    }
    std::reverse(regular.begin(), regular.end());
    m.exceptions[tok] = regular + "H";
  }
  return m;
}

std::string ScriptMap::apply(const std::string& token) const {
  if (auto it = exceptions.find(token); it != exceptions.end()) return it->second;
  std::string out;
  for (char c : token) {
    auto it = chars.find(c);
    out.push_back(it == chars.end() ? c : it->second);
  }
  return out;
}

}  // namespace s2i::baseline
