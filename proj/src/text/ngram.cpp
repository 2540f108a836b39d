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

#include "s2i/text/ngram.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"

namespace s2i::text {

// ---------------------------------------------------------------------------
// NgramCounts

NgramCounts::NgramCounts(int vocab_size, int order)
    : vocab_size_(vocab_size), order_(order), counts_(order), followers_(order) {
  if (vocab_size < 1) throw ConfigError("n-gram vocab_size must be >= 1");
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
}

void NgramCounts::add_sentence(std::span<const int> ids, bool sentence_boundaries) {
  std::vector<int> seq;
  if (sentence_boundaries) seq.push_back(bos());
  for (int id : ids) {
    if (id < 0 || id >= vocab_size_)
      throw InputError("n-gram token id out of range: " + std::to_string(id));
    seq.push_back(id);
  }
  if (sentence_boundaries) seq.push_back(eos());
  const int first = sentence_boundaries ? 1 : 0;
  for (int i = first; i < static_cast<int>(seq.size()); ++i)
    for (int n = 1; n <= order_; ++n) {
      const int start = i - n + 1;
      if (start < 0) break;
      std::vector<int> gram(seq.begin() + start, seq.begin() + i + 1);
      counts_[n - 1][gram] += 1.0;
      std::vector<int> ctx(gram.begin(), gram.end() - 1);
      followers_[n - 1][ctx][gram.back()] += 1.0;
    }
}

double NgramCounts::count(std::span<const int> ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return 0.0;
  const auto& m = counts_[ngram.size() - 1];
  auto it = m.find(std::vector<int>(ngram.begin(), ngram.end()));
  return it == m.end() ? 0.0 : it->second;
}

double NgramCounts::context_total(std::span<const int> context) const {
  if (static_cast<int>(context.size()) >= order_) return 0.0;
  const auto& m = followers_[context.size()];
  auto it = m.find(std::vector<int>(context.begin(), context.end()));
  if (it == m.end()) return 0.0;
  double total = 0.0;
  for (const auto& [w, c] : it->second) total += c;
  return total;
}

double NgramCounts::mle(int word, std::span<const int> context) const {
  const double total = context_total(context);
  if (total == 0.0) return 0.0;
  std::vector<int> gram(context.begin(), context.end());
  gram.push_back(word);
  return count(gram) / total;
}

// ---------------------------------------------------------------------------
// NgramLm

NgramLm::NgramLm(int vocab_size, int order)
    : vocab_size_(vocab_size), order_(order), grams_(order) {
  if (vocab_size < 1) throw ConfigError("n-gram vocab_size must be >= 1");
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
}

void NgramLm::set_entry(std::vector<int> ngram, Entry entry) {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_)
    throw InputError("n-gram length out of range");
  grams_[ngram.size() - 1][std::move(ngram)] = entry;
}

void NgramLm::set_backoff(const std::vector<int>& context, double backoff) {
  if (context.empty() || static_cast<int>(context.size()) >= order_)
    throw InputError("backoff context length out of range");
  auto& table = grams_[context.size() - 1];
  auto it = table.find(context);
  if (it == table.end()) throw InputError("backoff context has no n-gram entry");
  it->second.backoff = backoff;
}

double NgramLm::log_prob(int word, std::span<const int> context) const {
  ++counters().lm_queries;
  if (word < 0 || word > eos()) throw InputError("n-gram word id out of range");
  const std::size_t max_ctx = static_cast<std::size_t>(order_ - 1);
  const std::size_t ctx_len = std::min(context.size(), max_ctx);
  std::vector<int> ctx(context.end() - ctx_len, context.end());

  double backoff = 0.0;
  while (true) {
    std::vector<int> gram = ctx;
    gram.push_back(word);
    const auto& table = grams_[gram.size() - 1];
    auto it = table.find(gram);
    if (it != table.end()) return backoff + it->second.log_prob;
    if (ctx.empty()) break;
    const auto& ctx_table = grams_[ctx.size() - 1];
    auto ct = ctx_table.find(ctx);
    if (ct != ctx_table.end()) backoff += ct->second.backoff;
    ctx.erase(ctx.begin());
  }
  throw InputError("n-gram model has no unigram for id " + std::to_string(word));
}

namespace {

constexpr double kArpaNegInf = -99.0;

std::string word_name(int id, int vocab_size) {
  if (id == vocab_size) return "<s>";
  if (id == vocab_size + 1) return "</s>";
  return std::to_string(id);
}

int parse_word(const std::string& w, int vocab_size) {
  if (w == "<s>") return vocab_size;
  if (w == "</s>") return vocab_size + 1;
  try {
    std::size_t used = 0;
    const int id = std::stoi(w, &used);
    if (used != w.size() || id < 0 || id >= vocab_size) throw std::out_of_range(w);
    return id;
  } catch (const std::exception&) {
    throw FormatError("bad ARPA token: " + w);
  }
}

}  // namespace

void NgramLm::write_arpa(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write ARPA file: " + path);
  out.precision(17);
  out << "\\data\\\n";
  out << "vocab_size=" << vocab_size_ << "\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << "=" << grams_[n - 1].size() << "\n";
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [gram, e] : grams_[n - 1]) {
      const double lp10 = std::isfinite(e.log_prob) ? e.log_prob / std::numbers::ln10 : kArpaNegInf;
      out << lp10 << '\t';
      for (std::size_t i = 0; i < gram.size(); ++i)
        out << (i ? " " : "") << word_name(gram[i], vocab_size_);
      if (n < order_) out << '\t' << e.backoff / std::numbers::ln10;
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NgramLm NgramLm::read_arpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open ARPA file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "\\data\\")
    throw FormatError("ARPA file must start with \\data\\");
  int vocab_size = -1;
  std::vector<std::size_t> declared;
  while (std::getline(in, line) && !line.empty()) {
    if (line.rfind("vocab_size=", 0) == 0) {
      vocab_size = std::stoi(line.substr(11));
    } else if (line.rfind("ngram ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("bad ARPA header line: " + line);
      declared.push_back(std::stoul(line.substr(eq + 1)));
    } else {
      throw FormatError("bad ARPA header line: " + line);
    }
  }
  if (vocab_size < 1 || declared.empty()) throw FormatError("incomplete ARPA header");
  NgramLm lm(vocab_size, static_cast<int>(declared.size()));
  int current = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "\\end\\") break;
    if (line.front() == '\\') {
      current = std::stoi(line.substr(1));
      if (current < 1 || current > lm.order_) throw FormatError("bad ARPA section: " + line);
      continue;
    }
    if (current == 0) throw FormatError("ARPA entry outside a section");
    std::istringstream ss(line);
    double lp10 = 0.0;
    ss >> lp10;
    std::vector<int> gram;
    for (int i = 0; i < current; ++i) {
      std::string w;
      if (!(ss >> w)) throw FormatError("short ARPA entry: " + line);
      gram.push_back(parse_word(w, vocab_size));
    }
    double bo10 = 0.0;
    ss >> bo10;
    Entry e;
    e.log_prob = lp10 <= kArpaNegInf ? -std::numeric_limits<double>::infinity()
                                     : lp10 * std::numbers::ln10;
    e.backoff = bo10 * std::numbers::ln10;
    lm.set_entry(std::move(gram), e);
  }
  for (int n = 1; n <= lm.order_; ++n)
    if (lm.grams_[n - 1].size() != declared[n - 1])
      throw FormatError("ARPA section size does not match header");
  return lm;
}

// ---------------------------------------------------------------------------
// Training

NgramLm train_ngram(const std::vector<std::vector<int>>& corpus, int vocab_size,
                    int order, double discount) {
  if (corpus.empty()) throw ConfigError("n-gram corpus is empty");
  if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("discount must be in (0, 1)");
  NgramCounts counts(vocab_size, order);
  for (const auto& s : corpus) counts.add_sentence(s);

  NgramLm lm(vocab_size, order);
  const int n_words = vocab_size + 1;  // predictable: ids + </s>

  // Unigrams: discounted counts interpolated with a uniform floor.
  {
    const auto& f = counts.followers(1).at({});
    double total = 0.0;
    for (const auto& [w, c] : f) total += c;
    const double lambda = discount * static_cast<double>(f.size()) / total;
    for (int w = 0; w <= vocab_size + 1; ++w) {
      if (w == counts.bos()) continue;
      auto it = f.find(w);
      const double c = it == f.end() ? 0.0 : it->second;
      const double p = std::max(c - discount, 0.0) / total + lambda / n_words;
      lm.set_entry({w}, {std::log(p), 0.0});
    }
    lm.set_entry({counts.bos()}, {-std::numeric_limits<double>::infinity(), 0.0});
  }

  // Orders >= 2: explicit probabilities for seen n-grams, backoff = λ(context).
  for (int n = 2; n <= order; ++n) {
    for (const auto& [ctx, f] : counts.followers(n)) {
      double total = 0.0;
      for (const auto& [w, c] : f) total += c;
      const double lambda = discount * static_cast<double>(f.size()) / total;
      std::vector<int> lower_ctx(ctx.begin() + 1, ctx.end());
      for (const auto& [w, c] : f) {
        const double lower = std::exp(lm.log_prob(w, lower_ctx));
        const double p = (c - discount) / total + lambda * lower;
        std::vector<int> gram = ctx;
        gram.push_back(w);
        lm.set_entry(std::move(gram), {std::log(p), 0.0});
      }
      lm.set_backoff(ctx, std::log(lambda));
    }
  }
  return lm;
}

double lm_score(const NgramLm& lm, std::span<const int> ids, bool close_sentence) {
  std::vector<int> history{lm.bos()};
  double total = 0.0;
  for (int id : ids) {
    total += lm.log_prob(id, history);
    history.push_back(id);
  }
  if (close_sentence) total += lm.log_prob(lm.eos(), history);
  return total;
}

double perplexity(const NgramLm& lm, const std::vector<std::vector<int>>& corpus) {
  double ll = 0.0;
  double n = 0.0;
  for (const auto& s : corpus) {
    ll += lm_score(lm, s);
    n += static_cast<double>(s.size()) + 1.0;
  }
  return n > 0.0 ? std::exp(-ll / n) : 1.0;
}

}  // namespace s2i::text
