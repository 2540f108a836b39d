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

#include "s2i/text/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"

namespace s2i::text {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Words keep the separating space as a prefix, so " abc" is one chunk.
std::vector<std::string> split_chunks(std::string_view sentence) {
  std::vector<std::string> chunks;
  std::string cur;
  for (char c : sentence) {
    if (c == ' ' && !cur.empty() && cur != " ") {
      chunks.push_back(cur);
      cur.clear();
    }
    cur.push_back(c);
  }
  if (!cur.empty()) chunks.push_back(cur);
  return chunks;
}

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::kChar: return "char";
    case Level::kShort: return "short";
    case Level::kLong: return "long";
  }
  return "char";
}

Level parse_level(std::string_view name) {
  if (name == "char") return Level::kChar;
  if (name == "short") return Level::kShort;
  if (name == "long") return Level::kLong;
  throw ConfigError("unknown vocab level: " + std::string(name));
}

SubwordVocab::SubwordVocab(Level level, std::vector<Piece> pieces) : level_(level) {
  double min_lp = 0.0;
  for (const auto& p : pieces) min_lp = std::min(min_lp, p.log_prob);
  pieces_.push_back({kUnkPiece, min_lp - 10.0});
  for (auto& p : pieces) {
    if (p.text.empty()) throw FormatError("empty vocab piece");
    if (p.text == kUnkPiece) continue;
    if (index_.count(p.text)) throw FormatError("duplicate vocab piece: " + p.text);
    index_[p.text] = static_cast<int>(pieces_.size());
    max_len_ = std::max<int>(max_len_, static_cast<int>(p.text.size()));
    if (p.text.size() == 1) alphabet_[static_cast<unsigned char>(p.text[0])] = true;
    pieces_.push_back(std::move(p));
  }
}

const Piece& SubwordVocab::piece(int id) const {
  if (id < 0 || id >= size())
    throw InputError("token id out of range: " + std::to_string(id));
  return pieces_[id];
}

std::optional<int> SubwordVocab::id_of(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::in_alphabet(char c) const {
  return alphabet_[static_cast<unsigned char>(c)];
}

std::uint64_t SubwordVocab::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (char c : std::string(level_name(level_))) mix(static_cast<unsigned char>(c));
  for (const auto& p : pieces_) {
    for (char c : p.text) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

void SubwordVocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write vocab: " + path);
  out.precision(17);
  for (const auto& p : pieces_) out << p.text << '\t' << p.log_prob << '\n';
}

SubwordVocab SubwordVocab::load(const std::string& path, Level level) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocab: " + path);
  std::vector<Piece> pieces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("vocab line " + std::to_string(lineno) + " is malformed");
    Piece p;
    p.text = line.substr(0, tab);
    try {
      p.log_prob = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw FormatError("vocab line " + std::to_string(lineno) + " has a bad log_prob");
    }
    if (p.text == kUnkPiece) continue;
    pieces.push_back(std::move(p));
  }
  return SubwordVocab(level, std::move(pieces));
}

// ---------------------------------------------------------------------------
// Segmentation

Segmentation segment(std::string_view text, const SubwordVocab& vocab) {
  ++counters().tokenizer_calls;
  Segmentation result;
  const int n = static_cast<int>(text.size());
  if (n == 0) return result;

  std::vector<double> best(n + 1, kNegInf);
  std::vector<int> back_id(n + 1, -1), back_len(n + 1, 0);
  best[0] = 0.0;
  const int max_len = vocab.max_piece_length();
  const double unk_lp = vocab.piece(SubwordVocab::kUnkId).log_prob;
  for (int end = 1; end <= n; ++end) {
    // Longer pieces first so ties resolve toward fewer tokens.
    for (int len = std::min(max_len, end); len >= 1; --len) {
      const int start = end - len;
      if (best[start] == kNegInf) continue;
      auto id = vocab.id_of(text.substr(start, len));
      if (!id) continue;
      const double score = best[start] + vocab.piece(*id).log_prob;
      if (score > best[end]) {
        best[end] = score;
        back_id[end] = *id;
        back_len[end] = len;
      }
    }
    if (back_id[end] < 0 && best[end - 1] != kNegInf &&
        !vocab.in_alphabet(text[end - 1])) {
      best[end] = best[end - 1] + unk_lp;
      back_id[end] = SubwordVocab::kUnkId;
      back_len[end] = 1;
      result.has_unknown = true;
    }
  }
  for (int pos = n; pos > 0; pos -= back_len[pos]) {
    if (back_id[pos] < 0) throw InputError("text is not segmentable");
    result.ids.push_back(back_id[pos]);
  }
  std::reverse(result.ids.begin(), result.ids.end());
  return result;
}

double segmentation_log_prob(std::span<const int> ids, const SubwordVocab& vocab) {
  double lp = 0.0;
  for (int id : ids) lp += vocab.piece(id).log_prob;
  return lp;
}

std::string detokenize(std::span<const int> ids, const SubwordVocab& vocab) {
  std::string out;
  for (int id : ids) out += vocab.piece(id).text;
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Candidate {
  std::string text;
  double log_prob;
};

struct TrainingState {
  std::vector<std::pair<std::string, double>> chunks;  // chunk, frequency
  std::vector<Candidate> pieces;
  std::unordered_map<std::string, int> index;
  std::vector<bool> required;
  int max_len = 1;

  void reindex() {
    index.clear();
    max_len = 1;
    for (int i = 0; i < static_cast<int>(pieces.size()); ++i) {
      index[pieces[i].text] = i;
      max_len = std::max<int>(max_len, static_cast<int>(pieces[i].text.size()));
    }
  }

  // Enumerate (start, len, piece index) edges of the lattice over `s`.
  template <typename Fn>
  void for_each_edge(const std::string& s, Fn&& fn) const {
    const int n = static_cast<int>(s.size());
    for (int start = 0; start < n; ++start)
      for (int len = 1; len <= std::min(max_len, n - start); ++len) {
        auto it = index.find(s.substr(start, len));
        if (it != index.end()) fn(start, len, it->second);
      }
  }

  // Expected piece counts under the current model (forward-backward).
  double expected_counts(std::vector<double>& counts) const {
    counts.assign(pieces.size(), 0.0);
    double total_ll = 0.0;
    for (const auto& [s, freq] : chunks) {
      const int n = static_cast<int>(s.size());
      struct Edge { int start, len, id; };
      std::vector<Edge> edges;
      for_each_edge(s, [&](int st, int len, int id) { edges.push_back({st, len, id}); });
      std::vector<double> alpha(n + 1, kNegInf), beta(n + 1, kNegInf);
      alpha[0] = 0.0;
      std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.start + a.len < b.start + b.len;
      });
      for (const auto& e : edges)
        alpha[e.start + e.len] =
            log_add(alpha[e.start + e.len], alpha[e.start] + pieces[e.id].log_prob);
      beta[n] = 0.0;
      std::sort(edges.begin(), edges.end(),
                [](const Edge& a, const Edge& b) { return a.start > b.start; });
      for (const auto& e : edges)
        beta[e.start] = log_add(beta[e.start], beta[e.start + e.len] + pieces[e.id].log_prob);
      const double z = alpha[n];
      total_ll += freq * z;
      for (const auto& e : edges) {
        const double post = alpha[e.start] + pieces[e.id].log_prob + beta[e.start + e.len] - z;
        counts[e.id] += freq * std::exp(post);
      }
    }
    return total_ll;
  }

  std::vector<int> viterbi(const std::string& s, const std::unordered_map<std::string, int>& idx,
                           const std::vector<Candidate>& pcs, int skip = -1) const {
    const int n = static_cast<int>(s.size());
    std::vector<double> best(n + 1, kNegInf);
    std::vector<int> bid(n + 1, -1), blen(n + 1, 0);
    best[0] = 0.0;
    for (int end = 1; end <= n; ++end)
      for (int len = std::min(max_len, end); len >= 1; --len) {
        const int st = end - len;
        if (best[st] == kNegInf) continue;
        auto it = idx.find(s.substr(st, len));
        if (it == idx.end() || it->second == skip) continue;
        const double sc = best[st] + pcs[it->second].log_prob;
        if (sc > best[end]) {
          best[end] = sc;
          bid[end] = it->second;
          blen[end] = len;
        }
      }
    std::vector<int> ids;
    if (best[n] == kNegInf) return ids;
    for (int pos = n; pos > 0; pos -= blen[pos]) ids.push_back(bid[pos]);
    std::reverse(ids.begin(), ids.end());
    return ids;
  }

  void m_step(const std::vector<double>& counts, bool drop_rare) {
    std::vector<Candidate> kept;
    std::vector<bool> kept_req;
    std::vector<double> kept_counts;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (drop_rare && !required[i] && counts[i] < 0.5) continue;
      kept.push_back(pieces[i]);
      kept_req.push_back(required[i]);
      kept_counts.push_back(counts[i]);
    }
    // Floor keeps never-used pieces finite.
    double total = 0.0;
    for (double& c : kept_counts) {
      c = std::max(c, 1e-3);
      total += c;
    }
    for (std::size_t i = 0; i < kept.size(); ++i)
      kept[i].log_prob = std::log(kept_counts[i] / total);
    pieces = std::move(kept);
    required = std::move(kept_req);
    reindex();
  }

  // Drops the pieces whose removal costs the least corpus likelihood.
  void prune(int target, double shrink) {
    const int n = static_cast<int>(pieces.size());
    std::vector<double> freq(n, 0.0);
    std::vector<std::vector<int>> inverted(n);
    double vsum = 0.0;
    for (int c = 0; c < static_cast<int>(chunks.size()); ++c) {
      const auto ids = viterbi(chunks[c].first, index, pieces);
      vsum += chunks[c].second;
      for (int id : ids) {
        freq[id] += chunks[c].second;
        inverted[id].push_back(c);
      }
    }
    const double sum = std::accumulate(freq.begin(), freq.end(), 0.0);
    const double logsum = std::log(std::max(sum, 1e-12));

    std::vector<std::pair<double, int>> scored;
    for (int i = 0; i < n; ++i) {
      if (required[i]) continue;
      if (freq[i] == 0.0) {
        scored.push_back({-std::numeric_limits<double>::infinity(), i});
        continue;
      }
      const auto alt = viterbi(pieces[i].text, index, pieces, i);
      if (alt.empty()) continue;  // cannot be removed
      const double logsum_alt = std::log(sum + freq[i] * (static_cast<double>(alt.size()) - 1.0));
      double logprob_alt = 0.0;
      for (int a : alt) logprob_alt += std::log(freq[a] + freq[i]) - logsum_alt;
      const double logprob_sp = std::log(freq[i]) - logsum;
      double f = 0.0;
      for (int c : inverted[i]) f += chunks[c].second;
      f /= vsum;
      scored.push_back({f * (logprob_sp - logprob_alt), i});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    int n_required = static_cast<int>(std::count(required.begin(), required.end(), true));
    const int shrunk = std::max(target, static_cast<int>(n * shrink));
    int keep_optional = std::max(0, shrunk - n_required);
    std::vector<bool> keep(n, false);
    for (int i = 0; i < n; ++i) keep[i] = required[i];
    for (int k = 0; k < std::min<int>(keep_optional, static_cast<int>(scored.size())); ++k)
      keep[scored[k].second] = true;
    std::vector<Candidate> kept;
    std::vector<bool> kept_req;
    for (int i = 0; i < n; ++i)
      if (keep[i]) {
        kept.push_back(pieces[i]);
        kept_req.push_back(required[i]);
      }
    pieces = std::move(kept);
    required = std::move(kept_req);
    reindex();
  }
};

}  // namespace

SubwordVocab build_vocab(std::span<const std::string> corpus, int target_size,
                         Level level, const VocabTrainerConfig& cfg) {
  if (corpus.empty()) throw ConfigError("vocab corpus is empty");

  std::map<std::string, double> chunk_freq;
  std::map<char, double> char_freq;
  for (const auto& sentence : corpus) {
    for (char c : sentence) char_freq[c] += 1.0;
    for (auto& chunk : split_chunks(sentence)) chunk_freq[chunk] += 1.0;
  }
  if (char_freq.empty()) throw ConfigError("vocab corpus has no characters");
  const int alphabet = static_cast<int>(char_freq.size());
  if (target_size < alphabet)
    throw ConfigError("target_size " + std::to_string(target_size) +
                      " is smaller than the alphabet (" + std::to_string(alphabet) + ")");

  double char_total = 0.0;
  for (const auto& [c, f] : char_freq) char_total += f;

  if (level == Level::kChar) {
    std::vector<Piece> pieces;
    for (const auto& [c, f] : char_freq)
      pieces.push_back({std::string(1, c), std::log(f / char_total)});
    return SubwordVocab(level, std::move(pieces));
  }

  // Seed: every substring inside a chunk, scored by frequency × length.
  std::map<std::string, double> substr_freq;
  for (const auto& [chunk, f] : chunk_freq) {
    const int n = static_cast<int>(chunk.size());
    for (int st = 0; st < n; ++st)
      for (int len = 2; len <= std::min(cfg.max_piece_length, n - st); ++len)
        substr_freq[chunk.substr(st, len)] += f;
  }
  std::vector<std::pair<double, std::string>> seeds;
  for (const auto& [s, f] : substr_freq)
    seeds.push_back({f * static_cast<double>(s.size()), s});
  std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  TrainingState st;
  for (const auto& [chunk, f] : chunk_freq) st.chunks.push_back({chunk, f});

  if (cfg.frequency_fallback) {
    std::vector<Piece> pieces;
    for (const auto& [c, f] : char_freq)
      pieces.push_back({std::string(1, c), 0.0});
    for (const auto& [score, s] : seeds) {
      if (static_cast<int>(pieces.size()) >= target_size) break;
      pieces.push_back({s, 0.0});
    }
    double total = 0.0;
    std::vector<double> w;
    for (const auto& p : pieces) {
      double f = p.text.size() == 1 ? char_freq[p.text[0]] : substr_freq[p.text];
      w.push_back(f);
      total += f;
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) pieces[i].log_prob = std::log(w[i] / total);
    return SubwordVocab(level, std::move(pieces));
  }

  const int seed_limit = std::max(target_size * cfg.seed_multiplier, target_size);
  double seed_total = char_total;
  for (const auto& [c, f] : char_freq) {
    st.pieces.push_back({std::string(1, c), f});
    st.required.push_back(true);
  }
  for (int i = 0; i < static_cast<int>(seeds.size()) &&
                  static_cast<int>(st.pieces.size()) < seed_limit;
       ++i) {
    st.pieces.push_back({seeds[i].second, seeds[i].first});
    st.required.push_back(false);
    seed_total += seeds[i].first;
  }
  for (auto& p : st.pieces) p.log_prob = std::log(p.log_prob / seed_total);
  st.reindex();

  std::vector<double> counts;
  const bool needs_pruning = static_cast<int>(st.pieces.size()) > target_size;
  for (int round = 0; round < 64; ++round) {
    for (int it = 0; it < cfg.em_iterations; ++it) {
      st.expected_counts(counts);
      st.m_step(counts, needs_pruning);
    }
    if (static_cast<int>(st.pieces.size()) <= target_size) break;
    st.prune(target_size, cfg.shrink_factor);
  }
  if (static_cast<int>(st.pieces.size()) > target_size)
    throw TrainingError("vocab pruning did not converge to target size");
  st.expected_counts(counts);
  st.m_step(counts, false);

  std::vector<Piece> pieces;
  for (const auto& p : st.pieces) pieces.push_back({p.text, p.log_prob});
  return SubwordVocab(level, std::move(pieces));
}

}  // namespace s2i::text
