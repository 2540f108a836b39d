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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace s2i::text {

enum class Level { kChar, kShort, kLong };

const char* level_name(Level level);
Level parse_level(std::string_view name);

struct Piece {
  std::string text;
  double log_prob = 0.0;
};

/// Unigram subword inventory. Id 0 is the reserved unknown piece; the CTC
/// blank sits at id size(), one past the last piece.
class SubwordVocab {
 public:
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkPiece = "<unk>";

  SubwordVocab() = default;
  /// `pieces` excludes <unk>; ids are assigned in the given order from 1.
  SubwordVocab(Level level, std::vector<Piece> pieces);

  Level level() const { return level_; }
  int size() const { return static_cast<int>(pieces_.size()); }
  int blank_id() const { return size(); }
  int max_piece_length() const { return max_len_; }

  const Piece& piece(int id) const;
  std::optional<int> id_of(std::string_view text) const;
  bool in_alphabet(char c) const;
  std::uint64_t hash() const;

  const std::vector<Piece>& pieces() const { return pieces_; }

  /// Ordered "piece<TAB>log_prob" lines, <unk> included as the first line.
  void save(const std::string& path) const;
  static SubwordVocab load(const std::string& path, Level level);

 private:
  Level level_ = Level::kChar;
  std::vector<Piece> pieces_;
  std::unordered_map<std::string, int> index_;
  int max_len_ = 1;
  bool alphabet_[256] = {};
};

struct VocabTrainerConfig {
  int max_piece_length = 16;
  int seed_multiplier = 8;  // seed inventory = multiplier × target_size
  double shrink_factor = 0.75;
  int em_iterations = 2;
  /// Skip EM/pruning and keep the most frequent substrings directly.
  bool frequency_fallback = false;
};

/// Trains a unigram inventory of at most `target_size` pieces (plus <unk>).
/// Pieces never cross a word boundary; a space joins the following word.
SubwordVocab build_vocab(std::span<const std::string> corpus, int target_size,
                         Level level, const VocabTrainerConfig& cfg = {});

struct Segmentation {
  std::vector<int> ids;
  bool has_unknown = false;
};

/// Maximum-likelihood segmentation under the unigram model.
Segmentation segment(std::string_view text, const SubwordVocab& vocab);

/// Log-probability of a segmentation; used by tests and training.
double segmentation_log_prob(std::span<const int> ids, const SubwordVocab& vocab);

std::string detokenize(std::span<const int> ids, const SubwordVocab& vocab);

}  // namespace s2i::text
