/* Copyright 2026 The morphoprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MORPHOPROBE_TOKENIZATION_H_
#define MORPHOPROBE_TOKENIZATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphoprobe/lexicon.h"

namespace morphoprobe {

inline constexpr std::string_view kClsPiece = "[CLS]";
inline constexpr std::string_view kSepPiece = "[SEP]";
inline constexpr std::string_view kMaskPiece = "[MASK]";
inline constexpr std::string_view kPadPiece = "[PAD]";
inline constexpr std::string_view kUnkPiece = "[UNK]";

struct VocabularyOptions {
  std::string continuation_prefix = "##";
  std::string unk_piece = std::string(kUnkPiece);
  std::size_t max_word_chars = 100;
};

// WordPiece inventory. Token id == line index in the source file. Immutable
// after construction.
class Vocabulary {
 public:
  // Throws Error(kDuplicatePiece), Error(kMissingSpecial), or
  // Error(kFormatError) for an empty line.
  static Vocabulary FromPieces(std::vector<std::string> pieces,
                               VocabularyOptions options = {});

  std::size_t size() const { return pieces_.size(); }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& piece(std::int32_t id) const { return pieces_.at(id); }
  std::optional<std::int32_t> Id(std::string_view piece) const;
  bool Contains(std::string_view piece) const { return Id(piece).has_value(); }
  bool IsSpecial(std::string_view piece) const;

  const std::string& continuation_prefix() const {
    return options_.continuation_prefix;
  }
  const std::string& unk_piece() const { return options_.unk_piece; }
  std::size_t max_word_chars() const { return options_.max_word_chars; }
  // Longest piece length in code points, continuation prefix excluded.
  std::size_t max_piece_chars() const { return max_piece_chars_; }

  // SHA-256 over the pieces joined with '\n' plus a trailing '\n', which is
  // the byte content of a canonical vocab file.
  const std::string& digest() const { return digest_; }

 private:
  Vocabulary() = default;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int32_t> ids_;
  VocabularyOptions options_;
  std::size_t max_piece_chars_ = 0;
  std::string digest_;
};

// One piece per line, line order preserved as id order.
Vocabulary LoadVocab(std::string_view text, VocabularyOptions options = {});

// Greedy longest-match-first WordPiece. Non-initial pieces carry the
// continuation prefix. If no piece matches at some position, or the word is
// longer than max_word_chars code points, the result is {unk_piece}.
std::vector<std::string> Tokenize(std::string_view word, const Vocabulary& vocab);

// Concatenates tokens, stripping the continuation prefix from every token
// after the first.
std::string Surface(std::span<const std::string> tokens,
                    std::string_view continuation_prefix = "##");

enum class Scheme { kSingleToken, kMorphemic, kNonMorphemic };
enum class Variant { kOriginal, kArtificial };

std::string_view SchemeName(Scheme scheme);    // single-token, morphemic, ...
std::string_view VariantName(Variant variant);  // original, artificial
std::optional<Scheme> ParseScheme(std::string_view name);
std::optional<Variant> ParseVariant(std::string_view name);

struct TokenizationRecord {
  std::string word;
  std::vector<std::string> tokens;
  std::vector<std::int32_t> token_ids;
  Scheme scheme = Scheme::kNonMorphemic;
  Variant variant = Variant::kOriginal;
  bool contains_unk = false;
};

// Tokenizes entry.plural and labels it SingleToken, Morphemic (a token
// boundary falls on the lemma/affix split and the affix is one continuation
// piece), or NonMorphemic. UNK-bearing results are flagged, not thrown.
TokenizationRecord ClassifyScheme(const NounEntry& entry,
                                  const Vocabulary& vocab);

// tokenize(lemma) ++ [prefix + affix]. Throws Error(kMissingAffixPiece) or
// Error(kUnkLemma).
TokenizationRecord ArtificialTokenize(const NounEntry& entry,
                                      const Vocabulary& vocab);

// `lemma,plural,gender,affix,variant,scheme,tokens,contains_unk` CSV with
// tokens joined by '|'. Throws Error(kBadInput) if the spans differ in length.
std::string ClassificationsToCsv(std::span<const NounEntry> entries,
                                 std::span<const TokenizationRecord> records,
                                 std::string_view header_comment = {});

}  // namespace morphoprobe

#endif  // MORPHOPROBE_TOKENIZATION_H_
