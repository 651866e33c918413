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

#include "morphoprobe/tokenization.h"

#include <algorithm>
#include <utility>

#include "morphoprobe/csv.h"
#include "morphoprobe/error.h"
#include "morphoprobe/text.h"

namespace morphoprobe {

namespace {

constexpr std::string_view kSpecials[] = {kClsPiece, kSepPiece, kMaskPiece,
                                          kPadPiece};

std::vector<std::int32_t> LookupIds(const std::vector<std::string>& tokens,
                                    const Vocabulary& vocab) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.Id(t).value_or(-1));
  return ids;
}

}  // namespace

Vocabulary Vocabulary::FromPieces(std::vector<std::string> pieces,
                                  VocabularyOptions options) {
  Vocabulary v;
  v.options_ = std::move(options);
  v.ids_.reserve(pieces.size());
  std::string canonical;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string& p = pieces[i];
    if (p.empty()) {
      throw Error(ErrorCode::kFormatError,
                  "empty piece at line " + std::to_string(i + 1));
    }
    if (!v.ids_.emplace(p, static_cast<std::int32_t>(i)).second) {
      throw Error(ErrorCode::kDuplicatePiece,
                  "'" + p + "' at line " + std::to_string(i + 1));
    }
    std::string_view body = p;
    if (body.starts_with(v.options_.continuation_prefix)) {
      body.remove_prefix(v.options_.continuation_prefix.size());
    }
    v.max_piece_chars_ = std::max(v.max_piece_chars_, CodePointCount(body));
    canonical.append(p);
    canonical.push_back('\n');
  }
  for (std::string_view special : kSpecials) {
    if (!v.ids_.contains(std::string(special))) {
      throw Error(ErrorCode::kMissingSpecial, std::string(special));
    }
  }
  if (!v.ids_.contains(v.options_.unk_piece)) {
    throw Error(ErrorCode::kMissingSpecial, v.options_.unk_piece);
  }
  v.pieces_ = std::move(pieces);
  v.digest_ = Sha256Hex(canonical);
  return v;
}

std::optional<std::int32_t> Vocabulary::Id(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::IsSpecial(std::string_view piece) const {
  if (piece == options_.unk_piece) return true;
  return std::find(std::begin(kSpecials), std::end(kSpecials), piece) !=
         std::end(kSpecials);
}

Vocabulary LoadVocab(std::string_view text, VocabularyOptions options) {
  std::vector<std::string> pieces;
  for (std::string_view line : SplitLines(text)) pieces.emplace_back(line);
  return Vocabulary::FromPieces(std::move(pieces), std::move(options));
}

std::vector<std::string> Tokenize(std::string_view word,
                                  const Vocabulary& vocab) {
  const std::vector<std::size_t> bounds = CodePointBoundaries(word);
  const std::size_t n = bounds.size() - 1;
  if (n == 0 || n > vocab.max_word_chars()) return {vocab.unk_piece()};

  std::vector<std::string> tokens;
  std::string candidate;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = std::min(n, start + vocab.max_piece_chars());
    bool found = false;
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate = vocab.continuation_prefix();
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (vocab.Contains(candidate)) {
        found = true;
        break;
      }
    }
    if (!found) return {vocab.unk_piece()};
    tokens.push_back(candidate);
    start = end;
  }
  return tokens;
}

std::string Surface(std::span<const std::string> tokens,
                    std::string_view continuation_prefix) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string_view t = tokens[i];
    if (i > 0 && t.starts_with(continuation_prefix)) {
      t.remove_prefix(continuation_prefix.size());
    }
    out.append(t);
  }
  return out;
}

std::string_view SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kSingleToken: return "single-token";
    case Scheme::kMorphemic: return "morphemic";
    case Scheme::kNonMorphemic: return "non-morphemic";
  }
  return "?";
}

std::string_view VariantName(Variant variant) {
  return variant == Variant::kOriginal ? "original" : "artificial";
}

std::optional<Scheme> ParseScheme(std::string_view name) {
  for (Scheme s : {Scheme::kSingleToken, Scheme::kMorphemic,
                   Scheme::kNonMorphemic}) {
    if (SchemeName(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Variant> ParseVariant(std::string_view name) {
  if (name == "original") return Variant::kOriginal;
  if (name == "artificial") return Variant::kArtificial;
  return std::nullopt;
}

TokenizationRecord ClassifyScheme(const NounEntry& entry,
                                  const Vocabulary& vocab) {
  TokenizationRecord rec;
  rec.word = entry.plural;
  rec.tokens = Tokenize(entry.plural, vocab);
  rec.token_ids = LookupIds(rec.tokens, vocab);
  rec.variant = Variant::kOriginal;
  rec.contains_unk = std::find(rec.tokens.begin(), rec.tokens.end(),
                               vocab.unk_piece()) != rec.tokens.end();
  if (rec.contains_unk) {
    rec.scheme = Scheme::kNonMorphemic;
    return rec;
  }
  if (rec.tokens.size() == 1) {
    rec.scheme = Scheme::kSingleToken;
    return rec;
  }
  const std::string affix_piece =
      vocab.continuation_prefix() + std::string(AffixSurface(entry.affix));
  std::span<const std::string> stem(rec.tokens.data(), rec.tokens.size() - 1);
  const bool aligned = rec.tokens.back() == affix_piece &&
                       Surface(stem, vocab.continuation_prefix()) == entry.lemma;
  rec.scheme = aligned ? Scheme::kMorphemic : Scheme::kNonMorphemic;
  return rec;
}

TokenizationRecord ArtificialTokenize(const NounEntry& entry,
                                      const Vocabulary& vocab) {
  const std::string affix_piece =
      vocab.continuation_prefix() + std::string(AffixSurface(entry.affix));
  if (!vocab.Contains(affix_piece)) {
    throw Error(ErrorCode::kMissingAffixPiece, affix_piece);
  }
  TokenizationRecord rec;
  rec.word = entry.plural;
  rec.tokens = Tokenize(entry.lemma, vocab);
  if (std::find(rec.tokens.begin(), rec.tokens.end(), vocab.unk_piece()) !=
      rec.tokens.end()) {
    throw Error(ErrorCode::kUnkLemma, entry.lemma);
  }
  rec.tokens.push_back(affix_piece);
  rec.token_ids = LookupIds(rec.tokens, vocab);
  rec.scheme = Scheme::kMorphemic;
  rec.variant = Variant::kArtificial;
  return rec;
}

std::string ClassificationsToCsv(std::span<const NounEntry> entries,
                                 std::span<const TokenizationRecord> records,
                                 std::string_view header_comment) {
  if (entries.size() != records.size()) {
    throw Error(ErrorCode::kBadInput, "entries and records differ in length");
  }
  CsvWriter csv;
  if (!header_comment.empty()) csv.Comment(header_comment);
  csv.Row({"lemma", "plural", "gender", "affix", "variant", "scheme", "tokens",
           "contains_unk"});
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const NounEntry& e = entries[i];
    const TokenizationRecord& r = records[i];
    csv.Row({e.lemma, e.plural, std::string(GenderName(e.gender)),
             std::string(AffixSurface(e.affix)),
             std::string(VariantName(r.variant)),
             std::string(SchemeName(r.scheme)), JoinStrings(r.tokens, "|"),
             r.contains_unk ? "true" : "false"});
  }
  return csv.str();
}

}  // namespace morphoprobe
