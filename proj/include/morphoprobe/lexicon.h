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

#ifndef MORPHOPROBE_LEXICON_H_
#define MORPHOPROBE_LEXICON_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace morphoprobe {

enum class Gender { kMasculine, kFeminine };
enum class Affix { kS, kEs };

std::string_view GenderName(Gender gender);  // "m" / "f"
std::string_view AffixSurface(Affix affix);  // "s" / "es"

struct NounEntry {
  std::string lemma;
  std::string plural;
  Gender gender = Gender::kMasculine;
  Affix affix = Affix::kS;
  // log10 occurrences per million; nullopt when the source row left it blank.
  std::optional<double> log_frequency;
};

// Plural affix selected by the final letter of `lemma`: S after a vowel
// (accented vowels and ü included), ES otherwise. Throws
// Error(kInvalidLemma) if `lemma` is empty or ends in a non-letter.
Affix ExpectedAffix(std::string_view lemma);

enum class Validation { kOk, kIrregular, kMalformed };

std::string_view ValidationName(Validation v);

struct ValidationResult {
  Validation status = Validation::kOk;
  std::string reason;  // empty when ok
};

ValidationResult ValidateEntry(const NounEntry& entry);

struct Reject {
  std::size_t row = 0;  // 1-based line number in the source file
  std::string lemma;
  std::string plural;
  std::string reason;
};

class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::vector<NounEntry> entries, std::string source_digest);

  const std::vector<NounEntry>& entries() const { return entries_; }
  const std::string& source_digest() const { return source_digest_; }
  std::size_t size() const { return entries_.size(); }

  // Entry for `lemma`, or nullptr.
  const NounEntry* Find(std::string_view lemma) const;

 private:
  std::vector<NounEntry> entries_;
  std::string source_digest_;
};

struct LexiconParse {
  Lexicon lexicon;
  std::vector<Reject> rejects;
};

// Parses the TSV lexicon (header `lemma plural gender affix log_frequency`).
// Surface forms are lowercased and NFC-normalized. Rows that fail
// ValidateEntry go to `rejects`. `log_base` names the base the frequency
// column is written in; values are rescaled to log10.
//
// Throws Error(kFormatError) on a missing or wrong header and
// Error(kDuplicateEntry) on a repeated (lemma, plural) pair.
LexiconParse ParseLexicon(std::string_view text, double log_base = 10.0);

// `row,lemma,plural,reason` CSV.
std::string RejectsToCsv(const std::vector<Reject>& rejects);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_LEXICON_H_
