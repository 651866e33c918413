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

#include "morphoprobe/lexicon.h"

#include <charconv>
#include <cmath>
#include <set>
#include <utility>

#include "morphoprobe/csv.h"
#include "morphoprobe/error.h"
#include "morphoprobe/text.h"

namespace morphoprobe {

namespace {

constexpr std::string_view kHeader = "lemma\tplural\tgender\taffix\tlog_frequency";

bool AllSpanishLetters(std::string_view word) {
  try {
    for (char32_t c : DecodeUtf8(word)) {
      if (!IsSpanishLetter(c)) return false;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

std::optional<Gender> ParseGender(std::string_view s) {
  if (s == "f" || s == "fem" || s == "feminine") return Gender::kFeminine;
  if (s == "m" || s == "masc" || s == "masculine") return Gender::kMasculine;
  return std::nullopt;
}

std::optional<Affix> ParseAffix(std::string_view s) {
  if (s == "s" || s == "S" || s == "-s") return Affix::kS;
  if (s == "es" || s == "ES" || s == "Es" || s == "-es") return Affix::kEs;
  return std::nullopt;
}

std::optional<double> ParseDouble(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::string_view GenderName(Gender gender) {
  return gender == Gender::kFeminine ? "f" : "m";
}

std::string_view AffixSurface(Affix affix) {
  return affix == Affix::kS ? "s" : "es";
}

std::string_view ValidationName(Validation v) {
  switch (v) {
    case Validation::kOk: return "ok";
    case Validation::kIrregular: return "irregular";
    case Validation::kMalformed: return "malformed";
  }
  return "?";
}

Affix ExpectedAffix(std::string_view lemma) {
  if (lemma.empty()) throw Error(ErrorCode::kInvalidLemma, "empty lemma");
  char32_t last = LastCodePoint(lemma);
  if (!IsSpanishLetter(last)) {
    throw Error(ErrorCode::kInvalidLemma,
                "lemma '" + std::string(lemma) + "' ends in a non-letter");
  }
  return IsSpanishVowel(last) ? Affix::kS : Affix::kEs;
}

ValidationResult ValidateEntry(const NounEntry& entry) {
  if (entry.lemma.empty() || entry.plural.empty()) {
    return {Validation::kMalformed, "empty field"};
  }
  if (ContainsWhitespace(entry.lemma) || ContainsWhitespace(entry.plural)) {
    return {Validation::kMalformed, "whitespace in surface form"};
  }
  if (!AllSpanishLetters(entry.lemma) || !AllSpanishLetters(entry.plural)) {
    return {Validation::kMalformed, "non-letter character"};
  }
  if (entry.plural != entry.lemma + std::string(AffixSurface(entry.affix))) {
    return {Validation::kIrregular, "plural is not lemma + affix"};
  }
  if (ExpectedAffix(entry.lemma) != entry.affix) {
    return {Validation::kIrregular, "affix does not follow final letter"};
  }
  return {};
}

Lexicon::Lexicon(std::vector<NounEntry> entries, std::string source_digest)
    : entries_(std::move(entries)), source_digest_(std::move(source_digest)) {}

const NounEntry* Lexicon::Find(std::string_view lemma) const {
  for (const auto& e : entries_) {
    if (e.lemma == lemma) return &e;
  }
  return nullptr;
}

LexiconParse ParseLexicon(std::string_view text, double log_base) {
  if (!(log_base > 0.0) || log_base == 1.0) {
    throw Error(ErrorCode::kFormatError, "log base must be positive and != 1");
  }
  const double to_log10 = std::log10(log_base);
  std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty() || lines[0] != kHeader) {
    throw Error(ErrorCode::kFormatError,
                "expected header 'lemma<TAB>plural<TAB>gender<TAB>affix<TAB>"
                "log_frequency'");
  }

  std::vector<NounEntry> entries;
  std::vector<Reject> rejects;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t row = i + 1;
    if (lines[i].empty()) continue;
    std::vector<std::string_view> fields = SplitOn(lines[i], '\t');
    auto reject = [&](std::string lemma, std::string plural,
                      std::string reason) {
      rejects.push_back({row, std::move(lemma), std::move(plural),
                         std::move(reason)});
    };
    if (fields.size() < 4 || fields.size() > 5) {
      reject(std::string(fields[0]), fields.size() > 1 ? std::string(fields[1]) : "",
             "malformed: expected 5 tab-separated fields");
      continue;
    }
    NounEntry entry;
    try {
      entry.lemma = NormalizeWord(fields[0]);
      entry.plural = NormalizeWord(fields[1]);
    } catch (const Error&) {
      reject(std::string(fields[0]), std::string(fields[1]),
             "malformed: invalid UTF-8");
      continue;
    }
    if (!seen.emplace(entry.lemma, entry.plural).second) {
      throw Error(ErrorCode::kDuplicateEntry,
                  "row " + std::to_string(row) + ": duplicate (" +
                      entry.lemma + ", " + entry.plural + ")");
    }
    auto gender = ParseGender(fields[2]);
    auto affix = ParseAffix(fields[3]);
    if (!gender || !affix) {
      reject(entry.lemma, entry.plural, "malformed: bad gender or affix");
      continue;
    }
    entry.gender = *gender;
    entry.affix = *affix;
    if (fields.size() == 5 && !fields[4].empty()) {
      auto freq = ParseDouble(fields[4]);
      if (!freq) {
        reject(entry.lemma, entry.plural, "malformed: bad log_frequency");
        continue;
      }
      entry.log_frequency = *freq * to_log10;
    }
    ValidationResult v = ValidateEntry(entry);
    if (v.status != Validation::kOk) {
      reject(entry.lemma, entry.plural,
             std::string(ValidationName(v.status)) + ": " + v.reason);
      continue;
    }
    entries.push_back(std::move(entry));
  }
  return {Lexicon(std::move(entries), Sha256Hex(text)), std::move(rejects)};
}

std::string RejectsToCsv(const std::vector<Reject>& rejects) {
  CsvWriter csv;
  csv.Row({"row", "lemma", "plural", "reason"});
  for (const auto& r : rejects) {
    csv.Row({std::to_string(r.row), r.lemma, r.plural, r.reason});
  }
  return csv.str();
}

}  // namespace morphoprobe
