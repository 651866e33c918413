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

#ifndef MORPHOPROBE_PROBE_H_
#define MORPHOPROBE_PROBE_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphoprobe/lexicon.h"
#include "morphoprobe/scorer.h"
#include "morphoprobe/tokenization.h"

namespace morphoprobe {

enum class Number { kSingular, kPlural };
enum class ArticleType { kDefinite, kIndefinite };

std::string_view NumberName(Number number);            // singular, plural
std::string_view ArticleTypeName(ArticleType type);    // definite, indefinite
std::optional<Number> ParseNumber(std::string_view name);
std::optional<ArticleType> ParseArticleType(std::string_view name);

struct ArticleSet {
  Gender gender;
  ArticleType type;
  std::string singular;
  std::string plural;
};

// el/los, la/las, un/unos, una/unas.
ArticleSet ArticlesFor(Gender gender, ArticleType type);

// ["[CLS]", "[MASK]", noun..., "[SEP]"] with mask_index 1 and no candidates.
// Throws Error(kBadNounTokens) if noun_tokens is empty or holds a special.
MaskQuery BuildFrame(std::span<const std::string> noun_tokens);

// ln P(plural) - ln P(singular). Throws Error(kBadInput) on a bad index and
// Error(kDegenerateDistribution) on a non-positive probability.
double LogOdds(const MaskResponse& response, std::size_t plural_idx,
               std::size_t singular_idx);

// Plural rows are correct when log_odds > 0, singular rows when < 0. Zero is
// never correct.
bool IsCorrect(Number number, double log_odds);

struct ProbeResult {
  std::string lemma;
  std::string wordform;
  Number number = Number::kPlural;
  Scheme scheme = Scheme::kSingleToken;  // original scheme of the plural
  Variant variant = Variant::kOriginal;
  ArticleType article_type = ArticleType::kDefinite;
  double log_odds = 0.0;
  bool correct = false;
  // Not serialized.
  std::vector<std::string> tokens;
  std::string singular_article;
  std::string plural_article;
};

struct ProbeOptions {
  std::vector<Variant> variants = {Variant::kOriginal, Variant::kArtificial};
  std::vector<ArticleType> article_types = {ArticleType::kDefinite,
                                            ArticleType::kIndefinite};
  std::size_t concurrency = 8;
  std::size_t flush_every = 500;
  // Receives each completed chunk of at most flush_every results, in order.
  std::function<void(std::span<const ProbeResult>)> on_flush;
};

struct ProbeRun {
  std::vector<ProbeResult> results;
  std::size_t entries_probed = 0;
  std::size_t skipped_unk = 0;
  // Artificial variants that could not be built (missing affix piece or UNK
  // lemma) and were left out.
  std::size_t skipped_artificial = 0;
};

// Per entry, in lexicon order: the singular, then the original plural, then
// the artificial plural (SingleToken and NonMorphemic originals only), each
// crossed with the requested article types. Entries whose plural or lemma
// tokenizes to UNK are skipped. Scorer errors propagate after earlier chunks
// have been handed to on_flush.
ProbeRun RunProbe(const Lexicon& lexicon, const Vocabulary& vocab,
                  ScorerHandle& scorer, const ProbeOptions& options = {});

struct AccuracyCell {
  Scheme scheme = Scheme::kSingleToken;
  Variant variant = Variant::kOriginal;
  std::size_t n = 0;  // plural rows in the cell
  std::optional<double> accuracy;
  std::optional<double> mean_log_odds;
  std::optional<double> sd_log_odds;
};

// One cell per (scheme, variant) over plural rows; empty cells carry nullopt.
// Throws Error(kBadInput) on empty input.
std::vector<AccuracyCell> AccuracyTable(std::span<const ProbeResult> results);

std::string AccuracyTableToJson(std::span<const AccuracyCell> cells);

// `lemma,wordform,number,scheme,variant,article_type,log_odds,correct`.
std::string ProbeCsvHeader();
std::string ProbeResultsToCsvRows(std::span<const ProbeResult> results);
std::vector<ProbeResult> ParseProbeResults(std::string_view csv_text);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_PROBE_H_
