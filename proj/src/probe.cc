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

#include "morphoprobe/probe.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "json.hpp"
#include "morphoprobe/csv.h"
#include "morphoprobe/error.h"
#include "morphoprobe/summary.h"

namespace morphoprobe {

namespace {

// One masked-article query to be issued.
struct ProbeItem {
  const NounEntry* entry;
  std::string wordform;
  Number number;
  Scheme scheme;
  Variant variant;
  ArticleSet articles;
  std::vector<std::string> tokens;
};

bool HasUnk(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  for (const auto& t : tokens) {
    if (t == vocab.unk_piece()) return true;
  }
  return false;
}

}  // namespace

std::string_view NumberName(Number number) {
  return number == Number::kSingular ? "singular" : "plural";
}

std::string_view ArticleTypeName(ArticleType type) {
  return type == ArticleType::kDefinite ? "definite" : "indefinite";
}

std::optional<Number> ParseNumber(std::string_view name) {
  if (name == "singular") return Number::kSingular;
  if (name == "plural") return Number::kPlural;
  return std::nullopt;
}

std::optional<ArticleType> ParseArticleType(std::string_view name) {
  if (name == "definite") return ArticleType::kDefinite;
  if (name == "indefinite") return ArticleType::kIndefinite;
  return std::nullopt;
}

ArticleSet ArticlesFor(Gender gender, ArticleType type) {
  const bool fem = gender == Gender::kFeminine;
  if (type == ArticleType::kDefinite) {
    return {gender, type, fem ? "la" : "el", fem ? "las" : "los"};
  }
  return {gender, type, fem ? "una" : "un", fem ? "unas" : "unos"};
}

MaskQuery BuildFrame(std::span<const std::string> noun_tokens) {
  if (noun_tokens.empty()) {
    throw Error(ErrorCode::kBadNounTokens, "empty noun");
  }
  MaskQuery q;
  q.tokens.reserve(noun_tokens.size() + 3);
  q.tokens.emplace_back(kClsPiece);
  q.tokens.emplace_back(kMaskPiece);
  for (const auto& t : noun_tokens) {
    if (t == kClsPiece || t == kSepPiece || t == kMaskPiece ||
        t == kPadPiece || t == kUnkPiece) {
      throw Error(ErrorCode::kBadNounTokens, "special piece " + t + " in noun");
    }
    q.tokens.push_back(t);
  }
  q.tokens.emplace_back(kSepPiece);
  q.mask_index = 1;
  return q;
}

double LogOdds(const MaskResponse& response, std::size_t plural_idx,
               std::size_t singular_idx) {
  const auto& p = response.probabilities;
  if (plural_idx >= p.size() || singular_idx >= p.size()) {
    throw Error(ErrorCode::kBadInput, "candidate index out of range");
  }
  if (!(p[plural_idx] > 0.0) || !(p[singular_idx] > 0.0)) {
    throw Error(ErrorCode::kDegenerateDistribution, "non-positive probability");
  }
  // Mantissa and exponent are differenced separately so that rescaling both
  // probabilities by a power of two leaves the result bit-identical.
  int e_plural = 0;
  int e_singular = 0;
  const double m_plural = std::frexp(p[plural_idx], &e_plural);
  const double m_singular = std::frexp(p[singular_idx], &e_singular);
  return (std::log(m_plural) - std::log(m_singular)) +
         static_cast<double>(e_plural - e_singular) * std::numbers::ln2;
}

bool IsCorrect(Number number, double log_odds) {
  return number == Number::kPlural ? log_odds > 0.0 : log_odds < 0.0;
}

ProbeRun RunProbe(const Lexicon& lexicon, const Vocabulary& vocab,
                  ScorerHandle& scorer, const ProbeOptions& options) {
  bool want_original = false;
  bool want_artificial = false;
  for (Variant v : options.variants) {
    (v == Variant::kOriginal ? want_original : want_artificial) = true;
  }

  ProbeRun run;
  std::vector<ProbeItem> items;
  for (const NounEntry& entry : lexicon.entries()) {
    TokenizationRecord plural = ClassifyScheme(entry, vocab);
    std::vector<std::string> singular = Tokenize(entry.lemma, vocab);
    if (plural.contains_unk || HasUnk(singular, vocab)) {
      ++run.skipped_unk;
      continue;
    }
    ++run.entries_probed;
    std::vector<std::pair<Variant, std::vector<std::string>>> forms;
    if (want_original) forms.emplace_back(Variant::kOriginal, plural.tokens);
    if (want_artificial && plural.scheme != Scheme::kMorphemic) {
      try {
        forms.emplace_back(Variant::kArtificial,
                           ArtificialTokenize(entry, vocab).tokens);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMissingAffixPiece &&
            e.code() != ErrorCode::kUnkLemma) {
          throw;
        }
        ++run.skipped_artificial;
      }
    }
    for (ArticleType type : options.article_types) {
      items.push_back({&entry, entry.lemma, Number::kSingular, plural.scheme,
                       Variant::kOriginal, ArticlesFor(entry.gender, type),
                       singular});
    }
    for (const auto& [variant, tokens] : forms) {
      for (ArticleType type : options.article_types) {
        items.push_back({&entry, entry.plural, Number::kPlural, plural.scheme,
                         variant, ArticlesFor(entry.gender, type), tokens});
      }
    }
  }

  const std::size_t chunk = options.flush_every == 0 ? items.size()
                                                      : options.flush_every;
  run.results.reserve(items.size());
  for (std::size_t begin = 0; begin < items.size(); begin += chunk) {
    const std::size_t end = std::min(items.size(), begin + chunk);
    std::vector<MaskQuery> queries;
    queries.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      MaskQuery q = BuildFrame(items[i].tokens);
      q.candidates = {items[i].articles.singular, items[i].articles.plural};
      queries.push_back(std::move(q));
    }
    std::vector<MaskResponse> responses =
        scorer.ScoreBatch(queries, options.concurrency);
    const std::size_t first_new = run.results.size();
    for (std::size_t i = begin; i < end; ++i) {
      const ProbeItem& item = items[i];
      ProbeResult r;
      r.lemma = item.entry->lemma;
      r.wordform = item.wordform;
      r.number = item.number;
      r.scheme = item.scheme;
      r.variant = item.variant;
      r.article_type = item.articles.type;
      r.log_odds = LogOdds(responses[i - begin], 1, 0);
      r.correct = IsCorrect(r.number, r.log_odds);
      r.tokens = item.tokens;
      r.singular_article = item.articles.singular;
      r.plural_article = item.articles.plural;
      run.results.push_back(std::move(r));
    }
    if (options.on_flush) {
      options.on_flush(std::span<const ProbeResult>(
          run.results.data() + first_new, run.results.size() - first_new));
    }
  }
  return run;
}

std::vector<AccuracyCell> AccuracyTable(std::span<const ProbeResult> results) {
  if (results.empty()) throw Error(ErrorCode::kBadInput, "no probe results");
  std::vector<AccuracyCell> cells;
  for (Scheme s : {Scheme::kSingleToken, Scheme::kMorphemic,
                   Scheme::kNonMorphemic}) {
    for (Variant v : {Variant::kOriginal, Variant::kArtificial}) {
      AccuracyCell cell;
      cell.scheme = s;
      cell.variant = v;
      std::vector<double> values;
      std::size_t correct = 0;
      for (const auto& r : results) {
        if (r.number != Number::kPlural || r.scheme != s || r.variant != v) {
          continue;
        }
        values.push_back(r.log_odds);
        if (r.correct) ++correct;
      }
      cell.n = values.size();
      if (!values.empty()) {
        cell.accuracy = static_cast<double>(correct) /
                        static_cast<double>(values.size());
        MeanSd m = ComputeMeanSd(values);
        cell.mean_log_odds = m.mean;
        cell.sd_log_odds = m.sd;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string AccuracyTableToJson(std::span<const AccuracyCell> cells) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  for (const auto& c : cells) {
    ordered_json j;
    j["scheme"] = SchemeName(c.scheme);
    j["variant"] = VariantName(c.variant);
    j["n"] = c.n;
    j["accuracy"] = opt(c.accuracy);
    j["mean_log_odds"] = opt(c.mean_log_odds);
    j["sd_log_odds"] = opt(c.sd_log_odds);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string ProbeCsvHeader() {
  return "lemma,wordform,number,scheme,variant,article_type,log_odds,correct\n";
}

std::string ProbeResultsToCsvRows(std::span<const ProbeResult> results) {
  CsvWriter csv;
  for (const auto& r : results) {
    csv.Row({r.lemma, r.wordform, std::string(NumberName(r.number)),
             std::string(SchemeName(r.scheme)),
             std::string(VariantName(r.variant)),
             std::string(ArticleTypeName(r.article_type)),
             FormatDouble(r.log_odds), r.correct ? "true" : "false"});
  }
  return csv.str();
}

std::vector<ProbeResult> ParseProbeResults(std::string_view csv_text) {
  auto rows = ParseCsv(csv_text);
  if (rows.empty() || rows[0] != std::vector<std::string>{
                                     "lemma", "wordform", "number", "scheme",
                                     "variant", "article_type", "log_odds",
                                     "correct"}) {
    throw Error(ErrorCode::kFormatError, "bad probe results header");
  }
  std::vector<ProbeResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 8) {
      throw Error(ErrorCode::kFormatError,
                  "probe row " + std::to_string(i) + " has wrong field count");
    }
    ProbeResult r;
    r.lemma = row[0];
    r.wordform = row[1];
    auto number = ParseNumber(row[2]);
    auto scheme = ParseScheme(row[3]);
    auto variant = ParseVariant(row[4]);
    auto type = ParseArticleType(row[5]);
    if (!number || !scheme || !variant || !type) {
      throw Error(ErrorCode::kFormatError,
                  "probe row " + std::to_string(i) + " has a bad enum field");
    }
    r.number = *number;
    r.scheme = *scheme;
    r.variant = *variant;
    r.article_type = *type;
    try {
      r.log_odds = std::stod(row[6]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormatError,
                  "probe row " + std::to_string(i) + " has bad log_odds");
    }
    r.correct = row[7] == "true";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace morphoprobe
