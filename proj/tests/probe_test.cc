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

#include <gtest/gtest.h>

#include <cmath>

#include "morphoprobe/error.h"
#include "test_util.h"

namespace morphoprobe {
namespace {

using testing::FixtureLexicon;
using testing::FixtureVocab;
using testing::Noun;

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

Lexicon OneNoun(NounEntry e) { return Lexicon({std::move(e)}, "x"); }

TEST(ArticlesTest, GenderRouting) {
  EXPECT_EQ(ArticlesFor(Gender::kMasculine, ArticleType::kDefinite).singular, "el");
  EXPECT_EQ(ArticlesFor(Gender::kMasculine, ArticleType::kDefinite).plural, "los");
  EXPECT_EQ(ArticlesFor(Gender::kFeminine, ArticleType::kDefinite).singular, "la");
  EXPECT_EQ(ArticlesFor(Gender::kFeminine, ArticleType::kDefinite).plural, "las");
  EXPECT_EQ(ArticlesFor(Gender::kMasculine, ArticleType::kIndefinite).singular, "un");
  EXPECT_EQ(ArticlesFor(Gender::kMasculine, ArticleType::kIndefinite).plural, "unos");
  EXPECT_EQ(ArticlesFor(Gender::kFeminine, ArticleType::kIndefinite).singular, "una");
  EXPECT_EQ(ArticlesFor(Gender::kFeminine, ArticleType::kIndefinite).plural, "unas");
}

TEST(BuildFrameTest, Layout) {
  MaskQuery q = BuildFrame(std::vector<std::string>{"neuro", "##nas"});
  EXPECT_EQ(q.tokens, (std::vector<std::string>{"[CLS]", "[MASK]", "neuro", "##nas", "[SEP]"}));
  EXPECT_EQ(q.mask_index, 1u);
  EXPECT_TRUE(q.candidates.empty());
  EXPECT_EQ(CodeOf([] { BuildFrame(std::vector<std::string>{}); }), ErrorCode::kBadNounTokens);
  EXPECT_EQ(CodeOf([] { BuildFrame(std::vector<std::string>{"casa", "[SEP]"}); }),
            ErrorCode::kBadNounTokens);
}

TEST(LogOddsTest, Examples) {
  MaskResponse r{{0, 0}, {0.1, 0.2}};
  EXPECT_NEAR(LogOdds(r, 1, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(LogOdds(r, 0, 1), -std::log(2.0), 1e-15);
  MaskResponse eq{{0, 0}, {0.3, 0.3}};
  EXPECT_EQ(LogOdds(eq, 1, 0), 0.0);
  EXPECT_FALSE(IsCorrect(Number::kPlural, 0.0));
  EXPECT_FALSE(IsCorrect(Number::kSingular, 0.0));
  EXPECT_TRUE(IsCorrect(Number::kPlural, 0.1));
  EXPECT_TRUE(IsCorrect(Number::kSingular, -0.1));
  EXPECT_FALSE(IsCorrect(Number::kSingular, 0.1));
}

TEST(LogOddsTest, ScaleInvariance) {
  MaskResponse r{{0, 0}, {0.0123, 0.00456}};
  const double lo = LogOdds(r, 1, 0);
  for (int k : {-30, -1, 1, 12}) {
    MaskResponse s = r;
    for (double& p : s.probabilities) p = std::ldexp(p, k);
    EXPECT_EQ(LogOdds(s, 1, 0), lo);
  }
  MaskResponse renorm{{0, 0}, {0.0123 / 0.01686, 0.00456 / 0.01686}};
  EXPECT_NEAR(LogOdds(renorm, 1, 0), lo, 1e-14);
  EXPECT_EQ(LogOdds(r, 0, 1), -lo);
}

TEST(LogOddsTest, Errors) {
  MaskResponse zero{{0, 0}, {0.0, 0.2}};
  EXPECT_EQ(CodeOf([&] { LogOdds(zero, 1, 0); }), ErrorCode::kDegenerateDistribution);
  MaskResponse r{{0, 0}, {0.1, 0.2}};
  EXPECT_EQ(CodeOf([&] { LogOdds(r, 2, 0); }), ErrorCode::kBadInput);
}

TEST(RunProbeTest, SingleTokenEntryGivesSixRows) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 1});
  ProbeRun run = RunProbe(OneNoun(Noun("mujer", "mujeres", Gender::kFeminine, Affix::kEs)),
                          *vocab, scorer);
  ASSERT_EQ(run.results.size(), 6u);
  EXPECT_EQ(run.entries_probed, 1u);
  const auto& r = run.results;
  EXPECT_EQ(r[0].number, Number::kSingular);
  EXPECT_EQ(r[0].wordform, "mujer");
  EXPECT_EQ(r[0].singular_article, "la");
  EXPECT_EQ(r[1].singular_article, "una");
  EXPECT_EQ(r[1].plural_article, "unas");
  EXPECT_EQ(r[2].number, Number::kPlural);
  EXPECT_EQ(r[2].variant, Variant::kOriginal);
  EXPECT_EQ(r[2].tokens, (std::vector<std::string>{"mujeres"}));
  EXPECT_EQ(r[4].variant, Variant::kArtificial);
  EXPECT_EQ(r[4].tokens, (std::vector<std::string>{"mujer", "##es"}));
  EXPECT_EQ(r[4].wordform, "mujeres");
  for (const auto& row : r) EXPECT_EQ(row.scheme, Scheme::kSingleToken);
}

TEST(RunProbeTest, MorphemicEntryHasNoArtificialRows) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 1});
  ProbeRun run = RunProbe(OneNoun(Noun("naranja", "naranjas", Gender::kFeminine, Affix::kS)),
                          *vocab, scorer);
  EXPECT_EQ(run.results.size(), 4u);
  for (const auto& row : run.results) EXPECT_EQ(row.variant, Variant::kOriginal);
}

TEST(RunProbeTest, LogOddsMatchesLogitDifference) {
  auto vocab = FixtureVocab();
  MockConfig cfg{.seed = 21, .bias = ParseBiasSpec("agreement")};
  MockBackend mock(vocab, cfg);
  ScorerHandle scorer = ScorerHandle::Mock(vocab, cfg);
  ProbeRun run = RunProbe(FixtureLexicon(), *vocab, scorer);
  for (const auto& row : run.results) {
    MaskQuery q = BuildFrame(row.tokens);
    const double diff = mock.Logit(q, *vocab->Id(row.plural_article)) -
                        mock.Logit(q, *vocab->Id(row.singular_article));
    EXPECT_NEAR(row.log_odds, diff, 1e-9) << row.wordform;
  }
}

TEST(RunProbeTest, FixtureCombinatorics) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 2});
  Lexicon lex = FixtureLexicon();
  ProbeRun run = RunProbe(lex, *vocab, scorer);
  // 2 single-token, 4 morphemic, 4 non-morphemic entries.
  EXPECT_EQ(run.results.size(), 2u * 6 + 4u * 4 + 4u * 6);
  EXPECT_EQ(run.entries_probed, 10u);
  EXPECT_EQ(run.skipped_unk, 0u);

  ProbeOptions only_def;
  only_def.variants = {Variant::kOriginal};
  only_def.article_types = {ArticleType::kDefinite};
  EXPECT_EQ(RunProbe(lex, *vocab, scorer, only_def).results.size(), 20u);
}

TEST(RunProbeTest, UnkEntriesSkipped) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {});
  Lexicon lex({Noun("luna", "lunas", Gender::kFeminine, Affix::kS),
               Noun("casa", "casas", Gender::kFeminine, Affix::kS)},
              "x");
  ProbeRun run = RunProbe(lex, *vocab, scorer);
  EXPECT_EQ(run.skipped_unk, 1u);
  EXPECT_EQ(run.entries_probed, 1u);
  EXPECT_EQ(run.results.size(), 4u);
}

TEST(RunProbeTest, ArtificialSkippedWhenAffixPieceMissing) {
  auto vocab = std::make_shared<const Vocabulary>(LoadVocab(
      "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nla\nlas\nuna\nunas\nflores\nflor\n"));
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {});
  ProbeRun run = RunProbe(OneNoun(Noun("flor", "flores", Gender::kFeminine, Affix::kEs)),
                          *vocab, scorer);
  EXPECT_EQ(run.results.size(), 4u);
  EXPECT_EQ(run.skipped_artificial, 1u);
}

TEST(RunProbeTest, DeterministicAndChunked) {
  auto vocab = FixtureVocab();
  ScorerHandle a = ScorerHandle::Mock(vocab, {.seed = 4});
  ScorerHandle b = ScorerHandle::Mock(vocab, {.seed = 4});
  ProbeOptions opts;
  opts.flush_every = 7;
  std::vector<std::size_t> chunk_sizes;
  opts.on_flush = [&](std::span<const ProbeResult> chunk) {
    chunk_sizes.push_back(chunk.size());
  };
  ProbeRun ra = RunProbe(FixtureLexicon(), *vocab, a, opts);
  opts.concurrency = 1;
  opts.on_flush = nullptr;
  ProbeRun rb = RunProbe(FixtureLexicon(), *vocab, b, opts);
  EXPECT_EQ(ProbeResultsToCsvRows(ra.results), ProbeResultsToCsvRows(rb.results));
  std::size_t total = 0;
  for (std::size_t s : chunk_sizes) {
    EXPECT_LE(s, 7u);
    total += s;
  }
  EXPECT_EQ(total, ra.results.size());
}

TEST(RunProbeTest, AgreementBiasIsPerfect) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 6, .bias = ParseBiasSpec("agreement")});
  ProbeRun run = RunProbe(FixtureLexicon(), *vocab, scorer);
  for (const auto& row : run.results) EXPECT_TRUE(row.correct) << row.wordform;
  for (const auto& cell : AccuracyTable(run.results)) {
    if (cell.n > 0) {
      EXPECT_EQ(*cell.accuracy, 1.0);
    }
  }
}

ProbeResult Row(Scheme s, Variant v, Number n, double lo) {
  ProbeResult r;
  r.lemma = "x";
  r.wordform = "xs";
  r.scheme = s;
  r.variant = v;
  r.number = n;
  r.log_odds = lo;
  r.correct = IsCorrect(n, lo);
  return r;
}

TEST(AccuracyTableTest, Arithmetic) {
  std::vector<ProbeResult> rows = {
      Row(Scheme::kMorphemic, Variant::kOriginal, Number::kPlural, 1.0),
      Row(Scheme::kMorphemic, Variant::kOriginal, Number::kPlural, 2.0),
      Row(Scheme::kMorphemic, Variant::kOriginal, Number::kPlural, 3.0),
      Row(Scheme::kMorphemic, Variant::kOriginal, Number::kPlural, -2.0),
      Row(Scheme::kMorphemic, Variant::kOriginal, Number::kSingular, 5.0),
  };
  auto cells = AccuracyTable(rows);
  ASSERT_EQ(cells.size(), 6u);
  int populated = 0;
  for (const auto& c : cells) {
    if (c.scheme == Scheme::kMorphemic && c.variant == Variant::kOriginal) {
      EXPECT_EQ(c.n, 4u);
      EXPECT_DOUBLE_EQ(*c.accuracy, 0.75);
      EXPECT_DOUBLE_EQ(*c.mean_log_odds, 1.0);
      EXPECT_NEAR(*c.sd_log_odds, std::sqrt(14.0 / 3.0), 1e-12);
      ++populated;
    } else {
      EXPECT_EQ(c.n, 0u);
      EXPECT_FALSE(c.accuracy.has_value());
    }
  }
  EXPECT_EQ(populated, 1);
  EXPECT_EQ(CodeOf([] { AccuracyTable({}); }), ErrorCode::kBadInput);
}

TEST(ProbeCsvTest, RoundTrip) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 9});
  ProbeRun run = RunProbe(FixtureLexicon(), *vocab, scorer);
  std::string csv = ProbeCsvHeader() + ProbeResultsToCsvRows(run.results);
  auto back = ParseProbeResults(csv);
  ASSERT_EQ(back.size(), run.results.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].lemma, run.results[i].lemma);
    EXPECT_EQ(back[i].wordform, run.results[i].wordform);
    EXPECT_EQ(back[i].number, run.results[i].number);
    EXPECT_EQ(back[i].scheme, run.results[i].scheme);
    EXPECT_EQ(back[i].variant, run.results[i].variant);
    EXPECT_EQ(back[i].article_type, run.results[i].article_type);
    EXPECT_EQ(back[i].log_odds, run.results[i].log_odds);
    EXPECT_EQ(back[i].correct, run.results[i].correct);
  }
}

}  // namespace
}  // namespace morphoprobe
