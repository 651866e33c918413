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

#include "morphoprobe/scorer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fake_scorer_server.h"
#include "json.hpp"
#include "morphoprobe/text.h"
#include "morphoprobe/error.h"
#include "morphoprobe/probe.h"
#include "test_util.h"

namespace morphoprobe {
namespace {

using testing::FixtureVocab;

MaskQuery Frame(std::vector<std::string> noun,
                std::vector<std::string> candidates) {
  MaskQuery q = BuildFrame(noun);
  q.candidates = std::move(candidates);
  return q;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

RetryPolicy FastRetry() {
  RetryPolicy r;
  r.initial_backoff = std::chrono::milliseconds(1);
  r.connect_timeout = std::chrono::milliseconds(200);
  r.read_timeout = std::chrono::milliseconds(2000);
  return r;
}

TEST(BiasSpecTest, Presets) {
  EXPECT_EQ(ParseBiasSpec("").jitter, 1.0);
  EXPECT_TRUE(ParseBiasSpec("").rules.empty());
  EXPECT_EQ(ParseBiasSpec("uniform").jitter, 0.0);
  EXPECT_EQ(ParseBiasSpec("plural").rules.size(), 4u);
  EXPECT_EQ(ParseBiasSpec("agreement").rules.size(), 8u);
  BiasTable t = ParseBiasSpec("jitter=0.25,!s>la=1.5,*>el=-2");
  EXPECT_EQ(t.jitter, 0.25);
  ASSERT_EQ(t.rules.size(), 2u);
  EXPECT_TRUE(t.rules[0].negate);
  EXPECT_EQ(t.rules[0].suffix, "s");
  EXPECT_EQ(t.rules[0].piece, "la");
  EXPECT_EQ(t.rules[0].delta, 1.5);
  EXPECT_EQ(t.rules[1].suffix, "");
  EXPECT_EQ(t.rules[1].delta, -2.0);
}

TEST(BiasSpecTest, Errors) {
  for (const char* bad : {"bogus", "s>las", "s>=1", "jitter=-1", "s>las=x"}) {
    EXPECT_EQ(CodeOf([&] { ParseBiasSpec(bad); }), ErrorCode::kFormatError) << bad;
  }
}

TEST(MockScorerTest, UniformGivesEqualProbabilities) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 3, .bias = ParseBiasSpec("uniform")});
  MaskResponse r = scorer.ScoreMasked(Frame({"naranja", "##s"}, {"la", "las"}));
  ASSERT_EQ(r.probabilities.size(), 2u);
  EXPECT_EQ(r.probabilities[0], r.probabilities[1]);
  EXPECT_NEAR(r.probabilities[0], 1.0 / vocab->size(), 1e-15);
  EXPECT_EQ(LogOdds(r, 1, 0), 0.0);
}

TEST(MockScorerTest, PluralBiasFavoursPluralArticle) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 0, .bias = ParseBiasSpec("plural")});
  // Jitter lies in [-1, 1), so a +4 bias always wins.
  EXPECT_GT(LogOdds(scorer.ScoreMasked(Frame({"naranja", "##s"}, {"la", "las"})), 1, 0), 2.0);
  EXPECT_GT(LogOdds(scorer.ScoreMasked(Frame({"mujeres"}, {"una", "unas"})), 1, 0), 2.0);
  // Singular noun: only jitter.
  double lo = LogOdds(scorer.ScoreMasked(Frame({"naranja"}, {"la", "las"})), 1, 0);
  EXPECT_LT(std::abs(lo), 2.0);
}

TEST(MockScorerTest, DeterministicAcrossInstances) {
  auto vocab = FixtureVocab();
  MockConfig cfg{.seed = 99, .bias = ParseBiasSpec("agreement")};
  ScorerHandle a = ScorerHandle::Mock(vocab, cfg);
  ScorerHandle b = ScorerHandle::Mock(vocab, cfg);
  auto q = Frame({"coman", "##as"}, {"el", "los", "la", "las"});
  MaskResponse ra = a.ScoreMasked(q);
  MaskResponse rb = b.ScoreMasked(q);
  EXPECT_EQ(ra.logits, rb.logits);
  EXPECT_EQ(ra.probabilities, rb.probabilities);
  cfg.seed = 100;
  EXPECT_NE(ScorerHandle::Mock(vocab, cfg).ScoreMasked(q).logits, ra.logits);
}

TEST(MockScorerTest, ProbabilitiesAreFullSoftmax) {
  auto vocab = FixtureVocab();
  MockBackend mock(vocab, {.seed = 5});
  MaskQuery q = Frame({"casa"}, {});
  for (const auto& p : vocab->pieces()) q.candidates.push_back(p);
  MaskResponse r = mock.Predict(q);
  double total = 0.0;
  for (double p : r.probabilities) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 0; i < r.logits.size(); ++i) {
    EXPECT_EQ(r.logits[i], mock.Logit(q, static_cast<std::int32_t>(i)));
    EXPECT_NEAR(std::log(r.probabilities[i] / r.probabilities[0]),
                r.logits[i] - r.logits[0], 1e-12);
  }
}

TEST(MockScorerTest, HandshakeAndHiddenShape) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {});
  ScorerInfo info = scorer.Handshake();
  EXPECT_EQ(info.depth, 12);
  EXPECT_EQ(info.dimension, 16);
  EXPECT_EQ(info.vocab_digest, vocab->digest());

  MaskQuery frame = BuildFrame(std::vector<std::string>{"mujeres"});
  HiddenStates hs = scorer.FetchHiddenStates(frame.tokens, {9, 10, 11, 12});
  EXPECT_EQ(hs.layers, (std::vector<int>{9, 10, 11, 12}));
  EXPECT_EQ(hs.num_positions, 4u);
  EXPECT_EQ(hs.dimension, 16u);
  EXPECT_EQ(hs.values.size(), 4u * 4u * 16u);
  EXPECT_EQ(hs.At(3, 2).size(), 16u);

  EXPECT_EQ(CodeOf([&] { scorer.FetchHiddenStates(frame.tokens, {13}); }),
            ErrorCode::kBadLayer);
  EXPECT_EQ(CodeOf([&] { scorer.FetchHiddenStates(frame.tokens, {0}); }),
            ErrorCode::kBadLayer);
}

TEST(MockScorerTest, VocabMismatch) {
  auto vocab = FixtureVocab();
  auto other = std::make_shared<const Vocabulary>(LoadVocab("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nel\n"));
  ScorerHandle scorer(std::make_unique<MockBackend>(other, MockConfig{}), vocab);
  EXPECT_EQ(CodeOf([&] { scorer.Handshake(); }), ErrorCode::kVocabMismatch);
  EXPECT_EQ(CodeOf([&] { scorer.ScoreMasked(Frame({"casa"}, {"la", "las"})); }),
            ErrorCode::kVocabMismatch);
}

TEST(MockScorerTest, QueryValidation) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {});
  EXPECT_EQ(CodeOf([&] { scorer.ScoreMasked(Frame({"casa"}, {"la", "zzz"})); }),
            ErrorCode::kUnknownCandidate);
  MaskQuery q = Frame({"casa"}, {"la", "las"});
  q.mask_index = 2;
  EXPECT_EQ(CodeOf([&] { scorer.ScoreMasked(q); }), ErrorCode::kBadQuery);
  q.mask_index = 9;
  EXPECT_EQ(CodeOf([&] { scorer.ScoreMasked(q); }), ErrorCode::kBadQuery);
  q = Frame({"casa"}, {});
  EXPECT_EQ(CodeOf([&] { scorer.ScoreMasked(q); }), ErrorCode::kBadQuery);
}

TEST(MockScorerTest, BatchPreservesOrder) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {.seed = 11});
  std::vector<MaskQuery> queries;
  for (const auto& p : vocab->pieces()) {
    if (vocab->IsSpecial(p)) continue;
    queries.push_back(Frame({p}, {"el", "los"}));
  }
  auto batch = scorer.ScoreBatch(queries, 4);
  ASSERT_EQ(batch.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    EXPECT_EQ(batch[i].logits, scorer.ScoreMasked(queries[i]).logits) << i;
  }
}

TEST(MockScorerTest, BatchRethrows) {
  auto vocab = FixtureVocab();
  ScorerHandle scorer = ScorerHandle::Mock(vocab, {});
  std::vector<MaskQuery> queries = {Frame({"casa"}, {"la", "las"}),
                                    Frame({"casa"}, {"la", "nope"})};
  EXPECT_EQ(CodeOf([&] { scorer.ScoreBatch(queries, 2); }), ErrorCode::kUnknownCandidate);
}

TEST(WireTest, MaskRoundTrip) {
  MaskQuery q = Frame({"neuro", "##nas"}, {"la", "las"});
  MaskQuery back = DecodeMaskRequest(EncodeMaskRequest(q));
  EXPECT_EQ(back.tokens, q.tokens);
  EXPECT_EQ(back.mask_index, q.mask_index);
  EXPECT_EQ(back.candidates, q.candidates);

  MaskResponse r{{0.5, -1.25}, {0.1, 0.02}};
  MaskResponse rb = DecodeMaskResponse(EncodeMaskResponse(r), 2);
  EXPECT_EQ(rb.logits, r.logits);
  EXPECT_EQ(rb.probabilities, r.probabilities);
}

TEST(WireTest, MaskResponseViolations) {
  EXPECT_EQ(CodeOf([] { DecodeMaskResponse("not json", 2); }), ErrorCode::kScorerUnavailable);
  EXPECT_EQ(CodeOf([] {
              DecodeMaskResponse(R"({"logits":[1],"probabilities":[0.5]})", 2);
            }),
            ErrorCode::kScorerUnavailable);
  EXPECT_EQ(CodeOf([] {
              DecodeMaskResponse(R"({"logits":[1,2],"probabilities":[0.5,1.5]})", 2);
            }),
            ErrorCode::kScorerUnavailable);
}

TEST(WireTest, HiddenAndInfoRoundTrip) {
  std::vector<std::string> tokens = {"[CLS]", "[MASK]", "casa", "[SEP]"};
  std::vector<int> layers = {2, 7};
  std::vector<std::string> t2;
  std::vector<int> l2;
  DecodeHiddenRequest(EncodeHiddenRequest(tokens, layers), &t2, &l2);
  EXPECT_EQ(t2, tokens);
  EXPECT_EQ(l2, layers);

  MockBackend mock(FixtureVocab(), {.dimension = 3});
  HiddenStates hs = mock.Hidden(tokens, layers);
  HiddenStates back = DecodeHiddenResponse(EncodeHiddenResponse(hs), layers, 4);
  EXPECT_EQ(back.values, hs.values);
  EXPECT_EQ(back.dimension, 3u);
  EXPECT_EQ(CodeOf([&] { DecodeHiddenResponse(EncodeHiddenResponse(hs), {2}, 4); }),
            ErrorCode::kScorerUnavailable);

  ScorerInfo info{"abc", 6, 32};
  ScorerInfo ib = DecodeInfo(EncodeInfo(info));
  EXPECT_EQ(ib.vocab_digest, "abc");
  EXPECT_EQ(ib.depth, 6);
  EXPECT_EQ(ib.dimension, 32);
}

// Checks required fields and top-level JSON types against a schema file.
void ExpectConforms(const std::string& schema_name, const std::string& payload) {
  using nlohmann::json;
  const json schema =
      json::parse(ReadFile(std::string(MORPHOPROBE_SCHEMA_DIR) + "/" + schema_name));
  const json body = json::parse(payload);
  ASSERT_TRUE(body.is_object()) << schema_name;
  for (const auto& field : schema["required"]) {
    const std::string key = field.get<std::string>();
    ASSERT_TRUE(body.contains(key)) << schema_name << " lacks " << key;
    const std::string type = schema["properties"][key]["type"].get<std::string>();
    const bool ok = type == "array"     ? body[key].is_array()
                    : type == "integer" ? body[key].is_number_integer()
                    : type == "string"  ? body[key].is_string()
                                        : true;
    EXPECT_TRUE(ok) << schema_name << ": " << key << " is not " << type;
  }
  if (schema.value("additionalProperties", true) == false) {
    EXPECT_EQ(body.size(), schema["properties"].size()) << schema_name;
  }
}

TEST(WireTest, PayloadsMatchSharedSchemas) {
  auto vocab = FixtureVocab();
  MockBackend mock(vocab, {});
  MaskQuery q = Frame({"mujeres"}, {"la", "las"});
  ExpectConforms("mask_predict.request.json", EncodeMaskRequest(q));
  ExpectConforms("mask_predict.response.json", EncodeMaskResponse(mock.Predict(q)));
  ExpectConforms("hidden_states.request.json", EncodeHiddenRequest(q.tokens, {9, 12}));
  ExpectConforms("hidden_states.response.json",
                 EncodeHiddenResponse(mock.Hidden(q.tokens, {9, 12})));
  ExpectConforms("info.response.json", EncodeInfo(mock.Info()));
}

TEST(RemoteScorerTest, MatchesInProcessMock) {
  auto vocab = FixtureVocab();
  MockBackend mock(vocab, {.seed = 8, .bias = ParseBiasSpec("plural")});
  testing::FakeScorerServer server(&mock);
  ScorerHandle remote = ScorerHandle::Remote(server.url(), vocab, FastRetry());
  EXPECT_EQ(remote.Handshake().vocab_digest, vocab->digest());
  auto q = Frame({"naranja", "##s"}, {"la", "las"});
  MaskResponse r = remote.ScoreMasked(q);
  MaskResponse local = mock.Predict(q);
  ASSERT_EQ(r.logits.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(r.logits[i], local.logits[i]);
    EXPECT_DOUBLE_EQ(r.probabilities[i], local.probabilities[i]);
  }
  HiddenStates hs = remote.FetchHiddenStates(q.tokens, {1, 12});
  EXPECT_EQ(hs.values.size(), 2u * 5u * 16u);
}

TEST(RemoteScorerTest, RetriesTransient5xx) {
  auto vocab = FixtureVocab();
  MockBackend mock(vocab, {});
  testing::FakeScorerServer server(&mock);
  ScorerHandle remote = ScorerHandle::Remote(server.url(), vocab, FastRetry());
  remote.Handshake();
  server.FailNext(2);
  const int before = server.requests();
  EXPECT_NO_THROW(remote.ScoreMasked(Frame({"casa"}, {"la", "las"})));
  EXPECT_EQ(server.requests() - before, 3);
}

TEST(RemoteScorerTest, GivesUpAfterRetries) {
  auto vocab = FixtureVocab();
  MockBackend mock(vocab, {});
  testing::FakeScorerServer server(&mock);
  ScorerHandle remote = ScorerHandle::Remote(server.url(), vocab, FastRetry());
  remote.Handshake();
  server.FailNext(100);
  const int before = server.requests();
  EXPECT_EQ(CodeOf([&] { remote.ScoreMasked(Frame({"casa"}, {"la", "las"})); }),
            ErrorCode::kScorerUnavailable);
  EXPECT_EQ(server.requests() - before, 4);
}

TEST(RemoteScorerTest, UnreachableServer) {
  auto vocab = FixtureVocab();
  std::string url;
  {
    MockBackend mock(vocab, {});
    testing::FakeScorerServer server(&mock);
    url = server.url();
  }
  ScorerHandle remote = ScorerHandle::Remote(url, vocab, FastRetry());
  EXPECT_EQ(CodeOf([&] { remote.Handshake(); }), ErrorCode::kScorerUnavailable);
}

TEST(RemoteScorerTest, ClientErrorsAreNotRetried) {
  auto vocab = FixtureVocab();
  // The server's vocabulary lacks a piece the client considers valid.
  auto small = std::make_shared<const Vocabulary>(
      LoadVocab("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nla\nlas\ncasa\n"));
  MockBackend mock(small, {});
  testing::FakeScorerServer server(&mock);
  RemoteBackend backend(server.url(), FastRetry());
  const int before = server.requests();
  EXPECT_EQ(CodeOf([&] { backend.Predict(Frame({"casa"}, {"la", "los"})); }),
            ErrorCode::kUnknownCandidate);
  EXPECT_EQ(server.requests() - before, 1);
}

}  // namespace
}  // namespace morphoprobe
