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

#ifndef MORPHOPROBE_SCORER_H_
#define MORPHOPROBE_SCORER_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphoprobe/tokenization.h"

namespace morphoprobe {

struct MaskQuery {
  std::vector<std::string> tokens;  // full frame, specials included
  std::size_t mask_index = 0;
  std::vector<std::string> candidates;
};

// logits are raw; probabilities are the full-vocabulary softmax evaluated at
// each candidate (not renormalized over the candidates).
struct MaskResponse {
  std::vector<double> logits;
  std::vector<double> probabilities;
};

// Dense [layer][position][dimension] tensor.
struct HiddenStates {
  std::vector<int> layers;  // 1-based transformer layer indices
  std::size_t num_positions = 0;
  std::size_t dimension = 0;
  std::vector<double> values;

  std::span<const double> At(std::size_t layer_slot, std::size_t position) const {
    return {values.data() + (layer_slot * num_positions + position) * dimension,
            dimension};
  }
};

struct ScorerInfo {
  std::string vocab_digest;
  int depth = 0;
  int dimension = 0;
};

// Additive logit bias applied by the mock scorer. A rule fires when the last
// noun token of the frame (the token before [SEP], continuation prefix
// stripped) ends with `suffix` (or does not, when `negate`); "*" matches
// every noun.
struct BiasRule {
  std::string suffix;
  bool negate = false;
  std::string piece;
  double delta = 0.0;
};

struct BiasTable {
  // Amplitude of the hash-derived per-(frame, piece) logit noise.
  double jitter = 1.0;
  std::vector<BiasRule> rules;
};

// Grammar: comma-separated items, each one of
//   uniform | plural | agreement       presets
//   jitter=X
//   [!]SUFFIX>PIECE=DELTA              e.g. "s>las=4", "!s>la=4", "*>el=0.5"
// Throws Error(kFormatError).
BiasTable ParseBiasSpec(std::string_view spec);

struct MockConfig {
  std::uint64_t seed = 0;
  BiasTable bias;
  int depth = 12;
  int dimension = 16;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{60000};
};

// Transport-level scorer implementation. Implementations must be safe for
// concurrent calls.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual ScorerInfo Info() = 0;
  virtual MaskResponse Predict(const MaskQuery& query) = 0;
  virtual HiddenStates Hidden(const std::vector<std::string>& tokens,
                              const std::vector<int>& layers) = 0;
};

// Deterministic in-process scorer over a fixed vocabulary. Logits are a pure
// function of (seed, bias table, frame, piece).
class MockBackend : public ScorerBackend {
 public:
  MockBackend(std::shared_ptr<const Vocabulary> vocab, MockConfig config);

  ScorerInfo Info() override;
  MaskResponse Predict(const MaskQuery& query) override;
  HiddenStates Hidden(const std::vector<std::string>& tokens,
                      const std::vector<int>& layers) override;

  // Logit the mock assigns to vocabulary id `piece_id` for this frame.
  double Logit(const MaskQuery& query, std::int32_t piece_id) const;

 private:
  std::string NounToken(const MaskQuery& query) const;
  double LogitFor(std::uint64_t frame, std::string_view noun,
                  std::int32_t piece_id) const;

  std::shared_ptr<const Vocabulary> vocab_;
  MockConfig config_;
  std::vector<std::uint64_t> piece_hashes_;
  struct CompiledRule {
    BiasRule rule;
    std::int32_t piece_id;
  };
  std::vector<CompiledRule> rules_;
};

// JSON-over-HTTP client for the /v1 scorer protocol. Transport errors and 5xx
// responses are retried per RetryPolicy, then reported as
// Error(kScorerUnavailable).
class RemoteBackend : public ScorerBackend {
 public:
  explicit RemoteBackend(std::string base_url, RetryPolicy retry = {});

  ScorerInfo Info() override;
  MaskResponse Predict(const MaskQuery& query) override;
  HiddenStates Hidden(const std::vector<std::string>& tokens,
                      const std::vector<int>& layers) override;

 private:
  std::string Call(const std::string& method, const std::string& path,
                   const std::string& body);

  std::string base_url_;
  RetryPolicy retry_;
};

// Client-side handle binding a backend to the toolkit's vocabulary. The
// handshake (vocab digest check) runs once, lazily, before the first request.
// All operations are safe to call from multiple threads.
class ScorerHandle {
 public:
  ScorerHandle(std::unique_ptr<ScorerBackend> backend,
               std::shared_ptr<const Vocabulary> vocab);

  static ScorerHandle Mock(std::shared_ptr<const Vocabulary> vocab,
                           MockConfig config);
  static ScorerHandle Remote(std::string base_url,
                             std::shared_ptr<const Vocabulary> vocab,
                             RetryPolicy retry = {});

  // Throws Error(kVocabMismatch) or Error(kScorerUnavailable).
  ScorerInfo Handshake();

  // Throws Error(kBadQuery), Error(kUnknownCandidate), plus handshake and
  // transport errors.
  MaskResponse ScoreMasked(const MaskQuery& query);

  // Responses come back in submission order; at most `concurrency` requests
  // are in flight.
  std::vector<MaskResponse> ScoreBatch(std::span<const MaskQuery> queries,
                                       std::size_t concurrency = 8);

  // Throws Error(kBadLayer) for layers outside [1, depth].
  HiddenStates FetchHiddenStates(const std::vector<std::string>& tokens,
                                 const std::vector<int>& layers);

  const Vocabulary& vocab() const { return *vocab_; }

 private:
  struct State;
  std::shared_ptr<State> state_;
  std::shared_ptr<const Vocabulary> vocab_;
};

// Wire encoding for the three /v1 endpoints. Each decoder checks shape and
// throws Error(kScorerUnavailable) on a protocol violation.
std::string EncodeMaskRequest(const MaskQuery& query);
MaskQuery DecodeMaskRequest(std::string_view body);
std::string EncodeMaskResponse(const MaskResponse& response);
MaskResponse DecodeMaskResponse(std::string_view body,
                                std::size_t num_candidates);
std::string EncodeHiddenRequest(const std::vector<std::string>& tokens,
                                const std::vector<int>& layers);
void DecodeHiddenRequest(std::string_view body, std::vector<std::string>* tokens,
                         std::vector<int>* layers);
std::string EncodeHiddenResponse(const HiddenStates& states);
HiddenStates DecodeHiddenResponse(std::string_view body,
                                  const std::vector<int>& layers,
                                  std::size_t num_positions);
std::string EncodeInfo(const ScorerInfo& info);
ScorerInfo DecodeInfo(std::string_view body);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_SCORER_H_
