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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "morphoprobe/error.h"
#include "morphoprobe/text.h"

namespace morphoprobe {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1).
double Signed(std::uint64_t h) {
  return 2.0 * static_cast<double>(h >> 11) * 0x1.0p-53 - 1.0;
}

std::uint64_t FrameHash(const MaskQuery& q) {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : q.tokens) {
    h = Fnv1a(t, h);
    h = Fnv1a(std::string_view("\x1f", 1), h);
  }
  return Mix(h ^ q.mask_index);
}

json ParseJson(std::string_view body, std::string_view what) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "malformed JSON in " + std::string(what));
  }
  return j;
}

std::vector<double> ReadDoubles(const json& j, std::string_view field) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "'" + std::string(field) + "' is not an array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw Error(ErrorCode::kScorerUnavailable,
                  "non-numeric entry in '" + std::string(field) + "'");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> ReadStrings(const json& j, std::string_view field) {
  if (!j.contains(field) || !j[std::string(field)].is_array()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "missing array '" + std::string(field) + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : j[std::string(field)]) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kScorerUnavailable,
                  "non-string entry in '" + std::string(field) + "'");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<int> ReadInts(const json& j, std::string_view field) {
  if (!j.contains(field) || !j[std::string(field)].is_array()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "missing array '" + std::string(field) + "'");
  }
  std::vector<int> out;
  for (const auto& v : j[std::string(field)]) {
    if (!v.is_number_integer()) {
      throw Error(ErrorCode::kScorerUnavailable,
                  "non-integer entry in '" + std::string(field) + "'");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

void AddPluralRules(BiasTable& table, double delta) {
  for (const char* p : {"los", "las", "unos", "unas"}) {
    table.rules.push_back({"s", false, p, delta});
  }
}

void AddSingularRules(BiasTable& table, double delta) {
  for (const char* p : {"el", "la", "un", "una"}) {
    table.rules.push_back({"s", true, p, delta});
  }
}

std::optional<double> ParseReal(std::string_view s) {
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(s), &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

BiasTable ParseBiasSpec(std::string_view spec) {
  BiasTable table;
  if (spec.empty()) return table;
  for (std::string_view item : SplitOn(spec, ',')) {
    if (item.empty()) continue;
    if (item == "uniform") {
      table.jitter = 0.0;
      continue;
    }
    if (item == "plural") {
      AddPluralRules(table, 4.0);
      continue;
    }
    if (item == "agreement") {
      AddPluralRules(table, 4.0);
      AddSingularRules(table, 4.0);
      continue;
    }
    if (item.starts_with("jitter=")) {
      auto v = ParseReal(item.substr(7));
      if (!v || *v < 0) {
        throw Error(ErrorCode::kFormatError,
                    "bad jitter in bias spec: " + std::string(item));
      }
      table.jitter = *v;
      continue;
    }
    const auto gt = item.find('>');
    const auto eq = item.rfind('=');
    if (gt == std::string_view::npos || eq == std::string_view::npos ||
        eq < gt) {
      throw Error(ErrorCode::kFormatError,
                  "bad bias spec item: " + std::string(item));
    }
    BiasRule rule;
    std::string_view suffix = item.substr(0, gt);
    if (suffix.starts_with('!')) {
      rule.negate = true;
      suffix.remove_prefix(1);
    }
    rule.suffix = suffix == "*" ? "" : std::string(suffix);
    rule.piece = std::string(item.substr(gt + 1, eq - gt - 1));
    auto delta = ParseReal(item.substr(eq + 1));
    if (rule.piece.empty() || !delta) {
      throw Error(ErrorCode::kFormatError,
                  "bad bias spec item: " + std::string(item));
    }
    rule.delta = *delta;
    table.rules.push_back(std::move(rule));
  }
  return table;
}

// ---------------------------------------------------------------------------
// MockBackend

MockBackend::MockBackend(std::shared_ptr<const Vocabulary> vocab,
                         MockConfig config)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
  piece_hashes_.reserve(vocab_->size());
  for (const auto& p : vocab_->pieces()) piece_hashes_.push_back(Fnv1a(p));
  for (const auto& rule : config_.bias.rules) {
    auto id = vocab_->Id(rule.piece);
    if (!id) {
      throw Error(ErrorCode::kUnknownCandidate,
                  "bias rule piece '" + rule.piece + "' not in vocabulary");
    }
    rules_.push_back({rule, *id});
  }
}

ScorerInfo MockBackend::Info() {
  return {vocab_->digest(), config_.depth, config_.dimension};
}

std::string MockBackend::NounToken(const MaskQuery& query) const {
  std::string noun;
  for (auto it = query.tokens.rbegin(); it != query.tokens.rend(); ++it) {
    if (!vocab_->IsSpecial(*it)) {
      noun = *it;
      break;
    }
  }
  if (noun.starts_with(vocab_->continuation_prefix())) {
    noun.erase(0, vocab_->continuation_prefix().size());
  }
  return noun;
}

double MockBackend::LogitFor(std::uint64_t frame, std::string_view noun,
                             std::int32_t piece_id) const {
  double logit =
      config_.bias.jitter *
      Signed(Mix(config_.seed ^ Mix(frame ^ piece_hashes_[piece_id])));
  for (const auto& r : rules_) {
    if (r.piece_id != piece_id) continue;
    const bool match = noun.ends_with(r.rule.suffix);
    if (match != r.rule.negate) logit += r.rule.delta;
  }
  return logit;
}

double MockBackend::Logit(const MaskQuery& query, std::int32_t piece_id) const {
  return LogitFor(FrameHash(query), NounToken(query), piece_id);
}

MaskResponse MockBackend::Predict(const MaskQuery& query) {
  std::vector<std::int32_t> cand_ids;
  for (const auto& c : query.candidates) {
    auto id = vocab_->Id(c);
    if (!id) throw Error(ErrorCode::kUnknownCandidate, c);
    cand_ids.push_back(*id);
  }
  const std::size_t v = vocab_->size();
  const std::uint64_t frame = FrameHash(query);
  const std::string noun = NounToken(query);
  std::vector<double> logits(v);
  double max_logit = -INFINITY;
  for (std::size_t i = 0; i < v; ++i) {
    logits[i] = LogitFor(frame, noun, static_cast<std::int32_t>(i));
    max_logit = std::max(max_logit, logits[i]);
  }
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max_logit);
  const double log_z = max_logit + std::log(sum);

  MaskResponse response;
  for (std::int32_t id : cand_ids) {
    response.logits.push_back(logits[id]);
    response.probabilities.push_back(std::exp(logits[id] - log_z));
  }
  return response;
}

HiddenStates MockBackend::Hidden(const std::vector<std::string>& tokens,
                                 const std::vector<int>& layers) {
  for (int layer : layers) {
    if (layer < 1 || layer > config_.depth) {
      throw Error(ErrorCode::kBadLayer, std::to_string(layer));
    }
  }
  HiddenStates states;
  states.layers = layers;
  states.num_positions = tokens.size();
  states.dimension = static_cast<std::size_t>(config_.dimension);
  states.values.reserve(layers.size() * tokens.size() * states.dimension);
  for (int layer : layers) {
    for (const auto& token : tokens) {
      const std::uint64_t th = Mix(config_.seed ^ Fnv1a(token));
      for (std::size_t d = 0; d < states.dimension; ++d) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(layer) << 32) | static_cast<std::uint64_t>(d);
        states.values.push_back(Signed(Mix(th ^ Mix(key))));
      }
    }
  }
  return states;
}

// ---------------------------------------------------------------------------
// RemoteBackend

RemoteBackend::RemoteBackend(std::string base_url, RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string RemoteBackend::Call(const std::string& method,
                                const std::string& path,
                                const std::string& body) {
  auto backoff = retry_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<std::int64_t>(
          static_cast<double>(backoff.count()) * retry_.multiplier));
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(retry_.connect_timeout);
    client.set_read_timeout(retry_.read_timeout);
    httplib::Result result =
        method == "GET" ? client.Get(path)
                        : client.Post(path, body, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status >= 400) {
      const bool unknown_piece = result->body.find("piece") != std::string::npos;
      throw Error(unknown_piece ? ErrorCode::kUnknownCandidate
                                : ErrorCode::kBadQuery,
                  path + " -> HTTP " + std::to_string(result->status) + ": " +
                      result->body);
    }
    return result->body;
  }
  throw Error(ErrorCode::kScorerUnavailable,
              base_url_ + path + " after " +
                  std::to_string(retry_.max_retries + 1) +
                  " attempts: " + last_error);
}

ScorerInfo RemoteBackend::Info() {
  return DecodeInfo(Call("GET", "/v1/info", ""));
}

MaskResponse RemoteBackend::Predict(const MaskQuery& query) {
  return DecodeMaskResponse(
      Call("POST", "/v1/mask_predict", EncodeMaskRequest(query)),
      query.candidates.size());
}

HiddenStates RemoteBackend::Hidden(const std::vector<std::string>& tokens,
                                   const std::vector<int>& layers) {
  return DecodeHiddenResponse(
      Call("POST", "/v1/hidden_states", EncodeHiddenRequest(tokens, layers)),
      layers, tokens.size());
}

// ---------------------------------------------------------------------------
// ScorerHandle

struct ScorerHandle::State {
  std::unique_ptr<ScorerBackend> backend;
  std::mutex mu;
  std::optional<ScorerInfo> info;
};

ScorerHandle::ScorerHandle(std::unique_ptr<ScorerBackend> backend,
                           std::shared_ptr<const Vocabulary> vocab)
    : state_(std::make_shared<State>()), vocab_(std::move(vocab)) {
  state_->backend = std::move(backend);
}

ScorerHandle ScorerHandle::Mock(std::shared_ptr<const Vocabulary> vocab,
                                MockConfig config) {
  auto backend = std::make_unique<MockBackend>(vocab, std::move(config));
  return ScorerHandle(std::move(backend), std::move(vocab));
}

ScorerHandle ScorerHandle::Remote(std::string base_url,
                                  std::shared_ptr<const Vocabulary> vocab,
                                  RetryPolicy retry) {
  return ScorerHandle(
      std::make_unique<RemoteBackend>(std::move(base_url), retry),
      std::move(vocab));
}

ScorerInfo ScorerHandle::Handshake() {
  std::lock_guard<std::mutex> lock(state_->mu);
  if (state_->info) return *state_->info;
  ScorerInfo info = state_->backend->Info();
  if (info.vocab_digest != vocab_->digest()) {
    throw Error(ErrorCode::kVocabMismatch,
                "scorer digest " + info.vocab_digest + " != local " +
                    vocab_->digest());
  }
  state_->info = info;
  return info;
}

MaskResponse ScorerHandle::ScoreMasked(const MaskQuery& query) {
  if (query.mask_index >= query.tokens.size() ||
      query.tokens[query.mask_index] != kMaskPiece) {
    throw Error(ErrorCode::kBadQuery, "tokens[mask_index] is not [MASK]");
  }
  if (query.candidates.empty()) {
    throw Error(ErrorCode::kBadQuery, "no candidates");
  }
  for (const auto& t : query.tokens) {
    if (!vocab_->Contains(t)) {
      throw Error(ErrorCode::kBadQuery, "frame piece '" + t + "' not in vocabulary");
    }
  }
  for (const auto& c : query.candidates) {
    if (!vocab_->Contains(c)) throw Error(ErrorCode::kUnknownCandidate, c);
  }
  Handshake();
  MaskResponse response = state_->backend->Predict(query);
  if (response.logits.size() != query.candidates.size() ||
      response.probabilities.size() != query.candidates.size()) {
    throw Error(ErrorCode::kScorerUnavailable, "response length mismatch");
  }
  return response;
}

std::vector<MaskResponse> ScorerHandle::ScoreBatch(
    std::span<const MaskQuery> queries, std::size_t concurrency) {
  const std::size_t n = queries.size();
  std::vector<MaskResponse> out(n);
  if (n == 0) return out;
  Handshake();
  const std::size_t workers = std::clamp<std::size_t>(concurrency, 1, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = ScoreMasked(queries[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

HiddenStates ScorerHandle::FetchHiddenStates(
    const std::vector<std::string>& tokens, const std::vector<int>& layers) {
  ScorerInfo info = Handshake();
  if (layers.empty()) throw Error(ErrorCode::kBadLayer, "no layers requested");
  for (int layer : layers) {
    if (layer < 1 || layer > info.depth) {
      throw Error(ErrorCode::kBadLayer,
                  std::to_string(layer) + " outside [1, " +
                      std::to_string(info.depth) + "]");
    }
  }
  for (const auto& t : tokens) {
    if (!vocab_->Contains(t)) {
      throw Error(ErrorCode::kBadQuery, "frame piece '" + t + "' not in vocabulary");
    }
  }
  HiddenStates states = state_->backend->Hidden(tokens, layers);
  if (states.layers.size() != layers.size() ||
      states.num_positions != tokens.size() ||
      states.values.size() !=
          layers.size() * tokens.size() * states.dimension) {
    throw Error(ErrorCode::kScorerUnavailable, "hidden state shape mismatch");
  }
  return states;
}

// ---------------------------------------------------------------------------
// Wire format

std::string EncodeMaskRequest(const MaskQuery& query) {
  json j;
  j["tokens"] = query.tokens;
  j["mask_index"] = query.mask_index;
  j["candidates"] = query.candidates;
  return j.dump();
}

MaskQuery DecodeMaskRequest(std::string_view body) {
  json j = ParseJson(body, "mask_predict request");
  MaskQuery q;
  q.tokens = ReadStrings(j, "tokens");
  q.candidates = ReadStrings(j, "candidates");
  if (!j.contains("mask_index") || !j["mask_index"].is_number_unsigned()) {
    throw Error(ErrorCode::kScorerUnavailable, "missing 'mask_index'");
  }
  q.mask_index = j["mask_index"].get<std::size_t>();
  return q;
}

std::string EncodeMaskResponse(const MaskResponse& response) {
  json j;
  j["logits"] = response.logits;
  j["probabilities"] = response.probabilities;
  return j.dump();
}

MaskResponse DecodeMaskResponse(std::string_view body,
                                std::size_t num_candidates) {
  json j = ParseJson(body, "mask_predict response");
  if (!j.contains("logits") || !j.contains("probabilities")) {
    throw Error(ErrorCode::kScorerUnavailable,
                "mask_predict response lacks logits/probabilities");
  }
  MaskResponse r;
  r.logits = ReadDoubles(j["logits"], "logits");
  r.probabilities = ReadDoubles(j["probabilities"], "probabilities");
  if (r.logits.size() != num_candidates ||
      r.probabilities.size() != num_candidates) {
    throw Error(ErrorCode::kScorerUnavailable,
                "mask_predict response length != candidate count");
  }
  for (double p : r.probabilities) {
    if (!(p > 0.0) || p > 1.0) {
      throw Error(ErrorCode::kScorerUnavailable,
                  "probability outside (0, 1]: " + std::to_string(p));
    }
  }
  return r;
}

std::string EncodeHiddenRequest(const std::vector<std::string>& tokens,
                                const std::vector<int>& layers) {
  json j;
  j["tokens"] = tokens;
  j["layers"] = layers;
  return j.dump();
}

void DecodeHiddenRequest(std::string_view body, std::vector<std::string>* tokens,
                         std::vector<int>* layers) {
  json j = ParseJson(body, "hidden_states request");
  *tokens = ReadStrings(j, "tokens");
  *layers = ReadInts(j, "layers");
}

std::string EncodeHiddenResponse(const HiddenStates& states) {
  json layers = json::array();
  for (std::size_t l = 0; l < states.layers.size(); ++l) {
    json positions = json::array();
    for (std::size_t p = 0; p < states.num_positions; ++p) {
      auto v = states.At(l, p);
      positions.push_back(std::vector<double>(v.begin(), v.end()));
    }
    layers.push_back(std::move(positions));
  }
  json j;
  j["states"] = std::move(layers);
  j["dimension"] = states.dimension;
  return j.dump();
}

HiddenStates DecodeHiddenResponse(std::string_view body,
                                  const std::vector<int>& layers,
                                  std::size_t num_positions) {
  json j = ParseJson(body, "hidden_states response");
  if (!j.contains("states") || !j["states"].is_array() ||
      !j.contains("dimension") || !j["dimension"].is_number_unsigned()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "hidden_states response lacks states/dimension");
  }
  HiddenStates s;
  s.layers = layers;
  s.num_positions = num_positions;
  s.dimension = j["dimension"].get<std::size_t>();
  const json& states = j["states"];
  if (states.size() != layers.size()) {
    throw Error(ErrorCode::kScorerUnavailable, "layer count mismatch");
  }
  s.values.reserve(layers.size() * num_positions * s.dimension);
  for (const auto& layer : states) {
    if (!layer.is_array() || layer.size() != num_positions) {
      throw Error(ErrorCode::kScorerUnavailable, "position count mismatch");
    }
    for (const auto& vec : layer) {
      std::vector<double> v = ReadDoubles(vec, "states");
      if (v.size() != s.dimension) {
        throw Error(ErrorCode::kScorerUnavailable, "dimension mismatch");
      }
      s.values.insert(s.values.end(), v.begin(), v.end());
    }
  }
  return s;
}

std::string EncodeInfo(const ScorerInfo& info) {
  json j;
  j["vocab_digest"] = info.vocab_digest;
  j["depth"] = info.depth;
  j["dimension"] = info.dimension;
  return j.dump();
}

ScorerInfo DecodeInfo(std::string_view body) {
  json j = ParseJson(body, "info response");
  if (!j.contains("vocab_digest") || !j["vocab_digest"].is_string() ||
      !j.contains("depth") || !j["depth"].is_number_integer() ||
      !j.contains("dimension") || !j["dimension"].is_number_integer()) {
    throw Error(ErrorCode::kScorerUnavailable,
                "info response lacks vocab_digest/depth/dimension");
  }
  return {j["vocab_digest"].get<std::string>(), j["depth"].get<int>(),
          j["dimension"].get<int>()};
}

}  // namespace morphoprobe
