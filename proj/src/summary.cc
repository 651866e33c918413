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

#include "morphoprobe/summary.h"

#include <cmath>
#include <map>

#include "json.hpp"
#include "morphoprobe/error.h"

namespace morphoprobe {

MeanSd ComputeMeanSd(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kBadInput, "empty group");
  MeanSd out;
  out.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  }
  return out;
}

std::vector<SummaryStats> GroupedSummary(std::span<const KeyedValue> values) {
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& [keys, v] : values) groups[keys].push_back(v);
  std::vector<SummaryStats> out;
  out.reserve(groups.size());
  for (const auto& [keys, vs] : groups) {
    MeanSd m = ComputeMeanSd(vs);
    out.push_back({keys, m.mean, m.sd, m.n, m.n == 1});
  }
  return out;
}

std::vector<SummaryStats> GroupedSummary(std::span<const ProbeResult> results,
                                         std::span<const ResultKey> keys) {
  if (results.empty()) throw Error(ErrorCode::kBadInput, "no probe results");
  std::vector<KeyedValue> keyed;
  keyed.reserve(results.size());
  for (const auto& r : results) {
    std::vector<std::string> k;
    for (ResultKey key : keys) {
      switch (key) {
        case ResultKey::kNumber: k.emplace_back(NumberName(r.number)); break;
        case ResultKey::kScheme: k.emplace_back(SchemeName(r.scheme)); break;
        case ResultKey::kVariant: k.emplace_back(VariantName(r.variant)); break;
        case ResultKey::kArticleType:
          k.emplace_back(ArticleTypeName(r.article_type));
          break;
      }
    }
    keyed.emplace_back(std::move(k), r.log_odds);
  }
  return GroupedSummary(keyed);
}

std::string SummariesToJson(std::span<const SummaryStats> stats,
                            std::span<const std::string> key_names) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  for (const auto& s : stats) {
    ordered_json j;
    for (std::size_t i = 0; i < s.keys.size(); ++i) {
      j[i < key_names.size() ? key_names[i] : "key" + std::to_string(i)] =
          s.keys[i];
    }
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    j["n"] = s.n;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace morphoprobe
