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

#ifndef MORPHOPROBE_SUMMARY_H_
#define MORPHOPROBE_SUMMARY_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morphoprobe/probe.h"

namespace morphoprobe {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1); 0 when n == 1
  std::size_t n = 0;
};

// Two-pass mean and sample SD. Throws Error(kBadInput) on empty input.
MeanSd ComputeMeanSd(std::span<const double> values);

struct SummaryStats {
  std::vector<std::string> keys;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  bool single = false;  // n == 1, sd reported as 0
};

using KeyedValue = std::pair<std::vector<std::string>, double>;

// Groups by key tuple (sorted lexicographically) and summarizes each group.
std::vector<SummaryStats> GroupedSummary(std::span<const KeyedValue> values);

enum class ResultKey { kNumber, kScheme, kVariant, kArticleType };

// log_odds grouped by the listed fields of each ProbeResult. Throws
// Error(kBadInput) on empty input.
std::vector<SummaryStats> GroupedSummary(std::span<const ProbeResult> results,
                                         std::span<const ResultKey> keys);

std::string SummariesToJson(std::span<const SummaryStats> stats,
                            std::span<const std::string> key_names);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_SUMMARY_H_
