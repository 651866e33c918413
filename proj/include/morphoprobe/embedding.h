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

#ifndef MORPHOPROBE_EMBEDDING_H_
#define MORPHOPROBE_EMBEDDING_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphoprobe/scorer.h"

namespace morphoprobe {

inline constexpr std::string_view kLabelSingular = "singular";
inline constexpr std::string_view kLabelSingleToken = "plural-single-token";
inline constexpr std::string_view kLabelMorphemic = "plural-morphemic";
inline constexpr std::string_view kLabelNonMorphemic = "plural-non-morphemic";
inline constexpr std::string_view kLabelArtificial = "plural-artificial";

struct EmbeddingRecord {
  std::string wordform;
  std::string class_label;
  std::vector<double> vector;
};

// Mean over every layer in `states` and every listed position. Throws
// Error(kEmptySelection) or Error(kBadInput) for an out-of-range position.
std::vector<double> MeanEmbedding(const HiddenStates& states,
                                  std::span<const std::size_t> noun_positions);

// Checks shared dimension and finiteness. Throws Error(kBadInput).
std::size_t CheckEmbeddings(std::span<const EmbeddingRecord> records);

// Binary store, little-endian:
//   "MPEMBED1" | u32 D | u64 count |
//   count x { u32 label_len | label | D x f64 | u32 wordform_len | wordform }
std::string EncodeEmbeddingStore(std::span<const EmbeddingRecord> records);
// Throws Error(kFormatError) on truncation or bad magic.
std::vector<EmbeddingRecord> DecodeEmbeddingStore(std::string_view bytes);

// `wordform,class_label,d0,...,d{D-1}`.
std::string EmbeddingsToCsv(std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> EmbeddingsFromCsv(std::string_view text);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_EMBEDDING_H_
