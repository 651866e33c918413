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

#include "morphoprobe/error.h"

namespace morphoprobe {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidLemma: return "InvalidLemma";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kDuplicatePiece: return "DuplicatePiece";
    case ErrorCode::kMissingSpecial: return "MissingSpecial";
    case ErrorCode::kMissingAffixPiece: return "MissingAffixPiece";
    case ErrorCode::kUnkLemma: return "UnkLemma";
    case ErrorCode::kScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::kVocabMismatch: return "VocabMismatch";
    case ErrorCode::kUnknownCandidate: return "UnknownCandidate";
    case ErrorCode::kBadLayer: return "BadLayer";
    case ErrorCode::kBadQuery: return "BadQuery";
    case ErrorCode::kBadNounTokens: return "BadNounTokens";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kDegenerateClasses: return "DegenerateClasses";
    case ErrorCode::kBadInput: return "BadInput";
    case ErrorCode::kSingularScatter: return "SingularScatter";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace morphoprobe
