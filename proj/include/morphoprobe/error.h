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

#ifndef MORPHOPROBE_ERROR_H_
#define MORPHOPROBE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace morphoprobe {

enum class ErrorCode {
  // lexicon
  kInvalidLemma,
  kFormatError,
  kDuplicateEntry,
  // tokenization
  kDuplicatePiece,
  kMissingSpecial,
  kMissingAffixPiece,
  kUnkLemma,
  // scorer
  kScorerUnavailable,
  kVocabMismatch,
  kUnknownCandidate,
  kBadLayer,
  kBadQuery,
  // probe
  kBadNounTokens,
  kDegenerateDistribution,
  // analysis
  kEmptySelection,
  kDegenerateClasses,
  kBadInput,
  kSingularScatter,
  kRankDeficient,
  // files
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library surface as this exception; callers
// dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace morphoprobe

#endif  // MORPHOPROBE_ERROR_H_
