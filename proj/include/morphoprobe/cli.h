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

#ifndef MORPHOPROBE_CLI_H_
#define MORPHOPROBE_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "morphoprobe/error.h"

namespace morphoprobe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitScorer = 3;
inline constexpr int kExitDegenerate = 4;

int ExitCodeFor(ErrorCode code);

// Entry point for `morphoprobe <command> ...`; args excludes argv[0].
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_CLI_H_
