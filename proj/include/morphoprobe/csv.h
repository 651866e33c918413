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

#ifndef MORPHOPROBE_CSV_H_
#define MORPHOPROBE_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace morphoprobe {

// RFC-4180 CSV builder. Lines end in "\n"; fields containing a comma, quote,
// or line break are quoted with embedded quotes doubled.
class CsvWriter {
 public:
  // Writes "# text" on its own line.
  void Comment(std::string_view text);
  void Row(const std::vector<std::string>& fields);

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string CsvEscape(std::string_view field);

// Shortest decimal string that round-trips to the same double.
std::string FormatDouble(double value);

// Parses RFC-4180 text into rows; lines starting with '#' are skipped.
// Throws Error(kFormatError) on an unterminated quoted field.
std::vector<std::vector<std::string>> ParseCsv(std::string_view text);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_CSV_H_
