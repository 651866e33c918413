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

#ifndef MORPHOPROBE_TEXT_H_
#define MORPHOPROBE_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morphoprobe {

// Lowercases and NFC-normalizes UTF-8 text. Throws Error(kFormatError) on
// malformed UTF-8.
std::string NormalizeWord(std::string_view text);

// Byte offsets of every code point boundary in `text`, including 0 and
// text.size(). Throws Error(kFormatError) on malformed UTF-8.
std::vector<std::size_t> CodePointBoundaries(std::string_view text);

std::size_t CodePointCount(std::string_view text);

// Throws Error(kFormatError) on malformed UTF-8.
std::u32string DecodeUtf8(std::string_view text);

// Last code point of non-empty valid UTF-8, or U+FFFD if malformed.
char32_t LastCodePoint(std::string_view text);

bool IsSpanishLetter(char32_t c);
bool IsSpanishVowel(char32_t c);

bool ContainsWhitespace(std::string_view text);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

// Splits on '\n', dropping one trailing '\r' per line. A final empty line
// (text ending in '\n') is not returned.
std::vector<std::string_view> SplitLines(std::string_view text);

std::vector<std::string_view> SplitOn(std::string_view text, char sep);

std::string JoinStrings(const std::vector<std::string>& parts,
                        std::string_view sep);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_TEXT_H_
