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

#include "morphoprobe/embedding.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "morphoprobe/csv.h"
#include "morphoprobe/error.h"

namespace morphoprobe {

namespace {

constexpr std::string_view kMagic = "MPEMBED1";

template <typename T>
void PutLe(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Le() {
    Need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view Bytes(std::size_t n) {
    Need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kFormatError, "embedding store truncated");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<double> MeanEmbedding(const HiddenStates& states,
                                  std::span<const std::size_t> noun_positions) {
  if (noun_positions.empty() || states.layers.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no positions or layers");
  }
  std::vector<double> mean(states.dimension, 0.0);
  for (std::size_t l = 0; l < states.layers.size(); ++l) {
    for (std::size_t p : noun_positions) {
      if (p >= states.num_positions) {
        throw Error(ErrorCode::kBadInput,
                    "position " + std::to_string(p) + " outside frame");
      }
      auto v = states.At(l, p);
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
    }
  }
  const double count =
      static_cast<double>(states.layers.size() * noun_positions.size());
  for (double& x : mean) x /= count;
  return mean;
}

std::size_t CheckEmbeddings(std::span<const EmbeddingRecord> records) {
  if (records.empty()) return 0;
  const std::size_t dim = records.front().vector.size();
  for (const auto& r : records) {
    if (r.vector.size() != dim) {
      throw Error(ErrorCode::kBadInput, "dimension mismatch at '" +
                                            r.wordform + "'");
    }
    for (double x : r.vector) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kBadInput, "non-finite value at '" +
                                              r.wordform + "'");
      }
    }
  }
  return dim;
}

std::string EncodeEmbeddingStore(std::span<const EmbeddingRecord> records) {
  const std::size_t dim = CheckEmbeddings(records);
  std::string out(kMagic);
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  PutLe<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(r.class_label.size()));
    out.append(r.class_label);
    for (double x : r.vector) PutLe<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(r.wordform.size()));
    out.append(r.wordform);
  }
  return out;
}

std::vector<EmbeddingRecord> DecodeEmbeddingStore(std::string_view bytes) {
  Reader in(bytes);
  if (in.Bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kFormatError, "not an embedding store (bad magic)");
  }
  const auto dim = in.Le<std::uint32_t>();
  const auto count = in.Le<std::uint64_t>();
  std::vector<EmbeddingRecord> records;
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.class_label = std::string(in.Bytes(in.Le<std::uint32_t>()));
    r.vector.resize(dim);
    for (auto& x : r.vector) x = std::bit_cast<double>(in.Le<std::uint64_t>());
    r.wordform = std::string(in.Bytes(in.Le<std::uint32_t>()));
    records.push_back(std::move(r));
  }
  if (!in.done()) {
    throw Error(ErrorCode::kFormatError, "trailing bytes in embedding store");
  }
  return records;
}

std::string EmbeddingsToCsv(std::span<const EmbeddingRecord> records) {
  const std::size_t dim = CheckEmbeddings(records);
  CsvWriter csv;
  std::vector<std::string> header = {"wordform", "class_label"};
  for (std::size_t d = 0; d < dim; ++d) header.push_back("d" + std::to_string(d));
  csv.Row(header);
  for (const auto& r : records) {
    std::vector<std::string> row = {r.wordform, r.class_label};
    for (double x : r.vector) row.push_back(FormatDouble(x));
    csv.Row(row);
  }
  return csv.str();
}

std::vector<EmbeddingRecord> EmbeddingsFromCsv(std::string_view text) {
  auto rows = ParseCsv(text);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "wordform" ||
      rows[0][1] != "class_label") {
    throw Error(ErrorCode::kFormatError, "bad embedding CSV header");
  }
  const std::size_t dim = rows[0].size() - 2;
  std::vector<EmbeddingRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != dim + 2) {
      throw Error(ErrorCode::kFormatError,
                  "embedding CSV row " + std::to_string(i) + " has wrong width");
    }
    EmbeddingRecord r{rows[i][0], rows[i][1], {}};
    for (std::size_t d = 0; d < dim; ++d) {
      try {
        r.vector.push_back(std::stod(rows[i][d + 2]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kFormatError,
                    "embedding CSV row " + std::to_string(i) + " bad number");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace morphoprobe
