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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "morphoprobe/error.h"

namespace morphoprobe {
namespace {

HiddenStates States(std::vector<int> layers, std::size_t positions,
                    std::size_t dim, std::vector<double> values) {
  HiddenStates hs;
  hs.layers = std::move(layers);
  hs.num_positions = positions;
  hs.dimension = dim;
  hs.values = std::move(values);
  return hs;
}

TEST(MeanEmbeddingTest, TwoLayersTwoPositions) {
  // Layer 1: (0,0) (2,0); layer 2: (0,4) (2,4), plus a CLS position 0.
  HiddenStates hs = States({1, 2}, 3, 2, {9, 9, 0, 0, 2, 0, 9, 9, 0, 4, 2, 4});
  std::vector<std::size_t> pos = {1, 2};
  EXPECT_EQ(MeanEmbedding(hs, pos), (std::vector<double>{1.0, 2.0}));
}

TEST(MeanEmbeddingTest, MatchesSummationAndIsOrderFree) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  const std::size_t layers = 4, positions = 6, dim = 5;
  std::vector<double> values(layers * positions * dim);
  for (double& v : values) v = u(rng);
  HiddenStates hs = States({1, 4, 8, 12}, positions, dim, values);
  std::vector<std::size_t> pos = {2, 3, 4};
  std::vector<double> expected(dim, 0.0);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t p : pos) {
      for (std::size_t d = 0; d < dim; ++d) {
        expected[d] += values[(l * positions + p) * dim + d] / (layers * pos.size());
      }
    }
  }
  auto got = MeanEmbedding(hs, pos);
  std::vector<std::size_t> shuffled = {4, 2, 3};
  auto got2 = MeanEmbedding(hs, shuffled);
  for (std::size_t d = 0; d < dim; ++d) {
    EXPECT_NEAR(got[d], expected[d], 1e-12);
    EXPECT_NEAR(got2[d], got[d], 1e-12);
  }
}

TEST(MeanEmbeddingTest, Errors) {
  HiddenStates hs = States({1}, 2, 1, {1, 2});
  std::vector<std::size_t> none;
  std::vector<std::size_t> bad = {2};
  EXPECT_THROW(
      {
        try {
          MeanEmbedding(hs, none);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kEmptySelection);
          throw;
        }
      },
      Error);
  EXPECT_THROW(
      {
        try {
          MeanEmbedding(hs, bad);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kBadInput);
          throw;
        }
      },
      Error);
}

std::vector<EmbeddingRecord> SampleRecords() {
  return {{"naranja", std::string(kLabelSingular), {0.5, -1.25, 3.0}},
          {"naranjas", std::string(kLabelMorphemic), {1e-300, 2.0 / 3.0, -0.0}},
          {"ñu,\"x\"", std::string(kLabelArtificial), {7, 8, 9}}};
}

TEST(EmbeddingStoreTest, BinaryRoundTrip) {
  auto records = SampleRecords();
  std::string bytes = EncodeEmbeddingStore(records);
  EXPECT_EQ(bytes.substr(0, 8), "MPEMBED1");
  auto back = DecodeEmbeddingStore(bytes);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].wordform, records[i].wordform);
    EXPECT_EQ(back[i].class_label, records[i].class_label);
    EXPECT_EQ(back[i].vector, records[i].vector);
  }
  EXPECT_EQ(DecodeEmbeddingStore(EncodeEmbeddingStore({})).size(), 0u);
}

TEST(EmbeddingStoreTest, RejectsCorruption) {
  std::string bytes = EncodeEmbeddingStore(SampleRecords());
  EXPECT_THROW(DecodeEmbeddingStore(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(DecodeEmbeddingStore(bytes + "x"), Error);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(DecodeEmbeddingStore(bad_magic), Error);
}

TEST(EmbeddingStoreTest, CsvRoundTrip) {
  auto records = SampleRecords();
  std::string csv = EmbeddingsToCsv(records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "wordform,class_label,d0,d1,d2");
  auto back = EmbeddingsFromCsv(csv);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].wordform, records[i].wordform);
    EXPECT_EQ(back[i].vector, records[i].vector);
  }
}

TEST(CheckEmbeddingsTest, RaggedAndNonFinite) {
  auto records = SampleRecords();
  EXPECT_EQ(CheckEmbeddings(records), 3u);
  records[1].vector.pop_back();
  EXPECT_THROW(CheckEmbeddings(records), Error);
  records = SampleRecords();
  records[0].vector[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(CheckEmbeddings(records), Error);
}

}  // namespace
}  // namespace morphoprobe
