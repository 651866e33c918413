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

#ifndef MORPHOPROBE_LDA_H_
#define MORPHOPROBE_LDA_H_

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "morphoprobe/embedding.h"

namespace morphoprobe {

inline constexpr double kDefaultShrinkage = 1e-3;

// Fisher discriminant model. Axes are the leading generalized eigenvectors of
// (between_scatter, within_scatter + lambda_eff * I), each scaled to unit
// Euclidean norm with its first nonzero component positive.
struct LdaModel {
  std::vector<std::string> labels;  // sorted
  std::vector<Eigen::VectorXd> class_means;  // aligned with labels
  std::vector<std::size_t> class_counts;
  Eigen::VectorXd global_mean;
  Eigen::MatrixXd within_scatter;
  Eigen::MatrixXd between_scatter;
  double shrinkage = 0.0;
  double lambda_eff = 0.0;  // shrinkage * trace(within_scatter) / D
  Eigen::VectorXd eigenvalues;  // descending, one per axis
  Eigen::MatrixXd axes;         // D x num_axes

  std::size_t dimension() const { return global_mean.size(); }
  std::size_t num_axes() const { return static_cast<std::size_t>(axes.cols()); }
};

// Fits on every record; class = class_label. Produces min(#classes - 1, D)
// axes. Throws Error(kDegenerateClasses) for fewer than two classes or a class
// with fewer than two records, Error(kBadInput) for ragged or non-finite data
// or negative shrinkage, Error(kSingularScatter) when the regularized
// within-class scatter is not positive definite.
LdaModel LdaFit(std::span<const EmbeddingRecord> records,
                double shrinkage = kDefaultShrinkage);

// dot(vector - global_mean, axis) for each selected axis; an empty
// axis_indices selects all axes. Throws Error(kBadInput).
std::vector<std::vector<double>> LdaProject(
    const LdaModel& model, std::span<const EmbeddingRecord> records,
    std::span<const std::size_t> axis_indices = {});

// Model metadata (labels, counts, eigenvalues, shrinkage, axes) as JSON.
std::string LdaModelToJson(const LdaModel& model);

// `wordform,class_label,axis0[,axis1,...]`.
std::string ProjectionsToCsv(std::span<const EmbeddingRecord> records,
                             const std::vector<std::vector<double>>& coords,
                             std::string_view header_comment = {});

}  // namespace morphoprobe

#endif  // MORPHOPROBE_LDA_H_
