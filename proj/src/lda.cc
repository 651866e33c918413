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

#include "morphoprobe/lda.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "morphoprobe/csv.h"
#include "morphoprobe/error.h"

namespace morphoprobe {

namespace {

// Flip so the first component that is not negligible is positive.
void FixSign(Eigen::Ref<Eigen::VectorXd> v) {
  const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

LdaModel LdaFit(std::span<const EmbeddingRecord> records, double shrinkage) {
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) {
    throw Error(ErrorCode::kBadInput, "shrinkage must be finite and >= 0");
  }
  const std::size_t dim = CheckEmbeddings(records);
  if (dim == 0) throw Error(ErrorCode::kDegenerateClasses, "no records");

  std::map<std::string, std::vector<const EmbeddingRecord*>> by_class;
  for (const auto& r : records) by_class[r.class_label].push_back(&r);
  if (by_class.size() < 2) {
    throw Error(ErrorCode::kDegenerateClasses,
                "need at least two classes, got " +
                    std::to_string(by_class.size()));
  }

  const auto d = static_cast<Eigen::Index>(dim);
  LdaModel model;
  model.shrinkage = shrinkage;
  model.global_mean = Eigen::VectorXd::Zero(d);
  model.within_scatter = Eigen::MatrixXd::Zero(d, d);
  model.between_scatter = Eigen::MatrixXd::Zero(d, d);

  for (const auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw Error(ErrorCode::kDegenerateClasses,
                  "class '" + label + "' has fewer than two records");
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto* r : members) {
      mean += Eigen::Map<const Eigen::VectorXd>(r->vector.data(), d);
    }
    model.global_mean += mean;
    mean /= static_cast<double>(members.size());
    for (const auto* r : members) {
      Eigen::VectorXd c =
          Eigen::Map<const Eigen::VectorXd>(r->vector.data(), d) - mean;
      model.within_scatter.noalias() += c * c.transpose();
    }
    model.labels.push_back(label);
    model.class_means.push_back(std::move(mean));
    model.class_counts.push_back(members.size());
  }
  model.global_mean /= static_cast<double>(records.size());
  for (std::size_t k = 0; k < model.labels.size(); ++k) {
    Eigen::VectorXd diff = model.class_means[k] - model.global_mean;
    model.between_scatter.noalias() +=
        static_cast<double>(model.class_counts[k]) * diff * diff.transpose();
  }

  model.lambda_eff =
      shrinkage * model.within_scatter.trace() / static_cast<double>(dim);
  Eigen::MatrixXd regularized = model.within_scatter;
  regularized.diagonal().array() += model.lambda_eff;

  Eigen::LLT<Eigen::MatrixXd> chol(regularized);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularScatter,
                "within-class scatter is not positive definite; raise "
                "shrinkage");
  }
  const Eigen::MatrixXd lower = chol.matrixL();
  const Eigen::VectorXd pivots = lower.diagonal();
  if (pivots.minCoeff() <= 1e-7 * pivots.maxCoeff()) {
    throw Error(ErrorCode::kSingularScatter,
                "within-class scatter is numerically rank-deficient; raise "
                "shrinkage");
  }

  // Whitened between-class scatter L^-1 Sb L^-T.
  const auto tri = lower.triangularView<Eigen::Lower>();
  Eigen::MatrixXd half = tri.solve(model.between_scatter);
  Eigen::MatrixXd whitened = tri.solve(half.transpose());
  whitened = 0.5 * (whitened + whitened.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(whitened);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularScatter, "eigendecomposition failed");
  }
  const Eigen::Index num_axes =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(model.labels.size()) - 1, d);
  model.eigenvalues.resize(num_axes);
  model.axes.resize(d, num_axes);
  const auto upper = lower.transpose().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < num_axes; ++k) {
    const Eigen::Index src = d - 1 - k;  // ascending order from the solver
    model.eigenvalues[k] = std::max(0.0, eig.eigenvalues()[src]);
    Eigen::VectorXd axis = upper.solve(eig.eigenvectors().col(src));
    axis.normalize();
    FixSign(axis);
    model.axes.col(k) = axis;
  }
  return model;
}

std::vector<std::vector<double>> LdaProject(
    const LdaModel& model, std::span<const EmbeddingRecord> records,
    std::span<const std::size_t> axis_indices) {
  std::vector<std::size_t> axes(axis_indices.begin(), axis_indices.end());
  if (axes.empty()) {
    for (std::size_t k = 0; k < model.num_axes(); ++k) axes.push_back(k);
  }
  for (std::size_t k : axes) {
    if (k >= model.num_axes()) {
      throw Error(ErrorCode::kBadInput, "axis " + std::to_string(k) +
                                            " out of range");
    }
  }
  const auto d = static_cast<Eigen::Index>(model.dimension());
  std::vector<std::vector<double>> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.vector.size() != model.dimension()) {
      throw Error(ErrorCode::kBadInput, "dimension mismatch at '" +
                                            r.wordform + "'");
    }
    Eigen::VectorXd centered =
        Eigen::Map<const Eigen::VectorXd>(r.vector.data(), d) -
        model.global_mean;
    std::vector<double> coords;
    coords.reserve(axes.size());
    for (std::size_t k : axes) {
      coords.push_back(centered.dot(model.axes.col(static_cast<Eigen::Index>(k))));
    }
    out.push_back(std::move(coords));
  }
  return out;
}

std::string LdaModelToJson(const LdaModel& model) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["dimension"] = model.dimension();
  j["shrinkage"] = model.shrinkage;
  j["lambda_eff"] = model.lambda_eff;
  ordered_json classes = ordered_json::array();
  for (std::size_t k = 0; k < model.labels.size(); ++k) {
    classes.push_back({{"label", model.labels[k]}, {"n", model.class_counts[k]}});
  }
  j["classes"] = std::move(classes);
  j["eigenvalues"] = std::vector<double>(
      model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
  ordered_json axes = ordered_json::array();
  for (Eigen::Index k = 0; k < model.axes.cols(); ++k) {
    Eigen::VectorXd col = model.axes.col(k);
    axes.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  j["axes"] = std::move(axes);
  return j.dump(2) + "\n";
}

std::string ProjectionsToCsv(std::span<const EmbeddingRecord> records,
                             const std::vector<std::vector<double>>& coords,
                             std::string_view header_comment) {
  CsvWriter csv;
  if (!header_comment.empty()) csv.Comment(header_comment);
  const std::size_t width = coords.empty() ? 0 : coords.front().size();
  std::vector<std::string> header = {"wordform", "class_label"};
  for (std::size_t k = 0; k < width; ++k) header.push_back("axis" + std::to_string(k));
  csv.Row(header);
  for (std::size_t i = 0; i < records.size() && i < coords.size(); ++i) {
    std::vector<std::string> row = {records[i].wordform, records[i].class_label};
    for (double c : coords[i]) row.push_back(FormatDouble(c));
    csv.Row(row);
  }
  return csv.str();
}

}  // namespace morphoprobe
