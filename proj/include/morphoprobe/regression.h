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

#ifndef MORPHOPROBE_REGRESSION_H_
#define MORPHOPROBE_REGRESSION_H_

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "morphoprobe/lexicon.h"
#include "morphoprobe/probe.h"
#include "morphoprobe/tokenization.h"

namespace morphoprobe {

inline constexpr std::string_view kInterceptTerm = "(Intercept)";

struct DesignMatrix {
  std::vector<std::string> terms;  // one per column
  Eigen::MatrixXd x;               // n x terms.size()
};

struct Coefficient {
  std::string term;
  double beta = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct RegressionSummary {
  std::vector<Coefficient> coefficients;  // design column order
  double r_squared = 0.0;
  std::size_t n = 0;
  Eigen::VectorXd residuals;
  std::vector<std::string> warnings;

  // Throws std::out_of_range for an unknown term.
  const Coefficient& Get(std::string_view term) const;
};

// Regularized incomplete beta I_x(a, b) by continued fraction.
double IncompleteBeta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double StudentTwoSidedP(double t, double df);

// Two-sided p for coefficient t statistics: normal approximation when
// n > 200, exact t(n - p) otherwise.
double CoefficientPValue(double t, std::size_t n, std::size_t num_terms);

// Least squares by column-pivoted Householder QR; SEs from
// sigma^2 (X^T X)^-1. Throws Error(kRankDeficient) when the design is not full
// column rank or n <= #terms, Error(kBadInput) on shape mismatch.
RegressionSummary OlsFit(const DesignMatrix& design, std::span<const double> y);

// log_frequency ~ scheme dummies with Morphemic as the reference level (or
// the first scheme present when Morphemic is absent). Entries with UNK
// tokenizations or no frequency are left out. Throws
// Error(kDegenerateClasses) when fewer than two schemes have data.
RegressionSummary FreqByScheme(std::span<const NounEntry> entries,
                               std::span<const TokenizationRecord> records);

// Fixed-effects model over original-variant probe rows:
//   log_odds ~ article_type + number + scheme + log_frequency
//              + number:scheme + number:log_frequency
// Frequencies are joined by lemma. When no row has a frequency the frequency
// terms are dropped and a warning recorded.
RegressionSummary LogOddsRegression(std::span<const ProbeResult> results,
                                    const Lexicon& lexicon);

std::string RegressionToJson(const RegressionSummary& summary);

}  // namespace morphoprobe

#endif  // MORPHOPROBE_REGRESSION_H_
