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

#include "morphoprobe/regression.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "morphoprobe/error.h"

namespace morphoprobe {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct SchemeLevels {
  Scheme reference;
  std::vector<Scheme> dummies;
};

SchemeLevels PickLevels(const std::vector<bool>& present) {
  constexpr Scheme kOrder[] = {Scheme::kSingleToken, Scheme::kMorphemic,
                               Scheme::kNonMorphemic};
  SchemeLevels levels{Scheme::kMorphemic, {}};
  if (!present[static_cast<int>(Scheme::kMorphemic)]) {
    for (Scheme s : kOrder) {
      if (present[static_cast<int>(s)]) {
        levels.reference = s;
        break;
      }
    }
  }
  for (Scheme s : kOrder) {
    if (s != levels.reference && present[static_cast<int>(s)]) {
      levels.dummies.push_back(s);
    }
  }
  return levels;
}

std::string SchemeTerm(Scheme s) {
  return "scheme[" + std::string(SchemeName(s)) + "]";
}

}  // namespace

const Coefficient& RegressionSummary::Get(std::string_view term) const {
  for (const auto& c : coefficients) {
    if (c.term == term) return c;
  }
  throw std::out_of_range("no term " + std::string(term));
}

double IncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double StudentTwoSidedP(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return IncompleteBeta(0.5 * df, 0.5, df / (df + t * t));
}

double CoefficientPValue(double t, std::size_t n, std::size_t num_terms) {
  if (std::isinf(t)) return 0.0;
  if (n > 200) return std::erfc(std::abs(t) / std::sqrt(2.0));
  return StudentTwoSidedP(t, static_cast<double>(n - num_terms));
}

RegressionSummary OlsFit(const DesignMatrix& design, std::span<const double> y) {
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  if (static_cast<std::size_t>(p) != design.terms.size() ||
      static_cast<std::size_t>(n) != y.size()) {
    throw Error(ErrorCode::kBadInput, "design/response shape mismatch");
  }
  if (n <= p) {
    throw Error(ErrorCode::kRankDeficient,
                "n = " + std::to_string(n) + " <= #terms = " + std::to_string(p));
  }
  if (!design.x.allFinite()) throw Error(ErrorCode::kBadInput, "non-finite design");
  const Eigen::Map<const Eigen::VectorXd> response(y.data(), n);
  if (!response.allFinite()) throw Error(ErrorCode::kBadInput, "non-finite response");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    throw Error(ErrorCode::kRankDeficient,
                "design rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(p) + " terms");
  }
  const Eigen::VectorXd beta = qr.solve(response);

  RegressionSummary out;
  out.n = static_cast<std::size_t>(n);
  out.residuals = response - design.x * beta;
  const double rss = out.residuals.squaredNorm();
  const bool has_intercept =
      std::find(design.terms.begin(), design.terms.end(), kInterceptTerm) !=
      design.terms.end();
  const double tss = has_intercept
                         ? (response.array() - response.mean()).square().sum()
                         : response.squaredNorm();
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;

  const Eigen::MatrixXd r =
      qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
  const Eigen::MatrixXd xtx_inv =
      qr.colsPermutation() * xtx_inv_perm * qr.colsPermutation().transpose();
  const double sigma2 = rss / static_cast<double>(n - p);

  for (Eigen::Index k = 0; k < p; ++k) {
    Coefficient c;
    c.term = design.terms[static_cast<std::size_t>(k)];
    c.beta = beta[k];
    c.se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(k, k)));
    if (c.se > 0.0) {
      c.t = c.beta / c.se;
    } else {
      c.t = c.beta == 0.0 ? 0.0
                          : std::copysign(std::numeric_limits<double>::infinity(),
                                          c.beta);
    }
    c.p = CoefficientPValue(c.t, out.n, static_cast<std::size_t>(p));
    out.coefficients.push_back(std::move(c));
  }
  return out;
}

RegressionSummary FreqByScheme(std::span<const NounEntry> entries,
                               std::span<const TokenizationRecord> records) {
  if (entries.size() != records.size()) {
    throw Error(ErrorCode::kBadInput, "entries/records length mismatch");
  }
  std::vector<std::size_t> rows;
  std::vector<bool> present(3, false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (records[i].contains_unk || !entries[i].log_frequency) continue;
    rows.push_back(i);
    present[static_cast<int>(records[i].scheme)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw Error(ErrorCode::kDegenerateClasses,
                "frequency regression needs frequency data for at least two "
                "schemes");
  }
  const SchemeLevels levels = PickLevels(present);
  DesignMatrix design;
  design.terms.emplace_back(kInterceptTerm);
  for (Scheme s : levels.dummies) design.terms.push_back(SchemeTerm(s));
  design.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                   static_cast<Eigen::Index>(design.terms.size()));
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    design.x(row, 0) = 1.0;
    for (std::size_t k = 0; k < levels.dummies.size(); ++k) {
      if (records[rows[r]].scheme == levels.dummies[k]) {
        design.x(row, static_cast<Eigen::Index>(k + 1)) = 1.0;
      }
    }
    y.push_back(*entries[rows[r]].log_frequency);
  }
  RegressionSummary summary = OlsFit(design, y);
  if (levels.reference != Scheme::kMorphemic) {
    summary.warnings.push_back("morphemic absent; reference level is " +
                               std::string(SchemeName(levels.reference)));
  }
  return summary;
}

RegressionSummary LogOddsRegression(std::span<const ProbeResult> results,
                                    const Lexicon& lexicon) {
  std::unordered_map<std::string, double> freq;
  for (const auto& e : lexicon.entries()) {
    if (e.log_frequency) freq.emplace(e.lemma, *e.log_frequency);
  }
  std::vector<const ProbeResult*> rows;
  bool any_freq = false;
  for (const auto& r : results) {
    if (r.variant != Variant::kOriginal) continue;
    rows.push_back(&r);
    if (freq.contains(r.lemma)) any_freq = true;
  }
  std::vector<std::string> warnings;
  if (any_freq) {
    std::erase_if(rows, [&](const ProbeResult* r) { return !freq.contains(r->lemma); });
  } else {
    warnings.push_back("no log_frequency data; frequency terms dropped");
  }
  std::vector<bool> present(3, false);
  for (const auto* r : rows) present[static_cast<int>(r->scheme)] = true;
  SchemeLevels levels{Scheme::kMorphemic, {}};
  if (std::count(present.begin(), present.end(), true) >= 1) {
    levels = PickLevels(present);
  }

  DesignMatrix design;
  design.terms = {std::string(kInterceptTerm), "article_type[indefinite]",
                  "number[singular]"};
  for (Scheme s : levels.dummies) design.terms.push_back(SchemeTerm(s));
  if (any_freq) design.terms.emplace_back("log_frequency");
  for (Scheme s : levels.dummies) {
    design.terms.push_back("number[singular]:" + SchemeTerm(s));
  }
  if (any_freq) design.terms.emplace_back("number[singular]:log_frequency");

  const auto n = static_cast<Eigen::Index>(rows.size());
  design.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(design.terms.size()));
  std::vector<double> y;
  y.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const ProbeResult& r = *rows[static_cast<std::size_t>(i)];
    const double singular = r.number == Number::kSingular ? 1.0 : 0.0;
    Eigen::Index col = 0;
    design.x(i, col++) = 1.0;
    design.x(i, col++) = r.article_type == ArticleType::kIndefinite ? 1.0 : 0.0;
    design.x(i, col++) = singular;
    for (Scheme s : levels.dummies) design.x(i, col++) = r.scheme == s ? 1.0 : 0.0;
    const double f = any_freq ? freq.at(r.lemma) : 0.0;
    if (any_freq) design.x(i, col++) = f;
    for (Scheme s : levels.dummies) {
      design.x(i, col++) = r.scheme == s ? singular : 0.0;
    }
    if (any_freq) design.x(i, col++) = singular * f;
    y.push_back(r.log_odds);
  }
  RegressionSummary summary = OlsFit(design, y);
  summary.warnings.insert(summary.warnings.begin(), warnings.begin(),
                          warnings.end());
  return summary;
}

std::string RegressionToJson(const RegressionSummary& summary) {
  using nlohmann::ordered_json;
  ordered_json terms = ordered_json::array();
  auto num = [](double v) -> ordered_json {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
  };
  for (const auto& c : summary.coefficients) {
    ordered_json j;
    j["term"] = c.term;
    j["beta"] = num(c.beta);
    j["se"] = num(c.se);
    j["t"] = num(c.t);
    j["p"] = num(c.p);
    terms.push_back(std::move(j));
  }
  ordered_json j;
  j["terms"] = std::move(terms);
  j["r_squared"] = summary.r_squared;
  j["n"] = summary.n;
  j["warnings"] = summary.warnings;
  return j.dump(2) + "\n";
}

}  // namespace morphoprobe
