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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "morphoprobe/cli.h"
#include "morphoprobe/embedding.h"
#include "morphoprobe/error.h"
#include "morphoprobe/lda.h"
#include "morphoprobe/lexicon.h"
#include "morphoprobe/probe.h"
#include "morphoprobe/regression.h"
#include "morphoprobe/scorer.h"
#include "morphoprobe/summary.h"
#include "morphoprobe/tokenization.h"

namespace py = pybind11;
using namespace morphoprobe;

namespace {

using VocabPtr = std::shared_ptr<const Vocabulary>;

std::vector<EmbeddingRecord> ToRecords(const Eigen::MatrixXd& vectors,
                                       const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(vectors.rows()) != labels.size()) {
    throw Error(ErrorCode::kBadInput, "one label per row required");
  }
  std::vector<EmbeddingRecord> records(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    records[i].class_label = labels[i];
    records[i].vector.assign(vectors.cols(), 0.0);
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      records[i].vector[j] = vectors(static_cast<Eigen::Index>(i), j);
    }
  }
  return records;
}

Eigen::MatrixXd ToMatrix(const std::vector<std::vector<double>>& rows,
                         std::size_t cols) {
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

py::array_t<double> HiddenToArray(const HiddenStates& hs) {
  py::array_t<double> out({hs.layers.size(), hs.num_positions, hs.dimension});
  std::copy(hs.values.begin(), hs.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_morphoprobe, m) {
  m.doc() = "Tokenization-scheme probing toolkit for Spanish plural agreement.";

  static py::exception<Error> error_type(m, "MorphoprobeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error_type.ptr())(e.what());
      inst.attr("code") = py::str(std::string(ErrorCodeName(e.code())));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::enum_<Gender>(m, "Gender")
      .value("MASCULINE", Gender::kMasculine)
      .value("FEMININE", Gender::kFeminine);
  py::enum_<Affix>(m, "Affix").value("S", Affix::kS).value("ES", Affix::kEs);
  py::enum_<Scheme>(m, "Scheme")
      .value("SINGLE_TOKEN", Scheme::kSingleToken)
      .value("MORPHEMIC", Scheme::kMorphemic)
      .value("NON_MORPHEMIC", Scheme::kNonMorphemic);
  py::enum_<Variant>(m, "Variant")
      .value("ORIGINAL", Variant::kOriginal)
      .value("ARTIFICIAL", Variant::kArtificial);
  py::enum_<Number>(m, "Number")
      .value("SINGULAR", Number::kSingular)
      .value("PLURAL", Number::kPlural);
  py::enum_<ArticleType>(m, "ArticleType")
      .value("DEFINITE", ArticleType::kDefinite)
      .value("INDEFINITE", ArticleType::kIndefinite);

  // Lexicon.
  py::class_<NounEntry>(m, "NounEntry")
      .def(py::init([](std::string lemma, std::string plural, Gender gender,
                       Affix affix, std::optional<double> log_frequency) {
             return NounEntry{std::move(lemma), std::move(plural), gender, affix,
                              log_frequency};
           }),
           py::arg("lemma"), py::arg("plural"), py::arg("gender"), py::arg("affix"),
           py::arg("log_frequency") = py::none())
      .def_readwrite("lemma", &NounEntry::lemma)
      .def_readwrite("plural", &NounEntry::plural)
      .def_readwrite("gender", &NounEntry::gender)
      .def_readwrite("affix", &NounEntry::affix)
      .def_readwrite("log_frequency", &NounEntry::log_frequency)
      .def("__repr__", [](const NounEntry& e) {
        return "NounEntry(" + e.lemma + ", " + e.plural + ")";
      });

  py::class_<Lexicon>(m, "Lexicon")
      .def(py::init<std::vector<NounEntry>, std::string>(), py::arg("entries"),
           py::arg("source_digest") = "")
      .def_property_readonly("entries", &Lexicon::entries)
      .def_property_readonly("source_digest", &Lexicon::source_digest)
      .def("__len__", &Lexicon::size);

  m.def("expected_affix", &ExpectedAffix, py::arg("lemma"));
  m.def(
      "validate_entry",
      [](const NounEntry& e) {
        ValidationResult r = ValidateEntry(e);
        return py::make_tuple(std::string(ValidationName(r.status)), r.reason);
      },
      py::arg("entry"), "Returns (status, reason).");
  m.def(
      "parse_lexicon",
      [](std::string_view text, double log_base) {
        LexiconParse parsed = ParseLexicon(text, log_base);
        py::list rejects;
        for (const auto& r : parsed.rejects) {
          py::dict d;
          d["row"] = r.row;
          d["lemma"] = r.lemma;
          d["plural"] = r.plural;
          d["reason"] = r.reason;
          rejects.append(d);
        }
        return py::make_tuple(parsed.lexicon, rejects);
      },
      py::arg("text"), py::arg("log_base") = 10.0,
      "Returns (Lexicon, rejects).");

  // Tokenization.
  py::class_<Vocabulary, std::shared_ptr<Vocabulary>>(m, "Vocabulary")
      .def_static(
          "from_pieces",
          [](std::vector<std::string> pieces) {
            return std::make_shared<Vocabulary>(Vocabulary::FromPieces(std::move(pieces)));
          },
          py::arg("pieces"))
      .def_static(
          "load",
          [](std::string_view text) {
            return std::make_shared<Vocabulary>(LoadVocab(text));
          },
          py::arg("text"))
      .def("__len__", &Vocabulary::size)
      .def("__contains__", &Vocabulary::Contains)
      .def("id", &Vocabulary::Id)
      .def_property_readonly("pieces", &Vocabulary::pieces)
      .def_property_readonly("digest", &Vocabulary::digest)
      .def("tokenize", [](const Vocabulary& v, std::string_view word) {
        return Tokenize(word, v);
      });

  m.def(
      "tokenize", [](std::string_view word, const Vocabulary& v) { return Tokenize(word, v); },
      py::arg("word"), py::arg("vocab"));

  py::class_<TokenizationRecord>(m, "TokenizationRecord")
      .def_readonly("word", &TokenizationRecord::word)
      .def_readonly("tokens", &TokenizationRecord::tokens)
      .def_readonly("token_ids", &TokenizationRecord::token_ids)
      .def_readonly("scheme", &TokenizationRecord::scheme)
      .def_readonly("variant", &TokenizationRecord::variant)
      .def_readonly("contains_unk", &TokenizationRecord::contains_unk);
  m.def("classify_scheme", &ClassifyScheme, py::arg("entry"), py::arg("vocab"));
  m.def("artificial_tokenize", &ArtificialTokenize, py::arg("entry"), py::arg("vocab"));

  // Scorer.
  py::class_<ScorerHandle>(m, "Scorer")
      .def_static(
          "mock",
          [](std::shared_ptr<Vocabulary> vocab, std::uint64_t seed, std::string_view bias,
             int depth, int dimension) {
            MockConfig cfg;
            cfg.seed = seed;
            cfg.bias = ParseBiasSpec(bias);
            cfg.depth = depth;
            cfg.dimension = dimension;
            return ScorerHandle::Mock(vocab, cfg);
          },
          py::arg("vocab"), py::arg("seed") = 0, py::arg("bias") = "",
          py::arg("depth") = 12, py::arg("dimension") = 16)
      .def_static(
          "remote",
          [](std::string url, std::shared_ptr<Vocabulary> vocab, int retries,
             int backoff_ms) {
            RetryPolicy retry;
            retry.max_retries = retries;
            retry.initial_backoff = std::chrono::milliseconds(backoff_ms);
            return ScorerHandle::Remote(std::move(url), vocab, retry);
          },
          py::arg("url"), py::arg("vocab"), py::arg("retries") = 3,
          py::arg("backoff_ms") = 200)
      .def(
          "handshake",
          [](ScorerHandle& s) {
            ScorerInfo info = s.Handshake();
            py::dict d;
            d["vocab_digest"] = info.vocab_digest;
            d["depth"] = info.depth;
            d["dimension"] = info.dimension;
            return d;
          })
      .def(
          "score_masked",
          [](ScorerHandle& s, std::vector<std::string> tokens, std::size_t mask_index,
             std::vector<std::string> candidates) {
            MaskResponse r;
            {
              py::gil_scoped_release release;
              r = s.ScoreMasked({std::move(tokens), mask_index, std::move(candidates)});
            }
            return py::make_tuple(r.logits, r.probabilities);
          },
          py::arg("tokens"), py::arg("mask_index"), py::arg("candidates"),
          "Returns (logits, probabilities).")
      .def(
          "fetch_hidden_states",
          [](ScorerHandle& s, const std::vector<std::string>& tokens,
             const std::vector<int>& layers) {
            HiddenStates hs;
            {
              py::gil_scoped_release release;
              hs = s.FetchHiddenStates(tokens, layers);
            }
            return HiddenToArray(hs);
          },
          py::arg("tokens"), py::arg("layers"),
          "Array of shape (layers, positions, dimension).");

  // Wire codec.
  m.def(
      "encode_mask_request",
      [](std::vector<std::string> tokens, std::size_t mask_index,
         std::vector<std::string> candidates) {
        return EncodeMaskRequest({std::move(tokens), mask_index, std::move(candidates)});
      },
      py::arg("tokens"), py::arg("mask_index"), py::arg("candidates"));
  m.def(
      "encode_mask_response",
      [](std::vector<double> logits, std::vector<double> probabilities) {
        return EncodeMaskResponse({std::move(logits), std::move(probabilities)});
      },
      py::arg("logits"), py::arg("probabilities"));
  m.def(
      "decode_mask_response",
      [](std::string_view body, std::size_t num_candidates) {
        MaskResponse r = DecodeMaskResponse(body, num_candidates);
        return py::make_tuple(r.logits, r.probabilities);
      },
      py::arg("body"), py::arg("num_candidates"));
  m.def("encode_hidden_request", &EncodeHiddenRequest, py::arg("tokens"), py::arg("layers"));
  m.def(
      "encode_hidden_response",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> states,
         std::vector<int> layers) {
        if (states.ndim() != 3 || static_cast<std::size_t>(states.shape(0)) != layers.size()) {
          throw Error(ErrorCode::kBadInput, "states must be (layers, positions, dimension)");
        }
        HiddenStates hs;
        hs.layers = std::move(layers);
        hs.num_positions = states.shape(1);
        hs.dimension = states.shape(2);
        hs.values.assign(states.data(), states.data() + states.size());
        return EncodeHiddenResponse(hs);
      },
      py::arg("states"), py::arg("layers"));
  m.def(
      "encode_info",
      [](std::string digest, int depth, int dimension) {
        return EncodeInfo({std::move(digest), depth, dimension});
      },
      py::arg("vocab_digest"), py::arg("depth"), py::arg("dimension"));

  // Probe.
  m.def(
      "build_frame",
      [](const std::vector<std::string>& noun_tokens) {
        MaskQuery q = BuildFrame(noun_tokens);
        return py::make_tuple(q.tokens, q.mask_index);
      },
      py::arg("noun_tokens"), "Returns (tokens, mask_index).");
  m.def(
      "log_odds",
      [](std::vector<double> probabilities, std::size_t plural_idx, std::size_t singular_idx) {
        MaskResponse r;
        r.logits.assign(probabilities.size(), 0.0);
        r.probabilities = std::move(probabilities);
        return LogOdds(r, plural_idx, singular_idx);
      },
      py::arg("probabilities"), py::arg("plural_idx") = 1, py::arg("singular_idx") = 0);

  py::class_<ProbeResult>(m, "ProbeResult")
      .def_readonly("lemma", &ProbeResult::lemma)
      .def_readonly("wordform", &ProbeResult::wordform)
      .def_readonly("number", &ProbeResult::number)
      .def_readonly("scheme", &ProbeResult::scheme)
      .def_readonly("variant", &ProbeResult::variant)
      .def_readonly("article_type", &ProbeResult::article_type)
      .def_readonly("log_odds", &ProbeResult::log_odds)
      .def_readonly("correct", &ProbeResult::correct)
      .def_readonly("tokens", &ProbeResult::tokens);
  m.def(
      "run_probe",
      [](const Lexicon& lexicon, const Vocabulary& vocab, ScorerHandle& scorer,
         std::vector<Variant> variants, std::vector<ArticleType> article_types,
         std::size_t concurrency) {
        ProbeOptions opts;
        opts.variants = std::move(variants);
        opts.article_types = std::move(article_types);
        opts.concurrency = concurrency;
        py::gil_scoped_release release;
        return RunProbe(lexicon, vocab, scorer, opts).results;
      },
      py::arg("lexicon"), py::arg("vocab"), py::arg("scorer"),
      py::arg("variants") = std::vector<Variant>{Variant::kOriginal, Variant::kArtificial},
      py::arg("article_types") =
          std::vector<ArticleType>{ArticleType::kDefinite, ArticleType::kIndefinite},
      py::arg("concurrency") = 8);
  m.def(
      "accuracy_table",
      [](const std::vector<ProbeResult>& results) {
        py::list out;
        for (const auto& c : AccuracyTable(results)) {
          py::dict d;
          d["scheme"] = c.scheme;
          d["variant"] = c.variant;
          d["n"] = c.n;
          d["accuracy"] = c.accuracy;
          d["mean_log_odds"] = c.mean_log_odds;
          d["sd_log_odds"] = c.sd_log_odds;
          out.append(d);
        }
        return out;
      },
      py::arg("results"));
  m.def(
      "probe_results_csv",
      [](const std::vector<ProbeResult>& results) {
        return ProbeCsvHeader() + ProbeResultsToCsvRows(results);
      },
      py::arg("results"));

  // Summaries.
  m.def(
      "mean_sd",
      [](const std::vector<double>& values) {
        MeanSd r = ComputeMeanSd(values);
        return py::make_tuple(r.mean, r.sd, r.n);
      },
      py::arg("values"), "Returns (mean, sd, n).");

  // Analysis.
  py::class_<LdaModel>(m, "LdaModel")
      .def_readonly("labels", &LdaModel::labels)
      .def_readonly("class_counts", &LdaModel::class_counts)
      .def_readonly("global_mean", &LdaModel::global_mean)
      .def_readonly("eigenvalues", &LdaModel::eigenvalues)
      .def_readonly("axes", &LdaModel::axes)
      .def_readonly("shrinkage", &LdaModel::shrinkage)
      .def_readonly("lambda_eff", &LdaModel::lambda_eff)
      .def("to_json", &LdaModelToJson);
  m.def(
      "lda_fit",
      [](const Eigen::MatrixXd& vectors, const std::vector<std::string>& labels,
         double shrinkage) { return LdaFit(ToRecords(vectors, labels), shrinkage); },
      py::arg("vectors"), py::arg("labels"), py::arg("shrinkage") = kDefaultShrinkage);
  m.def(
      "lda_project",
      [](const LdaModel& model, const Eigen::MatrixXd& vectors) {
        std::vector<std::string> labels(vectors.rows());
        auto coords = LdaProject(model, ToRecords(vectors, labels));
        return ToMatrix(coords, model.num_axes());
      },
      py::arg("model"), py::arg("vectors"));

  py::class_<Coefficient>(m, "Coefficient")
      .def_readonly("term", &Coefficient::term)
      .def_readonly("beta", &Coefficient::beta)
      .def_readonly("se", &Coefficient::se)
      .def_readonly("t", &Coefficient::t)
      .def_readonly("p", &Coefficient::p);
  py::class_<RegressionSummary>(m, "RegressionSummary")
      .def_readonly("coefficients", &RegressionSummary::coefficients)
      .def_readonly("r_squared", &RegressionSummary::r_squared)
      .def_readonly("n", &RegressionSummary::n)
      .def_readonly("residuals", &RegressionSummary::residuals)
      .def_readonly("warnings", &RegressionSummary::warnings)
      .def("__getitem__", &RegressionSummary::Get, py::return_value_policy::reference_internal)
      .def("to_json", &RegressionToJson);
  m.def(
      "ols_fit",
      [](const Eigen::MatrixXd& x, const std::vector<double>& y,
         std::vector<std::string> terms) {
        return OlsFit({std::move(terms), x}, y);
      },
      py::arg("x"), py::arg("y"), py::arg("terms"));
  m.def("freq_by_scheme", &FreqByScheme, py::arg("entries"), py::arg("records"));
  m.def(
      "log_odds_regression",
      [](const std::vector<ProbeResult>& results, const Lexicon& lexicon) {
        return LogOddsRegression(results, lexicon);
      },
      py::arg("results"), py::arg("lexicon"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Returns (exit_code, stdout, stderr).");
}
