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

#include "morphoprobe/cli.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "morphoprobe/csv.h"
#include "morphoprobe/embedding.h"
#include "morphoprobe/lda.h"
#include "morphoprobe/lexicon.h"
#include "morphoprobe/probe.h"
#include "morphoprobe/regression.h"
#include "morphoprobe/scorer.h"
#include "morphoprobe/summary.h"
#include "morphoprobe/text.h"
#include "morphoprobe/tokenization.h"

namespace morphoprobe {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string vocab_path;
  std::string lexicon_path;
  std::string scorer_url;
  std::optional<std::uint64_t> mock_seed;
  std::string mock_bias;
  int mock_dimension = 16;
  std::string variants = "original,artificial";
  std::string articles = "definite,indefinite";
  std::string layers = "9,10,11,12";
  double shrinkage = kDefaultShrinkage;
  std::size_t concurrency = 8;
  double log_base = 10.0;
  std::string out_dir;
  std::string store_path;
  std::string classes = "singular,plural-single-token";
  int retries = 3;
  int backoff_ms = 200;
};

// Thrown for command-line misuse that is not an Error from the library.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical text of every setting that affects outputs; the output
// directory is left out so relocated runs stay byte-identical.
std::string ConfigDigest(const RunConfig& c, std::string_view inputs) {
  std::ostringstream s;
  s << "command=" << c.command << "\nscorer_url=" << c.scorer_url
    << "\nmock_seed=" << (c.mock_seed ? std::to_string(*c.mock_seed) : "")
    << "\nmock_bias=" << c.mock_bias << "\nmock_dimension=" << c.mock_dimension
    << "\nvariants=" << c.variants << "\narticles=" << c.articles
    << "\nlayers=" << c.layers << "\nshrinkage=" << FormatDouble(c.shrinkage)
    << "\nlog_base=" << FormatDouble(c.log_base) << "\nclasses=" << c.classes
    << "\ninputs=" << inputs << "\n";
  return Sha256Hex(s.str()).substr(0, 16);
}

std::vector<std::string> SplitList(std::string_view list) {
  std::vector<std::string> out;
  for (std::string_view item : SplitOn(list, ',')) {
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

std::vector<Variant> ParseVariants(std::string_view list) {
  std::vector<Variant> out;
  for (const auto& item : SplitList(list)) {
    auto v = ParseVariant(item);
    if (!v) throw UsageError("unknown variant '" + item + "'");
    if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  }
  if (out.empty()) throw UsageError("--variants is empty");
  return out;
}

std::vector<ArticleType> ParseArticles(std::string_view list) {
  std::vector<ArticleType> out;
  for (const auto& item : SplitList(list)) {
    auto a = ParseArticleType(item);
    if (!a) throw UsageError("unknown article type '" + item + "'");
    if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
  }
  if (out.empty()) throw UsageError("--articles is empty");
  return out;
}

std::vector<int> ParseLayers(std::string_view list) {
  std::vector<int> out;
  for (const auto& item : SplitList(list)) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad layer '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--layers is empty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw UsageError("--layers must be ascending");
  }
  return out;
}

std::string ReadInput(const std::string& path, std::string_view what) {
  if (path.empty()) throw UsageError("missing --" + std::string(what));
  try {
    return ReadFile(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIoError, std::string(what) + " " + path + ": " +
                                         e.what());
  }
}

std::shared_ptr<const Vocabulary> LoadVocabFile(const std::string& path) {
  std::string text = ReadInput(path, "vocab");
  try {
    return std::make_shared<const Vocabulary>(LoadVocab(text));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

LexiconParse LoadLexiconFile(const std::string& path, double log_base) {
  std::string text = ReadInput(path, "lexicon");
  try {
    return ParseLexicon(text, log_base);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

fs::path PrepareOutDir(const std::string& out_dir) {
  if (out_dir.empty()) throw UsageError("missing --out");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorCode::kIoError, "cannot create output dir " + out_dir);
  }
  return fs::path(out_dir);
}

void Write(const fs::path& path, std::string_view contents) {
  WriteFile(path.string(), contents);
}

ScorerHandle MakeScorer(const RunConfig& c,
                        std::shared_ptr<const Vocabulary> vocab) {
  const bool remote = !c.scorer_url.empty();
  if (remote == c.mock_seed.has_value()) {
    throw UsageError("specify exactly one of --scorer-url or --mock-seed");
  }
  if (remote) {
    RetryPolicy retry;
    retry.max_retries = c.retries;
    retry.initial_backoff = std::chrono::milliseconds(c.backoff_ms);
    return ScorerHandle::Remote(c.scorer_url, std::move(vocab), retry);
  }
  MockConfig mock;
  mock.seed = *c.mock_seed;
  mock.bias = ParseBiasSpec(c.mock_bias);
  mock.dimension = c.mock_dimension;
  return ScorerHandle::Mock(std::move(vocab), std::move(mock));
}

std::string CommentLine(const RunConfig& c, const std::string& digest) {
  return "morphoprobe " + c.command + " config_digest=" + digest;
}

// -------------------------------------------------------------------------

int CmdClassify(const RunConfig& c, std::ostream& out) {
  auto vocab = LoadVocabFile(c.vocab_path);
  LexiconParse parsed = LoadLexiconFile(c.lexicon_path, c.log_base);
  fs::path dir = PrepareOutDir(c.out_dir);
  const std::string digest = ConfigDigest(
      c, vocab->digest() + "," + parsed.lexicon.source_digest());

  std::vector<NounEntry> rows_entries;
  std::vector<TokenizationRecord> rows;
  std::map<Scheme, std::size_t> counts;
  std::size_t excluded_unk = 0;
  for (const auto& entry : parsed.lexicon.entries()) {
    TokenizationRecord rec = ClassifyScheme(entry, *vocab);
    const bool unk = rec.contains_unk;
    const Scheme scheme = rec.scheme;
    rows_entries.push_back(entry);
    rows.push_back(std::move(rec));
    if (unk) {
      ++excluded_unk;
      continue;
    }
    ++counts[scheme];
    if (scheme == Scheme::kMorphemic) continue;
    try {
      rows.push_back(ArtificialTokenize(entry, *vocab));
      rows_entries.push_back(entry);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingAffixPiece &&
          e.code() != ErrorCode::kUnkLemma) {
        throw;
      }
    }
  }
  Write(dir / "classification.csv",
        ClassificationsToCsv(rows_entries, rows, CommentLine(c, digest)));
  CsvWriter rejects;
  rejects.Comment(CommentLine(c, digest));
  Write(dir / "lexicon_rejects.csv",
        rejects.str() + RejectsToCsv(parsed.rejects));

  ordered_json summary;
  summary["config_digest"] = digest;
  summary["single_token"] = counts[Scheme::kSingleToken];
  summary["morphemic"] = counts[Scheme::kMorphemic];
  summary["non_morphemic"] = counts[Scheme::kNonMorphemic];
  summary["excluded_unk"] = excluded_unk;
  summary["rejected_rows"] = parsed.rejects.size();
  Write(dir / "scheme_counts.json", summary.dump(2) + "\n");
  out << summary.dump() << "\n";
  return kExitOk;
}

int CmdProbe(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto vocab = LoadVocabFile(c.vocab_path);
  LexiconParse parsed = LoadLexiconFile(c.lexicon_path, c.log_base);
  ProbeOptions options;
  options.variants = ParseVariants(c.variants);
  options.article_types = ParseArticles(c.articles);
  options.concurrency = std::max<std::size_t>(1, c.concurrency);
  fs::path dir = PrepareOutDir(c.out_dir);
  ScorerHandle scorer = MakeScorer(c, vocab);
  scorer.Handshake();
  const std::string digest = ConfigDigest(
      c, vocab->digest() + "," + parsed.lexicon.source_digest());

  const fs::path csv_path = dir / "probe_results.csv";
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIoError, "cannot write " + csv_path.string());
  csv << "# " << CommentLine(c, digest) << "\n" << ProbeCsvHeader();
  csv.flush();
  options.on_flush = [&csv](std::span<const ProbeResult> chunk) {
    csv << ProbeResultsToCsvRows(chunk);
    csv.flush();
  };
  ProbeRun run = RunProbe(parsed.lexicon, *vocab, scorer, options);
  csv.close();

  ordered_json report;
  report["config_digest"] = digest;
  report["entries_probed"] = run.entries_probed;
  report["skipped_unk"] = run.skipped_unk;
  report["skipped_artificial"] = run.skipped_artificial;
  report["rows"] = run.results.size();
  if (!run.results.empty()) {
    report["accuracy"] =
        ordered_json::parse(AccuracyTableToJson(AccuracyTable(run.results)));
    const ResultKey by_variant[] = {ResultKey::kNumber, ResultKey::kVariant};
    const std::string variant_names[] = {"number", "variant"};
    report["log_odds_by_number_variant"] = ordered_json::parse(SummariesToJson(
        GroupedSummary(run.results, by_variant), variant_names));
    const ResultKey by_scheme[] = {ResultKey::kNumber, ResultKey::kScheme,
                                   ResultKey::kVariant};
    const std::string scheme_names[] = {"number", "scheme", "variant"};
    report["log_odds_by_number_scheme_variant"] =
        ordered_json::parse(SummariesToJson(
            GroupedSummary(run.results, by_scheme), scheme_names));
    try {
      RegressionSummary reg = LogOddsRegression(run.results, parsed.lexicon);
      ordered_json reg_json = ordered_json::parse(RegressionToJson(reg));
      reg_json["config_digest"] = digest;
      Write(dir / "logodds_regression.json", reg_json.dump(2) + "\n");
    } catch (const Error& e) {
      err << "note: log-odds regression skipped: " << e.what() << "\n";
    }
  }
  Write(dir / "accuracy.json", report.dump(2) + "\n");
  out << "probe rows=" << run.results.size()
      << " entries=" << run.entries_probed << " skipped_unk=" << run.skipped_unk
      << "\n";
  return kExitOk;
}

int CmdEmbed(const RunConfig& c, std::ostream& out) {
  auto vocab = LoadVocabFile(c.vocab_path);
  LexiconParse parsed = LoadLexiconFile(c.lexicon_path, c.log_base);
  const std::vector<int> layers = ParseLayers(c.layers);
  fs::path dir = PrepareOutDir(c.out_dir);
  ScorerHandle scorer = MakeScorer(c, vocab);
  scorer.Handshake();

  struct Job {
    std::string wordform;
    std::string label;
    std::vector<std::string> tokens;
  };
  std::vector<Job> jobs;
  std::map<std::string, std::size_t> filtered;
  std::size_t skipped_unk = 0;
  auto add = [&](const std::string& wordform, std::string_view label,
                 std::vector<std::string> tokens) {
    // Singulars must be single tokens; multi-token plurals exactly two.
    const bool keep = label == kLabelSingular || label == kLabelSingleToken
                          ? tokens.size() == 1
                          : tokens.size() == 2;
    if (!keep) {
      ++filtered[std::string(label)];
      return;
    }
    jobs.push_back({wordform, std::string(label), std::move(tokens)});
  };
  for (const auto& entry : parsed.lexicon.entries()) {
    TokenizationRecord plural = ClassifyScheme(entry, *vocab);
    std::vector<std::string> singular = Tokenize(entry.lemma, *vocab);
    if (plural.contains_unk ||
        std::find(singular.begin(), singular.end(), vocab->unk_piece()) !=
            singular.end()) {
      ++skipped_unk;
      continue;
    }
    add(entry.lemma, kLabelSingular, singular);
    std::string_view label = plural.scheme == Scheme::kSingleToken
                                 ? kLabelSingleToken
                             : plural.scheme == Scheme::kMorphemic
                                 ? kLabelMorphemic
                                 : kLabelNonMorphemic;
    add(entry.plural, label, plural.tokens);
    if (plural.scheme != Scheme::kMorphemic) {
      try {
        add(entry.plural, kLabelArtificial,
            ArtificialTokenize(entry, *vocab).tokens);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMissingAffixPiece &&
            e.code() != ErrorCode::kUnkLemma) {
          throw;
        }
      }
    }
  }

  std::vector<EmbeddingRecord> records(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size();
         i = next.fetch_add(1)) {
      try {
        MaskQuery frame = BuildFrame(jobs[i].tokens);
        HiddenStates states = scorer.FetchHiddenStates(frame.tokens, layers);
        std::vector<std::size_t> positions;
        for (std::size_t p = 0; p < jobs[i].tokens.size(); ++p) {
          positions.push_back(p + 2);
        }
        records[i] = {jobs[i].wordform, jobs[i].label,
                      MeanEmbedding(states, positions)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    const std::size_t n_workers =
        std::clamp<std::size_t>(c.concurrency, 1, std::max<std::size_t>(1, jobs.size()));
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::string store = EncodeEmbeddingStore(records);
  Write(dir / "embeddings.bin", store);
  Write(dir / "embeddings.csv", EmbeddingsToCsv(records));
  std::map<std::string, std::size_t> per_label;
  for (const auto& r : records) ++per_label[r.class_label];
  ordered_json report;
  report["config_digest"] = ConfigDigest(
      c, vocab->digest() + "," + parsed.lexicon.source_digest());
  report["dimension"] = records.empty() ? 0 : records.front().vector.size();
  report["layers"] = layers;
  report["records"] = per_label;
  report["filtered_not_two_token"] = filtered;
  report["skipped_unk"] = skipped_unk;
  report["store_sha256"] = Sha256Hex(store);
  Write(dir / "embed_report.json", report.dump(2) + "\n");
  out << "embed records=" << records.size() << " store_sha256="
      << Sha256Hex(store) << "\n";
  return kExitOk;
}

int CmdLda(const RunConfig& c, std::ostream& out) {
  fs::path dir = PrepareOutDir(c.out_dir);
  const std::string store_path =
      c.store_path.empty() ? (dir / "embeddings.bin").string() : c.store_path;
  const std::string bytes = ReadInput(store_path, "store");
  std::vector<EmbeddingRecord> records =
      fs::path(store_path).extension() == ".csv" ? EmbeddingsFromCsv(bytes)
                                                 : DecodeEmbeddingStore(bytes);
  const std::vector<std::string> classes = SplitList(c.classes);
  std::vector<EmbeddingRecord> fit;
  for (const auto& r : records) {
    if (std::find(classes.begin(), classes.end(), r.class_label) !=
        classes.end()) {
      fit.push_back(r);
    }
  }
  for (const auto& label : classes) {
    const bool present = std::any_of(fit.begin(), fit.end(), [&](const auto& r) {
      return r.class_label == label;
    });
    if (!present) {
      throw Error(ErrorCode::kDegenerateClasses,
                  "class '" + label + "' has no records in " + store_path);
    }
  }
  LdaModel model = LdaFit(fit, c.shrinkage);
  const std::string digest = ConfigDigest(c, Sha256Hex(bytes));
  Write(dir / "lda_projections.csv",
        ProjectionsToCsv(records, LdaProject(model, records),
                         CommentLine(c, digest)));
  ordered_json meta = ordered_json::parse(LdaModelToJson(model));
  meta["config_digest"] = digest;
  meta["fit_classes"] = classes;
  meta["projected_records"] = records.size();
  Write(dir / "lda_model.json", meta.dump(2) + "\n");
  out << "lda axes=" << model.num_axes() << " projected=" << records.size()
      << "\n";
  return kExitOk;
}

int CmdFreq(const RunConfig& c, std::ostream& out) {
  auto vocab = LoadVocabFile(c.vocab_path);
  LexiconParse parsed = LoadLexiconFile(c.lexicon_path, c.log_base);
  fs::path dir = PrepareOutDir(c.out_dir);
  std::vector<TokenizationRecord> records;
  for (const auto& e : parsed.lexicon.entries()) {
    records.push_back(ClassifyScheme(e, *vocab));
  }
  RegressionSummary summary =
      FreqByScheme(parsed.lexicon.entries(), records);
  ordered_json j = ordered_json::parse(RegressionToJson(summary));
  j["config_digest"] = ConfigDigest(
      c, vocab->digest() + "," + parsed.lexicon.source_digest());
  Write(dir / "freq_regression.json", j.dump(2) + "\n");
  out << "freq n=" << summary.n << " r_squared="
      << FormatDouble(summary.r_squared) << "\n";
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kScorerUnavailable:
      return kExitScorer;
    case ErrorCode::kEmptySelection:
    case ErrorCode::kDegenerateClasses:
    case ErrorCode::kSingularScatter:
    case ErrorCode::kRankDeficient:
    case ErrorCode::kDegenerateDistribution:
      return kExitDegenerate;
    default:
      return kExitInput;
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  RunConfig c;
  CLI::App app{"Tokenization-scheme probing toolkit for plural agreement",
               "morphoprobe"};
  app.set_config("--config", "", "key=value config file (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--vocab", c.vocab_path, "WordPiece vocab, one piece per line");
  app.add_option("--lexicon", c.lexicon_path, "Noun lexicon TSV");
  app.add_option("--scorer-url", c.scorer_url, "Remote scorer base URL");
  app.add_option("--mock-seed", c.mock_seed, "Use the in-process mock scorer");
  app.add_option("--mock-bias", c.mock_bias, "Mock bias spec");
  app.add_option("--mock-dimension", c.mock_dimension, "Mock hidden size")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", c.out_dir, "Output directory");
  app.add_option("--variants", c.variants, "original,artificial");
  app.add_option("--articles", c.articles, "definite,indefinite");
  app.add_option("--layers", c.layers, "Ascending 1-based layers");
  app.add_option("--shrinkage", c.shrinkage, "LDA shrinkage (x trace/D)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--concurrency", c.concurrency, "In-flight scorer requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-base", c.log_base,
                 "Base of the lexicon's log_frequency column");
  app.add_option("--store", c.store_path,
                 "Embedding store (.bin or .csv) for lda");
  app.add_option("--classes", c.classes, "Comma-separated labels to fit");
  app.add_option("--retries", c.retries, "Remote retries")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--backoff-ms", c.backoff_ms, "Initial retry backoff")
      ->check(CLI::NonNegativeNumber);

  auto* classify = app.add_subcommand("classify", "Classify plural tokenizations");
  auto* probe = app.add_subcommand("probe", "Masked-article log-odds probe");
  auto* embed = app.add_subcommand("embed", "Extract noun embeddings");
  auto* lda = app.add_subcommand("lda", "Fit and project LDA axes");
  auto* freq = app.add_subcommand("freq", "Log-frequency ~ scheme regression");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "morphoprobe: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (classify->parsed()) {
      c.command = "classify";
      return CmdClassify(c, out);
    }
    if (probe->parsed()) {
      c.command = "probe";
      return CmdProbe(c, out, err);
    }
    if (embed->parsed()) {
      c.command = "embed";
      return CmdEmbed(c, out);
    }
    if (lda->parsed()) {
      c.command = "lda";
      return CmdLda(c, out);
    }
    if (freq->parsed()) {
      c.command = "freq";
      return CmdFreq(c, out);
    }
  } catch (const UsageError& e) {
    err << "morphoprobe: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "morphoprobe " << c.command << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  }
  return kExitInput;
}

}  // namespace morphoprobe
