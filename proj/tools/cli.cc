// Copyright 2026 The seqlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "seqlab/corpus.h"
#include "seqlab/ensemble.h"
#include "seqlab/error.h"
#include "seqlab/eval.h"
#include "seqlab/features.h"
#include "seqlab/relabel.h"
#include "seqlab/tagger.h"
#include "seqlab/testing/acceptance.h"

namespace seqlab::cli {
namespace {

template <class T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument(std::string("bad ") + what + " '" + text + "'");
  }
  return value;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Prefixes parse errors with the file they came from.
TaggedCorpus read_corpus(const std::string& path,
                         const std::vector<std::string>& labels = default_label_set()) {
  try {
    return read_conll_file(path, labels);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Blank-line separated tokens, one per line, no tags.
TaggedCorpus read_token_file(const std::string& path) {
  std::istringstream in(read_text(path));
  TaggedCorpus corpus;
  Sentence current;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
      current = {};
      continue;
    }
    current.tokens.push_back(line);
    current.tags.push_back("O");
  }
  if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
  return corpus;
}

void require_valid(const TaggedCorpus& corpus, const std::string& path) {
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto v = validate_iob(corpus.sentences[s].tags);
    if (!v.empty()) {
      throw InvalidArgument(path + ": sentence " + std::to_string(s) + ", token " +
                            std::to_string(v.front().index) + ": " + v.front().message);
    }
  }
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path + " for writing");
  file << text;
  if (!file) throw Error("failed writing " + path);
}

std::vector<std::string> vocabulary_of(const TaggedCorpus& corpus) {
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  for (const auto& s : corpus.sentences) {
    for (const auto& w : s.tokens) {
      if (seen.insert(w).second) vocab.push_back(w);
    }
  }
  return vocab;
}

std::size_t measure_word_len(const TaggedCorpus& corpus) {
  std::vector<std::vector<std::string>> tokens;
  for (const auto& s : corpus.sentences) tokens.push_back(s.tokens);
  return longest_word(tokens);
}

std::unique_ptr<EmbeddingFileProvider> load_embeddings(const std::string& path) {
  try {
    return std::make_unique<EmbeddingFileProvider>(load_embedding_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestArgs {
  std::vector<std::string> texts;
  std::vector<std::string> concepts;
  std::string out;
};

int do_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  if (a.texts.size() != a.concepts.size()) {
    throw InvalidArgument("--text and --con must be given the same number of times");
  }
  TaggedCorpus merged;
  for (std::size_t i = 0; i < a.texts.size(); ++i) {
    I2b2Document doc;
    try {
      doc = parse_i2b2(read_text(a.texts[i]), read_text(a.concepts[i]));
    } catch (const ParseError& e) {
      throw ParseError(a.concepts[i] + ": " + e.what());
    }
    for (const auto& w : doc.warnings) err << a.concepts[i] << ": warning: " << w << "\n";
    const TaggedCorpus part = i2b2_to_corpus(doc, merged.label_set);
    merged.label_set = part.label_set;
    merged.sentences.insert(merged.sentences.end(), part.sentences.begin(), part.sentences.end());
  }
  emit(write_conll(merged), a.out, out);
  return 0;
}

struct RelabelArgs {
  std::string input;
  std::string config;
  std::string summary;
  std::string out;
};

int do_relabel(const RelabelArgs& a, std::ostream& out, std::ostream& err) {
  const TaggedCorpus corpus = read_corpus(a.input);
  require_valid(corpus, a.input);
  const RelabelConfig config =
      a.config.empty() ? default_relabel_config() : load_relabel_config(a.config);
  const auto result = relabel_corpus(corpus, config);
  emit(write_conll(result.corpus), a.out, out);
  const std::string summary = summary_to_json(result.summary) + "\n";
  if (a.summary.empty()) {
    err << summary;
  } else {
    emit(summary, a.summary, out);
  }
  return 0;
}

struct StatsArgs {
  std::string input;
  std::string out;
};

int do_stats(const StatsArgs& a, std::ostream& out) {
  const TaggedCorpus corpus = read_corpus(a.input);
  require_valid(corpus, a.input);
  emit(stats_to_json(corpus_stats(corpus)) + "\n", a.out, out);
  return 0;
}

struct TrainArgs {
  std::string train;
  std::string validation;
  std::string embeddings = "hash:768:0";
  std::string validation_embeddings;
  std::string config;
  std::string out;
  std::string report;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_word_len;
  std::optional<double> learning_rate;
  bool verbose = false;
};

int do_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  // Resolve the configuration: defaults < JSON file < flags.
  ModelConfig config;
  bool labels_from_file = false;
  if (!a.config.empty()) {
    const std::string text = read_text(a.config);
    try {
      merge_config_json(config, text);
    } catch (const ParseError& e) {
      throw ParseError(a.config + ": " + e.what());
    }
    ModelConfig probe;
    probe.label_set.clear();
    merge_config_json(probe, text);
    labels_from_file = !probe.label_set.empty();
  }
  const TaggedCorpus corpus = read_corpus(a.train, config.label_set);
  require_valid(corpus, a.train);
  if (!labels_from_file) {
    config.label_set = corpus.label_set;
  } else if (corpus.label_set.size() != config.label_set.size()) {
    throw InvalidArgument(a.train + ": classes outside the configured label_set");
  }

  const EmbeddingSpec spec = parse_embedding_spec(a.embeddings);
  std::unique_ptr<WordVectorProvider> provider;
  switch (spec.kind) {
    case EmbeddingSpec::Kind::kFile: {
      auto file = load_embeddings(spec.path);
      config.word_source = WordSource::kEmbeddingFile;
      config.word_dim = file->dim();
      provider = std::move(file);
      break;
    }
    case EmbeddingSpec::Kind::kHash:
      config.word_source = WordSource::kHashStub;
      config.word_dim = spec.dim;
      config.hash_seed = spec.seed;
      provider = std::make_unique<HashProvider>(spec.dim, spec.seed);
      break;
    case EmbeddingSpec::Kind::kLookup:
      config.word_source = WordSource::kTrainableLookup;
      config.word_dim = spec.dim;
      config.word_vocabulary = vocabulary_of(corpus);
      break;
  }
  if (a.seed) config.rng_seed = *a.seed;
  if (a.epochs) config.epochs = *a.epochs;
  if (a.patience) config.patience = *a.patience;
  if (a.learning_rate) config.learning_rate = *a.learning_rate;
  if (a.max_word_len) {
    config.max_word_len = *a.max_word_len == 0
                              ? std::max(measure_word_len(corpus), config.char_encoder.max_kernel())
                              : *a.max_word_len;
  }
  config.validate();

  std::optional<TaggedCorpus> validation;
  std::unique_ptr<EmbeddingFileProvider> validation_file;
  std::optional<TrainData> validation_data;
  if (!a.validation.empty()) {
    validation = read_corpus(a.validation, config.label_set);
    require_valid(*validation, a.validation);
    if (validation->label_set.size() != config.label_set.size()) {
      throw InvalidArgument(a.validation + ": classes unseen in training");
    }
    const WordVectorProvider* vp = provider.get();
    if (config.word_source == WordSource::kEmbeddingFile) {
      if (a.validation_embeddings.empty()) {
        throw InvalidArgument("--validation with file embeddings needs --validation-embeddings");
      }
      validation_file = load_embeddings(a.validation_embeddings);
      vp = validation_file.get();
    }
    validation_data = TrainData{&*validation, vp};
  }

  const ModelBundle initial = init_model(config, config.rng_seed);
  const auto on_epoch = [&](std::size_t epoch, double nll, std::optional<double> f1) {
    if (!a.verbose) return;
    err << "epoch " << epoch << "  nll " << std::fixed << std::setprecision(4) << nll;
    if (f1) err << "  f1 " << *f1;
    err << std::defaultfloat << "\n";
  };
  const TrainResult result =
      train(initial, TrainData{&corpus, provider.get()}, validation_data, on_epoch);
  save_model(result.bundle, a.out);
  emit(report_to_json(result.report) + "\n", a.report, out);
  return 0;
}

struct TagArgs {
  std::string model;
  std::string input;
  std::string embeddings;
  std::string out;
  std::string format = "conll";
  std::size_t threads = 1;
};

int do_tag(const TagArgs& a, std::ostream& out) {
  const ModelBundle bundle = load_model(a.model);
  const TaggedCorpus corpus = a.format == "tokens" ? read_token_file(a.input)
                                                   : read_corpus(a.input, bundle.config.label_set);
  std::unique_ptr<WordVectorProvider> provider;
  if (!a.embeddings.empty()) {
    const EmbeddingSpec spec = parse_embedding_spec(a.embeddings);
    if (spec.kind == EmbeddingSpec::Kind::kFile) {
      provider = load_embeddings(spec.path);
    } else if (spec.kind == EmbeddingSpec::Kind::kHash) {
      provider = std::make_unique<HashProvider>(spec.dim, spec.seed);
    } else {
      throw InvalidArgument("lookup embeddings live inside the model; drop --embeddings");
    }
  }
  TaggedCorpus tagged = tag_corpus(bundle, corpus, provider.get(), a.threads);
  emit(write_conll(tagged), a.out, out);
  return 0;
}

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string out;
  bool table = false;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  const TaggedCorpus gold = read_corpus(a.gold);
  const TaggedCorpus pred = read_corpus(a.pred, gold.label_set);
  require_valid(gold, a.gold);
  require_valid(pred, a.pred);
  const EvalReport report = entity_prf(gold, pred);
  const std::string json = report_json(report) + "\n";
  if (!a.out.empty()) {
    emit(json, a.out, out);
    out << report_table(report);
  } else if (a.table) {
    out << report_table(report);
  } else {
    out << json;
  }
  return 0;
}

struct VoteArgs {
  std::vector<std::string> predictions;
  std::string out;
};

int do_vote(const VoteArgs& a, std::ostream& out) {
  std::vector<TaggedCorpus> corpora;
  std::vector<std::string> labels = default_label_set();
  for (const auto& path : a.predictions) {
    corpora.push_back(read_corpus(path, labels));
    labels = corpora.back().label_set;
  }
  for (auto& c : corpora) c.label_set = labels;
  emit(write_conll(vote_corpora(corpora)), a.out, out);
  return 0;
}

struct SelftestArgs {
  std::vector<std::string> only;
};

int do_selftest(const SelftestArgs& a, std::ostream& out) {
  const auto results = testing::run_acceptance(a.only, [&](const testing::CriterionResult& r) {
    out << testing::format_result(r) << std::endl;
  });
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.passed;
  out << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

EmbeddingSpec parse_embedding_spec(const std::string& text) {
  EmbeddingSpec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "file") {
    if (rest.empty()) throw InvalidArgument("--embeddings file:<path> needs a path");
    spec.kind = EmbeddingSpec::Kind::kFile;
    spec.path = rest;
  } else if (kind == "hash") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) throw InvalidArgument("--embeddings expects hash:<dim>:<seed>");
    spec.kind = EmbeddingSpec::Kind::kHash;
    spec.dim = parse_number<std::size_t>(rest.substr(0, sep), "dimension");
    spec.seed = parse_number<std::uint64_t>(rest.substr(sep + 1), "seed");
  } else if (kind == "lookup") {
    spec.kind = EmbeddingSpec::Kind::kLookup;
    spec.dim = parse_number<std::size_t>(rest, "dimension");
  } else {
    throw InvalidArgument("--embeddings must start with file:, hash: or lookup:, got '" + text + "'");
  }
  if (spec.kind != EmbeddingSpec::Kind::kFile && spec.dim == 0) {
    throw InvalidArgument("embedding dimension must be positive");
  }
  return spec;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biomedical named-entity tagger: BiLSTM-CRF with character CNN and "
               "writing-format features"};
  app.name("seqlab");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert i2b2 report/.con pairs to CoNLL");
  ingest_cmd->add_option("--text", ingest.texts, "Report text file (repeatable)")->required();
  ingest_cmd->add_option("--con", ingest.concepts, "Matching .con file (repeatable)")->required();
  ingest_cmd->add_option("--out", ingest.out, "Output CoNLL file (default stdout)");

  RelabelArgs relabel;
  auto* relabel_cmd = app.add_subcommand("relabel", "Apply enhanced labeling to a CoNLL corpus");
  relabel_cmd->add_option("--input", relabel.input, "CoNLL corpus")->required();
  relabel_cmd->add_option("--relabel-config", relabel.config, "JSON naming the word lists");
  relabel_cmd->add_option("--summary", relabel.summary, "Write the change summary here (default stderr)");
  relabel_cmd->add_option("--out", relabel.out, "Output CoNLL file (default stdout)");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Tag distribution, entity counts and lengths");
  stats_cmd->add_option("--input", stats.input, "CoNLL corpus")->required();
  stats_cmd->add_option("--out", stats.out, "Output JSON file (default stdout)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it to --out");
  train_cmd->add_option("--train", tr.train, "Training CoNLL corpus")->required();
  train_cmd->add_option("--validation", tr.validation, "Validation CoNLL corpus");
  train_cmd->add_option("--embeddings", tr.embeddings,
                        "file:<path> | hash:<dim>:<seed> | lookup:<dim>")
      ->capture_default_str();
  train_cmd->add_option("--validation-embeddings", tr.validation_embeddings,
                        "Embedding file for the validation corpus");
  train_cmd->add_option("--config", tr.config, "JSON model configuration");
  train_cmd->add_option("--seed", tr.seed, "Seed for initialization, shuffling and dropout");
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs");
  train_cmd->add_option("--patience", tr.patience, "Stop after N epochs without validation gain");
  train_cmd->add_option("--max-word-len", tr.max_word_len, "Character row length; 0 measures the corpus");
  train_cmd->add_option("--lr", tr.learning_rate, "Learning rate");
  train_cmd->add_option("--out", tr.out, "Model file")->required();
  train_cmd->add_option("--report", tr.report, "Training report JSON (default stdout)");
  train_cmd->add_flag("--verbose", tr.verbose, "Log every epoch to stderr");

  TagArgs tag;
  auto* tag_cmd = app.add_subcommand("tag", "Tag a corpus with a trained model");
  tag_cmd->add_option("--model", tag.model, "Model file")->required();
  tag_cmd->add_option("--input", tag.input, "Corpus to tag")->required();
  tag_cmd->add_option("--format", tag.format, "conll (gold tags ignored) or tokens")
      ->check(CLI::IsMember({"conll", "tokens"}))
      ->capture_default_str();
  tag_cmd->add_option("--embeddings", tag.embeddings, "Word vectors for this corpus");
  tag_cmd->add_option("--threads", tag.threads, "Worker threads")->check(CLI::PositiveNumber);
  tag_cmd->add_option("--out", tag.out, "Output CoNLL file (default stdout)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Entity-level precision, recall and F1");
  eval_cmd->add_option("--gold", ev.gold, "Gold CoNLL corpus")->required();
  eval_cmd->add_option("--pred", ev.pred, "Predicted CoNLL corpus")->required();
  eval_cmd->add_option("--out", ev.out, "Write the JSON report here and print the table");
  eval_cmd->add_flag("--table", ev.table, "Print the text table instead of JSON");

  VoteArgs vote;
  auto* vote_cmd = app.add_subcommand("vote", "Per-token majority vote over prediction files");
  vote_cmd->add_option("predictions", vote.predictions, "Prediction CoNLL files")
      ->required()
      ->expected(1, -1);
  vote_cmd->add_option("--out", vote.out, "Output CoNLL file (default stdout)");

  SelftestArgs self;
  auto* self_cmd = app.add_subcommand("selftest", "Run the oracle and acceptance suites");
  self_cmd->add_option("--only", self.only, "Criterion ids to run (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ingest_cmd) return do_ingest(ingest, out, err);
    if (*relabel_cmd) return do_relabel(relabel, out, err);
    if (*stats_cmd) return do_stats(stats, out);
    if (*train_cmd) return do_train(tr, out, err);
    if (*tag_cmd) return do_tag(tag, out);
    if (*eval_cmd) return do_eval(ev, out);
    if (*vote_cmd) return do_vote(vote, out);
    if (*self_cmd) return do_selftest(self, out);
  } catch (const std::exception& e) {
    err << "seqlab " << app.get_subcommands().front()->get_name() << ": error: " << e.what()
        << "\n";
    return 1;
  }
  return 2;
}

}  // namespace seqlab::cli
