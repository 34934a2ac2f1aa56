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

#include "seqlab/tagger.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "seqlab/error.h"
#include "seqlab/eval.h"

namespace seqlab {
namespace {

using Json = nlohmann::ordered_json;

WordSource source_from_string(const std::string& s) {
  for (WordSource w : {WordSource::kEmbeddingFile, WordSource::kTrainableLookup,
                       WordSource::kHashStub}) {
    if (s == to_string(w)) return w;
  }
  throw InvalidArgument("unknown word source '" + s + "'");
}

template <class T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void zero(ModelParams& grads) {
  for (ParamTensor* t : grads.tensors()) t->fill(0.0);
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("model config: " + msg); };
  if (label_set.empty()) fail("label_set is empty");
  if (std::set<std::string>(label_set.begin(), label_set.end()).size() != label_set.size()) {
    fail("label_set has duplicates");
  }
  for (const auto& l : label_set) {
    if (l.empty()) fail("empty label");
  }
  if (word_dim == 0) fail("word_dim must be positive");
  if (char_encoder.embedding_dim == 0 || char_encoder.filters == 0 ||
      char_encoder.output_dim == 0 || char_encoder.kernel_sizes.empty()) {
    fail("character encoder dimensions must be positive");
  }
  for (std::size_t k : char_encoder.kernel_sizes) {
    if (k == 0) fail("kernel sizes must be positive");
  }
  if (max_word_len < char_encoder.max_kernel()) {
    fail("max_word_len must be at least the widest kernel (" +
         std::to_string(char_encoder.max_kernel()) + ")");
  }
  if (format_dim != kFormatDim) fail("format_dim must be 8");
  if (bilstm1_units == 0 || bilstm2_units == 0) fail("BiLSTM units must be positive");
  for (double rate : {char_dropout, bilstm_dropout, dropout}) {
    if (!(rate >= 0.0 && rate < 1.0)) fail("dropout rates must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (optimizer != "nadam") fail("unsupported optimizer '" + optimizer + "'");
}

std::string config_to_json(const ModelConfig& c) {
  Json j;
  j["label_set"] = c.label_set;
  j["word_source"] = to_string(c.word_source);
  j["word_dim"] = c.word_dim;
  j["hash_seed"] = c.hash_seed;
  j["word_vocabulary"] = c.word_vocabulary;
  j["char_embedding_dim"] = c.char_encoder.embedding_dim;
  j["char_filters"] = c.char_encoder.filters;
  j["char_kernel_sizes"] = c.char_encoder.kernel_sizes;
  j["char_output_dim"] = c.char_encoder.output_dim;
  j["max_word_len"] = c.max_word_len;
  j["format_dim"] = c.format_dim;
  j["bilstm1_units"] = c.bilstm1_units;
  j["bilstm2_units"] = c.bilstm2_units;
  j["char_dropout"] = c.char_dropout;
  j["bilstm_dropout"] = c.bilstm_dropout;
  j["dropout"] = c.dropout;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["optimizer"] = c.optimizer;
  j["rng_seed"] = c.rng_seed;
  j["patience"] = c.patience;
  return j.dump();
}

void merge_config_json(ModelConfig& c, std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model config: expected a JSON object");
  static const std::set<std::string> kKnown = {
      "label_set", "word_source", "word_dim", "hash_seed", "word_vocabulary",
      "char_embedding_dim", "char_filters", "char_kernel_sizes", "char_output_dim",
      "max_word_len", "format_dim", "bilstm1_units", "bilstm2_units", "char_dropout",
      "bilstm_dropout", "dropout", "learning_rate", "epochs", "optimizer", "rng_seed",
      "patience", "format_version"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw ParseError("model config: unknown key '" + key + "'");
  }
  try {
    read_key(j, "label_set", c.label_set);
    if (j.contains("word_source")) c.word_source = source_from_string(j.at("word_source"));
    read_key(j, "word_dim", c.word_dim);
    read_key(j, "hash_seed", c.hash_seed);
    read_key(j, "word_vocabulary", c.word_vocabulary);
    read_key(j, "char_embedding_dim", c.char_encoder.embedding_dim);
    read_key(j, "char_filters", c.char_encoder.filters);
    read_key(j, "char_kernel_sizes", c.char_encoder.kernel_sizes);
    read_key(j, "char_output_dim", c.char_encoder.output_dim);
    read_key(j, "max_word_len", c.max_word_len);
    read_key(j, "format_dim", c.format_dim);
    read_key(j, "bilstm1_units", c.bilstm1_units);
    read_key(j, "bilstm2_units", c.bilstm2_units);
    read_key(j, "char_dropout", c.char_dropout);
    read_key(j, "bilstm_dropout", c.bilstm_dropout);
    read_key(j, "dropout", c.dropout);
    read_key(j, "learning_rate", c.learning_rate);
    read_key(j, "epochs", c.epochs);
    read_key(j, "optimizer", c.optimizer);
    read_key(j, "rng_seed", c.rng_seed);
    read_key(j, "patience", c.patience);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
}

ModelConfig config_from_json(std::string_view json_text) {
  ModelConfig c;
  merge_config_json(c, json_text);
  return c;
}

ModelParams ModelParams::create(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  if (config.word_source == WordSource::kTrainableLookup) {
    p.word_lookup = ParamTensor("word_lookup", {config.word_vocabulary.size() + 1, config.word_dim});
  }
  p.char_encoder = CharEncoderParams::create(config.char_encoder, "char");
  p.bilstm1 = BiLstmParams::create("bilstm1", config.input_dim(), config.bilstm1_units);
  p.bilstm2 = BiLstmParams::create("bilstm2", 2 * config.bilstm1_units, config.bilstm2_units);
  p.projection = DenseParams::create("projection", 2 * config.bilstm2_units, config.num_tags());
  p.crf = CrfParams::create(config.num_tags(), transition_mask(config.label_set), "crf");
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (ParamTensor* t : z.tensors()) t->fill(0.0);
  return z;
}

std::vector<ParamTensor*> ModelParams::tensors() {
  std::vector<ParamTensor*> out;
  auto add = [&](ParamTensor& t) { out.push_back(&t); };
  if (!word_lookup.values.empty()) add(word_lookup);
  char_encoder.for_each(add);
  bilstm1.for_each(add);
  bilstm2.for_each(add);
  projection.for_each(add);
  crf.for_each(add);
  return out;
}

std::vector<const ParamTensor*> ModelParams::tensors() const {
  std::vector<const ParamTensor*> out;
  for (ParamTensor* t : const_cast<ModelParams*>(this)->tensors()) out.push_back(t);
  return out;
}

bool ModelBundle::bitwise_equal(const ModelBundle& other) const {
  if (!(config == other.config) || format_version != other.format_version) return false;
  if (!(params.crf.mask == other.params.crf.mask)) return false;
  const auto a = params.tensors();
  const auto b = other.params.tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]->bitwise_equal(*b[i])) return false;
  }
  return true;
}

ModelBundle init_model(const ModelConfig& config, std::uint64_t seed) {
  ModelBundle bundle;
  bundle.config = config;
  bundle.params = ModelParams::create(config);
  Rng rng(seed);
  auto& p = bundle.params;
  p.char_encoder.init(rng);
  p.bilstm1.init(rng);
  p.bilstm2.init(rng);
  p.projection.init(rng);
  if (!p.word_lookup.values.empty()) {
    glorot_uniform(p.word_lookup, p.word_lookup.shape[0], p.word_lookup.shape[1], rng);
  }
  return bundle;
}

Featurizer::Featurizer(const ModelBundle& bundle, const WordVectorProvider* provider)
    : provider_(provider),
      source_(bundle.config.word_source),
      word_dim_(bundle.config.word_dim),
      max_word_len_(bundle.config.max_word_len) {
  switch (source_) {
    case WordSource::kTrainableLookup: {
      const auto& vocab = bundle.config.word_vocabulary;
      for (std::size_t i = 0; i < vocab.size(); ++i) lookup_rows_.emplace(vocab[i], i + 1);
      provider_ = nullptr;
      return;
    }
    case WordSource::kHashStub:
      if (provider_ == nullptr) {
        own_hash_.emplace(word_dim_, bundle.config.hash_seed);
        provider_ = &*own_hash_;
      }
      break;
    case WordSource::kEmbeddingFile:
      if (provider_ == nullptr) {
        throw InvalidArgument("this model reads word vectors from an embedding file; none given");
      }
      break;
  }
  if (provider_->dim() != word_dim_) {
    throw InvalidArgument("word vectors have dimension " + std::to_string(provider_->dim()) +
                          " but the model expects " + std::to_string(word_dim_));
  }
}

SentenceInput Featurizer::operator()(std::size_t sentence_id,
                                     const std::vector<std::string>& tokens) const {
  SentenceInput input;
  input.words = tokens;
  const CharVocab& vocab = build_char_vocab();
  if (source_ == WordSource::kTrainableLookup) {
    for (const auto& w : tokens) {
      TokenFeatures f;
      f.chars = encode_chars(w, max_word_len_, vocab);
      f.format = writing_format(w);
      input.tokens.push_back(std::move(f));
      auto it = lookup_rows_.find(w);
      input.lookup_rows.push_back(it == lookup_rows_.end() ? 0 : it->second);
    }
    return input;
  }
  input.tokens = assemble_features(sentence_id, tokens, *provider_, vocab, max_word_len_);
  return input;
}

Matrix model_forward(const ModelBundle& bundle, const SentenceInput& input, bool training,
                     Rng* rng, ForwardCache* cache) {
  const ModelConfig& cfg = bundle.config;
  const ModelParams& p = bundle.params;
  const std::size_t t_len = input.size();
  if (t_len == 0) throw InvalidArgument("model_forward: empty sentence");
  if (training && rng == nullptr) throw InvalidArgument("model_forward: training needs an rng");
  const bool lookup = cfg.word_source == WordSource::kTrainableLookup;
  if (lookup && input.lookup_rows.size() != t_len) {
    throw InvalidArgument("model_forward: missing lookup rows");
  }

  const std::size_t wd = cfg.word_dim;
  const std::size_t cd = p.char_encoder.output_dim();
  Matrix x(t_len, cfg.input_dim());
  if (cache != nullptr) cache->chars.assign(t_len, {});
  for (std::size_t t = 0; t < t_len; ++t) {
    const TokenFeatures& tok = input.tokens[t];
    auto row = x.row(t);
    if (lookup) {
      const std::size_t r = input.lookup_rows[t];
      if (r >= p.word_lookup.shape[0]) throw InvalidArgument("lookup row out of range");
      std::copy_n(p.word_lookup.values.begin() + static_cast<std::ptrdiff_t>(r * wd), wd,
                  row.begin());
    } else {
      if (tok.word.size() != wd) {
        throw InvalidArgument("word vector of length " + std::to_string(tok.word.size()) +
                              ", model expects " + std::to_string(wd));
      }
      std::copy(tok.word.begin(), tok.word.end(), row.begin());
    }
    if (tok.chars.size() != cfg.max_word_len) {
      throw InvalidArgument("character row length differs from max_word_len");
    }
    const auto chars = char_encoder_forward(tok.chars, p.char_encoder, training, cfg.char_dropout,
                                            rng, cache ? &cache->chars[t] : nullptr);
    std::copy(chars.begin(), chars.end(), row.begin() + static_cast<std::ptrdiff_t>(wd));
    std::copy(tok.format.onehot.begin(), tok.format.onehot.end(),
              row.begin() + static_cast<std::ptrdiff_t>(wd + cd));
  }

  Matrix h1 = bilstm_apply(x, p.bilstm1, cache ? &cache->bilstm1 : nullptr);
  std::vector<double> mask1;
  if (training && cfg.bilstm_dropout > 0.0) {
    mask1 = dropout_mask(h1.data().size(), cfg.bilstm_dropout, *rng);
    for (std::size_t i = 0; i < mask1.size(); ++i) h1.data()[i] *= mask1[i];
  }
  Matrix h2 = bilstm_apply(h1, p.bilstm2, cache ? &cache->bilstm2 : nullptr);
  std::vector<double> mask2;
  if (training && cfg.dropout > 0.0) {
    mask2 = dropout_mask(h2.data().size(), cfg.dropout, *rng);
    for (std::size_t i = 0; i < mask2.size(); ++i) h2.data()[i] *= mask2[i];
  }
  Matrix emissions(t_len, cfg.num_tags());
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto e = dense_forward(h2.row(t), p.projection);
    std::copy(e.begin(), e.end(), emissions.row(t).begin());
  }
  if (cache != nullptr) {
    cache->input = std::move(x);
    cache->h1 = std::move(h1);
    cache->mask1 = std::move(mask1);
    cache->h2 = std::move(h2);
    cache->mask2 = std::move(mask2);
  }
  return emissions;
}

void model_backward(const ModelBundle& bundle, const SentenceInput& input,
                    const ForwardCache& cache, const Matrix& d_emissions, ModelParams& grads) {
  const ModelConfig& cfg = bundle.config;
  const ModelParams& p = bundle.params;
  const std::size_t t_len = input.size();
  Matrix d_h2(t_len, cache.h2.cols());
  for (std::size_t t = 0; t < t_len; ++t) {
    dense_backward(cache.h2.row(t), p.projection, d_emissions.row(t), d_h2.row(t),
                   grads.projection);
  }
  for (std::size_t i = 0; i < cache.mask2.size(); ++i) d_h2.data()[i] *= cache.mask2[i];
  Matrix d_h1 = bilstm_backward(cache.bilstm2, p.bilstm2, d_h2, grads.bilstm2);
  for (std::size_t i = 0; i < cache.mask1.size(); ++i) d_h1.data()[i] *= cache.mask1[i];
  const Matrix d_x = bilstm_backward(cache.bilstm1, p.bilstm1, d_h1, grads.bilstm1);

  const std::size_t wd = cfg.word_dim;
  const std::size_t cd = p.char_encoder.output_dim();
  const bool lookup = cfg.word_source == WordSource::kTrainableLookup;
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto row = d_x.row(t);
    if (lookup) {
      double* g = grads.word_lookup.values.data() + input.lookup_rows[t] * wd;
      for (std::size_t k = 0; k < wd; ++k) g[k] += row[k];
    }
    char_encoder_backward(cache.chars[t], p.char_encoder, row.subspan(wd, cd), grads.char_encoder);
  }
}

double sentence_nll(const ModelBundle& bundle, const SentenceInput& input,
                    std::span<const std::size_t> gold, bool training, Rng* rng,
                    ModelParams* grads) {
  ForwardCache cache;
  const Matrix emissions =
      model_forward(bundle, input, training, rng, grads != nullptr ? &cache : nullptr);
  if (grads == nullptr) {
    return log_partition(emissions, bundle.params.crf) -
           path_score(emissions, bundle.params.crf, gold);
  }
  CrfNllGrad crf = crf_nll_grad(emissions, bundle.params.crf, gold);
  for (std::size_t i = 0; i < crf.d_transitions.size(); ++i) {
    grads->crf.transitions[i] += crf.d_transitions[i];
  }
  for (std::size_t k = 0; k < crf.d_start.size(); ++k) {
    grads->crf.start[k] += crf.d_start[k];
    grads->crf.stop[k] += crf.d_stop[k];
  }
  model_backward(bundle, input, cache, crf.d_emissions, *grads);
  return crf.nll;
}

std::string report_to_json(const TrainReport& report) {
  Json j;
  j["epochs_run"] = report.epochs_run();
  j["epoch_nll"] = report.epoch_nll;
  j["validation_f1"] = report.validation_f1;
  j["best_epoch"] = report.best_epoch;
  j["seconds"] = report.seconds;
  return j.dump(2);
}

TagSequence predict(const ModelBundle& bundle, const SentenceInput& input) {
  if (input.size() == 0) return {};
  const Matrix emissions = model_forward(bundle, input, false, nullptr);
  const auto best = viterbi_decode(emissions, bundle.params.crf);
  return TagSet(bundle.config.label_set).decode(best.tags);
}

Prediction predict_with_marginals(const ModelBundle& bundle, const SentenceInput& input) {
  Prediction out;
  if (input.size() == 0) return out;
  const Matrix emissions = model_forward(bundle, input, false, nullptr);
  out.tags = TagSet(bundle.config.label_set).decode(viterbi_decode(emissions, bundle.params.crf).tags);
  out.marginals = forward_backward_marginals(emissions, bundle.params.crf);
  return out;
}

TaggedCorpus tag_corpus(const ModelBundle& bundle, const TaggedCorpus& corpus,
                        const WordVectorProvider* provider, std::size_t threads) {
  const Featurizer featurize(bundle, provider);
  TaggedCorpus out;
  out.label_set = bundle.config.label_set;
  out.sentences.resize(corpus.sentences.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t s = first; s < corpus.sentences.size(); s += stride) {
      const auto& tokens = corpus.sentences[s].tokens;
      out.sentences[s] = {tokens, predict(bundle, featurize(s, tokens))};
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, corpus.sentences.size()));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, threads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

TrainResult train(ModelBundle bundle, const TrainData& training,
                  std::optional<TrainData> validation, const EpochCallback& on_epoch) {
  const auto started = std::chrono::steady_clock::now();
  const ModelConfig& cfg = bundle.config;
  cfg.validate();
  if (training.corpus == nullptr) throw InvalidArgument("train: no training corpus");
  const TagSet tag_set(cfg.label_set);

  const Featurizer featurize(bundle, training.provider);
  std::vector<SentenceInput> inputs;
  std::vector<std::vector<std::size_t>> gold;
  for (std::size_t s = 0; s < training.corpus->sentences.size(); ++s) {
    const auto& sentence = training.corpus->sentences[s];
    if (sentence.size() == 0) continue;
    const auto violations = validate_iob(sentence.tags);
    if (!violations.empty()) {
      throw InvalidArgument("training sentence " + std::to_string(s) + ": " +
                            violations.front().message);
    }
    inputs.push_back(featurize(s, sentence.tokens));
    gold.push_back(tag_set.encode(sentence.tags));
  }
  if (inputs.empty()) throw InvalidArgument("train: training corpus has no tokens");

  std::optional<Featurizer> validation_featurize;
  if (validation) {
    if (validation->corpus == nullptr) throw InvalidArgument("train: empty validation data");
    validation_featurize.emplace(bundle, validation->provider);
  }

  Rng rng(cfg.rng_seed);
  ModelParams grads = bundle.params.zeros_like();
  std::vector<ParamTensor*> param_list = bundle.params.tensors();
  std::vector<const ParamTensor*> grad_list;
  for (ParamTensor* g : grads.tensors()) grad_list.push_back(g);
  std::vector<const ParamTensor*> const_params(param_list.begin(), param_list.end());
  OptimizerState state = make_optimizer_state(const_params);

  TrainReport report;
  std::optional<ModelParams> best_params;
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t s : order) {
      zero(grads);
      const double nll = sentence_nll(bundle, inputs[s], gold[s], true, &rng, &grads);
      if (!std::isfinite(nll)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", sentence " +
                           std::to_string(s));
      }
      try {
        nadam_step(param_list, grad_list, state, cfg.learning_rate);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                           ", sentence " + std::to_string(s));
      }
      total += nll;
    }
    report.epoch_nll.push_back(total / static_cast<double>(inputs.size()));

    std::optional<double> f1;
    if (validation) {
      TaggedCorpus predicted;
      predicted.label_set = cfg.label_set;
      const auto& vc = *validation->corpus;
      for (std::size_t s = 0; s < vc.sentences.size(); ++s) {
        const auto& tokens = vc.sentences[s].tokens;
        predicted.sentences.push_back({tokens, predict(bundle, (*validation_featurize)(s, tokens))});
      }
      f1 = entity_prf(vc, predicted).micro.f1;
      report.validation_f1.push_back(*f1);
      if (*f1 > best_f1) {
        best_f1 = *f1;
        report.best_epoch = epoch;
        since_best = 0;
        if (cfg.patience > 0) best_params = bundle.params;
      } else {
        ++since_best;
      }
    }
    if (on_epoch) on_epoch(epoch, report.epoch_nll.back(), f1);
    if (validation && cfg.patience > 0 && since_best >= cfg.patience) break;
  }
  if (best_params) bundle.params = std::move(*best_params);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(bundle), std::move(report)};
}

}  // namespace seqlab
