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

// The full tagger: word vector + character CNN + writing format ->
// BiLSTM -> dropout -> BiLSTM -> dropout -> linear projection -> CRF.

#ifndef SEQLAB_TAGGER_H_
#define SEQLAB_TAGGER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqlab/corpus.h"
#include "seqlab/crf.h"
#include "seqlab/features.h"
#include "seqlab/neural.h"
#include "seqlab/tensor.h"

namespace seqlab {

struct ModelConfig {
  std::vector<std::string> label_set = default_label_set();
  WordSource word_source = WordSource::kHashStub;
  std::size_t word_dim = 768;
  std::uint64_t hash_seed = 0;                // hash-stub only
  std::vector<std::string> word_vocabulary;  // trainable-lookup only
  CharEncoderConfig char_encoder;
  std::size_t max_word_len = 30;
  std::size_t format_dim = kFormatDim;
  std::size_t bilstm1_units = 275;  // per direction
  std::size_t bilstm2_units = 100;  // per direction
  double char_dropout = 0.50;
  double bilstm_dropout = 0.25;  // after BiLSTM-1
  double dropout = 0.50;         // after BiLSTM-2
  double learning_rate = 0.02;
  std::size_t epochs = 200;
  std::string optimizer = "nadam";
  std::uint64_t rng_seed = 1;
  std::size_t patience = 0;  // 0 disables early stopping

  // Throws InvalidArgument describing the first problem found.
  void validate() const;
  std::size_t num_tags() const { return 2 * label_set.size() + 1; }
  std::size_t input_dim() const { return word_dim + char_encoder.output_dim + format_dim; }
  bool operator==(const ModelConfig&) const = default;
};

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(std::string_view json_text);
// Overwrites only the keys present in `json_text`.
void merge_config_json(ModelConfig& config, std::string_view json_text);

struct ModelParams {
  ParamTensor word_lookup;  // [(V+1) x word_dim], empty unless trainable-lookup
  CharEncoderParams char_encoder;
  BiLstmParams bilstm1;
  BiLstmParams bilstm2;
  DenseParams projection;  // [2*bilstm2_units x K]
  CrfParams crf;

  // Shapes from `config`, all values zero.
  static ModelParams create(const ModelConfig& config);
  ModelParams zeros_like() const;

  std::vector<ParamTensor*> tensors();
  std::vector<const ParamTensor*> tensors() const;
};

struct ModelBundle {
  static constexpr int kFormatVersion = 1;

  ModelConfig config;
  ModelParams params;
  int format_version = kFormatVersion;

  bool bitwise_equal(const ModelBundle& other) const;
};

// Glorot weights, zero biases, forget-gate bias 1, zero CRF scores. Same
// seed, same bundle.
ModelBundle init_model(const ModelConfig& config, std::uint64_t seed);

// Everything the network consumes for one sentence.
struct SentenceInput {
  std::vector<std::string> words;
  std::vector<TokenFeatures> tokens;
  std::vector<std::size_t> lookup_rows;  // trainable-lookup only
  std::size_t size() const { return tokens.size(); }
};

// Turns tokens into SentenceInput for a given bundle. `provider` may be null
// for trainable-lookup bundles; it must outlive the featurizer.
class Featurizer {
 public:
  Featurizer(const ModelBundle& bundle, const WordVectorProvider* provider);

  SentenceInput operator()(std::size_t sentence_id, const std::vector<std::string>& tokens) const;

 private:
  const WordVectorProvider* provider_;
  std::optional<HashProvider> own_hash_;
  std::unordered_map<std::string, std::size_t> lookup_rows_;
  WordSource source_;
  std::size_t word_dim_;
  std::size_t max_word_len_;
};

struct ForwardCache {
  std::vector<CharEncoderCache> chars;
  Matrix input;  // [T x input_dim]
  BiLstmCache bilstm1;
  Matrix h1;  // after dropout
  std::vector<double> mask1;
  BiLstmCache bilstm2;
  Matrix h2;  // after dropout
  std::vector<double> mask2;
};

// [T x K] emission scores. Training mode draws dropout masks from `rng`.
Matrix model_forward(const ModelBundle& bundle, const SentenceInput& input, bool training,
                     Rng* rng, ForwardCache* cache = nullptr);

// Accumulates parameter gradients for the given emission gradient.
void model_backward(const ModelBundle& bundle, const SentenceInput& input,
                    const ForwardCache& cache, const Matrix& d_emissions, ModelParams& grads);

// CRF negative log-likelihood of `gold` (tag indices); accumulates the full
// gradient into `grads` when non-null.
double sentence_nll(const ModelBundle& bundle, const SentenceInput& input,
                    std::span<const std::size_t> gold, bool training, Rng* rng,
                    ModelParams* grads);

struct TrainReport {
  std::vector<double> epoch_nll;            // mean per-sentence NLL seen during the epoch
  std::vector<double> validation_f1;        // empty without a validation corpus
  std::size_t best_epoch = 0;               // 1-based; 0 without validation
  double seconds = 0.0;

  std::size_t epochs_run() const { return epoch_nll.size(); }
};

std::string report_to_json(const TrainReport& report);

struct TrainData {
  const TaggedCorpus* corpus = nullptr;
  const WordVectorProvider* provider = nullptr;  // null allowed for trainable lookup
};

using EpochCallback = std::function<void(std::size_t epoch, double nll, std::optional<double> f1)>;

struct TrainResult {
  ModelBundle bundle;
  TrainReport report;
};

// Per-sentence Nadam training with a shuffled order each epoch. Runs
// config.epochs epochs; with a validation set and patience > 0 stops after
// `patience` epochs without F1 improvement and returns the best parameters.
// Throws NumericError naming epoch and sentence on a non-finite loss.
TrainResult train(ModelBundle bundle, const TrainData& training,
                  std::optional<TrainData> validation = std::nullopt,
                  const EpochCallback& on_epoch = {});

// Constrained Viterbi over evaluation-mode emissions.
TagSequence predict(const ModelBundle& bundle, const SentenceInput& input);

struct Prediction {
  TagSequence tags;
  Matrix marginals;  // [T x K] CRF posteriors
};
Prediction predict_with_marginals(const ModelBundle& bundle, const SentenceInput& input);

// Tags every sentence of `corpus` (gold tags ignored). `threads` > 1 splits
// sentences across worker threads; output order is unaffected.
TaggedCorpus tag_corpus(const ModelBundle& bundle, const TaggedCorpus& corpus,
                        const WordVectorProvider* provider, std::size_t threads = 1);

// Binary container: "SEQLAB01", u64 length + JSON config, then per tensor
// u32 name length, name, u32 rank, u64 dims, little-endian float64 values.
std::string serialize_model(const ModelBundle& bundle);
ModelBundle deserialize_model(std::string_view bytes);
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

}  // namespace seqlab

#endif  // SEQLAB_TAGGER_H_
