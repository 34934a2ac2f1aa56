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

#include "seqlab/testing/oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <tuple>

#include "seqlab/ensemble.h"
#include "seqlab/error.h"
#include "seqlab/neural.h"
#include "seqlab/tagger.h"

namespace seqlab::testing {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void fill_normal(std::span<double> values, Rng& rng, double scale = 1.0) {
  for (double& v : values) v = scale * rng.normal();
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

// Collects per-group errors for one layer.
class Tracker {
 public:
  explicit Tracker(std::string layer) { report_.layer = std::move(layer); }

  void compare(const std::string& group, std::span<const double> analytic,
               std::span<const double> numeric) {
    const double err = relative_error(analytic, numeric);
    report_.components += analytic.size();
    if (err >= report_.max_error) {
      report_.max_error = err;
      report_.worst = group;
    }
  }

  // Numeric gradient of `loss` with respect to `values`, compared with `analytic`.
  void check(const std::string& group, const std::function<double()>& loss,
             std::span<double> values, std::span<const double> analytic, double eps) {
    const auto numeric = finite_diff_grad(loss, values, eps);
    compare(group, analytic, numeric);
  }

  void next_instance() { ++report_.instances; }
  GradientReport report() const { return report_; }

 private:
  GradientReport report_;
};

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
  return s;
}

template <class P>
std::vector<ParamTensor*> collect(P& params) {
  std::vector<ParamTensor*> out;
  params.for_each([&](ParamTensor& t) { out.push_back(&t); });
  return out;
}

void randomize(std::vector<ParamTensor*> tensors, Rng& rng, double scale) {
  for (ParamTensor* t : tensors) fill_normal(t->values, rng, scale);
}

const std::vector<std::string> kWordPool = {
    "the", "of", "a", "with", "no", "NO", "all", "ALL", "and", "patient", "patients",
    "pain", "chest", "fever", "CT", "scan", "x-ray", "5mg", "Lasix", "her", "blood",
    "pressure", "c5-6", "was", "given", "T", "d", "'s", "acute", "renal"};

}  // namespace

// ---------------------------------------------------------------------------
// CRF

double naive_path_score(const Matrix& emissions, const CrfParams& params,
                        std::span<const std::size_t> tags) {
  const std::size_t k = params.num_tags();
  double s = params.start[tags[0]] + emissions(0, tags[0]);
  for (std::size_t t = 1; t < tags.size(); ++t) {
    s = s + params.transitions[tags[t - 1] * k + tags[t]] + emissions(t, tags[t]);
  }
  return s + params.stop[tags.back()];
}

CrfEnumeration enumerate_crf(const Matrix& emissions, const CrfParams& params) {
  const std::size_t len = emissions.rows();
  const std::size_t k = params.num_tags();
  std::vector<std::size_t> path(len, 0);
  std::vector<std::vector<std::size_t>> legal;
  std::vector<double> scores;
  while (true) {
    bool ok = params.mask.start(path[0]);
    for (std::size_t t = 1; ok && t < len; ++t) ok = params.mask.transition(path[t - 1], path[t]);
    if (ok) {
      legal.push_back(path);
      scores.push_back(naive_path_score(emissions, params, path));
    }
    std::size_t pos = 0;
    while (pos < len && ++path[pos] == k) path[pos++] = 0;
    if (pos == len) break;
  }
  if (legal.empty()) throw InvalidArgument("no legal path");

  CrfEnumeration out;
  out.legal_paths = legal.size();
  out.best_score = *std::max_element(scores.begin(), scores.end());
  // Lowest final tag first, then lowest predecessors: compare from the end.
  const std::vector<std::size_t>* best = nullptr;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    if (scores[i] != out.best_score) continue;
    if (best == nullptr ||
        std::lexicographical_compare(legal[i].rbegin(), legal[i].rend(), best->rbegin(),
                                     best->rend())) {
      best = &legal[i];
    }
  }
  out.best_path = *best;

  double m = out.best_score;
  long double total = 0.0L;
  for (double s : scores) total += std::exp(static_cast<long double>(s - m));
  out.log_partition = m + static_cast<double>(std::log(total));

  std::vector<long double> acc(len * k, 0.0L);
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const long double p = std::exp(static_cast<long double>(scores[i] - m)) / total;
    for (std::size_t t = 0; t < len; ++t) acc[t * k + legal[i][t]] += p;
  }
  out.marginals = Matrix(len, k);
  for (std::size_t i = 0; i < acc.size(); ++i) out.marginals.data()[i] = static_cast<double>(acc[i]);
  return out;
}

CrfInstance random_crf_instance(Rng& rng, std::size_t length, std::size_t num_tags,
                                bool integer_scores) {
  LegalityMask mask(num_tags);
  const double kind = rng.uniform();
  if (num_tags % 2 == 1 && kind < 0.5) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < num_tags / 2; ++i) labels.push_back("c" + std::to_string(i));
    mask = transition_mask(labels);
  } else if (kind < 0.8) {
    for (std::size_t i = 1; i < num_tags; ++i) {
      if (rng.uniform() < 0.2) mask.set_start(i, false);
      for (std::size_t j = 1; j < num_tags; ++j) {
        if (rng.uniform() < 0.25) mask.set_transition(i, j, false);
      }
    }
  }
  CrfInstance inst{Matrix(length, num_tags), CrfParams::create(num_tags, mask)};
  auto draw = [&]() {
    return integer_scores ? static_cast<double>(rng.below(5)) - 2.0 : rng.normal();
  };
  for (double& v : inst.emissions.data()) v = draw();
  for (ParamTensor* t : collect(inst.params)) {
    for (double& v : t->values) v = draw();
  }
  return inst;
}

std::vector<std::size_t> random_legal_path(Rng& rng, const CrfParams& params,
                                           std::size_t length) {
  // Backward reachability so a partial path can always be completed.
  const std::size_t k = params.num_tags();
  std::vector<std::vector<char>> can_finish(length, std::vector<char>(k, 0));
  for (std::size_t j = 0; j < k; ++j) can_finish[length - 1][j] = 1;
  for (std::size_t t = length - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (params.mask.transition(i, j) && can_finish[t + 1][j]) can_finish[t][i] = 1;
      }
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<std::size_t> options;
    for (std::size_t j = 0; j < k; ++j) {
      const bool reach = t == 0 ? params.mask.start(j) : params.mask.transition(path.back(), j);
      if (reach && can_finish[t][j]) options.push_back(j);
    }
    if (options.empty()) throw InvalidArgument("no legal path");
    path.push_back(options[rng.below(options.size())]);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Gradients

double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                      double floor) {
  if (analytic.size() != numeric.size()) throw InvalidArgument("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::max(std::sqrt(na) + std::sqrt(nn), floor);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

GradientReport check_conv1d(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("conv1d");
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t k = between(rng, 1, 4), d = between(rng, 1, 4);
    const std::size_t len = between(rng, k, k + 4);
    Matrix input(len, d);
    fill_normal(input.data(), rng);
    std::vector<double> kernel(k * d);
    fill_normal(kernel, rng);
    double bias = rng.normal();
    std::vector<double> w(len - k + 1);
    fill_normal(w, rng);
    auto loss = [&] { return weighted_sum(w, conv1d_valid(input, kernel, k, bias)); };

    Matrix d_input(len, d);
    std::vector<double> d_kernel(k * d, 0.0);
    double d_bias = 0.0;
    conv1d_valid_backward(input, kernel, k, w, &d_input, d_kernel, d_bias);
    tr.check("input", loss, input.data(), d_input.data(), eps);
    tr.check("kernel", loss, kernel, d_kernel, eps);
    tr.check("bias", loss, std::span<double>(&bias, 1), std::span<const double>(&d_bias, 1), eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_char_encoder(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("char_encoder");
  CharEncoderConfig config;
  config.embedding_dim = 3;
  config.filters = 2;
  config.output_dim = 4;
  for (std::size_t n = 0; n < instances; ++n) {
    auto params = CharEncoderParams::create(config);
    randomize(collect(params), rng, 0.7);
    const std::size_t len = between(rng, 7, 10);
    std::vector<int> chars(len, CharVocab::kPad);
    const std::size_t used = between(rng, 1, len);
    for (std::size_t i = 0; i < used; ++i) chars[i] = static_cast<int>(rng.below(CharVocab::kSize));
    const bool training = n % 2 == 1;
    const double rate = 0.3;
    const std::uint64_t mask_seed = rng.next();
    std::vector<double> w(config.output_dim);
    fill_normal(w, rng);
    auto loss = [&] {
      Rng masks(mask_seed);
      return weighted_sum(w, char_encoder_forward(chars, params, training, rate, &masks));
    };

    CharEncoderCache cache;
    Rng masks(mask_seed);
    char_encoder_forward(chars, params, training, rate, &masks, &cache);
    auto grads = params;
    for (ParamTensor* t : collect(grads)) t->fill(0.0);
    char_encoder_backward(cache, params, w, grads);
    const auto p = collect(params);
    const auto g = collect(grads);
    for (std::size_t i = 0; i < p.size(); ++i) tr.check(p[i]->name, loss, p[i]->values, g[i]->values, eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_lstm_step(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("lstm_step");
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t d = between(rng, 1, 4), u = between(rng, 1, 4);
    auto params = LstmParams::create("lstm", d, u);
    randomize(collect(params), rng, 0.7);
    std::vector<double> x(d), h(u), c(u), wh(u), wc(u);
    for (auto* v : {&x, &h, &c, &wh, &wc}) fill_normal(*v, rng);
    auto loss = [&] {
      const auto s = lstm_step(x, h, c, params);
      return weighted_sum(wh, s.h) + weighted_sum(wc, s.c);
    };

    LstmStepCache cache;
    lstm_step(x, h, c, params, &cache);
    auto grads = params;
    for (ParamTensor* t : collect(grads)) t->fill(0.0);
    std::vector<double> dx(d), dh(u), dc(u);
    lstm_step_backward(cache, params, wh, wc, grads, dx, dh, dc);
    const auto p = collect(params);
    const auto g = collect(grads);
    for (std::size_t i = 0; i < p.size(); ++i) tr.check(p[i]->name, loss, p[i]->values, g[i]->values, eps);
    tr.check("x", loss, x, dx, eps);
    tr.check("h", loss, h, dh, eps);
    tr.check("c", loss, c, dc, eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_bilstm(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("bilstm");
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t len = between(rng, 1, 4), d = between(rng, 1, 4), u = between(rng, 1, 3);
    auto params = BiLstmParams::create("bilstm", d, u);
    randomize(collect(params), rng, 0.7);
    Matrix seq(len, d);
    fill_normal(seq.data(), rng);
    std::vector<double> w(len * 2 * u);
    fill_normal(w, rng);
    auto loss = [&] { return weighted_sum(w, bilstm_apply(seq, params).data()); };

    BiLstmCache cache;
    bilstm_apply(seq, params, &cache);
    auto grads = params;
    for (ParamTensor* t : collect(grads)) t->fill(0.0);
    Matrix d_out(len, 2 * u);
    d_out.data() = w;
    const Matrix d_seq = bilstm_backward(cache, params, d_out, grads);
    const auto p = collect(params);
    const auto g = collect(grads);
    for (std::size_t i = 0; i < p.size(); ++i) tr.check(p[i]->name, loss, p[i]->values, g[i]->values, eps);
    tr.check("input", loss, seq.data(), d_seq.data(), eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_dense(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("projection");
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t in = between(rng, 1, 6), out = between(rng, 1, 7);
    auto params = DenseParams::create("projection", in, out);
    randomize(collect(params), rng, 1.0);
    std::vector<double> x(in), w(out);
    fill_normal(x, rng);
    fill_normal(w, rng);
    auto loss = [&] { return weighted_sum(w, dense_forward(x, params)); };
    auto grads = params;
    for (ParamTensor* t : collect(grads)) t->fill(0.0);
    std::vector<double> dx(in, 0.0);
    dense_backward(x, params, w, dx, grads);
    const auto p = collect(params);
    const auto g = collect(grads);
    for (std::size_t i = 0; i < p.size(); ++i) tr.check(p[i]->name, loss, p[i]->values, g[i]->values, eps);
    tr.check("input", loss, x, dx, eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_crf_nll(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("crf_nll");
  for (std::size_t n = 0; n < instances; ++n) {
    auto inst = random_crf_instance(rng, between(rng, 1, 5), between(rng, 2, 5));
    const auto gold = random_legal_path(rng, inst.params, inst.emissions.rows());
    auto loss = [&] { return crf_nll_grad(inst.emissions, inst.params, gold).nll; };
    const auto g = crf_nll_grad(inst.emissions, inst.params, gold);
    tr.check("emissions", loss, inst.emissions.data(), g.d_emissions.data(), eps);
    tr.check("transitions", loss, inst.params.transitions.values, g.d_transitions, eps);
    tr.check("start", loss, inst.params.start.values, g.d_start, eps);
    tr.check("stop", loss, inst.params.stop.values, g.d_stop, eps);
    tr.next_instance();
  }
  return tr.report();
}

GradientReport check_full_model(std::size_t instances, std::uint64_t seed, double eps) {
  Rng rng(seed);
  Tracker tr("full_model");
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t len = between(rng, 1, 4);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(kWordPool[rng.below(kWordPool.size())]);

    ModelConfig config;
    config.label_set = n % 3 == 0 ? std::vector<std::string>{"problem"} : default_label_set();
    config.word_dim = 6;
    config.char_encoder.embedding_dim = 3;
    config.char_encoder.filters = 2;
    config.char_encoder.output_dim = 4;
    config.max_word_len = between(rng, 7, 9);
    config.bilstm1_units = 3;
    config.bilstm2_units = 2;
    if (n % 2 == 1) {
      config.word_source = WordSource::kTrainableLookup;
      config.word_vocabulary = {tokens.front(), "unused"};
    } else {
      config.hash_seed = rng.next();
    }
    ModelBundle bundle = init_model(config, rng.next());
    randomize(collect(bundle.params.crf), rng, 0.5);
    const Featurizer featurize(bundle, nullptr);
    const SentenceInput input = featurize(0, tokens);
    const auto gold = random_legal_path(rng, bundle.params.crf, len);
    const bool training = n % 4 != 2;
    const std::uint64_t mask_seed = rng.next();

    auto loss = [&] {
      Rng masks(mask_seed);
      return sentence_nll(bundle, input, gold, training, &masks, nullptr);
    };
    ModelParams grads = bundle.params.zeros_like();
    Rng masks(mask_seed);
    sentence_nll(bundle, input, gold, training, &masks, &grads);
    const auto p = bundle.params.tensors();
    const auto g = grads.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) tr.check(p[i]->name, loss, p[i]->values, g[i]->values, eps);
    tr.next_instance();
  }
  return tr.report();
}

// ---------------------------------------------------------------------------
// Corpora

TaggedCorpus random_corpus(Rng& rng, const std::vector<std::string>& label_set,
                           std::size_t max_sentences, std::size_t max_len) {
  TaggedCorpus corpus;
  corpus.label_set = label_set;
  const std::size_t n = between(rng, 1, max_sentences);
  for (std::size_t s = 0; s < n; ++s) {
    Sentence sentence;
    const std::size_t len = between(rng, 1, max_len);
    std::string prev = "O";
    for (std::size_t i = 0; i < len; ++i) {
      sentence.tokens.push_back(kWordPool[rng.below(kWordPool.size())]);
      const double u = rng.uniform();
      std::string tag;
      if (u < 0.45) {
        tag = "O";
      } else if (u < 0.75 || prev == "O") {
        tag = "B-" + label_set[rng.below(label_set.size())];
      } else {
        tag = "I-" + prev.substr(2);
      }
      sentence.tags.push_back(tag);
      prev = tag;
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

RelabelConfig random_relabel_config(Rng& rng) {
  static const std::vector<std::string> kStop = {"the", "of", "a", "with", "no", "all", "and",
                                                 "her", "was", "'s", "d", "t"};
  static const std::vector<std::string> kFrequent = {"patient", "patients", "pain", "blood"};
  static const std::vector<std::string> kWhitelist = {"NO", "ALL", "CT", "T", "d"};
  auto subset = [&](const std::vector<std::string>& pool) {
    std::vector<std::string> out;
    for (const auto& w : pool) {
      if (rng.uniform() < 0.5) out.push_back(w);
    }
    return out;
  };
  auto stop = subset(kStop);
  auto freq = subset(kFrequent);
  auto white = subset(kWhitelist);
  return RelabelConfig(stop, freq, white);
}

TaggedCorpus perturb_corpus(Rng& rng, const TaggedCorpus& gold) {
  TaggedCorpus pred = gold;
  const TagSet tags(gold.label_set);
  for (auto& sentence : pred.sentences) {
    for (auto& tag : sentence.tags) {
      if (rng.uniform() < 0.25) tag = tags.decode(std::vector<std::size_t>{rng.below(tags.size())})[0];
    }
    sentence.tags = repair_iob(sentence.tags);
  }
  return pred;
}

std::map<std::string, NaiveCounts> naive_entity_counts(const TaggedCorpus& gold,
                                                       const TaggedCorpus& pred) {
  using Key = std::tuple<std::size_t, std::string, std::size_t, std::size_t>;
  auto collect_spans = [](const TaggedCorpus& corpus) {
    std::set<Key> out;
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
      const auto& tags = corpus.sentences[s].tags;
      for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].rfind("B-", 0) != 0) continue;
        const std::string label = tags[i].substr(2);
        std::size_t j = i;
        while (j + 1 < tags.size() && tags[j + 1] == "I-" + label) ++j;
        out.emplace(s, label, i, j);
      }
    }
    return out;
  };
  const auto g = collect_spans(gold);
  const auto p = collect_spans(pred);
  std::map<std::string, NaiveCounts> counts;
  for (const auto& key : g) {
    auto& c = counts[std::get<1>(key)];
    if (p.contains(key)) {
      ++c.tp;
    } else {
      ++c.fn;
    }
  }
  for (const auto& key : p) {
    if (!g.contains(key)) ++counts[std::get<1>(key)].fp;
  }
  return counts;
}

double naive_token_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  std::size_t same = 0, total = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    for (std::size_t i = 0; i < gold.sentences[s].tags.size(); ++i) {
      same += gold.sentences[s].tags[i] == pred.sentences[s].tags[i];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace seqlab::testing
