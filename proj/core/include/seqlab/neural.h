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

// Minimal 64-bit layer kernel with hand-written backward passes: 1-D
// convolution, the multi-branch character CNN, dense layers, LSTM cells,
// bidirectional LSTMs, inverted dropout and the Nadam optimizer.
//
// Every `*_backward` function accumulates into the gradient arguments; the
// caller zeroes them once per example.

#ifndef SEQLAB_NEURAL_H_
#define SEQLAB_NEURAL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqlab/tensor.h"

namespace seqlab {

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(ParamTensor& tensor, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// ---------------------------------------------------------------------------
// Convolution

// Stride 1, no padding: out[t] = bias + sum_{j<k, c<d} input(t+j, c) * kernel[j*d + c].
// `kernel` is k x d row-major. Throws InvalidArgument when input.rows() < k.
std::vector<double> conv1d_valid(const Matrix& input, std::span<const double> kernel,
                                 std::size_t k, double bias);

void conv1d_valid_backward(const Matrix& input, std::span<const double> kernel, std::size_t k,
                           std::span<const double> d_output, Matrix* d_input,
                           std::span<double> d_kernel, double& d_bias);

// ---------------------------------------------------------------------------
// Dense

struct DenseParams {
  ParamTensor weights;  // [in x out]
  ParamTensor bias;     // [out]

  static DenseParams create(const std::string& prefix, std::size_t in, std::size_t out);
  std::size_t input_dim() const { return weights.shape.at(0); }
  std::size_t output_dim() const { return weights.shape.at(1); }
  void init(Rng& rng);

  template <class F>
  void for_each(F&& f) {
    f(weights);
    f(bias);
  }
  template <class F>
  void for_each(F&& f) const {
    f(weights);
    f(bias);
  }
};

std::vector<double> dense_forward(std::span<const double> x, const DenseParams& params);
// `d_x` may be empty when the input gradient is not needed.
void dense_backward(std::span<const double> x, const DenseParams& params,
                    std::span<const double> d_y, std::span<double> d_x, DenseParams& grads);

// ---------------------------------------------------------------------------
// Dropout

// Inverted dropout scales: each entry is 0 with probability `rate`, else
// 1 / (1 - rate). Rate 0 yields all ones and consumes no randomness.
std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng);

// ---------------------------------------------------------------------------
// Character CNN

struct CharEncoderConfig {
  std::size_t embedding_dim = 25;  // d_ce
  std::size_t filters = 15;        // per branch
  std::vector<std::size_t> kernel_sizes = {3, 5, 7};
  std::size_t output_dim = 45;

  std::size_t max_kernel() const;
  bool operator==(const CharEncoderConfig&) const = default;
};

struct CharEncoderParams {
  ParamTensor embedding;               // [97 x d_ce]
  std::vector<ParamTensor> kernels;    // per branch [filters x k x d_ce]
  std::vector<ParamTensor> biases;     // per branch [filters]
  DenseParams dense;                   // [branches*filters x output_dim]
  std::vector<std::size_t> kernel_sizes;

  static CharEncoderParams create(const CharEncoderConfig& config,
                                  const std::string& prefix = "char");
  std::size_t embedding_dim() const { return embedding.shape.at(1); }
  std::size_t filters() const { return biases.front().size(); }
  std::size_t output_dim() const { return dense.output_dim(); }
  // Glorot weights, zero biases, zero PAD embedding row.
  void init(Rng& rng);

  template <class F>
  void for_each(F&& f) {
    f(embedding);
    for (std::size_t b = 0; b < kernels.size(); ++b) {
      f(kernels[b]);
      f(biases[b]);
    }
    dense.for_each(f);
  }
  template <class F>
  void for_each(F&& f) const {
    f(embedding);
    for (std::size_t b = 0; b < kernels.size(); ++b) {
      f(kernels[b]);
      f(biases[b]);
    }
    dense.for_each(f);
  }
};

struct CharEncoderCache {
  std::vector<int> chars;
  Matrix embedded;                          // [L x d_ce]
  std::vector<std::vector<double>> pooled;  // per branch, per filter: tanh(max)
  std::vector<std::vector<std::size_t>> argmax;
  std::vector<double> concat;
  std::vector<double> dense_out;  // tanh(dense)
  std::vector<double> mask;       // empty in evaluation mode
};

// Embedding lookup -> per-branch conv + tanh + global max pool -> concat ->
// dense + tanh -> inverted dropout (training only). `rng` is required when
// training with a positive rate.
std::vector<double> char_encoder_forward(std::span<const int> chars,
                                         const CharEncoderParams& params, bool training,
                                         double dropout_rate, Rng* rng,
                                         CharEncoderCache* cache = nullptr);

void char_encoder_backward(const CharEncoderCache& cache, const CharEncoderParams& params,
                           std::span<const double> d_output, CharEncoderParams& grads);

// ---------------------------------------------------------------------------
// LSTM

// Gate blocks are laid out [input | forget | candidate | output].
struct LstmParams {
  ParamTensor input_weights;      // [d_in x 4u]
  ParamTensor recurrent_weights;  // [u x 4u]
  ParamTensor bias;               // [4u]

  static LstmParams create(const std::string& prefix, std::size_t input_dim, std::size_t units);
  std::size_t input_dim() const { return input_weights.shape.at(0); }
  std::size_t units() const { return recurrent_weights.shape.at(0); }
  // Glorot weights, zero biases except forget gate = 1.
  void init(Rng& rng);

  template <class F>
  void for_each(F&& f) {
    f(input_weights);
    f(recurrent_weights);
    f(bias);
  }
  template <class F>
  void for_each(F&& f) const {
    f(input_weights);
    f(recurrent_weights);
    f(bias);
  }
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> input_gate, forget_gate, candidate, output_gate;
  std::vector<double> tanh_c;
};

LstmState lstm_step(std::span<const double> x, std::span<const double> h,
                    std::span<const double> c, const LstmParams& params,
                    LstmStepCache* cache = nullptr);

// d_h / d_c are gradients with respect to the step's outputs h', c'.
// Writes d_x, d_h_prev, d_c_prev (sized by the caller) and accumulates grads.
void lstm_step_backward(const LstmStepCache& cache, const LstmParams& params,
                        std::span<const double> d_h, std::span<const double> d_c,
                        LstmParams& grads, std::span<double> d_x, std::span<double> d_h_prev,
                        std::span<double> d_c_prev);

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  static BiLstmParams create(const std::string& prefix, std::size_t input_dim, std::size_t units);
  std::size_t units() const { return forward.units(); }
  std::size_t input_dim() const { return forward.input_dim(); }
  void init(Rng& rng) {
    forward.init(rng);
    backward.init(rng);
  }

  template <class F>
  void for_each(F&& f) {
    forward.for_each(f);
    backward.for_each(f);
  }
  template <class F>
  void for_each(F&& f) const {
    forward.for_each(f);
    backward.for_each(f);
  }
};

struct BiLstmCache {
  std::vector<LstmStepCache> forward;   // indexed by position
  std::vector<LstmStepCache> backward;  // indexed by position
};

// output[t] = concat(h_fwd[t], h_bwd[t]); zero initial states.
Matrix bilstm_apply(const Matrix& sequence, const BiLstmParams& params,
                    BiLstmCache* cache = nullptr);

// Returns the gradient with respect to the input sequence.
Matrix bilstm_backward(const BiLstmCache& cache, const BiLstmParams& params,
                       const Matrix& d_output, BiLstmParams& grads);

// ---------------------------------------------------------------------------
// Nadam

struct NadamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  NadamConfig hyper;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

OptimizerState make_optimizer_state(std::span<const ParamTensor* const> params,
                                    NadamConfig hyper = {});

// One Nesterov-accelerated Adam update, t = step after increment:
//   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2
//   m_hat = b1 m / (1 - b1^(t+1)) + (1-b1) g / (1 - b1^t)
//   v_hat = v / (1 - b2^t)
//   theta -= lr m_hat / (sqrt(v_hat) + eps)
// Throws NumericError before touching anything if a gradient is not finite.
void nadam_step(std::span<ParamTensor* const> params, std::span<const ParamTensor* const> grads,
                OptimizerState& state, double learning_rate);

// ---------------------------------------------------------------------------
// Gradient oracle

// Central differences (f(p+eps) - f(p-eps)) / 2eps for each component of
// `params`, which `loss` must read by reference. Values are restored.
std::vector<double> finite_diff_grad(const std::function<double()>& loss,
                                     std::span<double> params, double eps);

}  // namespace seqlab

#endif  // SEQLAB_NEURAL_H_
