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

#include "seqlab/neural.h"

#include <algorithm>
#include <cmath>

#include "seqlab/error.h"
#include "seqlab/features.h"

namespace seqlab {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

void glorot_uniform(ParamTensor& tensor, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : tensor.values) v = rng.uniform(-limit, limit);
}

std::vector<double> conv1d_valid(const Matrix& input, std::span<const double> kernel,
                                 std::size_t k, double bias) {
  const std::size_t t_len = input.rows();
  const std::size_t d = input.cols();
  require(k >= 1 && kernel.size() == k * d, "conv1d: kernel shape does not match input width");
  if (t_len < k) throw InvalidArgument("conv1d: input shorter than kernel");
  std::vector<double> out(t_len - k + 1, bias);
  const std::size_t window = k * d;
  for (std::size_t t = 0; t < out.size(); ++t) {
    // Rows t..t+k-1 are contiguous, so the window is a flat dot product.
    const double* x = input.data().data() + t * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) acc += x[j] * kernel[j];
    out[t] += acc;
  }
  return out;
}

void conv1d_valid_backward(const Matrix& input, std::span<const double> kernel, std::size_t k,
                           std::span<const double> d_output, Matrix* d_input,
                           std::span<double> d_kernel, double& d_bias) {
  const std::size_t d = input.cols();
  const std::size_t window = k * d;
  require(d_output.size() + k - 1 == input.rows(), "conv1d backward: output length mismatch");
  require(d_kernel.size() == window, "conv1d backward: kernel gradient shape mismatch");
  for (std::size_t t = 0; t < d_output.size(); ++t) {
    const double g = d_output[t];
    if (g == 0.0) continue;
    d_bias += g;
    const double* x = input.data().data() + t * d;
    for (std::size_t j = 0; j < window; ++j) d_kernel[j] += g * x[j];
    if (d_input != nullptr) {
      double* dx = d_input->data().data() + t * d;
      for (std::size_t j = 0; j < window; ++j) dx[j] += g * kernel[j];
    }
  }
}

DenseParams DenseParams::create(const std::string& prefix, std::size_t in, std::size_t out) {
  return {ParamTensor(prefix + ".weights", {in, out}), ParamTensor(prefix + ".bias", {out})};
}

void DenseParams::init(Rng& rng) {
  glorot_uniform(weights, input_dim(), output_dim(), rng);
  bias.fill(0.0);
}

std::vector<double> dense_forward(std::span<const double> x, const DenseParams& params) {
  const std::size_t in = params.input_dim();
  const std::size_t out = params.output_dim();
  require(x.size() == in, "dense: input width mismatch");
  std::vector<double> y(params.bias.values);
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* w = params.weights.values.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) y[j] += xi * w[j];
  }
  return y;
}

void dense_backward(std::span<const double> x, const DenseParams& params,
                    std::span<const double> d_y, std::span<double> d_x, DenseParams& grads) {
  const std::size_t in = params.input_dim();
  const std::size_t out = params.output_dim();
  require(x.size() == in && d_y.size() == out, "dense backward: shape mismatch");
  for (std::size_t j = 0; j < out; ++j) grads.bias[j] += d_y[j];
  for (std::size_t i = 0; i < in; ++i) {
    const double* w = params.weights.values.data() + i * out;
    double* gw = grads.weights.values.data() + i * out;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) {
      gw[j] += x[i] * d_y[j];
      acc += w[j] * d_y[j];
    }
    if (!d_x.empty()) d_x[i] += acc;
  }
}

std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must be in [0, 1)");
  std::vector<double> mask(n, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

std::size_t CharEncoderConfig::max_kernel() const {
  return kernel_sizes.empty() ? 0 : *std::max_element(kernel_sizes.begin(), kernel_sizes.end());
}

CharEncoderParams CharEncoderParams::create(const CharEncoderConfig& config,
                                            const std::string& prefix) {
  if (config.embedding_dim == 0 || config.filters == 0 || config.output_dim == 0 ||
      config.kernel_sizes.empty()) {
    throw InvalidArgument("character encoder dimensions must be positive");
  }
  CharEncoderParams p;
  p.embedding = ParamTensor(prefix + ".embedding", {CharVocab::kSize, config.embedding_dim});
  p.kernel_sizes = config.kernel_sizes;
  for (std::size_t k : config.kernel_sizes) {
    if (k == 0) throw InvalidArgument("kernel size must be positive");
    const std::string name = prefix + ".conv" + std::to_string(k);
    p.kernels.emplace_back(name + ".kernel",
                           std::vector<std::size_t>{config.filters, k, config.embedding_dim});
    p.biases.emplace_back(name + ".bias", std::vector<std::size_t>{config.filters});
  }
  p.dense = DenseParams::create(prefix + ".dense", config.kernel_sizes.size() * config.filters,
                                config.output_dim);
  return p;
}

void CharEncoderParams::init(Rng& rng) {
  glorot_uniform(embedding, CharVocab::kSize, embedding_dim(), rng);
  for (std::size_t c = 0; c < embedding_dim(); ++c) embedding[c] = 0.0;
  for (std::size_t b = 0; b < kernels.size(); ++b) {
    glorot_uniform(kernels[b], kernel_sizes[b] * embedding_dim(), filters(), rng);
    biases[b].fill(0.0);
  }
  dense.init(rng);
}

std::vector<double> char_encoder_forward(std::span<const int> chars,
                                         const CharEncoderParams& params, bool training,
                                         double dropout_rate, Rng* rng, CharEncoderCache* cache) {
  const std::size_t len = chars.size();
  const std::size_t d = params.embedding_dim();
  const std::size_t n_filters = params.filters();
  const std::size_t max_k = *std::max_element(params.kernel_sizes.begin(), params.kernel_sizes.end());
  if (len < max_k) {
    throw InvalidArgument("character row of length " + std::to_string(len) +
                          " is shorter than the widest kernel (" + std::to_string(max_k) + ")");
  }
  Matrix embedded(len, d);
  for (std::size_t l = 0; l < len; ++l) {
    const int idx = chars[l];
    if (idx < 0 || static_cast<std::size_t>(idx) >= params.embedding.shape[0]) {
      throw InvalidArgument("character index out of range");
    }
    const double* row = params.embedding.values.data() + static_cast<std::size_t>(idx) * d;
    std::copy(row, row + d, embedded.row(l).begin());
  }

  const std::size_t branches = params.kernels.size();
  std::vector<double> concat(branches * n_filters);
  std::vector<std::vector<double>> pooled(branches, std::vector<double>(n_filters));
  std::vector<std::vector<std::size_t>> argmax(branches, std::vector<std::size_t>(n_filters));
  for (std::size_t b = 0; b < branches; ++b) {
    const std::size_t k = params.kernel_sizes[b];
    const std::size_t window = k * d;
    for (std::size_t f = 0; f < n_filters; ++f) {
      const auto kernel = params.kernels[b].span().subspan(f * window, window);
      const auto conv = conv1d_valid(embedded, kernel, k, params.biases[b][f]);
      // tanh is monotone, so pooling before the activation picks the same position.
      const auto best = std::max_element(conv.begin(), conv.end());
      argmax[b][f] = static_cast<std::size_t>(best - conv.begin());
      pooled[b][f] = std::tanh(*best);
      concat[b * n_filters + f] = pooled[b][f];
    }
  }

  std::vector<double> out = dense_forward(concat, params.dense);
  for (double& v : out) v = std::tanh(v);
  std::vector<double> mask;
  if (training && dropout_rate > 0.0) {
    if (rng == nullptr) throw InvalidArgument("character encoder dropout needs an rng");
    mask = dropout_mask(out.size(), dropout_rate, *rng);
  }
  std::vector<double> result = out;
  for (std::size_t i = 0; i < mask.size(); ++i) result[i] *= mask[i];

  if (cache != nullptr) {
    cache->chars.assign(chars.begin(), chars.end());
    cache->embedded = std::move(embedded);
    cache->pooled = std::move(pooled);
    cache->argmax = std::move(argmax);
    cache->concat = std::move(concat);
    cache->dense_out = std::move(out);
    cache->mask = std::move(mask);
  }
  return result;
}

void char_encoder_backward(const CharEncoderCache& cache, const CharEncoderParams& params,
                           std::span<const double> d_output, CharEncoderParams& grads) {
  const std::size_t d = params.embedding_dim();
  const std::size_t n_filters = params.filters();
  require(d_output.size() == cache.dense_out.size(), "char encoder backward: shape mismatch");

  std::vector<double> d_pre(d_output.begin(), d_output.end());
  for (std::size_t i = 0; i < d_pre.size(); ++i) {
    if (!cache.mask.empty()) d_pre[i] *= cache.mask[i];
    d_pre[i] *= 1.0 - cache.dense_out[i] * cache.dense_out[i];
  }
  std::vector<double> d_concat(cache.concat.size(), 0.0);
  dense_backward(cache.concat, params.dense, d_pre, d_concat, grads.dense);

  Matrix d_embedded(cache.embedded.rows(), d);
  for (std::size_t b = 0; b < params.kernels.size(); ++b) {
    const std::size_t window = params.kernel_sizes[b] * d;
    for (std::size_t f = 0; f < n_filters; ++f) {
      const double p = cache.pooled[b][f];
      const double dz = d_concat[b * n_filters + f] * (1.0 - p * p);
      if (dz == 0.0) continue;
      const std::size_t pos = cache.argmax[b][f];
      grads.biases[b][f] += dz;
      const double* x = cache.embedded.data().data() + pos * d;
      const double* w = params.kernels[b].values.data() + f * window;
      double* gw = grads.kernels[b].values.data() + f * window;
      double* dx = d_embedded.data().data() + pos * d;
      for (std::size_t j = 0; j < window; ++j) {
        gw[j] += dz * x[j];
        dx[j] += dz * w[j];
      }
    }
  }
  for (std::size_t l = 0; l < cache.chars.size(); ++l) {
    double* g = grads.embedding.values.data() + static_cast<std::size_t>(cache.chars[l]) * d;
    const auto row = d_embedded.row(l);
    for (std::size_t c = 0; c < d; ++c) g[c] += row[c];
  }
}

LstmParams LstmParams::create(const std::string& prefix, std::size_t input_dim, std::size_t units) {
  if (input_dim == 0 || units == 0) throw InvalidArgument("LSTM dimensions must be positive");
  return {ParamTensor(prefix + ".input_weights", {input_dim, 4 * units}),
          ParamTensor(prefix + ".recurrent_weights", {units, 4 * units}),
          ParamTensor(prefix + ".bias", {4 * units})};
}

void LstmParams::init(Rng& rng) {
  const std::size_t u = units();
  glorot_uniform(input_weights, input_dim(), 4 * u, rng);
  glorot_uniform(recurrent_weights, u, 4 * u, rng);
  bias.fill(0.0);
  for (std::size_t j = u; j < 2 * u; ++j) bias[j] = 1.0;
}

LstmState lstm_step(std::span<const double> x, std::span<const double> h,
                    std::span<const double> c, const LstmParams& params, LstmStepCache* cache) {
  const std::size_t u = params.units();
  const std::size_t in = params.input_dim();
  require(x.size() == in && h.size() == u && c.size() == u, "lstm_step: shape mismatch");
  const std::size_t width = 4 * u;
  std::vector<double> z(params.bias.values);
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* w = params.input_weights.values.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) z[j] += xi * w[j];
  }
  for (std::size_t i = 0; i < u; ++i) {
    const double hi = h[i];
    if (hi == 0.0) continue;
    const double* w = params.recurrent_weights.values.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) z[j] += hi * w[j];
  }
  std::vector<double> ig(u), fg(u), gg(u), og(u), tc(u);
  LstmState next{std::vector<double>(u), std::vector<double>(u)};
  for (std::size_t j = 0; j < u; ++j) {
    ig[j] = sigmoid(z[j]);
    fg[j] = sigmoid(z[u + j]);
    gg[j] = std::tanh(z[2 * u + j]);
    og[j] = sigmoid(z[3 * u + j]);
    next.c[j] = fg[j] * c[j] + ig[j] * gg[j];
    tc[j] = std::tanh(next.c[j]);
    next.h[j] = og[j] * tc[j];
  }
  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h.begin(), h.end());
    cache->c_prev.assign(c.begin(), c.end());
    cache->input_gate = std::move(ig);
    cache->forget_gate = std::move(fg);
    cache->candidate = std::move(gg);
    cache->output_gate = std::move(og);
    cache->tanh_c = std::move(tc);
  }
  return next;
}

void lstm_step_backward(const LstmStepCache& cache, const LstmParams& params,
                        std::span<const double> d_h, std::span<const double> d_c,
                        LstmParams& grads, std::span<double> d_x, std::span<double> d_h_prev,
                        std::span<double> d_c_prev) {
  const std::size_t u = params.units();
  const std::size_t in = params.input_dim();
  const std::size_t width = 4 * u;
  require(d_h.size() == u && d_c.size() == u && d_x.size() == in && d_h_prev.size() == u &&
              d_c_prev.size() == u,
          "lstm_step_backward: shape mismatch");
  std::vector<double> dz(width);
  for (std::size_t j = 0; j < u; ++j) {
    const double i = cache.input_gate[j];
    const double f = cache.forget_gate[j];
    const double g = cache.candidate[j];
    const double o = cache.output_gate[j];
    const double tc = cache.tanh_c[j];
    const double d_o = d_h[j] * tc;
    const double dc = d_c[j] + d_h[j] * o * (1.0 - tc * tc);
    dz[j] = dc * g * i * (1.0 - i);
    dz[u + j] = dc * cache.c_prev[j] * f * (1.0 - f);
    dz[2 * u + j] = dc * i * (1.0 - g * g);
    dz[3 * u + j] = d_o * o * (1.0 - o);
    d_c_prev[j] = dc * f;
  }
  for (std::size_t j = 0; j < width; ++j) grads.bias[j] += dz[j];
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = cache.x[i];
    const double* w = params.input_weights.values.data() + i * width;
    double* gw = grads.input_weights.values.data() + i * width;
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      gw[j] += xi * dz[j];
      acc += w[j] * dz[j];
    }
    d_x[i] = acc;
  }
  for (std::size_t i = 0; i < u; ++i) {
    const double hi = cache.h_prev[i];
    const double* w = params.recurrent_weights.values.data() + i * width;
    double* gw = grads.recurrent_weights.values.data() + i * width;
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      gw[j] += hi * dz[j];
      acc += w[j] * dz[j];
    }
    d_h_prev[i] = acc;
  }
}

BiLstmParams BiLstmParams::create(const std::string& prefix, std::size_t input_dim,
                                  std::size_t units) {
  return {LstmParams::create(prefix + ".fwd", input_dim, units),
          LstmParams::create(prefix + ".bwd", input_dim, units)};
}

Matrix bilstm_apply(const Matrix& sequence, const BiLstmParams& params, BiLstmCache* cache) {
  const std::size_t t_len = sequence.rows();
  const std::size_t u = params.units();
  if (t_len == 0) throw InvalidArgument("bilstm: empty sequence");
  require(sequence.cols() == params.input_dim(), "bilstm: input width mismatch");
  if (params.backward.units() != u || params.backward.input_dim() != params.input_dim()) {
    throw InvalidArgument("bilstm: direction shapes differ");
  }
  Matrix out(t_len, 2 * u);
  if (cache != nullptr) {
    cache->forward.assign(t_len, {});
    cache->backward.assign(t_len, {});
  }
  LstmState state{std::vector<double>(u, 0.0), std::vector<double>(u, 0.0)};
  for (std::size_t t = 0; t < t_len; ++t) {
    state = lstm_step(sequence.row(t), state.h, state.c, params.forward,
                      cache ? &cache->forward[t] : nullptr);
    std::copy(state.h.begin(), state.h.end(), out.row(t).begin());
  }
  state = {std::vector<double>(u, 0.0), std::vector<double>(u, 0.0)};
  for (std::size_t t = t_len; t-- > 0;) {
    state = lstm_step(sequence.row(t), state.h, state.c, params.backward,
                      cache ? &cache->backward[t] : nullptr);
    std::copy(state.h.begin(), state.h.end(), out.row(t).begin() + static_cast<std::ptrdiff_t>(u));
  }
  return out;
}

Matrix bilstm_backward(const BiLstmCache& cache, const BiLstmParams& params,
                       const Matrix& d_output, BiLstmParams& grads) {
  const std::size_t t_len = cache.forward.size();
  const std::size_t u = params.units();
  const std::size_t in = params.input_dim();
  require(d_output.rows() == t_len && d_output.cols() == 2 * u, "bilstm backward: shape mismatch");
  Matrix d_seq(t_len, in);
  std::vector<double> d_h(u), d_c(u, 0.0), d_x(in), d_h_prev(u), d_c_prev(u);
  std::vector<double> carry_h(u, 0.0);

  for (std::size_t t = t_len; t-- > 0;) {
    const auto g = d_output.row(t);
    for (std::size_t j = 0; j < u; ++j) d_h[j] = g[j] + carry_h[j];
    lstm_step_backward(cache.forward[t], params.forward, d_h, d_c, grads.forward, d_x, d_h_prev,
                       d_c_prev);
    auto row = d_seq.row(t);
    for (std::size_t i = 0; i < in; ++i) row[i] += d_x[i];
    carry_h = d_h_prev;
    d_c = d_c_prev;
  }

  std::fill(carry_h.begin(), carry_h.end(), 0.0);
  std::fill(d_c.begin(), d_c.end(), 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto g = d_output.row(t);
    for (std::size_t j = 0; j < u; ++j) d_h[j] = g[u + j] + carry_h[j];
    lstm_step_backward(cache.backward[t], params.backward, d_h, d_c, grads.backward, d_x,
                       d_h_prev, d_c_prev);
    auto row = d_seq.row(t);
    for (std::size_t i = 0; i < in; ++i) row[i] += d_x[i];
    carry_h = d_h_prev;
    d_c = d_c_prev;
  }
  return d_seq;
}

OptimizerState make_optimizer_state(std::span<const ParamTensor* const> params,
                                    NadamConfig hyper) {
  OptimizerState state;
  state.hyper = hyper;
  for (const ParamTensor* p : params) {
    state.first_moment.emplace_back(p->size(), 0.0);
    state.second_moment.emplace_back(p->size(), 0.0);
  }
  return state;
}

void nadam_step(std::span<ParamTensor* const> params, std::span<const ParamTensor* const> grads,
                OptimizerState& state, double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw InvalidArgument("nadam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p]->size() != grads[p]->size() || params[p]->size() != state.first_moment[p].size()) {
      throw InvalidArgument("nadam_step: shape mismatch for " + params[p]->name);
    }
    for (double g : grads[p]->values) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in " + params[p]->name);
      }
    }
  }
  const auto& hp = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double m_corr_next = 1.0 - std::pow(hp.beta1, t + 1.0);
  const double m_corr = 1.0 - std::pow(hp.beta1, t);
  const double v_corr = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& values = params[p]->values;
    const auto& g = grads[p]->values;
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = hp.beta1 * m[i] / m_corr_next + (1.0 - hp.beta1) * g[i] / m_corr;
      const double v_hat = v[i] / v_corr;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
  }
}

std::vector<double> finite_diff_grad(const std::function<double()>& loss,
                                     std::span<double> params, double eps) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss();
    params[i] = saved - eps;
    const double down = loss();
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace seqlab
