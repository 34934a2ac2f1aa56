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

#include "seqlab/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqlab/corpus.h"
#include "seqlab/error.h"

namespace seqlab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void check_shapes(const Matrix& emissions, const CrfParams& params) {
  if (emissions.cols() != params.num_tags() || params.mask.num_tags() != params.num_tags()) {
    throw InvalidArgument("CRF: emission width does not match the tag count");
  }
  if (emissions.rows() == 0) throw InvalidArgument("CRF: empty sequence");
}

// alpha(t, k): log-sum of scores of legal prefixes ending in k at t.
Matrix forward_scores(const Matrix& e, const CrfParams& p) {
  const std::size_t t_len = e.rows();
  const std::size_t k_n = p.num_tags();
  Matrix alpha(t_len, k_n, kNegInf);
  for (std::size_t k = 0; k < k_n; ++k) {
    if (p.mask.start(k)) alpha(0, k) = p.start[k] + e(0, k);
  }
  std::vector<double> terms(k_n);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < k_n; ++j) {
      for (std::size_t i = 0; i < k_n; ++i) {
        terms[i] = p.mask.transition(i, j) ? alpha(t - 1, i) + p.transition(i, j) : kNegInf;
      }
      alpha(t, j) = log_sum_exp(terms) + e(t, j);
    }
  }
  return alpha;
}

// beta(t, k): log-sum of scores of legal suffixes after position t given k.
Matrix backward_scores(const Matrix& e, const CrfParams& p) {
  const std::size_t t_len = e.rows();
  const std::size_t k_n = p.num_tags();
  Matrix beta(t_len, k_n, kNegInf);
  for (std::size_t k = 0; k < k_n; ++k) beta(t_len - 1, k) = p.stop[k];
  std::vector<double> terms(k_n);
  for (std::size_t t = t_len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k_n; ++i) {
      for (std::size_t j = 0; j < k_n; ++j) {
        terms[j] = p.mask.transition(i, j) ? p.transition(i, j) + e(t + 1, j) + beta(t + 1, j)
                                           : kNegInf;
      }
      beta(t, i) = log_sum_exp(terms);
    }
  }
  return beta;
}

double final_log_partition(const Matrix& alpha, const CrfParams& p) {
  const std::size_t last = alpha.rows() - 1;
  std::vector<double> terms(p.num_tags());
  for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = alpha(last, k) + p.stop[k];
  return log_sum_exp(terms);
}

}  // namespace

LegalityMask transition_mask(const std::vector<std::string>& label_set) {
  const TagSet tags(label_set);
  const std::size_t k_n = tags.size();
  LegalityMask mask(k_n);
  for (std::size_t to = 0; to < k_n; ++to) {
    if (!TagSet::is_inside(to)) continue;
    mask.set_start(to, false);
    const std::size_t label = TagSet::label_of(to);
    for (std::size_t from = 0; from < k_n; ++from) {
      const bool continues = from != 0 && TagSet::label_of(from) == label;
      if (!continues) mask.set_transition(from, to, false);
    }
  }
  return mask;
}

CrfParams CrfParams::create(std::size_t num_tags, LegalityMask mask, const std::string& prefix) {
  if (num_tags == 0) throw InvalidArgument("CRF needs at least one tag");
  if (mask.num_tags() != num_tags) throw InvalidArgument("CRF mask size differs from tag count");
  return {ParamTensor(prefix + ".transitions", {num_tags, num_tags}),
          ParamTensor(prefix + ".start", {num_tags}), ParamTensor(prefix + ".stop", {num_tags}),
          std::move(mask)};
}

bool is_legal_path(const CrfParams& params, std::span<const std::size_t> tags) {
  const std::size_t k_n = params.num_tags();
  if (tags.empty()) return false;
  for (std::size_t t : tags) {
    if (t >= k_n) return false;
  }
  if (!params.mask.start(tags[0])) return false;
  for (std::size_t t = 1; t < tags.size(); ++t) {
    if (!params.mask.transition(tags[t - 1], tags[t])) return false;
  }
  return true;
}

double path_score(const Matrix& emissions, const CrfParams& params,
                  std::span<const std::size_t> tags) {
  check_shapes(emissions, params);
  if (tags.size() != emissions.rows()) {
    throw InvalidArgument("path_score: path length differs from sequence length");
  }
  if (!is_legal_path(params, tags)) throw InvalidArgument("path_score: illegal tag sequence");
  // Same association order as the forward recursion.
  double s = params.start[tags[0]] + emissions(0, tags[0]);
  for (std::size_t t = 1; t < tags.size(); ++t) {
    s = s + params.transition(tags[t - 1], tags[t]) + emissions(t, tags[t]);
  }
  return s + params.stop[tags.back()];
}

double log_partition(const Matrix& emissions, const CrfParams& params) {
  check_shapes(emissions, params);
  return final_log_partition(forward_scores(emissions, params), params);
}

Matrix forward_backward_marginals(const Matrix& emissions, const CrfParams& params) {
  check_shapes(emissions, params);
  const Matrix alpha = forward_scores(emissions, params);
  const Matrix beta = backward_scores(emissions, params);
  const double log_z = final_log_partition(alpha, params);
  if (log_z == kNegInf) throw InvalidArgument("CRF: no legal tag sequence");
  Matrix marginals(emissions.rows(), emissions.cols());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    for (std::size_t k = 0; k < emissions.cols(); ++k) {
      marginals(t, k) = std::exp(alpha(t, k) + beta(t, k) - log_z);
    }
  }
  return marginals;
}

CrfNllGrad crf_nll_grad(const Matrix& emissions, const CrfParams& params,
                        std::span<const std::size_t> gold) {
  check_shapes(emissions, params);
  const std::size_t t_len = emissions.rows();
  const std::size_t k_n = params.num_tags();
  const double gold_score = path_score(emissions, params, gold);
  const Matrix alpha = forward_scores(emissions, params);
  const Matrix beta = backward_scores(emissions, params);
  const double log_z = final_log_partition(alpha, params);

  CrfNllGrad out;
  out.nll = log_z - gold_score;
  out.d_emissions = Matrix(t_len, k_n);
  out.d_transitions.assign(k_n * k_n, 0.0);
  out.d_start.assign(k_n, 0.0);
  out.d_stop.assign(k_n, 0.0);

  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      out.d_emissions(t, k) = std::exp(alpha(t, k) + beta(t, k) - log_z);
    }
  }
  for (std::size_t k = 0; k < k_n; ++k) {
    out.d_start[k] = out.d_emissions(0, k);
    out.d_stop[k] = out.d_emissions(t_len - 1, k);
  }
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    for (std::size_t i = 0; i < k_n; ++i) {
      if (alpha(t, i) == kNegInf) continue;
      for (std::size_t j = 0; j < k_n; ++j) {
        if (!params.mask.transition(i, j)) continue;
        out.d_transitions[i * k_n + j] += std::exp(alpha(t, i) + params.transition(i, j) +
                                                   emissions(t + 1, j) + beta(t + 1, j) - log_z);
      }
    }
  }

  for (std::size_t t = 0; t < t_len; ++t) out.d_emissions(t, gold[t]) -= 1.0;
  out.d_start[gold.front()] -= 1.0;
  out.d_stop[gold.back()] -= 1.0;
  for (std::size_t t = 0; t + 1 < t_len; ++t) out.d_transitions[gold[t] * k_n + gold[t + 1]] -= 1.0;
  return out;
}

ViterbiResult viterbi_decode(const Matrix& emissions, const CrfParams& params) {
  check_shapes(emissions, params);
  const std::size_t t_len = emissions.rows();
  const std::size_t k_n = params.num_tags();
  Matrix delta(t_len, k_n, kNegInf);
  std::vector<std::size_t> back(t_len * k_n, 0);
  for (std::size_t k = 0; k < k_n; ++k) {
    if (params.mask.start(k)) delta(0, k) = params.start[k] + emissions(0, k);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < k_n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < k_n; ++i) {
        if (!params.mask.transition(i, j) || delta(t - 1, i) == kNegInf) continue;
        const double s = delta(t - 1, i) + params.transition(i, j);
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      if (best != kNegInf) delta(t, j) = best + emissions(t, j);
      back[t * k_n + j] = arg;
    }
  }
  double best = kNegInf;
  std::size_t last = 0;
  for (std::size_t k = 0; k < k_n; ++k) {
    if (delta(t_len - 1, k) == kNegInf) continue;
    const double s = delta(t_len - 1, k) + params.stop[k];
    if (s > best) {
      best = s;
      last = k;
    }
  }
  if (best == kNegInf) throw InvalidArgument("viterbi: no legal tag sequence");
  ViterbiResult result;
  result.tags.assign(t_len, 0);
  result.tags[t_len - 1] = last;
  for (std::size_t t = t_len - 1; t > 0; --t) result.tags[t - 1] = back[t * k_n + result.tags[t]];
  result.score = path_score(emissions, params, result.tags);
  return result;
}

}  // namespace seqlab
