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

// Linear-chain CRF over emission scores (logits): path scoring, forward
// algorithm, forward-backward marginals, NLL gradients and constrained
// Viterbi decoding. Illegal transitions are excluded with -inf inside the
// recursions; stored scores are never modified by the mask.

#ifndef SEQLAB_CRF_H_
#define SEQLAB_CRF_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seqlab/tensor.h"

namespace seqlab {

class LegalityMask {
 public:
  LegalityMask() = default;
  // Everything legal.
  explicit LegalityMask(std::size_t num_tags)
      : num_tags_(num_tags), transitions_(num_tags * num_tags, 1), start_(num_tags, 1) {}

  std::size_t num_tags() const { return num_tags_; }
  bool transition(std::size_t from, std::size_t to) const {
    return transitions_[from * num_tags_ + to] != 0;
  }
  bool start(std::size_t tag) const { return start_[tag] != 0; }
  void set_transition(std::size_t from, std::size_t to, bool legal) {
    transitions_[from * num_tags_ + to] = legal ? 1 : 0;
  }
  void set_start(std::size_t tag, bool legal) { start_[tag] = legal ? 1 : 0; }

  bool operator==(const LegalityMask&) const = default;

 private:
  std::size_t num_tags_ = 0;
  std::vector<unsigned char> transitions_;
  std::vector<unsigned char> start_;
};

// IOB constraints over the TagSet layout (O, B-x, I-x, ...): I-X may not
// start a sentence and may only follow B-X or I-X.
LegalityMask transition_mask(const std::vector<std::string>& label_set);

struct CrfParams {
  ParamTensor transitions;  // [K x K], from -> to
  ParamTensor start;        // [K]
  ParamTensor stop;         // [K]
  LegalityMask mask;

  static CrfParams create(std::size_t num_tags, LegalityMask mask,
                          const std::string& prefix = "crf");
  std::size_t num_tags() const { return start.size(); }
  double transition(std::size_t from, std::size_t to) const {
    return transitions[from * num_tags() + to];
  }

  template <class F>
  void for_each(F&& f) {
    f(transitions);
    f(start);
    f(stop);
  }
  template <class F>
  void for_each(F&& f) const {
    f(transitions);
    f(start);
    f(stop);
  }
};

bool is_legal_path(const CrfParams& params, std::span<const std::size_t> tags);

// start[y0] + sum_t emissions(t, y_t) + sum_t transitions(y_t, y_t+1) + stop[y_T-1].
// Throws InvalidArgument for illegal or mis-sized paths.
double path_score(const Matrix& emissions, const CrfParams& params,
                  std::span<const std::size_t> tags);

// log of the summed exp(path_score) over all legal paths; -inf if none.
double log_partition(const Matrix& emissions, const CrfParams& params);

struct CrfNllGrad {
  double nll = 0.0;
  Matrix d_emissions;
  std::vector<double> d_transitions;
  std::vector<double> d_start;
  std::vector<double> d_stop;
};

// nll = log_partition - path_score(gold); gradients are expected minus
// observed feature counts.
CrfNllGrad crf_nll_grad(const Matrix& emissions, const CrfParams& params,
                        std::span<const std::size_t> gold);

struct ViterbiResult {
  std::vector<std::size_t> tags;
  double score = 0.0;  // equals path_score(tags)
};

// Best legal path; ties go to the lower tag index at every step.
ViterbiResult viterbi_decode(const Matrix& emissions, const CrfParams& params);

// Posterior P(y_t = k) for every position; rows sum to one.
Matrix forward_backward_marginals(const Matrix& emissions, const CrfParams& params);

}  // namespace seqlab

#endif  // SEQLAB_CRF_H_
