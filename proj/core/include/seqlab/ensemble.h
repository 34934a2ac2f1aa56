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

// Per-token majority voting across independently seeded taggers.

#ifndef SEQLAB_ENSEMBLE_H_
#define SEQLAB_ENSEMBLE_H_

#include <string>
#include <vector>

#include "seqlab/corpus.h"
#include "seqlab/tensor.h"

namespace seqlab {

struct VoteInput {
  std::vector<TagSequence> predictions;  // one per model, equal lengths
  // Optional CRF posteriors, one [T x K] matrix per model, columns in
  // TagSet(label_set) order. Either empty or one per prediction.
  std::vector<Matrix> marginals;
  std::vector<std::string> label_set = default_label_set();
};

// Rewrites every I-X not preceded by B-X or I-X into B-X.
TagSequence repair_iob(TagSequence tags);

// Most-voted tag per token. Ties: highest summed posterior among the tied
// tags when marginals are given, otherwise (or if still tied) the tag of the
// lowest-indexed model voting for one of them. The voted sequence is then
// passed through repair_iob.
TagSequence majority_vote(const VoteInput& input);

// Sentence-wise vote over M tagged versions of the same corpus.
TaggedCorpus vote_corpora(const std::vector<TaggedCorpus>& predictions);

}  // namespace seqlab

#endif  // SEQLAB_ENSEMBLE_H_
