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

// Entity-level scoring with exact span-and-class matching.

#ifndef SEQLAB_EVAL_H_
#define SEQLAB_EVAL_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqlab/corpus.h"

namespace seqlab {

struct ClassScores {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;  // 0 when nothing was predicted
  double recall = 0.0;     // 0 when there is no gold span
  double f1 = 0.0;         // 0 when precision + recall == 0
  std::size_t support = 0;  // gold span count

  // Recomputes precision/recall/f1/support from the counts.
  void finalize();
  bool operator==(const ClassScores&) const = default;
};

struct EvalReport {
  std::vector<std::pair<std::string, ClassScores>> per_class;
  ClassScores micro;  // pooled counts ("avg/total")

  // Throws InvalidArgument for unknown classes.
  const ClassScores& at(std::string_view label) const;
  bool operator==(const EvalReport&) const = default;
};

// Gold and prediction must hold the same sentences (tokens and lengths) and
// both be valid IOB. Classes follow the gold label set; classes seen only
// in predictions are appended.
EvalReport entity_prf(const TaggedCorpus& gold, const TaggedCorpus& pred);

double token_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred);

// One object per class plus "avg/total"; each carries full-precision
// fields and a "rounded" block with 4-decimal display values.
std::string report_json(const EvalReport& report);
EvalReport parse_report_json(std::string_view json_text);

// Aligned text table with precision / recall / f1-score / support columns.
std::string report_table(const EvalReport& report);

}  // namespace seqlab

#endif  // SEQLAB_EVAL_H_
