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

// Release gate: one check per acceptance criterion, each reporting a
// pass/fail line with the measured quantities.

#ifndef SEQLAB_TESTING_ACCEPTANCE_H_
#define SEQLAB_TESTING_ACCEPTANCE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "seqlab/corpus.h"
#include "seqlab/features.h"
#include "seqlab/tagger.h"

namespace seqlab::testing {

struct CriterionResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// "PASS <id> (<seconds> s): <detail>".
std::string format_result(const CriterionResult& result);

// Synthetic corpus plus lazily trained seed models shared by the
// end-to-end and ensemble checks.
class SyntheticFixture {
 public:
  SyntheticFixture();

  const TaggedCorpus& corpus() const { return corpus_; }
  const HashProvider& provider() const { return provider_; }
  ModelConfig config(std::uint64_t seed) const;
  // Trained with the training corpus as validation data, keeping the
  // best-scoring epoch.
  const TrainResult& model(std::uint64_t seed);

 private:
  TaggedCorpus corpus_;
  HashProvider provider_;
  std::map<std::uint64_t, std::unique_ptr<TrainResult>> models_;
};

CriterionResult check_crf_oracle();
CriterionResult check_gradient_suite();
CriterionResult check_golden_examples();
CriterionResult check_structural_roundtrips();
CriterionResult check_synthetic_end_to_end(SyntheticFixture& fixture);
CriterionResult check_ensemble(SyntheticFixture& fixture);
CriterionResult check_determinism(SyntheticFixture& fixture);

std::vector<std::string> criterion_ids();

// Runs the criteria named in `only` (all when empty) in declaration order,
// calling `on_result` after each.
std::vector<CriterionResult> run_acceptance(
    const std::vector<std::string>& only = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace seqlab::testing

#endif  // SEQLAB_TESTING_ACCEPTANCE_H_
