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

#include "seqlab/ensemble.h"

#include <algorithm>
#include <map>
#include <optional>

#include "seqlab/error.h"

namespace seqlab {

TagSequence repair_iob(TagSequence tags) {
  std::optional<Tag> prev;
  for (auto& text : tags) {
    auto tag = parse_tag(text);
    if (!tag) throw InvalidArgument("malformed tag '" + text + "'");
    if (tag->prefix == TagPrefix::kInside &&
        !(prev && prev->prefix != TagPrefix::kOutside && prev->label == tag->label)) {
      tag->prefix = TagPrefix::kBegin;
      text = format_tag(*tag);
    }
    prev = std::move(tag);
  }
  return tags;
}

TagSequence majority_vote(const VoteInput& input) {
  const auto& preds = input.predictions;
  if (preds.empty()) throw InvalidArgument("majority_vote needs at least one prediction");
  const std::size_t len = preds.front().size();
  for (const auto& p : preds) {
    if (p.size() != len) throw InvalidArgument("majority_vote: prediction lengths differ");
  }
  const bool use_marginals = !input.marginals.empty();
  std::optional<TagSet> tag_set;
  if (use_marginals) {
    if (input.marginals.size() != preds.size()) {
      throw InvalidArgument("majority_vote: one marginal matrix per model is required");
    }
    tag_set.emplace(input.label_set);
    for (const auto& m : input.marginals) {
      if (m.rows() != len || m.cols() != tag_set->size()) {
        throw InvalidArgument("majority_vote: marginal matrix shape mismatch");
      }
    }
  }

  TagSequence voted(len);
  for (std::size_t t = 0; t < len; ++t) {
    // tag -> (votes, lowest voting model)
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
    for (std::size_t m = 0; m < preds.size(); ++m) {
      auto [it, inserted] = tally.try_emplace(preds[m][t], 0, m);
      ++it->second.first;
    }
    std::size_t top = 0;
    for (const auto& [tag, entry] : tally) top = std::max(top, entry.first);
    std::vector<std::string> tied;
    for (const auto& [tag, entry] : tally) {
      if (entry.first == top) tied.push_back(tag);
    }
    if (tied.size() > 1 && use_marginals) {
      double best = -1.0;
      std::vector<std::string> best_tags;
      for (const auto& tag : tied) {
        const std::size_t k = tag_set->index_of(tag);
        double sum = 0.0;
        for (const auto& m : input.marginals) sum += m(t, k);
        if (sum > best) {
          best = sum;
          best_tags = {tag};
        } else if (sum == best) {
          best_tags.push_back(tag);
        }
      }
      tied = std::move(best_tags);
    }
    const std::string* winner = &tied.front();
    for (const auto& tag : tied) {
      if (tally.at(tag).second < tally.at(*winner).second) winner = &tag;
    }
    voted[t] = *winner;
  }
  return repair_iob(std::move(voted));
}

TaggedCorpus vote_corpora(const std::vector<TaggedCorpus>& predictions) {
  if (predictions.empty()) throw InvalidArgument("vote needs at least one prediction corpus");
  const TaggedCorpus& first = predictions.front();
  TaggedCorpus out;
  out.label_set = first.label_set;
  for (const auto& p : predictions) {
    if (p.sentences.size() != first.sentences.size()) {
      throw InvalidArgument("prediction corpora have different sentence counts");
    }
    for (const auto& l : p.label_set) {
      if (std::find(out.label_set.begin(), out.label_set.end(), l) == out.label_set.end()) {
        out.label_set.push_back(l);
      }
    }
  }
  for (std::size_t s = 0; s < first.sentences.size(); ++s) {
    VoteInput input;
    for (const auto& p : predictions) {
      if (p.sentences[s].tokens != first.sentences[s].tokens) {
        throw InvalidArgument("sentence " + std::to_string(s) + " differs between predictions");
      }
      input.predictions.push_back(p.sentences[s].tags);
    }
    out.sentences.push_back({first.sentences[s].tokens, majority_vote(input)});
  }
  return out;
}

}  // namespace seqlab
