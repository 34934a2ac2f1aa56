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

// Tagged corpora: CoNLL-style and i2b2 2010 ingestion, IOB/span conversion,
// IOB validation and label statistics.

#ifndef SEQLAB_CORPUS_H_
#define SEQLAB_CORPUS_H_

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqlab {

// {problem, treatment, test}.
const std::vector<std::string>& default_label_set();

using TagSequence = std::vector<std::string>;

enum class TagPrefix { kOutside, kBegin, kInside };

struct Tag {
  TagPrefix prefix = TagPrefix::kOutside;
  std::string label;  // empty for O

  bool operator==(const Tag&) const = default;
};

// Accepts "O", "B-<label>" and "I-<label>" with a non-empty label.
std::optional<Tag> parse_tag(std::string_view text);
std::string format_tag(const Tag& tag);

struct EntitySpan {
  std::string label;
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // inclusive token index
  std::size_t sentence_index = 0;

  std::size_t length() const { return end - start + 1; }
  bool operator==(const EntitySpan&) const = default;
  auto operator<=>(const EntitySpan&) const = default;
};

struct Sentence {
  std::vector<std::string> tokens;
  TagSequence tags;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct TaggedCorpus {
  std::vector<Sentence> sentences;
  std::vector<std::string> label_set = default_label_set();

  std::size_t token_count() const;
  bool operator==(const TaggedCorpus&) const = default;
};

// Dense tag indexing used by the CRF and the tagger: O = 0, B-<label i> =
// 1 + 2i, I-<label i> = 2 + 2i.
class TagSet {
 public:
  explicit TagSet(std::vector<std::string> labels);

  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& tag(std::size_t index) const { return tags_.at(index); }
  // Throws InvalidArgument for tags outside the set.
  std::size_t index_of(std::string_view tag) const;

  std::vector<std::size_t> encode(const TagSequence& tags) const;
  TagSequence decode(std::span<const std::size_t> indices) const;

  static bool is_inside(std::size_t index) { return index != 0 && index % 2 == 0; }
  static bool is_begin(std::size_t index) { return index % 2 == 1; }
  // Label slot of a B/I index.
  static std::size_t label_of(std::size_t index) { return (index - 1) / 2; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Token-per-line reader: "token<TAB>tag", blank lines separate sentences.
// Label classes not in `base_labels` are appended in order of appearance.
// IOB validity is not checked here.
TaggedCorpus parse_conll(std::istream& input,
                         const std::vector<std::string>& base_labels = default_label_set());
TaggedCorpus parse_conll(std::string_view text,
                         const std::vector<std::string>& base_labels = default_label_set());
TaggedCorpus read_conll_file(const std::string& path,
                             const std::vector<std::string>& base_labels = default_label_set());

std::string write_conll(const TaggedCorpus& corpus);
void write_conll_file(const TaggedCorpus& corpus, const std::string& path);

// One report converted from the i2b2 2010 text + .con pair. Every report line
// becomes one (possibly empty) sentence so that .con line numbers map 1:1.
struct I2b2Document {
  std::vector<std::vector<std::string>> sentences;
  std::vector<EntitySpan> spans;
  std::vector<std::string> warnings;  // concept-text mismatches
};

I2b2Document parse_i2b2(std::string_view report_text, std::string_view concept_lines);

// Builds a tagged corpus from a parsed report; empty lines are dropped.
// Concept types missing from `label_set` are appended.
TaggedCorpus i2b2_to_corpus(const I2b2Document& document,
                            std::vector<std::string> label_set = default_label_set());

TagSequence spans_to_iob(std::size_t sentence_length, std::span<const EntitySpan> spans);

// Requires valid IOB; throws InvalidArgument otherwise. Spans come back
// sorted by start.
std::vector<EntitySpan> iob_to_spans(const TagSequence& tags, std::size_t sentence_index = 0);

struct IobViolation {
  std::size_t index = 0;
  std::string message;

  bool operator==(const IobViolation&) const = default;
};

// Every I-X must follow B-X or I-X. Malformed tags are also reported.
std::vector<IobViolation> validate_iob(const TagSequence& tags);
inline bool is_valid_iob(const TagSequence& tags) { return validate_iob(tags).empty(); }

struct CorpusStats {
  std::map<std::string, double> tag_distribution;  // percent of all tokens
  std::map<std::string, std::size_t> entity_counts;
  std::map<std::size_t, std::size_t> length_histogram;  // span length -> count
};

CorpusStats corpus_stats(const TaggedCorpus& corpus);
std::string stats_to_json(const CorpusStats& stats);

}  // namespace seqlab

#endif  // SEQLAB_CORPUS_H_
