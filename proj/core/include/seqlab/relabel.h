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

// Enhanced labeling: multi-token entities whose leading token is a stopword
// or a frequent word lose that token, shifting the B tag to the right.

#ifndef SEQLAB_RELABEL_H_
#define SEQLAB_RELABEL_H_

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "seqlab/corpus.h"

namespace seqlab {

class RelabelConfig {
 public:
  RelabelConfig() = default;
  // Stopwords and frequent words are lowercased; entries whose lowercase form
  // matches a lowercased whitelist entry are dropped. Empty entries are
  // rejected.
  RelabelConfig(const std::vector<std::string>& stopwords,
                const std::vector<std::string>& frequent_words,
                const std::vector<std::string>& abbreviation_whitelist);

  const std::set<std::string>& stopwords() const { return stopwords_; }
  const std::set<std::string>& frequent_words() const { return frequent_words_; }
  const std::set<std::string>& abbreviation_whitelist() const { return whitelist_; }

  // True if `token` opens an entity that should be shortened.
  bool is_flagged(const std::string& token) const;

 private:
  std::set<std::string> stopwords_;
  std::set<std::string> frequent_words_;
  std::set<std::string> whitelist_;  // case-sensitive
};

// Built-in lists: English stopwords plus possessive 's, {patient, patients},
// and a short clinical abbreviation whitelist. Identical to data/relabel/.
RelabelConfig default_relabel_config();

// One entry per line, '#' starts a comment, surrounding whitespace trimmed.
std::vector<std::string> read_word_list(const std::string& path);

// JSON file {"stopwords": path, "frequent_words": path,
// "abbreviation_whitelist": path}; relative paths resolve against the JSON
// file's directory. Missing keys fall back to the built-in list.
RelabelConfig load_relabel_config(const std::string& json_path);

struct RelabelResult {
  TagSequence tags;
  std::size_t change_count = 0;  // number of leading tokens moved to O
};

// Throws InvalidArgument when `tags` is not valid IOB.
RelabelResult relabel_sentence(const std::vector<std::string>& tokens, const TagSequence& tags,
                               const RelabelConfig& config);

// Position-wise tag flips for one class. `shifts` counts tokens removed
// from entity starts, so shifts == begin_to_outside + inside_to_outside.
struct RelabelFlips {
  std::size_t begin_to_outside = 0;
  std::size_t inside_to_begin = 0;
  std::size_t inside_to_outside = 0;
  std::size_t shifts = 0;

  bool operator==(const RelabelFlips&) const = default;
};

struct RelabelSummary {
  std::map<std::string, RelabelFlips> per_class;
  std::size_t sentences_changed = 0;

  std::size_t total_shifts() const;
};

struct RelabelCorpusResult {
  TaggedCorpus corpus;
  RelabelSummary summary;
};

RelabelCorpusResult relabel_corpus(const TaggedCorpus& corpus, const RelabelConfig& config);
std::string summary_to_json(const RelabelSummary& summary);

}  // namespace seqlab

#endif  // SEQLAB_RELABEL_H_
