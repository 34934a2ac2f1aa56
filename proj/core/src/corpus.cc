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

#include "seqlab/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqlab/error.h"

namespace seqlab {
namespace {

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void add_label(std::vector<std::string>& labels, const std::string& label) {
  if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& default_label_set() {
  static const std::vector<std::string> labels = {"problem", "treatment", "test"};
  return labels;
}

std::optional<Tag> parse_tag(std::string_view text) {
  if (text == "O") return Tag{};
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  Tag tag;
  if (text[0] == 'B') {
    tag.prefix = TagPrefix::kBegin;
  } else if (text[0] == 'I') {
    tag.prefix = TagPrefix::kInside;
  } else {
    return std::nullopt;
  }
  tag.label = std::string(text.substr(2));
  if (has_whitespace(tag.label)) return std::nullopt;
  return tag;
}

std::string format_tag(const Tag& tag) {
  switch (tag.prefix) {
    case TagPrefix::kOutside:
      return "O";
    case TagPrefix::kBegin:
      return "B-" + tag.label;
    case TagPrefix::kInside:
      return "I-" + tag.label;
  }
  return "O";
}

std::size_t TaggedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

TagSet::TagSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  tags_.push_back("O");
  for (const auto& label : labels_) {
    tags_.push_back("B-" + label);
    tags_.push_back("I-" + label);
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (!index_.emplace(tags_[i], i).second) {
      throw InvalidArgument("duplicate label in tag set: " + tags_[i]);
    }
  }
}

std::size_t TagSet::index_of(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) throw InvalidArgument("tag not in tag set: " + std::string(tag));
  return it->second;
}

std::vector<std::size_t> TagSet::encode(const TagSequence& tags) const {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(index_of(t));
  return out;
}

TagSequence TagSet::decode(std::span<const std::size_t> indices) const {
  TagSequence out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(tag(i));
  return out;
}

TaggedCorpus parse_conll(std::istream& input, const std::vector<std::string>& base_labels) {
  TaggedCorpus corpus;
  corpus.label_set = base_labels;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = Sentence{};
  };
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected exactly two tab-separated fields (token, tag)", line_no);
    }
    std::string token = line.substr(0, tab);
    std::string tag_text = line.substr(tab + 1);
    if (token.empty() || has_whitespace(token)) {
      throw ParseError("token is empty or contains whitespace", line_no);
    }
    auto tag = parse_tag(tag_text);
    if (!tag) throw ParseError("unknown tag shape '" + tag_text + "'", line_no);
    if (tag->prefix != TagPrefix::kOutside) add_label(corpus.label_set, tag->label);
    current.tokens.push_back(std::move(token));
    current.tags.push_back(std::move(tag_text));
  }
  flush();
  return corpus;
}

TaggedCorpus parse_conll(std::string_view text, const std::vector<std::string>& base_labels) {
  std::istringstream in{std::string(text)};
  return parse_conll(in, base_labels);
}

TaggedCorpus read_conll_file(const std::string& path, const std::vector<std::string>& base_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return parse_conll(in, base_labels);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_conll(const TaggedCorpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus.sentences) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      out += sentence.tokens[i];
      out += '\t';
      out += sentence.tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void write_conll_file(const TaggedCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << write_conll(corpus);
  if (!out) throw Error("write failed: " + path);
}

I2b2Document parse_i2b2(std::string_view report_text, std::string_view concept_lines) {
  I2b2Document doc;
  for (std::string_view line : split_lines(report_text)) {
    doc.sentences.push_back(split_whitespace(line));
  }

  static const std::regex kConcept(
      R"re(^c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|t="([^"]*)"$)re");
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(concept_lines)) {
    ++line_no;
    std::string line(raw);
    if (split_whitespace(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, kConcept)) {
      throw ParseError("malformed concept line: " + line, line_no);
    }
    const std::size_t l1 = std::stoul(m[2]);
    const std::size_t t1 = std::stoul(m[3]);
    const std::size_t l2 = std::stoul(m[4]);
    const std::size_t t2 = std::stoul(m[5]);
    if (l1 != l2) throw ParseError("concept spans several report lines: " + line, line_no);
    if (l1 == 0 || l1 > doc.sentences.size()) {
      throw ParseError("report line " + std::to_string(l1) + " out of range: " + line, line_no);
    }
    const auto& tokens = doc.sentences[l1 - 1];
    if (t1 > t2 || t2 >= tokens.size()) {
      throw ParseError("token offsets " + std::to_string(t1) + ".." + std::to_string(t2) +
                           " out of range for a line of " + std::to_string(tokens.size()) +
                           " tokens: " + line,
                       line_no);
    }
    EntitySpan span{m[6].str(), t1, t2, l1 - 1};
    std::string joined;
    for (std::size_t t = t1; t <= t2; ++t) {
      if (t > t1) joined += ' ';
      joined += tokens[t];
    }
    std::string quoted = m[1].str();
    if (to_lower_ascii(quoted) != to_lower_ascii(joined)) {
      doc.warnings.push_back("concept line " + std::to_string(line_no) + ": text \"" + quoted +
                             "\" does not match tokens \"" + joined + "\"");
    }
    doc.spans.push_back(std::move(span));
  }
  return doc;
}

TaggedCorpus i2b2_to_corpus(const I2b2Document& document, std::vector<std::string> label_set) {
  TaggedCorpus corpus;
  for (const auto& span : document.spans) add_label(label_set, span.label);
  corpus.label_set = std::move(label_set);
  std::vector<std::vector<EntitySpan>> by_line(document.sentences.size());
  for (const auto& span : document.spans) by_line.at(span.sentence_index).push_back(span);
  for (std::size_t i = 0; i < document.sentences.size(); ++i) {
    const auto& tokens = document.sentences[i];
    if (tokens.empty()) continue;
    Sentence s;
    s.tokens = tokens;
    s.tags = spans_to_iob(tokens.size(), by_line[i]);
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

TagSequence spans_to_iob(std::size_t sentence_length, std::span<const EntitySpan> spans) {
  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  TagSequence tags(sentence_length, "O");
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.start > s.end || s.end >= sentence_length) {
      throw InvalidArgument("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                            "] out of range for sentence of length " +
                            std::to_string(sentence_length));
    }
    if (s.label.empty()) throw InvalidArgument("span without a label");
    if (i > 0 && sorted[i - 1].end >= s.start) {
      throw InvalidArgument("overlapping spans at token " + std::to_string(s.start));
    }
    tags[s.start] = "B-" + s.label;
    for (std::size_t t = s.start + 1; t <= s.end; ++t) tags[t] = "I-" + s.label;
  }
  return tags;
}

std::vector<IobViolation> validate_iob(const TagSequence& tags) {
  std::vector<IobViolation> violations;
  std::optional<Tag> prev;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto tag = parse_tag(tags[i]);
    if (!tag) {
      violations.push_back({i, "malformed tag '" + tags[i] + "'"});
    } else if (tag->prefix == TagPrefix::kInside) {
      const bool continues = prev && prev->prefix != TagPrefix::kOutside && prev->label == tag->label;
      if (!continues) {
        violations.push_back({i, tags[i] + " does not follow B-" + tag->label + " or I-" + tag->label});
      }
    }
    prev = tag;
  }
  return violations;
}

std::vector<EntitySpan> iob_to_spans(const TagSequence& tags, std::size_t sentence_index) {
  auto violations = validate_iob(tags);
  if (!violations.empty()) {
    throw InvalidArgument("invalid IOB at index " + std::to_string(violations.front().index) +
                          ": " + violations.front().message);
  }
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto tag = *parse_tag(tags[i]);
    if (tag.prefix == TagPrefix::kBegin) {
      spans.push_back({tag.label, i, i, sentence_index});
    } else if (tag.prefix == TagPrefix::kInside) {
      spans.back().end = i;
    }
  }
  return spans;
}

CorpusStats corpus_stats(const TaggedCorpus& corpus) {
  CorpusStats stats;
  std::map<std::string, std::size_t> tag_counts;
  std::size_t total = 0;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sentence = corpus.sentences[s];
    for (const auto& tag : sentence.tags) ++tag_counts[tag];
    total += sentence.size();
    for (const auto& span : iob_to_spans(sentence.tags, s)) {
      ++stats.entity_counts[span.label];
      ++stats.length_histogram[span.length()];
    }
  }
  for (const auto& [tag, count] : tag_counts) {
    stats.tag_distribution[tag] = 100.0 * static_cast<double>(count) / static_cast<double>(total);
  }
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["tag_distribution"] = nlohmann::ordered_json::object();
  for (const auto& [tag, pct] : stats.tag_distribution) j["tag_distribution"][tag] = pct;
  j["entity_counts"] = nlohmann::ordered_json::object();
  for (const auto& [label, n] : stats.entity_counts) j["entity_counts"][label] = n;
  j["length_histogram"] = nlohmann::ordered_json::object();
  for (const auto& [len, n] : stats.length_histogram) j["length_histogram"][std::to_string(len)] = n;
  return j.dump(2);
}

}  // namespace seqlab
