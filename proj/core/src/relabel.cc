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

#include "seqlab/relabel.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "seqlab/error.h"

namespace seqlab {
namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

RelabelConfig::RelabelConfig(const std::vector<std::string>& stopwords,
                             const std::vector<std::string>& frequent_words,
                             const std::vector<std::string>& abbreviation_whitelist) {
  std::set<std::string> whitelist_lower;
  for (const auto& w : abbreviation_whitelist) {
    if (w.empty()) throw InvalidArgument("empty entry in abbreviation whitelist");
    whitelist_.insert(w);
    whitelist_lower.insert(lower(w));
  }
  auto fill = [&](const std::vector<std::string>& words, std::set<std::string>& target,
                  const char* what) {
    for (const auto& w : words) {
      if (w.empty()) throw InvalidArgument(std::string("empty entry in ") + what);
      std::string lw = lower(w);
      if (!whitelist_lower.contains(lw)) target.insert(std::move(lw));
    }
  };
  fill(stopwords, stopwords_, "stopwords");
  fill(frequent_words, frequent_words_, "frequent words");
}

bool RelabelConfig::is_flagged(const std::string& token) const {
  if (whitelist_.contains(token)) return false;
  const std::string lw = lower(token);
  return stopwords_.contains(lw) || frequent_words_.contains(lw);
}

RelabelConfig default_relabel_config() {
  static const std::vector<std::string> kStopwords = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
      "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him",
      "his", "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its",
      "itself", "they", "them", "their", "theirs", "themselves", "what", "which", "who",
      "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was",
      "were", "be", "been", "being", "have", "has", "had", "having", "do", "does", "did",
      "doing", "a", "an", "the", "and", "but", "if", "or", "because", "until", "while",
      "of", "at", "by", "for", "with", "about", "against", "between", "into", "through",
      "during", "before", "after", "above", "below", "to", "from", "up", "down", "in",
      "out", "on", "off", "over", "under", "again", "further", "then", "once", "here",
      "there", "when", "where", "why", "how", "any", "both", "each", "few", "more", "most",
      "other", "some", "such", "nor", "not", "only", "own", "same", "so", "than", "too",
      "very", "s", "can", "will", "just", "don", "don't", "should", "should've", "now",
      "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't",
      "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven",
      "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn",
      "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren",
      "weren't", "won", "won't", "wouldn", "wouldn't", "'s",  };
  static const std::vector<std::string> kFrequent = {"patient", "patients"};
  static const std::vector<std::string> kWhitelist = {
      "ALL", "AS", "NO", "D", "T", "K", "Na", "Ca", "Mg", "PT", "INR", "HR", "BP"};
  return RelabelConfig(kStopwords, kFrequent, kWhitelist);
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word list " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

RelabelConfig load_relabel_config(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("cannot open relabel config " + json_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path + ": " + e.what());
  }
  const std::filesystem::path base = std::filesystem::path(json_path).parent_path();
  const RelabelConfig defaults = default_relabel_config();
  auto list = [&](const char* key, const std::set<std::string>& fallback) {
    if (!j.contains(key)) return std::vector<std::string>(fallback.begin(), fallback.end());
    std::filesystem::path p = j.at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    return read_word_list(p.string());
  };
  return RelabelConfig(list("stopwords", defaults.stopwords()),
                       list("frequent_words", defaults.frequent_words()),
                       list("abbreviation_whitelist", defaults.abbreviation_whitelist()));
}

RelabelResult relabel_sentence(const std::vector<std::string>& tokens, const TagSequence& tags,
                               const RelabelConfig& config) {
  if (tokens.size() != tags.size()) {
    throw InvalidArgument("relabel: token and tag counts differ");
  }
  RelabelResult result{tags, 0};
  for (const auto& span : iob_to_spans(tags)) {
    std::size_t start = span.start;
    while (start < span.end && config.is_flagged(tokens[start])) {
      result.tags[start] = "O";
      ++start;
      result.tags[start] = "B-" + span.label;
      ++result.change_count;
    }
  }
  return result;
}

std::size_t RelabelSummary::total_shifts() const {
  std::size_t n = 0;
  for (const auto& [label, flips] : per_class) n += flips.shifts;
  return n;
}

RelabelCorpusResult relabel_corpus(const TaggedCorpus& corpus, const RelabelConfig& config) {
  RelabelCorpusResult out;
  out.corpus.label_set = corpus.label_set;
  out.corpus.sentences.reserve(corpus.sentences.size());
  for (const auto& label : corpus.label_set) out.summary.per_class[label];
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sentence = corpus.sentences[s];
    RelabelResult r;
    try {
      r = relabel_sentence(sentence.tokens, sentence.tags, config);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("sentence " + std::to_string(s) + ": " + e.what());
    }
    if (r.change_count > 0) {
      ++out.summary.sentences_changed;
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        const auto before = parse_tag(sentence.tags[i]);
        const auto after = parse_tag(r.tags[i]);
        if (before->prefix == TagPrefix::kBegin && after->prefix == TagPrefix::kOutside) {
          ++out.summary.per_class[before->label].begin_to_outside;
        } else if (before->prefix == TagPrefix::kInside && after->prefix == TagPrefix::kBegin) {
          ++out.summary.per_class[before->label].inside_to_begin;
        } else if (before->prefix == TagPrefix::kInside && after->prefix == TagPrefix::kOutside) {
          ++out.summary.per_class[before->label].inside_to_outside;
          ++out.summary.per_class[before->label].shifts;
        }
        if (before->prefix == TagPrefix::kBegin && after->prefix == TagPrefix::kOutside) {
          ++out.summary.per_class[before->label].shifts;
        }
      }
    }
    out.corpus.sentences.push_back({sentence.tokens, std::move(r.tags)});
  }
  return out;
}

std::string summary_to_json(const RelabelSummary& summary) {
  nlohmann::ordered_json j;
  j["sentences_changed"] = summary.sentences_changed;
  j["total_shifts"] = summary.total_shifts();
  j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& [label, flips] : summary.per_class) {
    j["per_class"][label] = {{"B_to_O", flips.begin_to_outside},
                             {"I_to_B", flips.inside_to_begin},
                             {"I_to_O", flips.inside_to_outside},
                             {"shifts", flips.shifts}};
  }
  return j.dump(2);
}

}  // namespace seqlab
