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

#include "seqlab/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "seqlab/error.h"

namespace seqlab {
namespace {

void check_aligned(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw InvalidArgument("gold has " + std::to_string(gold.sentences.size()) +
                          " sentences, prediction has " + std::to_string(pred.sentences.size()));
  }
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    if (gold.sentences[s].tokens != pred.sentences[s].tokens) {
      throw InvalidArgument("sentence " + std::to_string(s) + " differs between gold and prediction");
    }
    if (gold.sentences[s].tags.size() != gold.sentences[s].size() ||
        pred.sentences[s].tags.size() != pred.sentences[s].size()) {
      throw InvalidArgument("sentence " + std::to_string(s) + " has a tag count mismatch");
    }
  }
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

nlohmann::ordered_json scores_json(const ClassScores& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["support"] = s.support;
  j["tp"] = s.true_positives;
  j["fp"] = s.false_positives;
  j["fn"] = s.false_negatives;
  j["rounded"] = {{"precision", round4(s.precision)},
                  {"recall", round4(s.recall)},
                  {"f1", round4(s.f1)}};
  return j;
}

ClassScores scores_from_json(const nlohmann::json& j) {
  ClassScores s;
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.f1 = j.at("f1").get<double>();
  s.support = j.at("support").get<std::size_t>();
  s.true_positives = j.at("tp").get<std::size_t>();
  s.false_positives = j.at("fp").get<std::size_t>();
  s.false_negatives = j.at("fn").get<std::size_t>();
  return s;
}

constexpr const char* kTotalKey = "avg/total";

}  // namespace

void ClassScores::finalize() {
  const double tp = static_cast<double>(true_positives);
  const std::size_t predicted = true_positives + false_positives;
  support = true_positives + false_negatives;
  precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
  recall = support == 0 ? 0.0 : tp / static_cast<double>(support);
  f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

const ClassScores& EvalReport::at(std::string_view label) const {
  if (label == kTotalKey) return micro;
  for (const auto& [name, scores] : per_class) {
    if (name == label) return scores;
  }
  throw InvalidArgument("no scores for class " + std::string(label));
}

EvalReport entity_prf(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  check_aligned(gold, pred);
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;
  std::set<Key> gold_spans;
  std::set<Key> pred_spans;
  std::vector<std::string> labels = gold.label_set;
  auto note_label = [&](const std::string& l) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  };
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    for (const auto& sp : iob_to_spans(gold.sentences[s].tags, s)) {
      note_label(sp.label);
      gold_spans.emplace(sp.label, s, sp.start, sp.end);
    }
    for (const auto& sp : iob_to_spans(pred.sentences[s].tags, s)) {
      note_label(sp.label);
      pred_spans.emplace(sp.label, s, sp.start, sp.end);
    }
  }

  EvalReport report;
  for (const auto& label : labels) report.per_class.emplace_back(label, ClassScores{});
  auto slot = [&](const std::string& label) -> ClassScores& {
    for (auto& [name, scores] : report.per_class) {
      if (name == label) return scores;
    }
    throw std::logic_error("label missing from report");
  };
  for (const auto& key : pred_spans) {
    auto& c = slot(std::get<0>(key));
    if (gold_spans.contains(key)) {
      ++c.true_positives;
    } else {
      ++c.false_positives;
    }
  }
  for (const auto& key : gold_spans) {
    if (!pred_spans.contains(key)) ++slot(std::get<0>(key)).false_negatives;
  }
  for (auto& [name, scores] : report.per_class) {
    scores.finalize();
    report.micro.true_positives += scores.true_positives;
    report.micro.false_positives += scores.false_positives;
    report.micro.false_negatives += scores.false_negatives;
  }
  report.micro.finalize();
  return report;
}

double token_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  check_aligned(gold, pred);
  std::size_t total = 0;
  std::size_t same = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s].tags;
    const auto& p = pred.sentences[s].tags;
    for (std::size_t i = 0; i < g.size(); ++i) same += g[i] == p[i] ? 1 : 0;
    total += g.size();
  }
  return total == 0 ? 1.0 : static_cast<double>(same) / static_cast<double>(total);
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, scores] : report.per_class) j[name] = scores_json(scores);
  j[kTotalKey] = scores_json(report.micro);
  return j.dump(2);
}

EvalReport parse_report_json(std::string_view json_text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("evaluation report: ") + e.what());
  }
  EvalReport report;
  bool has_total = false;
  for (const auto& [key, value] : j.items()) {
    if (key == kTotalKey) {
      report.micro = scores_from_json(value);
      has_total = true;
    } else {
      report.per_class.emplace_back(key, scores_from_json(value));
    }
  }
  if (!has_total) throw ParseError("evaluation report: missing \"avg/total\"");
  return report;
}

std::string report_table(const EvalReport& report) {
  std::size_t width = std::string(kTotalKey).size();
  for (const auto& [name, scores] : report.per_class) width = std::max(width, name.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%*s  %9s  %9s  %9s  %9s\n", static_cast<int>(width), "",
                "precision", "recall", "f1-score", "support");
  out += line;
  auto row = [&](const std::string& name, const ClassScores& s) {
    std::snprintf(line, sizeof line, "%*s  %9.4f  %9.4f  %9.4f  %9zu\n", static_cast<int>(width),
                  name.c_str(), s.precision, s.recall, s.f1, s.support);
    out += line;
  };
  for (const auto& [name, scores] : report.per_class) row(name, scores);
  out += '\n';
  row(kTotalKey, report.micro);
  return out;
}

}  // namespace seqlab
