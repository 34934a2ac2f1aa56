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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "seqlab/error.h"
#include "seqlab/relabel.h"
#include "seqlab/testing/oracles.h"

namespace seqlab {
namespace {

TEST(RelabelSentence, ArticleIsDropped) {
  const auto r = relabel_sentence({"a", "bacterial", "superinfection"},
                                  {"B-problem", "I-problem", "I-problem"}, default_relabel_config());
  EXPECT_EQ(r.tags, (TagSequence{"O", "B-problem", "I-problem"}));
  EXPECT_EQ(r.change_count, 1u);
}

TEST(RelabelSentence, PossessiveNeedsTwoSteps) {
  const auto r = relabel_sentence({"Patient", "'s", "neurologic", "exam"},
                                  {"B-test", "I-test", "I-test", "I-test"}, default_relabel_config());
  EXPECT_EQ(r.tags, (TagSequence{"O", "O", "B-test", "I-test"}));
  EXPECT_EQ(r.change_count, 2u);
}

TEST(RelabelSentence, SingleTokenEntityIsKept) {
  const auto r = relabel_sentence({"a"}, {"B-problem"}, default_relabel_config());
  EXPECT_EQ(r.tags, (TagSequence{"B-problem"}));
  EXPECT_EQ(r.change_count, 0u);
}

TEST(RelabelSentence, LastTokenSurvives) {
  const RelabelConfig config({"the", "of"}, {}, {});
  const auto r = relabel_sentence({"the", "of", "CBC"}, {"B-test", "I-test", "I-test"}, config);
  EXPECT_EQ(r.tags, (TagSequence{"O", "O", "B-test"}));
  const auto all = relabel_sentence({"the", "of"}, {"B-test", "I-test"}, config);
  EXPECT_EQ(all.tags, (TagSequence{"O", "B-test"}));
}

TEST(RelabelSentence, WhitelistIsCaseSensitive) {
  const RelabelConfig config({"no", "all"}, {}, {"NO", "ALL"});
  // "NO" (nitric oxide) and "ALL" (leukemia) stay; lowercase "no" is dropped
  // from the stopwords because it collides with the whitelist.
  EXPECT_EQ(relabel_sentence({"NO", "level"}, {"B-test", "I-test"}, config).tags,
            (TagSequence{"B-test", "I-test"}));
  EXPECT_EQ(relabel_sentence({"ALL", "relapse"}, {"B-problem", "I-problem"}, config).tags,
            (TagSequence{"B-problem", "I-problem"}));
  EXPECT_FALSE(config.stopwords().contains("no"));
  EXPECT_TRUE(config.abbreviation_whitelist().contains("NO"));
}

TEST(RelabelSentence, DefaultWhitelistProtectsAbbreviations) {
  EXPECT_EQ(relabel_sentence({"ALL", "relapse"}, {"B-problem", "I-problem"},
                             default_relabel_config())
                .tags,
            (TagSequence{"B-problem", "I-problem"}));
  EXPECT_EQ(relabel_sentence({"all", "relapse"}, {"B-problem", "I-problem"},
                             default_relabel_config())
                .tags,
            (TagSequence{"B-problem", "I-problem"}));
}

TEST(RelabelSentence, RejectsInvalidIob) {
  EXPECT_THROW(relabel_sentence({"a", "b"}, {"O", "I-test"}, default_relabel_config()),
               InvalidArgument);
}

TEST(RelabelConfig, RejectsEmptyEntries) {
  EXPECT_THROW(RelabelConfig({""}, {}, {}), InvalidArgument);
}

TEST(RelabelConfig, LowercasesLists) {
  const RelabelConfig config({"The"}, {"Patient"}, {});
  EXPECT_TRUE(config.is_flagged("the"));
  EXPECT_TRUE(config.is_flagged("THE"));
  EXPECT_TRUE(config.is_flagged("patient"));
  EXPECT_FALSE(config.is_flagged("fever"));
}

TEST(RelabelCorpus, TwoSentenceSummary) {
  TaggedCorpus c;
  c.sentences.push_back({{"a", "bacterial", "superinfection"}, {"B-problem", "I-problem", "I-problem"}});
  c.sentences.push_back({{"Patient", "'s", "neurologic", "exam"}, {"B-test", "I-test", "I-test", "I-test"}});
  const auto r = relabel_corpus(c, default_relabel_config());
  EXPECT_EQ(r.summary.sentences_changed, 2u);
  EXPECT_EQ(r.summary.total_shifts(), 3u);

  auto count = [](const TaggedCorpus& corpus, char prefix) {
    std::size_t n = 0;
    for (const auto& s : corpus.sentences) {
      for (const auto& t : s.tags) n += t[0] == prefix;
    }
    return n;
  };
  EXPECT_EQ(count(r.corpus, 'B'), count(c, 'B'));
  EXPECT_EQ(count(c, 'I') - count(r.corpus, 'I'), 3u);

  const RelabelFlips problem = r.summary.per_class.at("problem");
  EXPECT_EQ(problem.begin_to_outside, 1u);
  EXPECT_EQ(problem.inside_to_begin, 1u);
  EXPECT_EQ(problem.shifts, 1u);
  const RelabelFlips test = r.summary.per_class.at("test");
  EXPECT_EQ(test.begin_to_outside, 1u);
  EXPECT_EQ(test.inside_to_outside, 1u);
  EXPECT_EQ(test.inside_to_begin, 1u);
  EXPECT_EQ(test.shifts, 2u);

  const std::string json = summary_to_json(r.summary);
  EXPECT_NE(json.find("\"B_to_O\""), std::string::npos);
  EXPECT_NE(json.find("\"I_to_B\""), std::string::npos);
}

TEST(RelabelCorpus, NoFlaggedPrefixesMeansNoChange) {
  TaggedCorpus c;
  c.sentences.push_back({{"chest", "pain"}, {"B-problem", "I-problem"}});
  const auto r = relabel_corpus(c, default_relabel_config());
  EXPECT_EQ(r.corpus, c);
  EXPECT_EQ(r.summary.total_shifts(), 0u);
  EXPECT_EQ(r.summary.sentences_changed, 0u);
  for (const auto& [label, flips] : r.summary.per_class) EXPECT_EQ(flips, RelabelFlips{});
}

TEST(RelabelCorpus, PropertiesOnRandomCorpora) {
  Rng rng(31);
  for (int n = 0; n < 300; ++n) {
    const TaggedCorpus c = testing::random_corpus(rng, default_label_set());
    const RelabelConfig config = testing::random_relabel_config(rng);
    const TaggedCorpus once = relabel_corpus(c, config).corpus;
    ASSERT_EQ(relabel_corpus(once, config).corpus, once);
    for (std::size_t s = 0; s < c.sentences.size(); ++s) {
      const auto& before = c.sentences[s].tags;
      const auto& after = once.sentences[s].tags;
      ASSERT_TRUE(is_valid_iob(after));
      const auto b = iob_to_spans(before);
      const auto a = iob_to_spans(after);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        // Surviving spans are suffixes of the originals.
        EXPECT_EQ(a[i].label, b[i].label);
        EXPECT_EQ(a[i].end, b[i].end);
        EXPECT_GE(a[i].start, b[i].start);
        for (std::size_t t = b[i].start; t < a[i].start; ++t) {
          EXPECT_FALSE(config.abbreviation_whitelist().contains(c.sentences[s].tokens[t]));
        }
      }
      for (std::size_t t = 0; t < before.size(); ++t) {
        if (before[t] == "O") EXPECT_EQ(after[t], "O");
      }
    }
  }
}

TEST(WordLists, DataFilesMatchBuiltInDefaults) {
  const std::filesystem::path dir = std::filesystem::path(SEQLAB_DATA_DIR) / "relabel";
  const RelabelConfig from_files = load_relabel_config((dir / "relabel.json").string());
  const RelabelConfig builtin = default_relabel_config();
  EXPECT_EQ(from_files.stopwords(), builtin.stopwords());
  EXPECT_EQ(from_files.frequent_words(), builtin.frequent_words());
  EXPECT_EQ(from_files.abbreviation_whitelist(), builtin.abbreviation_whitelist());
  EXPECT_TRUE(builtin.stopwords().contains("'s"));
  EXPECT_TRUE(builtin.frequent_words().contains("patient"));
}

TEST(WordLists, CommentsAndMissingKeys) {
  const auto dir = std::filesystem::temp_directory_path() / "seqlab-relabel-test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "stop.txt") << "# header\n  the  \n\nof # trailing\n";
    std::ofstream(dir / "cfg.json") << R"({"stopwords": "stop.txt"})";
  }
  EXPECT_EQ(read_word_list((dir / "stop.txt").string()), (std::vector<std::string>{"the", "of"}));
  const RelabelConfig config = load_relabel_config((dir / "cfg.json").string());
  EXPECT_EQ(config.stopwords(), (std::set<std::string>{"of", "the"}));
  EXPECT_EQ(config.frequent_words(), default_relabel_config().frequent_words());
  EXPECT_THROW(read_word_list((dir / "missing.txt").string()), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace seqlab
