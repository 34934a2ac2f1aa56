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

#include <sstream>

#include "seqlab/corpus.h"
#include "seqlab/error.h"

namespace seqlab {
namespace {

const char kSuperinfection[] = "a\tB-problem\nbacterial\tI-problem\nsuperinfection\tI-problem\n\n";

TEST(ParseConll, EmptyInputGivesNoSentences) {
  EXPECT_TRUE(parse_conll(std::string_view("")).sentences.empty());
}

TEST(ParseConll, ReadsOneSentence) {
  const TaggedCorpus c = parse_conll(std::string_view(kSuperinfection));
  ASSERT_EQ(c.sentences.size(), 1u);
  EXPECT_EQ(c.sentences[0].tokens, (std::vector<std::string>{"a", "bacterial", "superinfection"}));
  EXPECT_EQ(c.sentences[0].tags, (TagSequence{"B-problem", "I-problem", "I-problem"}));
  EXPECT_EQ(c.label_set, default_label_set());
}

TEST(ParseConll, BlankLinesSeparateAndTrailingOnesAreIgnored) {
  const TaggedCorpus c = parse_conll(std::string_view("x\tO\n\ny\tB-test\n\n\n\n"));
  ASSERT_EQ(c.sentences.size(), 2u);
  EXPECT_EQ(c.sentences[1].tokens[0], "y");
}

TEST(ParseConll, ToleratesCarriageReturnsAndMissingFinalBlank) {
  const TaggedCorpus c = parse_conll(std::string_view("x\tO\r\ny\tB-test\r\n"));
  ASSERT_EQ(c.sentences.size(), 1u);
  EXPECT_EQ(c.sentences[0].tags[1], "B-test");
}

TEST(ParseConll, WrongFieldCountReportsLine) {
  try {
    parse_conll(std::string_view("a\tO\nb O\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_conll(std::string_view("a\tO\tO\n")), ParseError);
}

TEST(ParseConll, RejectsUnknownTagShape) {
  EXPECT_THROW(parse_conll(std::string_view("a\tX-problem\n")), ParseError);
  EXPECT_THROW(parse_conll(std::string_view("a\tB-\n")), ParseError);
  EXPECT_THROW(parse_conll(std::string_view("a\tb-test\n")), ParseError);
}

TEST(ParseConll, AppendsUnseenClasses) {
  const TaggedCorpus c = parse_conll(std::string_view("a\tB-drug\nb\tB-test\nc\tB-dose\n"));
  EXPECT_EQ(c.label_set, (std::vector<std::string>{"problem", "treatment", "test", "drug", "dose"}));
}

TEST(ParseConll, DoesNotEnforceIob) {
  const TaggedCorpus c = parse_conll(std::string_view("a\tI-test\n"));
  EXPECT_FALSE(is_valid_iob(c.sentences[0].tags));
}

TEST(WriteConll, EmptyCorpusIsEmptyText) { EXPECT_EQ(write_conll(TaggedCorpus{}), ""); }

TEST(WriteConll, SentenceIsExactBlock) {
  TaggedCorpus c;
  c.sentences.push_back({{"a", "bacterial", "superinfection"}, {"B-problem", "I-problem", "I-problem"}});
  EXPECT_EQ(write_conll(c), kSuperinfection);
  EXPECT_EQ(parse_conll(write_conll(c)), c);
}

TEST(ParseTag, Shapes) {
  EXPECT_EQ(parse_tag("O"), (Tag{TagPrefix::kOutside, ""}));
  EXPECT_EQ(parse_tag("B-test"), (Tag{TagPrefix::kBegin, "test"}));
  EXPECT_EQ(parse_tag("I-x-y"), (Tag{TagPrefix::kInside, "x-y"}));
  EXPECT_FALSE(parse_tag("I-").has_value());
  EXPECT_FALSE(parse_tag("o").has_value());
  EXPECT_EQ(format_tag(Tag{TagPrefix::kInside, "test"}), "I-test");
}

TEST(TagSet, IndexLayout) {
  const TagSet tags(default_label_set());
  EXPECT_EQ(tags.size(), 7u);
  EXPECT_EQ(tags.index_of("O"), 0u);
  EXPECT_EQ(tags.index_of("B-problem"), 1u);
  EXPECT_EQ(tags.index_of("I-problem"), 2u);
  EXPECT_EQ(tags.index_of("B-test"), 5u);
  EXPECT_EQ(tags.index_of("I-test"), 6u);
  EXPECT_THROW(tags.index_of("B-drug"), InvalidArgument);
  const TagSequence seq{"O", "B-treatment", "I-treatment"};
  EXPECT_EQ(tags.decode(tags.encode(seq)), seq);
  EXPECT_TRUE(TagSet::is_inside(4));
  EXPECT_TRUE(TagSet::is_begin(3));
  EXPECT_EQ(TagSet::label_of(4), 1u);
}

TEST(SpansToIob, ThreeTokenSpan) {
  const std::vector<EntitySpan> spans = {{"problem", 0, 2}};
  EXPECT_EQ(spans_to_iob(3, spans), (TagSequence{"B-problem", "I-problem", "I-problem"}));
}

TEST(SpansToIob, NoSpans) {
  EXPECT_EQ(spans_to_iob(4, {}), (TagSequence{"O", "O", "O", "O"}));
}

TEST(SpansToIob, AdjacentSpans) {
  const std::vector<EntitySpan> spans = {{"test", 0, 0}, {"test", 1, 2}};
  EXPECT_EQ(spans_to_iob(5, spans), (TagSequence{"B-test", "B-test", "I-test", "O", "O"}));
}

TEST(SpansToIob, RejectsOverlapAndRange) {
  const std::vector<EntitySpan> overlap = {{"test", 0, 2}, {"problem", 2, 3}};
  EXPECT_THROW(spans_to_iob(5, overlap), InvalidArgument);
  const std::vector<EntitySpan> out_of_range = {{"test", 3, 5}};
  EXPECT_THROW(spans_to_iob(5, out_of_range), InvalidArgument);
}

TEST(IobToSpans, Examples) {
  EXPECT_TRUE(iob_to_spans({"O", "O", "O"}).empty());
  EXPECT_EQ(iob_to_spans({"B-problem", "I-problem", "I-problem"}),
            (std::vector<EntitySpan>{{"problem", 0, 2}}));
  EXPECT_EQ(iob_to_spans({"B-test", "B-test", "I-test", "O", "O"}),
            (std::vector<EntitySpan>{{"test", 0, 0}, {"test", 1, 2}}));
  EXPECT_EQ(iob_to_spans({"B-test"}, 4)[0].sentence_index, 4u);
}

TEST(IobToSpans, RejectsInvalid) {
  EXPECT_THROW(iob_to_spans({"O", "I-test"}), InvalidArgument);
}

TEST(ValidateIob, Examples) {
  const auto v1 = validate_iob({"O", "I-test"});
  ASSERT_EQ(v1.size(), 1u);
  EXPECT_EQ(v1[0].index, 1u);
  const auto v2 = validate_iob({"B-problem", "I-treatment"});
  ASSERT_EQ(v2.size(), 1u);
  EXPECT_EQ(v2[0].index, 1u);
  EXPECT_TRUE(validate_iob({"B-test", "I-test", "O", "B-test"}).empty());
  EXPECT_EQ(validate_iob({"I-test"}).size(), 1u);
  EXPECT_EQ(validate_iob({"O", "bogus"}).size(), 1u);
}

TEST(CorpusStats, EmptyCorpus) {
  const CorpusStats s = corpus_stats(TaggedCorpus{});
  EXPECT_TRUE(s.tag_distribution.empty());
  EXPECT_TRUE(s.entity_counts.empty());
  EXPECT_TRUE(s.length_histogram.empty());
}

TEST(CorpusStats, SingleSentence) {
  const CorpusStats s = corpus_stats(parse_conll(std::string_view(kSuperinfection)));
  EXPECT_NEAR(s.tag_distribution.at("B-problem"), 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.tag_distribution.at("I-problem"), 200.0 / 3.0, 1e-12);
  EXPECT_EQ(s.entity_counts, (std::map<std::string, std::size_t>{{"problem", 1}}));
  EXPECT_EQ(s.length_histogram, (std::map<std::size_t, std::size_t>{{3, 1}}));
  double total = 0.0;
  for (const auto& [tag, pct] : s.tag_distribution) total += pct;
  EXPECT_NEAR(total, 100.0, 1e-9);
}

TEST(CorpusStats, JsonKeys) {
  const std::string json = stats_to_json(corpus_stats(parse_conll(std::string_view(kSuperinfection))));
  for (const char* key : {"\"tag_distribution\"", "\"entity_counts\"", "\"length_histogram\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

TEST(ParseI2b2, ConceptOnThirdLine) {
  const std::string report = "first line\nsecond line here\na bacterial superinfection noted\n";
  const auto doc =
      parse_i2b2(report, "c=\"bacterial superinfection\" 3:1 3:2||t=\"problem\"\n");
  ASSERT_EQ(doc.spans.size(), 1u);
  EXPECT_EQ(doc.spans[0], (EntitySpan{"problem", 1, 2, 2}));
  EXPECT_TRUE(doc.warnings.empty());
  const TaggedCorpus c = i2b2_to_corpus(doc);
  ASSERT_EQ(c.sentences.size(), 3u);
  EXPECT_EQ(c.sentences[2].tags, (TagSequence{"O", "B-problem", "I-problem", "O"}));
}

TEST(ParseI2b2, EmptyConceptFile) {
  EXPECT_TRUE(parse_i2b2("one two\n", "").spans.empty());
}

TEST(ParseI2b2, OutOfRangeTokenIsAnError) {
  EXPECT_THROW(parse_i2b2("one two\n", "c=\"two three\" 1:1 1:2||t=\"test\"\n"), Error);
  EXPECT_THROW(parse_i2b2("one two\n", "c=\"one\" 2:0 2:0||t=\"test\"\n"), Error);
}

TEST(ParseI2b2, TextMismatchIsAWarning) {
  const auto doc = parse_i2b2("One Two\n", "c=\"one three\" 1:0 1:1||t=\"test\"\n");
  EXPECT_EQ(doc.spans.size(), 1u);
  EXPECT_EQ(doc.warnings.size(), 1u);
  EXPECT_TRUE(parse_i2b2("One Two\n", "c=\"one two\" 1:0 1:1||t=\"test\"\n").warnings.empty());
}

TEST(ParseI2b2, MalformedConceptLine) {
  EXPECT_THROW(parse_i2b2("one\n", "c=\"one\" 1:0||t=\"test\"\n"), ParseError);
}

TEST(I2b2ToCorpus, AppendsNewTypes) {
  const auto doc = parse_i2b2("x y\n", "c=\"y\" 1:1 1:1||t=\"drug\"\n");
  const TaggedCorpus c = i2b2_to_corpus(doc);
  EXPECT_EQ(c.label_set.back(), "drug");
  EXPECT_EQ(c.sentences[0].tags[1], "B-drug");
}

}  // namespace
}  // namespace seqlab
