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

// Per-token input features: character index rows, writing-format one-hots
// and word vectors from pluggable providers.

#ifndef SEQLAB_FEATURES_H_
#define SEQLAB_FEATURES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqlab {

// Decodes UTF-8 into code points. Each byte of an invalid sequence becomes
// one U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

// Fixed 97-symbol character table:
//   0 PAD, 1 UNK, 2-27 'a'-'z', 28-53 'A'-'Z', 54-63 '0'-'9',
//   64-95 ASCII punctuation in code-point order, 96 space.
class CharVocab {
 public:
  static constexpr std::size_t kSize = 97;
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  CharVocab();

  std::size_t size() const { return kSize; }
  int index_of(char32_t c) const;
  // Symbol for an index; PAD and UNK map to U+0000 and U+FFFD.
  char32_t symbol(int index) const { return symbols_.at(static_cast<std::size_t>(index)); }

 private:
  std::array<char32_t, kSize> symbols_{};
  std::array<int, 128> ascii_index_{};
};

const CharVocab& build_char_vocab();

// Character indices for one word, truncated at the tail and PAD-filled to
// exactly `max_word_len` entries.
using CharRow = std::vector<int>;
CharRow encode_chars(std::string_view word, std::size_t max_word_len, const CharVocab& vocab);

enum class FormatCategory : int {
  kAllUpper = 0,
  kInitCap = 1,
  kMixedCase = 2,
  kAllDigits = 3,
  kDigitsPunct = 4,
  kAlphanumeric = 5,
  kAllLower = 6,
  kOther = 7,
};
inline constexpr std::size_t kFormatDim = 8;

struct FormatVector {
  FormatCategory category = FormatCategory::kOther;
  std::array<double, kFormatDim> onehot{};

  int index() const { return static_cast<int>(category); }
};

// Orthographic shape of a word. Checked in the order ALL_DIGITS,
// DIGITS_PUNCT, ALPHANUMERIC, ALL_UPPER, INIT_CAP, ALL_LOWER, MIXED_CASE,
// falling through to OTHER. Only ASCII letters/digits/punctuation count.
FormatVector writing_format(std::string_view word);

enum class WordSource { kEmbeddingFile, kTrainableLookup, kHashStub };
const char* to_string(WordSource source);

class WordVectorProvider {
 public:
  virtual ~WordVectorProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual WordSource source() const = 0;
  // Throws MissingKeyError when no vector is available.
  virtual std::vector<double> lookup(std::size_t sentence_id, std::size_t token_index,
                                     std::string_view word) const = 0;
  // Confirms the provider agrees with the consumer's sentence length.
  virtual void check_sentence(std::size_t /*sentence_id*/, std::size_t /*n_tokens*/) const {}
};

// Contextual vectors read from an embedding dump:
//   #DIM <d>
//   #SENT <sentence_id> <n_tokens>
//   <v1> ... <vd>          one line per token, single spaces
class EmbeddingFileProvider final : public WordVectorProvider {
 public:
  EmbeddingFileProvider(std::size_t dim,
                        std::unordered_map<std::size_t, std::vector<std::vector<double>>> vectors)
      : dim_(dim), vectors_(std::move(vectors)) {}

  std::size_t dim() const override { return dim_; }
  WordSource source() const override { return WordSource::kEmbeddingFile; }
  std::vector<double> lookup(std::size_t sentence_id, std::size_t token_index,
                             std::string_view word) const override;
  void check_sentence(std::size_t sentence_id, std::size_t n_tokens) const override;

  std::size_t sentence_count() const { return vectors_.size(); }
  // Declared token count for a sentence; throws MissingKeyError if absent.
  std::size_t token_count(std::size_t sentence_id) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::size_t, std::vector<std::vector<double>>> vectors_;
};

EmbeddingFileProvider parse_embedding_file(std::istream& input);
EmbeddingFileProvider load_embedding_file(const std::string& path);

// Writes the dump format with shortest round-trip decimal floats.
void write_embeddings(std::ostream& out, std::size_t dim,
                      const std::vector<std::vector<std::vector<double>>>& sentences);

// Deterministic pseudo-random vector in [-1, 1]^dim keyed by (word, seed).
std::vector<double> hash_embedding(std::string_view word, std::size_t dim, std::uint64_t seed);

class HashProvider final : public WordVectorProvider {
 public:
  HashProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

  std::size_t dim() const override { return dim_; }
  WordSource source() const override { return WordSource::kHashStub; }
  std::vector<double> lookup(std::size_t, std::size_t, std::string_view word) const override {
    return hash_embedding(word, dim_, seed_);
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Read-only view of a trainable word table: row 0 is the unknown word, the
// remaining rows follow `vocabulary` order.
class LookupProvider final : public WordVectorProvider {
 public:
  LookupProvider(std::vector<std::string> vocabulary, std::size_t dim,
                 std::span<const double> table);

  std::size_t dim() const override { return dim_; }
  WordSource source() const override { return WordSource::kTrainableLookup; }
  std::vector<double> lookup(std::size_t, std::size_t, std::string_view word) const override;
  std::size_t row_of(std::string_view word) const;

 private:
  std::unordered_map<std::string, std::size_t> rows_;
  std::size_t dim_;
  std::span<const double> table_;
};

struct TokenFeatures {
  std::vector<double> word;
  CharRow chars;
  FormatVector format;
};

// Throws MissingKeyError naming the sentence and token when the provider has
// no vector for a position.
std::vector<TokenFeatures> assemble_features(std::size_t sentence_id,
                                             const std::vector<std::string>& tokens,
                                             const WordVectorProvider& provider,
                                             const CharVocab& vocab, std::size_t max_word_len);

// Longest word of a corpus in code points.
std::size_t longest_word(const std::vector<std::vector<std::string>>& sentences);

}  // namespace seqlab

#endif  // SEQLAB_FEATURES_H_
