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

#include "seqlab/features.h"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "seqlab/error.h"

namespace seqlab {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool is_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    // Reject overlong forms and surrogates.
    if (ok && ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
               (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) || (cp >= 0xD800 && cp <= 0xDFFF))) {
      ok = false;
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

CharVocab::CharVocab() {
  ascii_index_.fill(kUnk);
  std::size_t next = 0;
  symbols_[next++] = 0;
  symbols_[next++] = kReplacement;
  for (char32_t c = U'a'; c <= U'z'; ++c) symbols_[next++] = c;
  for (char32_t c = U'A'; c <= U'Z'; ++c) symbols_[next++] = c;
  for (char32_t c = U'0'; c <= U'9'; ++c) symbols_[next++] = c;
  for (char32_t c = 0x21; c <= 0x7E; ++c) {
    if (is_punct(c)) symbols_[next++] = c;
  }
  symbols_[next++] = U' ';
  if (next != kSize) throw std::logic_error("character table size mismatch");
  for (std::size_t i = 2; i < kSize; ++i) ascii_index_[symbols_[i]] = static_cast<int>(i);
}

int CharVocab::index_of(char32_t c) const {
  return c < ascii_index_.size() && c != 0 ? ascii_index_[c] : kUnk;
}

const CharVocab& build_char_vocab() {
  static const CharVocab vocab;
  return vocab;
}

CharRow encode_chars(std::string_view word, std::size_t max_word_len, const CharVocab& vocab) {
  if (max_word_len == 0) throw InvalidArgument("max_word_len must be at least 1");
  CharRow row(max_word_len, CharVocab::kPad);
  const auto cps = decode_utf8(word);
  const std::size_t n = std::min(cps.size(), max_word_len);
  for (std::size_t i = 0; i < n; ++i) row[i] = vocab.index_of(cps[i]);
  return row;
}

FormatVector writing_format(std::string_view word) {
  const auto cps = decode_utf8(word);
  std::size_t upper = 0, lower = 0, digit = 0, punct = 0, other = 0;
  for (char32_t c : cps) {
    if (is_upper(c)) {
      ++upper;
    } else if (is_lower(c)) {
      ++lower;
    } else if (is_digit(c)) {
      ++digit;
    } else if (is_punct(c)) {
      ++punct;
    } else {
      ++other;
    }
  }
  const std::size_t n = cps.size();
  const std::size_t letters = upper + lower;
  FormatCategory cat = FormatCategory::kOther;
  if (n == 0 || other > 0) {
    cat = FormatCategory::kOther;
  } else if (digit == n) {
    cat = FormatCategory::kAllDigits;
  } else if (digit > 0 && letters == 0) {
    cat = FormatCategory::kDigitsPunct;
  } else if (digit > 0) {
    cat = FormatCategory::kAlphanumeric;
  } else if (upper == n) {
    cat = FormatCategory::kAllUpper;
  } else if (n >= 2 && letters == n && is_upper(cps[0]) && lower == n - 1) {
    cat = FormatCategory::kInitCap;
  } else if (lower == n) {
    cat = FormatCategory::kAllLower;
  } else if (letters == n) {
    cat = FormatCategory::kMixedCase;
  }
  FormatVector v;
  v.category = cat;
  v.onehot[static_cast<std::size_t>(cat)] = 1.0;
  return v;
}

const char* to_string(WordSource source) {
  switch (source) {
    case WordSource::kEmbeddingFile:
      return "embedding-file";
    case WordSource::kTrainableLookup:
      return "trainable-lookup";
    case WordSource::kHashStub:
      return "hash-stub";
  }
  return "unknown";
}

std::vector<double> EmbeddingFileProvider::lookup(std::size_t sentence_id, std::size_t token_index,
                                                  std::string_view) const {
  auto it = vectors_.find(sentence_id);
  if (it == vectors_.end()) {
    throw MissingKeyError("no embeddings for sentence " + std::to_string(sentence_id));
  }
  if (token_index >= it->second.size()) {
    throw MissingKeyError("no embedding for sentence " + std::to_string(sentence_id) +
                          " token " + std::to_string(token_index));
  }
  return it->second[token_index];
}

std::size_t EmbeddingFileProvider::token_count(std::size_t sentence_id) const {
  auto it = vectors_.find(sentence_id);
  if (it == vectors_.end()) {
    throw MissingKeyError("no embeddings for sentence " + std::to_string(sentence_id));
  }
  return it->second.size();
}

void EmbeddingFileProvider::check_sentence(std::size_t sentence_id, std::size_t n_tokens) const {
  const std::size_t declared = token_count(sentence_id);
  if (declared != n_tokens) {
    throw FormatError("embedding file declares " + std::to_string(declared) +
                      " tokens for sentence " + std::to_string(sentence_id) +
                      " but the corpus sentence has " + std::to_string(n_tokens));
  }
}

EmbeddingFileProvider parse_embedding_file(std::istream& input) {
  auto fail = [](std::size_t line_no, const std::string& msg) -> FormatError {
    return FormatError("embedding file line " + std::to_string(line_no) + ": " + msg);
  };
  auto parse_size = [&](std::string_view field, std::size_t line_no) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
      throw fail(line_no, "expected a non-negative integer, got '" + std::string(field) + "'");
    }
    return value;
  };
  auto split = [](std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t sp = line.find(' ', pos);
      fields.push_back(line.substr(pos, sp == std::string_view::npos ? line.npos : sp - pos));
      if (sp == std::string_view::npos) break;
      pos = sp + 1;
    }
    return fields;
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(input, line)) throw FormatError("embedding file: missing #DIM header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line);
  if (header.size() != 2 || header[0] != "#DIM") throw fail(line_no, "expected '#DIM <d>'");
  const std::size_t dim = parse_size(header[1], line_no);
  if (dim == 0) throw fail(line_no, "dimension must be positive");

  std::unordered_map<std::size_t, std::vector<std::vector<double>>> vectors;
  std::vector<std::vector<double>>* current = nullptr;
  std::size_t current_id = 0;
  std::size_t expected = 0;
  auto close_sentence = [&](std::size_t at_line) {
    if (current != nullptr && current->size() != expected) {
      throw fail(at_line, "sentence " + std::to_string(current_id) + " declares " +
                              std::to_string(expected) + " tokens but has " +
                              std::to_string(current->size()) + " vectors");
    }
  };
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw fail(line_no, "blank line");
    auto fields = split(line);
    if (fields[0] == "#SENT") {
      close_sentence(line_no);
      if (fields.size() != 3) throw fail(line_no, "expected '#SENT <sentence_id> <n_tokens>'");
      current_id = parse_size(fields[1], line_no);
      expected = parse_size(fields[2], line_no);
      auto [it, inserted] = vectors.try_emplace(current_id);
      if (!inserted) throw fail(line_no, "duplicate sentence " + std::to_string(current_id));
      current = &it->second;
      current->reserve(expected);
      continue;
    }
    if (current == nullptr) throw fail(line_no, "vector line before any #SENT header");
    if (current->size() == expected) {
      throw fail(line_no, "sentence " + std::to_string(current_id) + " has more than " +
                              std::to_string(expected) + " vectors");
    }
    if (fields.size() != dim) {
      throw fail(line_no, "vector has " + std::to_string(fields.size()) + " values, expected " +
                              std::to_string(dim));
    }
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
        throw fail(line_no, "bad number '" + std::string(f) + "'");
      }
    }
    current->push_back(std::move(v));
  }
  close_sentence(line_no);
  return EmbeddingFileProvider(dim, std::move(vectors));
}

EmbeddingFileProvider load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path);
  try {
    return parse_embedding_file(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_embeddings(std::ostream& out, std::size_t dim,
                      const std::vector<std::vector<std::vector<double>>>& sentences) {
  out << "#DIM " << dim << '\n';
  char buf[64];
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    out << "#SENT " << s << ' ' << sentences[s].size() << '\n';
    for (const auto& v : sentences[s]) {
      if (v.size() != dim) throw InvalidArgument("vector length differs from dim");
      for (std::size_t k = 0; k < v.size(); ++k) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v[k]);
        if (k > 0) out << ' ';
        out.write(buf, ptr - buf);
      }
      out << '\n';
    }
  }
}

std::vector<double> hash_embedding(std::string_view word, std::size_t dim, std::uint64_t seed) {
  std::uint64_t state = fnv1a(word) ^ (seed * 0xD1B54A32D192ED03ULL);
  splitmix64(state);
  std::vector<double> v(dim);
  for (auto& x : v) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * unit - 1.0;
  }
  return v;
}

LookupProvider::LookupProvider(std::vector<std::string> vocabulary, std::size_t dim,
                               std::span<const double> table)
    : dim_(dim), table_(table) {
  if (table.size() != (vocabulary.size() + 1) * dim) {
    throw InvalidArgument("lookup table size does not match vocabulary");
  }
  for (std::size_t i = 0; i < vocabulary.size(); ++i) rows_.emplace(vocabulary[i], i + 1);
}

std::size_t LookupProvider::row_of(std::string_view word) const {
  auto it = rows_.find(std::string(word));
  return it == rows_.end() ? 0 : it->second;
}

std::vector<double> LookupProvider::lookup(std::size_t, std::size_t, std::string_view word) const {
  const auto row = table_.subspan(row_of(word) * dim_, dim_);
  return {row.begin(), row.end()};
}

std::vector<TokenFeatures> assemble_features(std::size_t sentence_id,
                                             const std::vector<std::string>& tokens,
                                             const WordVectorProvider& provider,
                                             const CharVocab& vocab, std::size_t max_word_len) {
  std::vector<TokenFeatures> out;
  if (tokens.empty()) return out;
  provider.check_sentence(sentence_id, tokens.size());
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    TokenFeatures f;
    try {
      f.word = provider.lookup(sentence_id, t, tokens[t]);
    } catch (const MissingKeyError&) {
      throw MissingKeyError("missing word vector for sentence " + std::to_string(sentence_id) +
                            " token " + std::to_string(t) + " ('" + tokens[t] + "')");
    }
    if (f.word.size() != provider.dim()) {
      throw FormatError("word vector length differs from provider dim");
    }
    f.chars = encode_chars(tokens[t], max_word_len, vocab);
    f.format = writing_format(tokens[t]);
    out.push_back(std::move(f));
  }
  return out;
}

std::size_t longest_word(const std::vector<std::vector<std::string>>& sentences) {
  std::size_t best = 0;
  for (const auto& s : sentences) {
    for (const auto& w : s) best = std::max(best, decode_utf8(w).size());
  }
  return best;
}

}  // namespace seqlab
