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

// The `seqlab` command line, callable in-process for tests.

#ifndef SEQLAB_TOOLS_CLI_H_
#define SEQLAB_TOOLS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>

namespace seqlab::cli {

// Parsed --embeddings value: file:<path>, hash:<dim>:<seed> or lookup:<dim>.
struct EmbeddingSpec {
  enum class Kind { kFile, kHash, kLookup } kind = Kind::kHash;
  std::string path;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
};

// Throws seqlab::InvalidArgument on malformed input.
EmbeddingSpec parse_embedding_spec(const std::string& text);

// Exit code 0 on success, nonzero with a diagnostic on `err` otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqlab::cli

#endif  // SEQLAB_TOOLS_CLI_H_
