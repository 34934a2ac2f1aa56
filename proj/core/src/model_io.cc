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

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqlab/error.h"
#include "seqlab/tagger.h"

namespace seqlab {
namespace {

constexpr std::string_view kMagic = "SEQLAB01";

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are not supported");

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("model file truncated while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
  auto header = nlohmann::ordered_json::parse(config_to_json(bundle.config));
  header["format_version"] = bundle.format_version;
  const std::string json = header.dump();

  std::string out(kMagic);
  put<std::uint64_t>(out, json.size());
  out += json;
  for (const ParamTensor* t : bundle.params.tensors()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->name.size()));
    out += t->name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t d : t->shape) put<std::uint64_t>(out, d);
    for (double v : t->values) put<double>(out, v);
  }
  return out;
}

ModelBundle deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a seqlab model file (bad magic)");
  }
  in.take(kMagic.size(), "magic");
  const auto json_len = in.get<std::uint64_t>("header length");
  const std::string_view json_text = in.take(json_len, "header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("format_version") ||
      !header["format_version"].is_number_integer()) {
    throw FormatError("model header has no format_version");
  }
  const int version = header["format_version"].get<int>();
  if (version != ModelBundle::kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version) +
                      " (expected " + std::to_string(ModelBundle::kFormatVersion) + ")");
  }

  ModelBundle bundle;
  try {
    bundle.config = config_from_json(json_text);
    bundle.params = ModelParams::create(bundle.config);
  } catch (const Error& e) {
    throw FormatError(std::string("model header: ") + e.what());
  }
  bundle.format_version = version;

  std::map<std::string, ParamTensor*, std::less<>> expected;
  for (ParamTensor* t : bundle.params.tensors()) expected.emplace(t->name, t);
  std::set<std::string, std::less<>> seen;

  while (!in.done()) {
    const auto name_len = in.get<std::uint32_t>("tensor name length");
    const std::string name(in.take(name_len, "tensor name"));
    const auto it = expected.find(name);
    if (it == expected.end()) throw FormatError("unexpected tensor '" + name + "'");
    if (!seen.insert(name).second) throw FormatError("duplicate tensor '" + name + "'");
    ParamTensor& t = *it->second;

    const auto rank = in.get<std::uint32_t>("tensor rank");
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint64_t>("tensor shape"));
    if (shape != t.shape) {
      std::ostringstream msg;
      msg << "shape mismatch for '" << name << "': file [";
      for (std::size_t i = 0; i < shape.size(); ++i) msg << (i ? "," : "") << shape[i];
      msg << "], config [";
      for (std::size_t i = 0; i < t.shape.size(); ++i) msg << (i ? "," : "") << t.shape[i];
      msg << "]";
      throw FormatError(msg.str());
    }
    const auto raw = in.take(t.size() * sizeof(double), "tensor values");
    std::memcpy(t.values.data(), raw.data(), raw.size());
  }
  for (const auto& [name, t] : expected) {
    if (!seen.contains(name)) throw FormatError("model file is missing tensor '" + name + "'");
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  const std::string bytes = serialize_model(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace seqlab
