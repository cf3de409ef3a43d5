/*
 * Copyright 2026 The hjoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hjoint/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "binary_io.hpp"
#include "hjoint/error.hpp"

namespace hjoint {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                             : static_cast<char>(c));
    } else if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.tokens.push_back(std::move(current));
  if (out.tokens.empty()) {
    throw EmptyUtteranceError("utterance has no alphanumeric characters: \"" +
                              std::string(text) + "\"");
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void HashEncoderConfig::validate() const {
  if (buckets < 2) {
    throw ConfigError("encoder buckets must be >= 2, got " +
                      std::to_string(buckets));
  }
  if (dim == 0) throw ConfigError("encoder dimension must be positive");
  if (orders.empty()) throw ConfigError("encoder needs at least one n-gram order");
  for (int k : orders) {
    if (k < 1) throw ConfigError("n-gram orders must be positive");
  }
}

HashEncoder::HashEncoder(HashEncoderConfig config, Rng& rng) : config_(std::move(config)) {
  config_.validate();
  std::sort(config_.orders.begin(), config_.orders.end());
  config_.orders.erase(std::unique(config_.orders.begin(), config_.orders.end()),
                       config_.orders.end());
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.dim));
  Tensor table = Tensor::zeros({config_.buckets, config_.dim});
  for (double& v : table.values()) v = rng.uniform(-bound, bound);
  table_ = Parameter("encoder.table", std::move(table), true, true);
}

HashEncoder::HashEncoder(HashEncoderConfig config, Tensor table)
    : config_(std::move(config)) {
  config_.validate();
  std::sort(config_.orders.begin(), config_.orders.end());
  config_.orders.erase(std::unique(config_.orders.begin(), config_.orders.end()),
                       config_.orders.end());
  if (table.rank() != 2 || table.rows() != config_.buckets || table.cols() != config_.dim) {
    throw DimensionError("encoder table " + table.shape_string() + " does not match config");
  }
  table_ = Parameter("encoder.table", std::move(table), true, true);
}

std::vector<std::uint32_t> HashEncoder::ngram_ids(const TokenSequence& tokens) const {
  std::vector<std::uint32_t> ids;
  const std::size_t count = tokens.tokens.size();
  std::string gram;
  for (int order : config_.orders) {
    const auto k = static_cast<std::size_t>(order);
    if (k > count) continue;
    for (std::size_t i = 0; i + k <= count; ++i) {
      gram = tokens.tokens[i];
      for (std::size_t j = 1; j < k; ++j) {
        gram.push_back(kNgramSeparator);
        gram += tokens.tokens[i + j];
      }
      ids.push_back(static_cast<std::uint32_t>(fnv1a64(gram) % config_.buckets));
    }
  }
  return ids;
}

Var HashEncoder::encode(Graph& g, std::span<const std::uint32_t> ids) {
  if (ids.empty()) throw EmptyUtteranceError("utterance produced no n-grams");
  std::vector<Var> rows;
  rows.reserve(ids.size());
  for (std::uint32_t id : ids) rows.push_back(g.gather_row(table_, id));
  return g.mean_pool(rows);
}

// ---------------------------------------------------------------------------
// EmbeddingStore

EmbeddingStore::EmbeddingStore(std::uint32_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw FormatError("embedding dimension is 0", 8);
}

bool EmbeddingStore::contains(std::string_view text) const {
  return vectors_.find(std::string(text)) != vectors_.end();
}

void EmbeddingStore::insert(std::string text, std::vector<float> values) {
  if (values.size() != dimension_) {
    throw DimensionError("embedding for \"" + text + "\" has " +
                         std::to_string(values.size()) + " values, store dimension is " +
                         std::to_string(dimension_));
  }
  auto it = vectors_.find(text);
  if (it != vectors_.end()) {
    it->second = std::move(values);
    ++duplicates_;
    return;
  }
  keys_.push_back(text);
  vectors_.emplace(std::move(text), std::move(values));
}

const std::vector<float>& EmbeddingStore::raw(std::string_view text) const {
  auto it = vectors_.find(std::string(text));
  if (it == vectors_.end()) {
    throw CoverageError("no embedding for utterance: \"" + std::string(text) + "\"");
  }
  return it->second;
}

std::vector<double> EmbeddingStore::lookup(std::string_view text) const {
  const auto& v = raw(text);
  return {v.begin(), v.end()};
}

std::vector<std::string> EmbeddingStore::missing(std::span<const std::string> texts) const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& t : texts) {
    if (!contains(t) && seen.insert(t).second) out.push_back(t);
  }
  return out;
}

EmbeddingStore read_embedding_store(std::istream& in) {
  binio::Reader r(in);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kEmbMagic)) throw FormatError("bad EMB1 magic", 0);
  const std::uint32_t count = r.u32("record count");
  const std::uint64_t dim_offset = r.offset();
  const std::uint32_t dim = r.u32("dimension");
  if (dim == 0) throw FormatError("embedding dimension is 0", dim_offset);
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32("record text length");
    std::string text = r.string(len, "record text");
    std::vector<float> values(dim);
    for (float& v : values) v = r.f32("record vector");
    store.insert(std::move(text), std::move(values));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last EMB1 record", r.offset());
  return store;
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  return read_embedding_store(in);
}

void write_embedding_store(std::ostream& out, const EmbeddingStore& store) {
  out.write(kEmbMagic, 4);
  binio::put_u32(out, static_cast<std::uint32_t>(store.size()));
  binio::put_u32(out, store.dimension());
  for (const auto& key : store.keys()) {
    binio::put_u32(out, static_cast<std::uint32_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    for (float v : store.raw(key)) binio::put_f32(out, v);
  }
}

void write_embedding_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  write_embedding_store(out, store);
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace hjoint
