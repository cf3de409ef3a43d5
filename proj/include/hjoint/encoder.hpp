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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hjoint/graph.hpp"
#include "hjoint/random.hpp"

namespace hjoint {

// Lowercase tokens with no empty entries.
struct TokenSequence {
  std::vector<std::string> tokens;
};

// Lowercases ASCII and splits on maximal runs of non-alphanumeric bytes.
// Bytes >= 0x80 count as token characters so UTF-8 words survive intact.
// Throws EmptyUtteranceError when nothing alphanumeric remains.
TokenSequence tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

// Tokens inside an n-gram are joined by this byte before hashing.
inline constexpr char kNgramSeparator = ' ';

struct HashEncoderConfig {
  std::uint32_t buckets = 1u << 18;
  std::size_t dim = 256;
  std::vector<int> orders{1, 2};

  void validate() const;
};

// Trainable hashed n-gram bag: the pooled vector is the mean of the table
// rows selected by the utterance's n-gram hashes.
class HashEncoder {
 public:
  // Table initialised uniformly in [-1/sqrt(dim), 1/sqrt(dim)].
  HashEncoder(HashEncoderConfig config, Rng& rng);
  HashEncoder(HashEncoderConfig config, Tensor table);

  const HashEncoderConfig& config() const { return config_; }
  Parameter& table() { return table_; }
  const Parameter& table() const { return table_; }

  // All order-1 ids left to right, then order-2, and so on.
  std::vector<std::uint32_t> ngram_ids(const TokenSequence& tokens) const;

  Var encode(Graph& g, std::span<const std::uint32_t> ids);
  Var encode(Graph& g, const TokenSequence& tokens) {
    return encode(g, ngram_ids(tokens));
  }

 private:
  HashEncoderConfig config_;
  Parameter table_;
};

// Frozen precomputed utterance embeddings, keyed by exact text.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::uint32_t dimension);

  std::uint32_t dimension() const { return dimension_; }
  std::size_t size() const { return keys_.size(); }
  bool contains(std::string_view text) const;
  // Number of records that replaced an earlier record with the same text.
  std::size_t duplicates() const { return duplicates_; }

  // Later inserts of the same text overwrite earlier ones.
  void insert(std::string text, std::vector<float> values);

  // Exact-match lookup; throws CoverageError on a miss.
  std::vector<double> lookup(std::string_view text) const;
  const std::vector<float>& raw(std::string_view text) const;

  // Texts not present in the store, in input order, de-duplicated.
  std::vector<std::string> missing(std::span<const std::string> texts) const;

  // Keys in first-insertion order.
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::uint32_t dimension_ = 0;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
  std::size_t duplicates_ = 0;
};

// EMB1: "EMB1", u32 count, u32 dim, then per record u32 text length,
// text bytes, dim x f32. All integers and floats little-endian.
EmbeddingStore read_embedding_store(std::istream& in);
EmbeddingStore load_embedding_store(const std::filesystem::path& path);
void write_embedding_store(std::ostream& out, const EmbeddingStore& store);
void write_embedding_store(const std::filesystem::path& path,
                           const EmbeddingStore& store);

}  // namespace hjoint
