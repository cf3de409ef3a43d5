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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "hjoint/error.hpp"
#include "hjoint/encoder.hpp"
#include "test_support.hpp"

namespace hjoint {
namespace {

using Tokens = std::vector<std::string>;

// Hand-rolled little-endian EMB1 writer, kept apart from the library codec.
class EmbBytes {
 public:
  EmbBytes& magic(const char* m = "EMB1") {
    bytes_.append(m, 4);
    return *this;
  }
  EmbBytes& u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    return *this;
  }
  EmbBytes& f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    return u32(bits);
  }
  EmbBytes& record(const std::string& text, std::vector<float> v) {
    u32(static_cast<std::uint32_t>(text.size()));
    bytes_ += text;
    for (float f : v) f32(f);
    return *this;
  }
  const std::string& str() const { return bytes_; }

 private:
  std::string bytes_;
};

EmbeddingStore parse(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_embedding_store(in);
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("My credit card was swallowed by ATM").tokens,
            (Tokens{"my", "credit", "card", "was", "swallowed", "by", "atm"}));
  EXPECT_EQ(tokenize("it's 9pm!").tokens, (Tokens{"it", "s", "9pm"}));
  EXPECT_THROW(tokenize("???"), EmptyUtteranceError);
  EXPECT_EQ(tokenize("Hello, World!").tokens, (Tokens{"hello", "world"}));
  EXPECT_EQ(tokenize("  spaced   out ").tokens, (Tokens{"spaced", "out"}));
  EXPECT_EQ(tokenize("what's 2+2").tokens, (Tokens{"what", "s", "2", "2"}));
  EXPECT_EQ(tokenize("café au lait").tokens, (Tokens{"café", "au", "lait"}));
  EXPECT_THROW(tokenize(""), EmptyUtteranceError);
  EXPECT_THROW(tokenize("?! ..."), EmptyUtteranceError);
}

TEST(Fnv1a64, KnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(HashEncoder, NgramIdsForThreeTokens) {
  HashEncoderConfig cfg{.buckets = 1000, .dim = 4, .orders = {1, 2}};
  Rng rng(1);
  HashEncoder enc(cfg, rng);
  auto ids = enc.ngram_ids(TokenSequence{{"a", "b", "c"}});
  ASSERT_EQ(ids.size(), 5u);
  const char* grams[] = {"a", "b", "c", "a b", "b c"};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(ids[i], fnv1a64(grams[i]) % 1000) << grams[i];

  EXPECT_EQ(enc.ngram_ids(TokenSequence{{"solo"}}).size(), 1u);
  EXPECT_EQ(enc.ngram_ids(TokenSequence{{"a", "b", "c"}}), ids);
  for (std::uint32_t id : enc.ngram_ids(TokenSequence{{"x", "y", "z", "w"}})) EXPECT_LT(id, 1000u);
}

TEST(HashEncoder, InitialisationRange) {
  HashEncoderConfig cfg{.buckets = 512, .dim = 16, .orders = {1}};
  Rng rng(9);
  HashEncoder enc(cfg, rng);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double v : enc.table().value().values()) {
    EXPECT_LE(std::abs(v), bound);
  }
  EXPECT_TRUE(enc.table().row_sparse());
}

TEST(HashEncoder, EncodeIsMeanOfRows) {
  HashEncoderConfig cfg{.buckets = 4, .dim = 2, .orders = {1}};
  HashEncoder enc(cfg, Tensor::matrix(4, 2, {1, 0, 0, 1, 2, 2, -1, 3}));
  Graph g;
  std::uint32_t ids[] = {0, 1};
  EXPECT_EQ(g.value(enc.encode(g, ids)), Tensor::vector({0.5, 0.5}));
  std::uint32_t single[] = {3};
  EXPECT_EQ(g.value(enc.encode(g, single)), Tensor::vector({-1, 3}));
  std::uint32_t repeat[] = {2, 2, 3};
  Tensor v = g.value(enc.encode(g, repeat));
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(v[1], 7.0 / 3.0, 1e-15);
  EXPECT_THROW(enc.encode(g, std::span<const std::uint32_t>()), EmptyUtteranceError);
}

TEST(HashEncoder, GradientReachesOnlyGatheredRows) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    HashEncoderConfig cfg{.buckets = 64, .dim = 3, .orders = {1, 2}};
    HashEncoder enc(cfg, rng);
    std::vector<std::uint32_t> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(static_cast<std::uint32_t>(rng.below(64)));
    std::vector<double> weights = testing::random_vec(rng, 3);
    auto f = [&](Graph& g) {
      Var h = enc.encode(g, ids);
      return g.sum(g.linear(h, g.constant(Tensor::matrix(1, 3, weights)),
                            g.constant(Tensor::vector({0}))));
    };
    Parameter* params[] = {&enc.table()};
    EXPECT_LE(grad_check(f, params), 1e-4) << "seed " << seed;
    std::set<std::uint32_t> unique(ids.begin(), ids.end());
    EXPECT_EQ(enc.table().row_grads().size(), unique.size());
  }
}

TEST(HashEncoderConfig, RejectsBadValues) {
  EXPECT_THROW((HashEncoderConfig{.buckets = 0, .dim = 4, .orders = {1}}.validate()), ConfigError);
  EXPECT_THROW((HashEncoderConfig{.buckets = 1, .dim = 4, .orders = {1}}.validate()), ConfigError);
  EXPECT_THROW((HashEncoderConfig{.buckets = 8, .dim = 0, .orders = {1}}.validate()), ConfigError);
  EXPECT_THROW((HashEncoderConfig{.buckets = 8, .dim = 4, .orders = {}}.validate()), ConfigError);
  EXPECT_THROW((HashEncoderConfig{.buckets = 8, .dim = 4, .orders = {0}}.validate()), ConfigError);
  EXPECT_NO_THROW(HashEncoderConfig{}.validate());
}

TEST(Emb1, ReadsHandWrittenFile) {
  auto bytes = EmbBytes().magic().u32(2).u32(3)
                   .record("hi", {1.0f, 2.0f, 3.0f})
                   .record("bye now", {-0.5f, 0.25f, 0.0f})
                   .str();
  EmbeddingStore store = parse(bytes);
  EXPECT_EQ(store.dimension(), 3u);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.lookup("hi"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(store.lookup("bye now"), (std::vector<double>{-0.5, 0.25, 0}));
  EXPECT_EQ(store.keys(), (Tokens{"hi", "bye now"}));
}

TEST(Emb1, RoundTripIsBitExact) {
  Rng rng(4);
  EmbeddingStore store(5);
  for (int i = 0; i < 20; ++i) {
    std::vector<float> v;
    for (int j = 0; j < 5; ++j) v.push_back(static_cast<float>(rng.uniform(-3, 3)));
    store.insert("utt " + std::to_string(i), v);
  }
  std::ostringstream out;
  write_embedding_store(out, store);
  EmbeddingStore back = parse(out.str());
  ASSERT_EQ(back.keys(), store.keys());
  for (const auto& k : store.keys()) EXPECT_EQ(back.raw(k), store.raw(k));

  std::ostringstream again;
  write_embedding_store(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Emb1, EmptyFileIsFormatErrorAtZero) {
  try {
    parse("");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Emb1, BadMagic) {
  auto bytes = EmbBytes().magic("EMB2").u32(0).u32(3).str();
  EXPECT_THROW(parse(bytes), FormatError);
}

TEST(Emb1, TruncatedVectorReportsOffset) {
  auto full = EmbBytes().magic().u32(1).u32(4).record("abc", {1, 2, 3, 4}).str();
  // header 12 bytes, length 4, text 3, so floats begin at 19.
  auto cut = full.substr(0, full.size() - 2);
  try {
    parse(cut);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 19u + 12u);
  }
}

TEST(Emb1, ZeroDimensionRejected) {
  auto bytes = EmbBytes().magic().u32(0).u32(0).str();
  EXPECT_THROW(parse(bytes), FormatError);
}

TEST(Emb1, TrailingBytesRejected) {
  auto bytes = EmbBytes().magic().u32(1).u32(1).record("x", {1}).str() + "junk";
  EXPECT_THROW(parse(bytes), FormatError);
}

TEST(Emb1, DuplicateTextLastWins) {
  auto bytes = EmbBytes().magic().u32(2).u32(1)
                   .record("same", {1})
                   .record("same", {2})
                   .str();
  EmbeddingStore store = parse(bytes);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.duplicates(), 1u);
  EXPECT_EQ(store.lookup("same"), (std::vector<double>{2}));
}

TEST(EmbeddingStore, LookupIsExact) {
  EmbeddingStore store(1);
  store.insert("book a flight", {1.0f});
  EXPECT_TRUE(store.contains("book a flight"));
  EXPECT_FALSE(store.contains("book a flight "));
  EXPECT_FALSE(store.contains("Book a flight"));
  EXPECT_THROW(store.lookup("book a flight "), CoverageError);
  EXPECT_THROW(store.insert("bad", {1.0f, 2.0f}), DimensionError);
}

TEST(EmbeddingStore, MissingMatchesSetDifference) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    EmbeddingStore store(1);
    std::set<std::string> present;
    for (int i = 0; i < 30; ++i) {
      if (rng.below(2) == 0) {
        store.insert("t" + std::to_string(i), {0.0f});
        present.insert("t" + std::to_string(i));
      }
    }
    std::vector<std::string> queries;
    for (int i = 0; i < 40; ++i) queries.push_back("t" + std::to_string(rng.below(35)));
    std::vector<std::string> expected;
    std::set<std::string> seen;
    for (const auto& q : queries) {
      if (!present.count(q) && seen.insert(q).second) expected.push_back(q);
    }
    EXPECT_EQ(store.missing(queries), expected);
  }
}

}  // namespace
}  // namespace hjoint
