// Copyright 2026 The extsum Authors.
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "extsum/parameters.hpp"
#include "extsum/tensor.hpp"

namespace extsum {

using Sentence = std::vector<std::string>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::optional<std::vector<Sentence>> summary;
  std::optional<std::vector<int>> labels;
};

struct CorpusConfig {
  std::size_t max_sentences = 100;
  std::size_t max_words_per_sentence = 50;
  std::size_t vocab_cap = 150000;
  std::size_t embedding_dim = 100;

  void validate() const;
};

struct LoadedCorpus {
  std::vector<Document> documents;
  // Lines whose document had no non-empty sentence.
  std::size_t skipped_empty = 0;
};

// JSON-Lines corpus, one document per line:
//   {"id": str, "sentences": [[str]], "summary": [[str]]?, "labels": [int]?}
// Blank lines are ignored. Documents are truncated per the config.
LoadedCorpus load_corpus(const std::filesystem::path& path,
                         const CorpusConfig& config);
LoadedCorpus read_corpus(std::istream& in, const CorpusConfig& config);

Document document_from_json(const nlohmann::json& j, std::size_t line = 0);
nlohmann::json document_to_json(const Document& doc);
void write_corpus(std::ostream& out, std::span<const Document> docs);

// Drops trailing sentences beyond max_sentences (labels in lockstep) and
// trailing words beyond max_words_per_sentence.
void truncate_document(Document& doc, const CorpusConfig& config);

// All tokens of a list of sentences, in order.
std::vector<std::string> flatten(std::span<const Sentence> sentences);

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;
  static constexpr std::size_t kNumReserved = 4;

  // Reserved entries only.
  Vocabulary();
  // Rebuilds a vocabulary from its index->token list (reserved entries
  // first), e.g. from a checkpoint.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  // Index of a token; UNK when absent.
  std::size_t index(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(std::size_t index) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Counts tokens over document sentences and reference summaries, then fills
// indices 4..cap-1 by descending frequency, ties broken lexicographically.
Vocabulary build_vocab(std::span<const Document> docs, std::size_t cap);

struct WordVectors {
  Tensor matrix;             // vocab.size() x dim
  std::size_t covered = 0;   // non-reserved vocabulary rows read from file
};

// word2vec text format: `token v1 ... v_dim` per line; an optional
// "<count> <dim>" header line is skipped. Rows not covered by the file
// (including the reserved tokens) are drawn uniform in [-0.05, 0.05].
WordVectors load_word_vectors(const std::filesystem::path& path,
                              const Vocabulary& vocab, std::size_t dim,
                              Rng& rng);
WordVectors read_word_vectors(std::istream& in, const Vocabulary& vocab,
                              std::size_t dim, Rng& rng);

inline constexpr double kEmbeddingInitRange = 0.05;

using EncodedSentence = std::vector<std::size_t>;
using EncodedDocument = std::vector<EncodedSentence>;

EncodedDocument encode(const Document& doc, const Vocabulary& vocab);
// Flattened reference summary as word indices. Empty when absent.
std::vector<std::size_t> encode_summary(const Document& doc,
                                        const Vocabulary& vocab);

// Shuffles [0, n) with the generator and cuts it into batches of at most
// batch_size indices.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   Rng& rng);

}  // namespace extsum
