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

#include "extsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "extsum/errors.hpp"

namespace extsum {
namespace {

std::vector<Sentence> sentences_field(const nlohmann::json& j, const char* key,
                                      std::size_t line) {
  const auto& field = j.at(key);
  if (!field.is_array()) {
    throw ParseError(std::string("field '") + key + "' must be a list of lists",
                     line);
  }
  std::vector<Sentence> out;
  out.reserve(field.size());
  for (const auto& s : field) {
    if (!s.is_array()) {
      throw ParseError(std::string("field '") + key + "' must be a list of lists",
                       line);
    }
    Sentence sent;
    for (const auto& tok : s) {
      if (!tok.is_string()) {
        throw ParseError(std::string("field '") + key + "' holds a non-string token",
                         line);
      }
      sent.push_back(tok.get<std::string>());
    }
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace

void CorpusConfig::validate() const {
  if (max_sentences == 0 || max_words_per_sentence == 0 || vocab_cap == 0 ||
      embedding_dim == 0) {
    throw ConfigError("corpus limits and dimensions must be positive");
  }
}

Document document_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("document is not a JSON object", line);
  for (const char* key : {"id", "sentences"}) {
    if (!j.contains(key)) {
      throw ParseError(std::string("missing required field '") + key + "'", line);
    }
  }
  Document doc;
  if (j["id"].is_string()) {
    doc.id = j["id"].get<std::string>();
  } else if (j["id"].is_number_integer()) {
    doc.id = std::to_string(j["id"].get<long long>());
  } else {
    throw ParseError("field 'id' must be a string", line);
  }
  doc.sentences = sentences_field(j, "sentences", line);
  if (j.contains("summary") && !j["summary"].is_null()) {
    doc.summary = sentences_field(j, "summary", line);
  }
  if (j.contains("labels") && !j["labels"].is_null()) {
    const auto& labels = j["labels"];
    if (!labels.is_array()) throw ParseError("field 'labels' must be a list", line);
    std::vector<int> ys;
    for (const auto& y : labels) {
      if (!y.is_number_integer() || (y.get<int>() != 0 && y.get<int>() != 1)) {
        throw ParseError("field 'labels' must hold 0/1 integers", line);
      }
      ys.push_back(y.get<int>());
    }
    if (ys.size() != doc.sentences.size()) {
      throw ParseError("field 'labels' has " + std::to_string(ys.size()) +
                           " entries for " + std::to_string(doc.sentences.size()) +
                           " sentences",
                       line);
    }
    doc.labels = std::move(ys);
  }

  // Empty sentences carry nothing to encode; drop them with their labels.
  std::vector<Sentence> kept;
  std::vector<int> kept_labels;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    if (doc.sentences[i].empty()) continue;
    kept.push_back(std::move(doc.sentences[i]));
    if (doc.labels) kept_labels.push_back((*doc.labels)[i]);
  }
  doc.sentences = std::move(kept);
  if (doc.labels) doc.labels = std::move(kept_labels);
  return doc;
}

nlohmann::json document_to_json(const Document& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["sentences"] = doc.sentences;
  if (doc.summary) j["summary"] = *doc.summary;
  if (doc.labels) j["labels"] = *doc.labels;
  return j;
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

void truncate_document(Document& doc, const CorpusConfig& config) {
  if (doc.sentences.size() > config.max_sentences) {
    doc.sentences.resize(config.max_sentences);
    if (doc.labels) doc.labels->resize(config.max_sentences);
  }
  for (auto& s : doc.sentences) {
    if (s.size() > config.max_words_per_sentence) {
      s.resize(config.max_words_per_sentence);
    }
  }
}

LoadedCorpus read_corpus(std::istream& in, const CorpusConfig& config) {
  config.validate();
  LoadedCorpus corpus;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    Document doc = document_from_json(j, line);
    if (doc.sentences.empty()) {
      ++corpus.skipped_empty;
      continue;
    }
    truncate_document(doc, config);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

LoadedCorpus load_corpus(const std::filesystem::path& path,
                         const CorpusConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  return read_corpus(in, config);
}

std::vector<std::string> flatten(std::span<const Sentence> sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* t : {"<pad>", "<unk>", "<s>", "</s>"}) append(t);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  if (tokens.size() < kNumReserved) {
    throw ParseError("vocabulary is missing its reserved entries");
  }
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (tokens[i] != v.tokens_[i]) {
      throw ParseError("vocabulary reserved entry " + std::to_string(i) +
                       " is '" + tokens[i] + "'");
    }
  }
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
    if (v.index_.count(tokens[i])) {
      throw ParseError("duplicate vocabulary token '" + tokens[i] + "'");
    }
    v.append(std::move(tokens[i]));
  }
  return v;
}

void Vocabulary::append(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

std::size_t Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end() || it->second < kNumReserved) return kUnk;
  return it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  auto it = index_.find(token);
  return it != index_.end() && it->second >= kNumReserved;
}

const std::string& Vocabulary::token(std::size_t index) const {
  if (index >= tokens_.size()) {
    throw IndexError("vocabulary index " + std::to_string(index) +
                     " out of range");
  }
  return tokens_[index];
}

Vocabulary build_vocab(std::span<const Document> docs, std::size_t cap) {
  std::map<std::string, std::size_t> counts;
  auto count = [&](const std::vector<Sentence>& sents) {
    for (const auto& s : sents)
      for (const auto& t : s) ++counts[t];
  };
  for (const auto& d : docs) {
    count(d.sentences);
    if (d.summary) count(*d.summary);
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // std::map iteration is lexicographic, so a stable sort on count alone
  // breaks ties by token order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary reserved;
  std::vector<std::string> tokens = reserved.tokens();
  for (auto& [token, n] : ranked) {
    if (tokens.size() >= cap) break;
    // Literal "<unk>" etc. in the text keep mapping to the reserved entry.
    if (std::find(tokens.begin(), tokens.begin() + Vocabulary::kNumReserved,
                  token) != tokens.begin() + Vocabulary::kNumReserved) {
      continue;
    }
    tokens.push_back(token);
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

WordVectors read_word_vectors(std::istream& in, const Vocabulary& vocab,
                              std::size_t dim, Rng& rng) {
  WordVectors wv{Tensor(Shape::matrix(vocab.size(), dim)), 0};
  fill_uniform(wv.matrix, kEmbeddingInitRange, rng);
  std::vector<bool> seen(vocab.size(), false);

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream fields(text);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("word vector entry '" + field + "' is not a number",
                         line);
      }
    }
    if (line == 1 && values.size() == 1 &&
        token.find_first_not_of("0123456789") == std::string::npos) {
      continue;  // "<count> <dim>" header
    }
    if (values.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " values for '" +
                           token + "', found " + std::to_string(values.size()),
                       line);
    }
    if (!vocab.contains(token)) continue;
    const std::size_t r = vocab.index(token);
    std::copy(values.begin(), values.end(), wv.matrix.row(r).begin());
    if (!seen[r]) {
      seen[r] = true;
      ++wv.covered;
    }
  }
  return wv;
}

WordVectors load_word_vectors(const std::filesystem::path& path,
                              const Vocabulary& vocab, std::size_t dim,
                              Rng& rng) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word vectors " + path.string());
  return read_word_vectors(in, vocab, dim, rng);
}

EncodedDocument encode(const Document& doc, const Vocabulary& vocab) {
  EncodedDocument out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) {
    EncodedSentence ids;
    ids.reserve(s.size());
    for (const auto& t : s) ids.push_back(vocab.index(t));
    out.push_back(std::move(ids));
  }
  return out;
}

std::vector<std::size_t> encode_summary(const Document& doc,
                                        const Vocabulary& vocab) {
  std::vector<std::size_t> out;
  if (!doc.summary) return out;
  for (const auto& s : *doc.summary)
    for (const auto& t : s) out.push_back(vocab.index(t));
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   Rng& rng) {
  if (batch_size == 0) throw PreconditionError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates on our own draw so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return batches;
}

}  // namespace extsum
