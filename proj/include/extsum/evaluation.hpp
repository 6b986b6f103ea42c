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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "extsum/corpus.hpp"
#include "extsum/model.hpp"
#include "extsum/rouge.hpp"

namespace extsum::eval {

struct SelectionPolicy {
  enum class Kind { kByProbability, kTopK, kLead };
  Kind kind = Kind::kByProbability;
  rouge::LengthLimit limit;  // kByProbability
  std::size_t count = 0;     // k for kTopK, n for kLead

  static SelectionPolicy by_probability(rouge::LengthLimit limit);
  static SelectionPolicy top_k(std::size_t k);
  static SelectionPolicy lead(std::size_t n);
  // "prob" (taking the given limit), "topk:K" or "lead:N".
  static SelectionPolicy parse(const std::string& text, rouge::LengthLimit limit);
  std::string str() const;
  bool uses_probabilities() const { return kind != Kind::kLead; }
};

// Selected sentence indices, increasing in document position.
//
// kByProbability visits sentences by descending probability (ties to the
// lower index) and keeps adding while the selection's length has not yet
// exceeded the limit, so the sentence that crosses the limit is included.
std::vector<std::size_t> select(std::span<const double> probabilities,
                                const Document& doc, const SelectionPolicy& policy);

enum class Flavor { kRecall, kPrecision, kF1 };
Flavor parse_flavor(const std::string& name);
std::string flavor_name(Flavor flavor);

enum class Variant { kRouge1, kRouge2, kRougeL };
Variant parse_variant(const std::string& name);  // r1 | r2 | rl
std::string variant_name(Variant variant);

double pick(const rouge::Score& score, Flavor flavor);
double pick(const rouge::SummaryScores& scores, Variant variant, Flavor flavor);

// Sentence probabilities for a document.
using Scorer = std::function<std::vector<double>(const Document&)>;
Scorer model_scorer(const Model& model, const Vocabulary& vocab);

struct DocumentResult {
  std::string id;
  std::vector<std::size_t> selected;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

struct CorpusReport {
  std::string policy;
  std::string limit;
  std::string flavor;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  std::vector<DocumentResult> documents;

  double value(Variant v) const;
  nlohmann::json to_json(bool per_document) const;
};

// Selects a summary per document, scores it under the limit, and averages
// the requested flavor over documents. The scorer may be empty for
// policies that ignore probabilities.
CorpusReport evaluate_corpus(std::span<const Document> docs, const Scorer& scorer,
                             const SelectionPolicy& policy,
                             const rouge::LengthLimit& limit, Flavor flavor);

// The k with the best top_k score on the validation documents (ties to the
// smaller k).
std::size_t tune_k(std::span<const Document> docs, const Scorer& scorer,
                   std::span<const std::size_t> ks, Variant variant,
                   Flavor flavor = Flavor::kF1,
                   const rouge::LengthLimit& limit = rouge::LengthLimit::none());

}  // namespace extsum::eval
