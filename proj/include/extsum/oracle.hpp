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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extsum/corpus.hpp"

namespace extsum::oracle {

// ROUGE flavour maximized by the greedy label search.
enum class Metric { kRouge1F1, kRouge2F1, kMeanR1R2F1, kRouge1Recall };

Metric parse_metric(const std::string& name);
std::string metric_name(Metric metric);

struct OracleConfig {
  Metric metric = Metric::kRouge1F1;
  std::optional<std::size_t> max_selected;
};

// Score of a selection (indices in any order; rendered in document order)
// against the flattened reference.
double selection_score(std::span<const Sentence> sentences,
                       std::vector<std::size_t> selected,
                       std::span<const std::string> reference, Metric metric);

struct GreedyStep {
  std::size_t sentence;
  double score;  // metric value after adding the sentence
};

struct GreedyTrace {
  std::vector<int> labels;
  std::vector<GreedyStep> steps;
};

// Adds one sentence at a time, each time the one with the largest strict
// improvement (ties to the lowest index), until nothing improves the score
// or max_selected is reached.
GreedyTrace greedy_trace(const Document& doc, const OracleConfig& config);
std::vector<int> greedy_labels(const Document& doc, const OracleConfig& config);

struct LabelStats {
  std::size_t documents = 0;
  double mean_selected = 0.0;
  double mean_score = 0.0;
};

struct LabeledCorpus {
  std::vector<Document> documents;
  LabelStats stats;
};

// Fills extractive labels on every document, preserving order. Throws
// PreconditionError listing the ids of documents without a summary.
LabeledCorpus label_corpus(std::vector<Document> docs, const OracleConfig& config);

}  // namespace extsum::oracle
