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

#include "extsum/oracle.hpp"

#include <algorithm>

#include "extsum/errors.hpp"
#include "extsum/rouge.hpp"

namespace extsum::oracle {

Metric parse_metric(const std::string& name) {
  if (name == "rouge1_f1") return Metric::kRouge1F1;
  if (name == "rouge2_f1") return Metric::kRouge2F1;
  if (name == "mean_r1_r2_f1") return Metric::kMeanR1R2F1;
  if (name == "rouge1_recall") return Metric::kRouge1Recall;
  throw ConfigError("unknown oracle metric '" + name + "'");
}

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kRouge1F1: return "rouge1_f1";
    case Metric::kRouge2F1: return "rouge2_f1";
    case Metric::kMeanR1R2F1: return "mean_r1_r2_f1";
    case Metric::kRouge1Recall: return "rouge1_recall";
  }
  return "rouge1_f1";
}

double selection_score(std::span<const Sentence> sentences,
                       std::vector<std::size_t> selected,
                       std::span<const std::string> reference, Metric metric) {
  std::sort(selected.begin(), selected.end());
  std::vector<std::string> cand;
  for (std::size_t i : selected) {
    cand.insert(cand.end(), sentences[i].begin(), sentences[i].end());
  }
  switch (metric) {
    case Metric::kRouge1F1:
      return rouge::rouge_n(cand, reference, 1).f1;
    case Metric::kRouge2F1:
      return rouge::rouge_n(cand, reference, 2).f1;
    case Metric::kMeanR1R2F1:
      return 0.5 * (rouge::rouge_n(cand, reference, 1).f1 +
                    rouge::rouge_n(cand, reference, 2).f1);
    case Metric::kRouge1Recall:
      return rouge::rouge_n(cand, reference, 1).recall;
  }
  return 0.0;
}

GreedyTrace greedy_trace(const Document& doc, const OracleConfig& config) {
  if (!doc.summary) {
    throw PreconditionError("document '" + doc.id + "' has no reference summary");
  }
  const std::vector<std::string> reference = flatten(*doc.summary);
  const std::size_t n = doc.sentences.size();
  const std::size_t cap = config.max_selected.value_or(n);

  GreedyTrace trace;
  trace.labels.assign(n, 0);
  std::vector<std::size_t> selected;
  double current = 0.0;
  while (selected.size() < cap) {
    std::optional<std::size_t> best;
    double best_score = current;
    for (std::size_t i = 0; i < n; ++i) {
      if (trace.labels[i]) continue;
      std::vector<std::size_t> trial = selected;
      trial.push_back(i);
      const double s = selection_score(doc.sentences, std::move(trial),
                                       reference, config.metric);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (!best) break;
    selected.push_back(*best);
    trace.labels[*best] = 1;
    trace.steps.push_back({*best, best_score});
    current = best_score;
  }
  return trace;
}

std::vector<int> greedy_labels(const Document& doc, const OracleConfig& config) {
  return greedy_trace(doc, config).labels;
}

LabeledCorpus label_corpus(std::vector<Document> docs, const OracleConfig& config) {
  std::string missing;
  for (const auto& d : docs) {
    if (!d.summary) missing += (missing.empty() ? "" : ", ") + d.id;
  }
  if (!missing.empty()) {
    throw PreconditionError("documents without a reference summary: " + missing);
  }
  LabeledCorpus out;
  double selected_total = 0.0;
  double score_total = 0.0;
  for (auto& d : docs) {
    GreedyTrace t = greedy_trace(d, config);
    selected_total += static_cast<double>(t.steps.size());
    score_total += t.steps.empty() ? 0.0 : t.steps.back().score;
    d.labels = std::move(t.labels);
  }
  out.stats.documents = docs.size();
  if (!docs.empty()) {
    out.stats.mean_selected = selected_total / double(docs.size());
    out.stats.mean_score = score_total / double(docs.size());
  }
  out.documents = std::move(docs);
  return out;
}

}  // namespace extsum::oracle
