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

#include "extsum/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "extsum/errors.hpp"

namespace extsum::eval {

SelectionPolicy SelectionPolicy::by_probability(rouge::LengthLimit limit) {
  return {Kind::kByProbability, limit, 0};
}

SelectionPolicy SelectionPolicy::top_k(std::size_t k) {
  if (k < 1) throw PreconditionError("top_k needs k >= 1");
  return {Kind::kTopK, {}, k};
}

SelectionPolicy SelectionPolicy::lead(std::size_t n) {
  if (n < 1) throw PreconditionError("lead needs n >= 1");
  return {Kind::kLead, {}, n};
}

SelectionPolicy SelectionPolicy::parse(const std::string& text,
                                       rouge::LengthLimit limit) {
  if (text == "prob") return by_probability(limit);
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const std::string num = text.substr(colon + 1);
    if (!num.empty() && num.find_first_not_of("0123456789") == std::string::npos) {
      const std::size_t n = std::stoul(num);
      if (kind == "topk" && n >= 1) return top_k(n);
      if (kind == "lead" && n >= 1) return lead(n);
    }
  }
  throw ConfigError("invalid policy '" + text + "' (expected prob, topk:K or lead:N)");
}

std::string SelectionPolicy::str() const {
  switch (kind) {
    case Kind::kByProbability: return "prob(" + limit.str() + ")";
    case Kind::kTopK: return "topk:" + std::to_string(count);
    case Kind::kLead: return "lead:" + std::to_string(count);
  }
  return "";
}

std::vector<std::size_t> select(std::span<const double> probabilities,
                                const Document& doc, const SelectionPolicy& policy) {
  const std::size_t n = doc.sentences.size();
  if (policy.kind == SelectionPolicy::Kind::kLead) {
    std::vector<std::size_t> out(std::min(policy.count, n));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  if (probabilities.size() != n) {
    throw PreconditionError("got " + std::to_string(probabilities.size()) +
                            " probabilities for " + std::to_string(n) +
                            " sentences in '" + doc.id + "'");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probabilities[a] > probabilities[b];
  });

  std::vector<std::size_t> chosen;
  if (policy.kind == SelectionPolicy::Kind::kTopK) {
    chosen.assign(order.begin(), order.begin() + std::min(policy.count, n));
  } else {
    const auto& limit = policy.limit;
    std::vector<std::string> selected_tokens;
    for (std::size_t i : order) {
      if (limit.kind != rouge::LengthLimit::Kind::kNone &&
          rouge::measure(selected_tokens, limit) > limit.amount) {
        break;
      }
      chosen.push_back(i);
      // Total length does not depend on the order sentences are joined in.
      selected_tokens.insert(selected_tokens.end(), doc.sentences[i].begin(),
                             doc.sentences[i].end());
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Flavor parse_flavor(const std::string& name) {
  if (name == "recall") return Flavor::kRecall;
  if (name == "precision") return Flavor::kPrecision;
  if (name == "f1") return Flavor::kF1;
  throw ConfigError("unknown ROUGE flavor '" + name + "'");
}

std::string flavor_name(Flavor flavor) {
  switch (flavor) {
    case Flavor::kRecall: return "recall";
    case Flavor::kPrecision: return "precision";
    case Flavor::kF1: return "f1";
  }
  return "f1";
}

Variant parse_variant(const std::string& name) {
  if (name == "r1") return Variant::kRouge1;
  if (name == "r2") return Variant::kRouge2;
  if (name == "rl") return Variant::kRougeL;
  throw ConfigError("unknown ROUGE metric '" + name + "' (expected r1, r2 or rl)");
}

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::kRouge1: return "r1";
    case Variant::kRouge2: return "r2";
    case Variant::kRougeL: return "rl";
  }
  return "r1";
}

double pick(const rouge::Score& score, Flavor flavor) {
  switch (flavor) {
    case Flavor::kRecall: return score.recall;
    case Flavor::kPrecision: return score.precision;
    case Flavor::kF1: return score.f1;
  }
  return score.f1;
}

double pick(const rouge::SummaryScores& scores, Variant variant, Flavor flavor) {
  switch (variant) {
    case Variant::kRouge1: return pick(scores.rouge1, flavor);
    case Variant::kRouge2: return pick(scores.rouge2, flavor);
    case Variant::kRougeL: return pick(scores.rougeL, flavor);
  }
  return 0.0;
}

Scorer model_scorer(const Model& model, const Vocabulary& vocab) {
  return [&model, &vocab](const Document& doc) {
    return predict(model, encode(doc, vocab)).probabilities;
  };
}

double CorpusReport::value(Variant v) const {
  switch (v) {
    case Variant::kRouge1: return rouge1;
    case Variant::kRouge2: return rouge2;
    case Variant::kRougeL: return rougeL;
  }
  return 0.0;
}

nlohmann::json CorpusReport::to_json(bool per_document) const {
  nlohmann::json j = {{"policy", policy},
                      {"limit", limit},
                      {"flavor", flavor},
                      {"documents", documents.size()},
                      {"rouge1", rouge1},
                      {"rouge2", rouge2},
                      {"rougeL", rougeL}};
  if (per_document) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& d : documents) {
      rows.push_back({{"id", d.id},
                      {"selected", d.selected},
                      {"rouge1", d.rouge1},
                      {"rouge2", d.rouge2},
                      {"rougeL", d.rougeL}});
    }
    j["per_document"] = std::move(rows);
  }
  return j;
}

CorpusReport evaluate_corpus(std::span<const Document> docs, const Scorer& scorer,
                             const SelectionPolicy& policy,
                             const rouge::LengthLimit& limit, Flavor flavor) {
  std::string missing;
  for (const auto& d : docs) {
    if (!d.summary || flatten(*d.summary).empty()) {
      missing += (missing.empty() ? "" : ", ") + d.id;
    }
  }
  if (!missing.empty()) {
    throw PreconditionError("documents without a reference summary: " + missing);
  }
  if (policy.uses_probabilities() && !scorer) {
    throw PreconditionError("policy " + policy.str() + " needs a model");
  }

  CorpusReport report;
  report.policy = policy.str();
  report.limit = limit.str();
  report.flavor = flavor_name(flavor);
  for (const auto& d : docs) {
    const std::vector<double> probs =
        policy.uses_probabilities() ? scorer(d) : std::vector<double>{};
    DocumentResult r;
    r.id = d.id;
    r.selected = select(probs, d, policy);
    std::vector<Sentence> summary;
    for (std::size_t i : r.selected) summary.push_back(d.sentences[i]);
    const auto s = rouge::evaluate_summary(summary, *d.summary, limit);
    r.rouge1 = pick(s.rouge1, flavor);
    r.rouge2 = pick(s.rouge2, flavor);
    r.rougeL = pick(s.rougeL, flavor);
    report.rouge1 += r.rouge1;
    report.rouge2 += r.rouge2;
    report.rougeL += r.rougeL;
    report.documents.push_back(std::move(r));
  }
  if (!docs.empty()) {
    const double n = static_cast<double>(docs.size());
    report.rouge1 /= n;
    report.rouge2 /= n;
    report.rougeL /= n;
  }
  return report;
}

std::size_t tune_k(std::span<const Document> docs, const Scorer& scorer,
                   std::span<const std::size_t> ks, Variant variant, Flavor flavor,
                   const rouge::LengthLimit& limit) {
  if (ks.empty()) throw PreconditionError("tune_k needs a non-empty k range");
  std::vector<std::size_t> sorted(ks.begin(), ks.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t best_k = sorted.front();
  double best = -1.0;
  for (std::size_t k : sorted) {
    const double v = evaluate_corpus(docs, scorer, SelectionPolicy::top_k(k), limit,
                                     flavor)
                         .value(variant);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace extsum::eval
