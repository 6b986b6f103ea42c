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

#include "extsum/rouge.hpp"

#include <algorithm>
#include <unordered_map>

#include "extsum/errors.hpp"

namespace extsum::rouge {
namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n,
                         std::size_t& total) {
  NgramCounts counts;
  total = 0;
  if (tokens.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
    ++total;
  }
  return counts;
}

}  // namespace

Score make_score(std::size_t matches, std::size_t reference_total,
                 std::size_t candidate_total) {
  Score s;
  if (reference_total) s.recall = double(matches) / double(reference_total);
  if (candidate_total) s.precision = double(matches) / double(candidate_total);
  if (s.recall + s.precision > 0.0) {
    s.f1 = 2.0 * s.recall * s.precision / (s.recall + s.precision);
  }
  return s;
}

LengthLimit LengthLimit::bytes(std::size_t b) {
  if (b == 0) throw PreconditionError("byte limit must be positive");
  return {Kind::kBytes, b};
}

LengthLimit LengthLimit::words(std::size_t w) {
  if (w == 0) throw PreconditionError("word limit must be positive");
  return {Kind::kWords, w};
}

LengthLimit LengthLimit::parse(const std::string& text) {
  if (text == "none") return none();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string unit = text.substr(0, colon);
    const std::string amount = text.substr(colon + 1);
    if (!amount.empty() &&
        amount.find_first_not_of("0123456789") == std::string::npos) {
      const std::size_t n = std::stoul(amount);
      if (unit == "bytes" && n > 0) return bytes(n);
      if (unit == "words" && n > 0) return words(n);
    }
  }
  throw ConfigError("invalid length limit '" + text +
                    "' (expected none, bytes:N or words:N)");
}

std::string LengthLimit::str() const {
  switch (kind) {
    case Kind::kNone: return "none";
    case Kind::kBytes: return "bytes:" + std::to_string(amount);
    case Kind::kWords: return "words:" + std::to_string(amount);
  }
  return "none";
}

std::size_t measure(std::span<const std::string> tokens, const LengthLimit& limit) {
  switch (limit.kind) {
    case LengthLimit::Kind::kNone:
      return 0;
    case LengthLimit::Kind::kWords:
      return tokens.size();
    case LengthLimit::Kind::kBytes: {
      if (tokens.empty()) return 0;
      std::size_t bytes = tokens.size() - 1;  // separating spaces
      for (const auto& t : tokens) bytes += t.size();
      return bytes;
    }
  }
  return 0;
}

Tokens truncate(std::span<const Sentence> candidate, const LengthLimit& limit) {
  Tokens flat = flatten(candidate);
  switch (limit.kind) {
    case LengthLimit::Kind::kNone:
      break;
    case LengthLimit::Kind::kWords:
      if (flat.size() > limit.amount) flat.resize(limit.amount);
      break;
    case LengthLimit::Kind::kBytes: {
      std::size_t used = 0;
      std::size_t keep = 0;
      for (; keep < flat.size(); ++keep) {
        const std::size_t next = used + (keep ? 1 : 0) + flat[keep].size();
        if (next > limit.amount) break;
        used = next;
      }
      flat.resize(keep);
      break;
    }
  }
  return flat;
}

Score rouge_n(std::span<const std::string> candidate,
              std::span<const std::string> reference, std::size_t n) {
  if (n == 0) throw PreconditionError("rouge_n requires n >= 1");
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  const NgramCounts cand = count_ngrams(candidate, n, cand_total);
  const NgramCounts ref = count_ngrams(reference, n, ref_total);
  std::size_t matches = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(c, it->second);
  }
  return make_score(matches, ref_total, cand_total);
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  // Rolling single-row DP table.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Score rouge_l(std::span<const std::string> candidate,
              std::span<const std::string> reference) {
  return make_score(lcs_length(candidate, reference), reference.size(),
                    candidate.size());
}

SummaryScores evaluate_summary(std::span<const Sentence> candidate,
                               std::span<const Sentence> reference,
                               const LengthLimit& limit) {
  const Tokens ref = flatten(reference);
  if (ref.empty()) throw PreconditionError("reference summary is empty");
  const Tokens cand = truncate(candidate, limit);
  return {rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)};
}

}  // namespace extsum::rouge
