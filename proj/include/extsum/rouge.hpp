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
#include <span>
#include <string>
#include <vector>

#include "extsum/corpus.hpp"

namespace extsum::rouge {

using Tokens = std::vector<std::string>;

struct Score {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

// Builds a score from raw counts; a zero denominator yields 0 for that
// component and F1 is 0 whenever recall + precision is 0.
Score make_score(std::size_t matches, std::size_t reference_total,
                 std::size_t candidate_total);

// Candidate length budget used for limited-length evaluation.
struct LengthLimit {
  enum class Kind { kNone, kBytes, kWords };
  Kind kind = Kind::kNone;
  std::size_t amount = 0;

  static LengthLimit none() { return {}; }
  static LengthLimit bytes(std::size_t b);
  static LengthLimit words(std::size_t w);
  // "none", "bytes:N" or "words:N".
  static LengthLimit parse(const std::string& text);
  std::string str() const;

  friend bool operator==(const LengthLimit&, const LengthLimit&) = default;
};

// Length of a token sequence in the limit's unit: token count for words,
// UTF-8 bytes of the single-space-joined string for bytes, 0 for none.
std::size_t measure(std::span<const std::string> tokens, const LengthLimit& limit);

// Flattens sentences in order and keeps the longest whole-token prefix that
// fits the budget.
Tokens truncate(std::span<const Sentence> candidate, const LengthLimit& limit);

// Clipped n-gram overlap.
Score rouge_n(std::span<const std::string> candidate,
              std::span<const std::string> reference, std::size_t n);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);
Score rouge_l(std::span<const std::string> candidate,
              std::span<const std::string> reference);

struct SummaryScores {
  Score rouge1;
  Score rouge2;
  Score rougeL;
};

// The candidate is truncated per the limit; the reference is flattened
// untruncated. Throws PreconditionError on an empty reference.
SummaryScores evaluate_summary(std::span<const Sentence> candidate,
                               std::span<const Sentence> reference,
                               const LengthLimit& limit);

}  // namespace extsum::rouge
