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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "extsum/autodiff.hpp"
#include "extsum/corpus.hpp"
#include "extsum/parameters.hpp"

namespace extsum {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 100;
  // Per direction, for both the word-level and sentence-level GRUs.
  std::size_t hidden_dim = 200;
  std::size_t position_embedding_dim = 50;
  std::size_t max_abs_positions = 100;
  std::size_t num_rel_segments = 10;
  bool decoder_enabled = false;
  // 0 means "same as hidden_dim".
  std::size_t decoder_hidden_dim = 0;
  std::size_t decoder_ff_dim = 0;

  std::size_t decoder_hidden() const {
    return decoder_hidden_dim ? decoder_hidden_dim : hidden_dim;
  }
  std::size_t decoder_ff() const {
    return decoder_ff_dim ? decoder_ff_dim : hidden_dim;
  }
  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Update gate u, reset gate r and candidate state h' of one GRU direction.
struct GruParams {
  ParamId W_ux, W_uh, W_rx, W_rh, W_hx, W_hh;
  ParamId b_u, b_r, b_h;

  static GruParams add(ParameterStore& store, const std::string& prefix,
                       std::size_t input_dim, std::size_t hidden_dim);
};

// Word-prediction decoder coupled to the final summary state during
// abstractive training. The *_c matrices read that summary state.
struct DecoderParams {
  GruParams gru;
  ParamId W_uc, W_rc, W_hc;
  ParamId W_fh, W_fx, W_fc, b_f;
  ParamId W_v, b_v;
};

struct ExtractorParams {
  ParamId embedding;
  GruParams word_fwd, word_bwd;
  GruParams sent_fwd, sent_bwd;
  ParamId W_doc, b_doc;    // document representation
  ParamId W_sent, b_sent;  // sentence representation projection
  ParamId W_content;       // vector
  ParamId W_salience;      // hidden x hidden
  ParamId W_novelty;       // hidden x hidden
  ParamId abs_positions, W_abs_pos;
  ParamId rel_positions, W_rel_pos;
  ParamId bias;            // one element
};

// The hierarchical bidirectional GRU sentence extractor. Owns its
// parameters; every parameter is zero until initialize() is called.
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const ExtractorParams& extractor() const { return ids_; }
  const std::optional<DecoderParams>& decoder() const { return decoder_; }

  // Embeddings and positional tables uniform in [-0.05, 0.05]; weight
  // matrices and weight vectors Glorot-uniform; biases zero. A supplied
  // embedding matrix (vocab x embedding_dim) replaces the random one.
  void initialize(Rng& rng, const Tensor* embeddings = nullptr);
  // Sets every parameter to zero.
  void zero_parameters();

  std::vector<ParamId> encoder_parameter_ids() const;
  std::vector<ParamId> decoder_parameter_ids() const;

 private:
  ModelConfig config_;
  ParameterStore store_;
  ExtractorParams ids_{};
  std::optional<DecoderParams> decoder_;
};

// Zero-based index of the relative-position segment of 1-based sentence j
// in a document of n sentences: floor((j - 1) * segments / n).
std::size_t rel_segment(std::size_t j, std::size_t n, std::size_t segments);

ad::Var gru_step(ad::Tape& tape, const GruParams& p, ad::Var x, ad::Var h_prev);

struct DocumentEncoding {
  // Average of [forward; backward] word states per sentence (2 x hidden).
  std::vector<ad::Var> pooled_words;
  // [forward; backward] sentence-level states (2 x hidden).
  std::vector<ad::Var> sentence_states;
  // Projected sentence representations h_j (hidden).
  std::vector<ad::Var> sentence_reps;
  ad::Var doc_rep;
};

DocumentEncoding encode_document(ad::Tape& tape, const Model& model,
                                 const EncodedDocument& doc);

// Pre-sigmoid contributions to one sentence's logit. novelty holds the
// subtracted value, so logit = content + salience - novelty + abs_pos +
// rel_pos + bias.
struct SentenceScoreBreakdown {
  double content = 0.0;
  double salience = 0.0;
  double novelty = 0.0;
  double abs_pos = 0.0;
  double rel_pos = 0.0;
  double bias = 0.0;
  double probability = 0.0;

  double logit() const {
    return content + salience - novelty + abs_pos + rel_pos + bias;
  }
};

struct ForwardResult {
  std::vector<ad::Var> probabilities;
  std::vector<SentenceScoreBreakdown> breakdowns;
  // Running summary state before each sentence: summary_states[j] is the
  // state seen by sentence j (zero for the first).
  std::vector<ad::Var> summary_states;
  // Summary state after the last sentence.
  ad::Var summary_final;
};

// Second pass over the sentences: scores each one against the document and
// the running probability-weighted summary of the sentences before it.
ForwardResult score_sentences(ad::Tape& tape, const Model& model,
                              std::span<const ad::Var> sentence_reps,
                              ad::Var doc_rep);

ForwardResult forward(ad::Tape& tape, const Model& model,
                      const EncodedDocument& doc);

struct Prediction {
  std::vector<double> probabilities;
  std::vector<SentenceScoreBreakdown> breakdowns;
};

// Forward pass without gradient bookkeeping.
Prediction predict(const Model& model, const EncodedDocument& doc);

// Checkpoint: version tag, model config, vocabulary and every named
// parameter tensor, as one JSON document.
inline constexpr const char* kCheckpointFormat = "extsum-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  Vocabulary vocab;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& vocab);
Checkpoint load_checkpoint(const std::filesystem::path& path);
nlohmann::json checkpoint_to_json(const Model& model, const Vocabulary& vocab);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

}  // namespace extsum
