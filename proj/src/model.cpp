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

#include "extsum/model.hpp"

#include <algorithm>
#include <cmath>

#include "extsum/errors.hpp"

namespace extsum {
namespace {

Tensor zeros(std::size_t n) { return Tensor(Shape::vector(n)); }
Tensor zeros(std::size_t r, std::size_t c) { return Tensor(Shape::matrix(r, c)); }

bool is_bias(const std::string& name) {
  const auto slash = name.rfind('/');
  const std::string leaf = slash == std::string::npos ? name : name.substr(slash + 1);
  return leaf.rfind("b_", 0) == 0 || leaf == "bias";
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size == 0 || embedding_dim == 0 || hidden_dim == 0 ||
      position_embedding_dim == 0 || max_abs_positions == 0 ||
      num_rel_segments == 0) {
    throw ConfigError("model dimensions must be positive");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"embedding_dim", embedding_dim},
          {"hidden_dim", hidden_dim},
          {"position_embedding_dim", position_embedding_dim},
          {"max_abs_positions", max_abs_positions},
          {"num_rel_segments", num_rel_segments},
          {"decoder_enabled", decoder_enabled},
          {"decoder_hidden_dim", decoder_hidden_dim},
          {"decoder_ff_dim", decoder_ff_dim}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.position_embedding_dim = j.at("position_embedding_dim").get<std::size_t>();
  c.max_abs_positions = j.at("max_abs_positions").get<std::size_t>();
  c.num_rel_segments = j.at("num_rel_segments").get<std::size_t>();
  c.decoder_enabled = j.at("decoder_enabled").get<bool>();
  c.decoder_hidden_dim = j.value("decoder_hidden_dim", std::size_t{0});
  c.decoder_ff_dim = j.value("decoder_ff_dim", std::size_t{0});
  c.validate();
  return c;
}

GruParams GruParams::add(ParameterStore& store, const std::string& prefix,
                         std::size_t input_dim, std::size_t hidden_dim) {
  GruParams p;
  p.W_ux = store.add(prefix + "/W_ux", zeros(hidden_dim, input_dim));
  p.W_uh = store.add(prefix + "/W_uh", zeros(hidden_dim, hidden_dim));
  p.b_u = store.add(prefix + "/b_u", zeros(hidden_dim));
  p.W_rx = store.add(prefix + "/W_rx", zeros(hidden_dim, input_dim));
  p.W_rh = store.add(prefix + "/W_rh", zeros(hidden_dim, hidden_dim));
  p.b_r = store.add(prefix + "/b_r", zeros(hidden_dim));
  p.W_hx = store.add(prefix + "/W_hx", zeros(hidden_dim, input_dim));
  p.W_hh = store.add(prefix + "/W_hh", zeros(hidden_dim, hidden_dim));
  p.b_h = store.add(prefix + "/b_h", zeros(hidden_dim));
  return p;
}

Model::Model(ModelConfig config) : config_(config) {
  config_.validate();
  const std::size_t E = config_.embedding_dim;
  const std::size_t H = config_.hidden_dim;
  const std::size_t P = config_.position_embedding_dim;
  auto& s = store_;

  ids_.embedding = s.add("embedding", zeros(config_.vocab_size, E));
  ids_.word_fwd = GruParams::add(s, "word_gru_fwd", E, H);
  ids_.word_bwd = GruParams::add(s, "word_gru_bwd", E, H);
  ids_.sent_fwd = GruParams::add(s, "sent_gru_fwd", 2 * H, H);
  ids_.sent_bwd = GruParams::add(s, "sent_gru_bwd", 2 * H, H);
  ids_.W_doc = s.add("doc/W_doc", zeros(H, 2 * H));
  ids_.b_doc = s.add("doc/b_doc", zeros(H));
  ids_.W_sent = s.add("sent/W_sent", zeros(H, 2 * H));
  ids_.b_sent = s.add("sent/b_sent", zeros(H));
  ids_.W_content = s.add("cls/W_content", zeros(H));
  ids_.W_salience = s.add("cls/W_salience", zeros(H, H));
  ids_.W_novelty = s.add("cls/W_novelty", zeros(H, H));
  ids_.abs_positions = s.add("cls/abs_positions", zeros(config_.max_abs_positions, P));
  ids_.W_abs_pos = s.add("cls/W_abs_pos", zeros(P));
  ids_.rel_positions = s.add("cls/rel_positions", zeros(config_.num_rel_segments, P));
  ids_.W_rel_pos = s.add("cls/W_rel_pos", zeros(P));
  ids_.bias = s.add("cls/bias", zeros(1));

  if (config_.decoder_enabled) {
    const std::size_t D = config_.decoder_hidden();
    const std::size_t F = config_.decoder_ff();
    DecoderParams d;
    d.gru = GruParams::add(s, "decoder/gru", E, D);
    d.W_uc = s.add("decoder/gru/W_uc", zeros(D, H));
    d.W_rc = s.add("decoder/gru/W_rc", zeros(D, H));
    d.W_hc = s.add("decoder/gru/W_hc", zeros(D, H));
    d.W_fh = s.add("decoder/W_fh", zeros(F, D));
    d.W_fx = s.add("decoder/W_fx", zeros(F, E));
    d.W_fc = s.add("decoder/W_fc", zeros(F, H));
    d.b_f = s.add("decoder/b_f", zeros(F));
    d.W_v = s.add("decoder/W_v", zeros(config_.vocab_size, F));
    d.b_v = s.add("decoder/b_v", zeros(config_.vocab_size));
    decoder_ = d;
  }
}

void Model::initialize(Rng& rng, const Tensor* embeddings) {
  for (Parameter& p : store_) {
    if (p.name == "embedding") {
      if (embeddings) {
        if (!(embeddings->shape() == p.value.shape())) {
          throw DimensionError("pretrained embeddings " + embeddings->shape().str() +
                               " do not match " + p.value.shape().str());
        }
        p.value = *embeddings;
      } else {
        fill_uniform(p.value, kEmbeddingInitRange, rng);
      }
    } else if (p.name == "cls/abs_positions" || p.name == "cls/rel_positions") {
      fill_uniform(p.value, kEmbeddingInitRange, rng);
    } else if (is_bias(p.name)) {
      p.value.fill(0.0);
    } else {
      fill_glorot(p.value, rng);
    }
  }
  store_.zero_grad();
  store_.reset_accumulators();
}

void Model::zero_parameters() {
  for (Parameter& p : store_) p.value.fill(0.0);
}

std::vector<ParamId> Model::encoder_parameter_ids() const {
  std::vector<ParamId> out;
  for (ParamId i = 0; i < store_.size(); ++i) {
    if (store_[i].name.rfind("decoder/", 0) != 0) out.push_back(i);
  }
  return out;
}

std::vector<ParamId> Model::decoder_parameter_ids() const {
  std::vector<ParamId> out;
  for (ParamId i = 0; i < store_.size(); ++i) {
    if (store_[i].name.rfind("decoder/", 0) == 0) out.push_back(i);
  }
  return out;
}

std::size_t rel_segment(std::size_t j, std::size_t n, std::size_t segments) {
  if (j < 1 || j > n) {
    throw IndexError("sentence index " + std::to_string(j) +
                     " outside 1.." + std::to_string(n));
  }
  if (segments == 0) throw PreconditionError("segment count must be positive");
  return (j - 1) * segments / n;
}

ad::Var gru_step(ad::Tape& tape, const GruParams& p, ad::Var x, ad::Var h_prev) {
  using namespace ad;
  Var u = sigmoid(matmul(tape.param(p.W_ux), x) +
                  matmul(tape.param(p.W_uh), h_prev) + tape.param(p.b_u));
  Var r = sigmoid(matmul(tape.param(p.W_rx), x) +
                  matmul(tape.param(p.W_rh), h_prev) + tape.param(p.b_r));
  Var candidate = ad::tanh(matmul(tape.param(p.W_hx), x) +
                           matmul(tape.param(p.W_hh), r * h_prev) +
                           tape.param(p.b_h));
  return one_minus(u) * candidate + u * h_prev;
}

namespace {

// Runs one GRU direction over the inputs and returns the state at every
// position, in input order.
std::vector<ad::Var> run_gru(ad::Tape& tape, const GruParams& p,
                             std::span<const ad::Var> inputs,
                             std::size_t hidden, bool reverse) {
  std::vector<ad::Var> states(inputs.size());
  ad::Var h = tape.constant(Tensor(Shape::vector(hidden)));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::size_t t = reverse ? inputs.size() - 1 - k : k;
    h = gru_step(tape, p, inputs[t], h);
    states[t] = h;
  }
  return states;
}

std::vector<ad::Var> bidirectional(ad::Tape& tape, const GruParams& fwd,
                                   const GruParams& bwd,
                                   std::span<const ad::Var> inputs,
                                   std::size_t hidden) {
  const auto f = run_gru(tape, fwd, inputs, hidden, false);
  const auto b = run_gru(tape, bwd, inputs, hidden, true);
  std::vector<ad::Var> out;
  out.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) out.push_back(ad::concat(f[t], b[t]));
  return out;
}

}  // namespace

DocumentEncoding encode_document(ad::Tape& tape, const Model& model,
                                 const EncodedDocument& doc) {
  if (doc.empty()) throw PreconditionError("cannot encode an empty document");
  const auto& ids = model.extractor();
  const std::size_t H = model.config().hidden_dim;
  ad::Var embedding = tape.param(ids.embedding);

  DocumentEncoding enc;
  for (const auto& sentence : doc) {
    if (sentence.empty()) throw PreconditionError("cannot encode an empty sentence");
    std::vector<ad::Var> words;
    words.reserve(sentence.size());
    for (std::size_t w : sentence) words.push_back(ad::row(embedding, w));
    const auto states = bidirectional(tape, ids.word_fwd, ids.word_bwd, words, H);
    enc.pooled_words.push_back(ad::mean_pool(states));
  }

  enc.sentence_states =
      bidirectional(tape, ids.sent_fwd, ids.sent_bwd, enc.pooled_words, H);
  ad::Var W_sent = tape.param(ids.W_sent);
  ad::Var b_sent = tape.param(ids.b_sent);
  for (ad::Var s : enc.sentence_states) {
    enc.sentence_reps.push_back(ad::tanh(ad::matmul(W_sent, s) + b_sent));
  }
  enc.doc_rep = ad::tanh(ad::matmul(tape.param(ids.W_doc),
                                    ad::mean_pool(enc.sentence_states)) +
                         tape.param(ids.b_doc));
  return enc;
}

ForwardResult score_sentences(ad::Tape& tape, const Model& model,
                              std::span<const ad::Var> sentence_reps,
                              ad::Var doc_rep) {
  using namespace ad;
  if (sentence_reps.empty()) throw PreconditionError("no sentences to score");
  const auto& ids = model.extractor();
  const auto& cfg = model.config();
  const std::size_t n = sentence_reps.size();

  Var W_content = tape.param(ids.W_content);
  Var W_novelty = tape.param(ids.W_novelty);
  Var abs_table = tape.param(ids.abs_positions);
  Var W_abs = tape.param(ids.W_abs_pos);
  Var rel_table = tape.param(ids.rel_positions);
  Var W_rel = tape.param(ids.W_rel_pos);
  Var bias = tape.param(ids.bias);
  // W_s d does not depend on the sentence.
  Var salience_proj = matmul(tape.param(ids.W_salience), doc_rep);

  ForwardResult out;
  Var summary = tape.constant(Tensor(Shape::vector(cfg.hidden_dim)));
  for (std::size_t j = 0; j < n; ++j) {
    Var h = sentence_reps[j];
    out.summary_states.push_back(summary);

    Var content = dot(W_content, h);
    Var salience = dot(h, salience_proj);
    Var novelty = dot(h, matmul(W_novelty, ad::tanh(summary)));
    // Positions past the table share its last row.
    const std::size_t abs_row = std::min(j, cfg.max_abs_positions - 1);
    Var abs_pos = dot(W_abs, row(abs_table, abs_row));
    Var rel_pos = dot(W_rel, row(rel_table, rel_segment(j + 1, n, cfg.num_rel_segments)));
    Var logit = content + salience - novelty + abs_pos + rel_pos + bias;
    Var p = sigmoid(logit);

    SentenceScoreBreakdown b;
    b.content = content.scalar();
    b.salience = salience.scalar();
    b.novelty = novelty.scalar();
    b.abs_pos = abs_pos.scalar();
    b.rel_pos = rel_pos.scalar();
    b.bias = bias.scalar();
    b.probability = p.scalar();
    out.breakdowns.push_back(b);
    out.probabilities.push_back(p);

    summary = summary + scale_by(h, p);
  }
  out.summary_final = summary;
  return out;
}

ForwardResult forward(ad::Tape& tape, const Model& model,
                      const EncodedDocument& doc) {
  const DocumentEncoding enc = encode_document(tape, model, doc);
  return score_sentences(tape, model, enc.sentence_reps, enc.doc_rep);
}

Prediction predict(const Model& model, const EncodedDocument& doc) {
  ad::Tape tape(&model.params());
  const ForwardResult r = forward(tape, model, doc);
  Prediction p;
  p.breakdowns = r.breakdowns;
  for (const auto& b : r.breakdowns) p.probabilities.push_back(b.probability);
  return p;
}

}  // namespace extsum
