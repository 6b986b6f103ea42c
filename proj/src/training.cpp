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

#include "extsum/training.hpp"

#include <cmath>

#include "extsum/errors.hpp"

namespace extsum {

TrainMode parse_train_mode(const std::string& name) {
  if (name == "extractive") return TrainMode::kExtractive;
  if (name == "abstractive") return TrainMode::kAbstractive;
  throw ConfigError("unknown training mode '" + name + "'");
}

std::string train_mode_name(TrainMode mode) {
  return mode == TrainMode::kExtractive ? "extractive" : "abstractive";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0)) {
    throw ConfigError("adadelta_rho must lie in (0, 1)");
  }
  if (!(adadelta_eps > 0.0)) throw ConfigError("adadelta_eps must be positive");
}

ad::Var extractive_loss(ad::Tape& tape, const Model& model,
                        const EncodedDocument& doc, std::span<const int> labels) {
  if (labels.size() != doc.size()) {
    throw PreconditionError("document has " + std::to_string(doc.size()) +
                            " sentences but " + std::to_string(labels.size()) +
                            " labels");
  }
  const ForwardResult fwd = forward(tape, model, doc);
  ad::Var loss = ad::bce_loss(fwd.probabilities[0], labels[0]);
  for (std::size_t j = 1; j < labels.size(); ++j) {
    loss = loss + ad::bce_loss(fwd.probabilities[j], labels[j]);
  }
  return loss;
}

ad::Var decoder_loss(ad::Tape& tape, const Model& model, ad::Var summary_final,
                     std::span<const std::size_t> reference) {
  using namespace ad;
  if (!model.decoder()) throw PreconditionError("model has no decoder");
  if (reference.empty()) throw PreconditionError("reference summary is empty");
  const DecoderParams& d = *model.decoder();
  const GruParams& g = d.gru;
  const std::size_t vocab = model.config().vocab_size;

  Var embedding = tape.param(model.extractor().embedding);
  // Context contributions are the same at every step.
  Var ctx_u = matmul(tape.param(d.W_uc), summary_final);
  Var ctx_r = matmul(tape.param(d.W_rc), summary_final);
  Var ctx_h = matmul(tape.param(d.W_hc), summary_final);
  Var ctx_f = matmul(tape.param(d.W_fc), summary_final);

  Var h = tape.constant(Tensor(Shape::vector(model.config().decoder_hidden())));
  std::size_t prev = Vocabulary::kBos;
  Var loss;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    Var x = row(embedding, prev);
    Var u = sigmoid(matmul(tape.param(g.W_ux), x) + matmul(tape.param(g.W_uh), h) +
                    ctx_u + tape.param(g.b_u));
    Var r = sigmoid(matmul(tape.param(g.W_rx), x) + matmul(tape.param(g.W_rh), h) +
                    ctx_r + tape.param(g.b_r));
    Var candidate = ad::tanh(matmul(tape.param(g.W_hx), x) +
                             matmul(tape.param(g.W_hh), r * h) + ctx_h +
                             tape.param(g.b_h));
    h = one_minus(u) * candidate + u * h;
    Var f = ad::tanh(matmul(tape.param(d.W_fh), h) + matmul(tape.param(d.W_fx), x) +
                     ctx_f + tape.param(d.b_f));
    Var logits = matmul(tape.param(d.W_v), f) + tape.param(d.b_v);
    const std::size_t target = reference[k] < vocab ? reference[k] : Vocabulary::kUnk;
    Var step = softmax_nll(logits, target);
    loss = k == 0 ? step : loss + step;
    prev = target;
  }
  return loss;
}

ad::Var abstractive_loss(ad::Tape& tape, const Model& model,
                         const EncodedDocument& doc,
                         std::span<const std::size_t> reference) {
  const ForwardResult fwd = forward(tape, model, doc);
  return decoder_loss(tape, model, fwd.summary_final, reference);
}

double clip_gradients(ParameterStore& store, double clip_norm) {
  const double norm = store.grad_norm();
  if (norm > clip_norm) store.scale_grad(clip_norm / norm);
  return norm;
}

void adadelta_step(ParameterStore& store, double rho, double eps) {
  for (Parameter& p : store) {
    auto theta = p.value.data();
    const auto g = p.grad.data();
    auto eg2 = p.mean_sq_grad.data();
    auto ed2 = p.mean_sq_delta.data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      eg2[i] = rho * eg2[i] + (1.0 - rho) * g[i] * g[i];
      const double delta = -(std::sqrt(ed2[i] + eps) / std::sqrt(eg2[i] + eps)) * g[i];
      ed2[i] = rho * ed2[i] + (1.0 - rho) * delta * delta;
      theta[i] += delta;
    }
  }
}

std::vector<TrainingExample> make_examples(std::span<const Document> docs,
                                           const Vocabulary& vocab,
                                           TrainMode mode) {
  std::string missing;
  std::vector<TrainingExample> out;
  out.reserve(docs.size());
  for (const Document& d : docs) {
    TrainingExample ex{d.id, encode(d, vocab), {}, encode_summary(d, vocab)};
    if (mode == TrainMode::kExtractive) {
      if (!d.labels) {
        missing += (missing.empty() ? "" : ", ") + d.id;
        continue;
      }
      ex.labels = *d.labels;
    } else if (ex.reference.empty()) {
      missing += (missing.empty() ? "" : ", ") + d.id;
      continue;
    }
    out.push_back(std::move(ex));
  }
  if (!missing.empty()) {
    throw ConfigError(mode == TrainMode::kExtractive
                          ? "extractive training needs labels; missing for: " + missing
                          : "abstractive training needs reference summaries; "
                            "missing for: " + missing);
  }
  return out;
}

double LossTotals::perplexity() const {
  return words ? std::exp(loss / double(words)) : 0.0;
}

namespace {

ad::Var example_loss(ad::Tape& tape, const Model& model, const TrainingExample& ex,
                     TrainMode mode) {
  return mode == TrainMode::kExtractive
             ? extractive_loss(tape, model, ex.doc, ex.labels)
             : abstractive_loss(tape, model, ex.doc, ex.reference);
}

}  // namespace

LossTotals evaluate_loss(const Model& model, std::span<const TrainingExample> examples,
                         TrainMode mode) {
  LossTotals t;
  for (const auto& ex : examples) {
    ad::Tape tape(&model.params());
    t.loss += example_loss(tape, model, ex, mode).scalar();
    t.documents += 1;
    t.words += ex.reference.size();
  }
  return t;
}

double label_accuracy(const Model& model, std::span<const TrainingExample> examples) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& ex : examples) {
    const Prediction p = predict(model, ex.doc);
    for (std::size_t j = 0; j < ex.labels.size(); ++j) {
      correct += (p.probabilities[j] >= 0.5) == (ex.labels[j] == 1);
      ++total;
    }
  }
  return total ? double(correct) / double(total) : 0.0;
}

LossTotals train_batch(Model& model, std::span<const TrainingExample> examples,
                       std::span<const std::size_t> batch, const TrainConfig& config) {
  ParameterStore& store = model.params();
  store.zero_grad();
  LossTotals t;
  // Seeding each backward with 1/B leaves the batch-mean gradient in the
  // store.
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const auto& ex = examples[i];
    ad::Tape tape(&store);
    ad::Var loss = example_loss(tape, model, ex, config.mode);
    t.loss += loss.scalar();
    t.documents += 1;
    t.words += ex.reference.size();
    tape.backward(loss, weight);
  }
  clip_gradients(store, config.clip_norm);
  adadelta_step(store, config.adadelta_rho, config.adadelta_eps);
  return t;
}

bool EarlyStopping::update(double valid_loss) {
  ++epoch_;
  if (valid_loss < best_loss_) {
    best_loss_ = valid_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json row = {{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"valid_loss", e.valid_loss},
                          {"improved", e.improved}};
    if (mode == "abstractive") row["train_perplexity"] = e.train_perplexity;
    epochs_json.push_back(std::move(row));
  }
  return {{"mode", mode},
          {"epochs", std::move(epochs_json)},
          {"best_epoch", best_epoch},
          {"best_valid_loss", best_valid_loss},
          {"stopped_epoch", stopped_epoch},
          {"early_stopped", early_stopped},
          {"best_checkpoint", best_checkpoint}};
}

TrainReport train(Model& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> valid_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (valid_set.empty()) throw ConfigError("validation set is empty");
  if (config.mode == TrainMode::kAbstractive && !model.decoder()) {
    throw ConfigError("abstractive training needs a model with a decoder");
  }

  // Distinct stream from the one used for initialization.
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  EarlyStopping stopper(config.patience);
  ParameterStore best = model.params();
  model.params().reset_accumulators();

  TrainReport report;
  report.mode = train_mode_name(config.mode);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    LossTotals epoch_totals;
    for (const auto& batch : make_batches(train_set.size(), config.batch_size, rng)) {
      const LossTotals t = train_batch(model, train_set, batch, config);
      epoch_totals.loss += t.loss;
      epoch_totals.documents += t.documents;
      epoch_totals.words += t.words;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_totals.mean();
    rec.train_perplexity = epoch_totals.perplexity();
    rec.valid_loss = evaluate_loss(model, valid_set, config.mode).mean();
    rec.improved = stopper.update(rec.valid_loss);
    if (rec.improved) best.copy_values_from(model.params());
    report.epochs.push_back(rec);
    report.stopped_epoch = epoch;
    if (on_epoch) on_epoch(rec);
    if (stopper.should_stop()) {
      report.early_stopped = true;
      break;
    }
  }
  report.best_epoch = stopper.best_epoch();
  report.best_valid_loss = stopper.best_loss();
  model.params().copy_values_from(best);
  model.params().zero_grad();
  return report;
}

}  // namespace extsum
