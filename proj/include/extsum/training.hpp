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
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "extsum/autodiff.hpp"
#include "extsum/corpus.hpp"
#include "extsum/model.hpp"

namespace extsum {

enum class TrainMode { kExtractive, kAbstractive };

TrainMode parse_train_mode(const std::string& name);
std::string train_mode_name(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::kExtractive;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 50;
  // Epochs without validation improvement before stopping.
  std::size_t patience = 3;
  // Global L2 norm cap.
  double clip_norm = 5.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  std::uint64_t seed = 1;

  void validate() const;
};

// Sum over sentences of the binary cross-entropy of P(y_j = 1).
ad::Var extractive_loss(ad::Tape& tape, const Model& model,
                        const EncodedDocument& doc, std::span<const int> labels);

// Teacher-forced negative log-likelihood of the reference words under the
// decoder conditioned on the final summary state. The first input is BOS;
// each later input is the previous reference word.
ad::Var decoder_loss(ad::Tape& tape, const Model& model, ad::Var summary_final,
                     std::span<const std::size_t> reference);

ad::Var abstractive_loss(ad::Tape& tape, const Model& model,
                         const EncodedDocument& doc,
                         std::span<const std::size_t> reference);

// Scales all gradients by c/g when their global norm g exceeds c. Returns g.
double clip_gradients(ParameterStore& store, double clip_norm);

// One adadelta update of every parameter from its current gradient.
void adadelta_step(ParameterStore& store, double rho, double eps);

struct TrainingExample {
  std::string id;
  EncodedDocument doc;
  std::vector<int> labels;
  std::vector<std::size_t> reference;
};

// Encodes documents for the given mode. Extractive mode needs labels and
// abstractive mode a non-empty summary; violations raise ConfigError naming
// the documents.
std::vector<TrainingExample> make_examples(std::span<const Document> docs,
                                           const Vocabulary& vocab,
                                           TrainMode mode);

struct LossTotals {
  double loss = 0.0;         // sum of per-document losses
  std::size_t documents = 0;
  std::size_t words = 0;     // reference words (abstractive)

  double mean() const { return documents ? loss / double(documents) : 0.0; }
  double perplexity() const;
};

// Loss of a fixed model over examples; parameters are not touched.
LossTotals evaluate_loss(const Model& model, std::span<const TrainingExample> examples,
                         TrainMode mode);

// Fraction of sentences whose P(y=1) >= 0.5 agrees with the label.
double label_accuracy(const Model& model, std::span<const TrainingExample> examples);

// Accumulates the mean batch gradient, clips, and takes one adadelta step.
// Returns the summed loss of the batch before the step.
LossTotals train_batch(Model& model, std::span<const TrainingExample> examples,
                       std::span<const std::size_t> batch, const TrainConfig& config);

class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records one epoch's validation loss; true when it is a new best.
  bool update(double valid_loss);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;        // mean per-document loss while training
  double train_perplexity = 0.0;  // per reference word; abstractive only
  double valid_loss = 0.0;        // mean per-document loss, frozen model
  bool improved = false;
};

struct TrainReport {
  std::string mode;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_loss = 0.0;
  std::size_t stopped_epoch = 0;
  bool early_stopped = false;
  std::string best_checkpoint;

  nlohmann::json to_json() const;
};

// Runs epochs of shuffled mini-batches until validation loss has not
// improved for `patience` epochs or max_epochs is reached. On return the
// model holds the parameters of the best validation epoch.
TrainReport train(Model& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> valid_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace extsum
