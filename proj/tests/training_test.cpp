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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "extsum/errors.hpp"
#include "extsum/gradcheck.hpp"
#include "extsum/model.hpp"
#include "extsum/training.hpp"
#include "support/synthetic_corpus.hpp"

namespace extsum {
namespace {

ModelConfig toy_config(bool decoder) {
  ModelConfig c;
  c.vocab_size = 8;
  c.embedding_dim = 4;
  c.hidden_dim = 4;
  c.position_embedding_dim = 3;
  c.max_abs_positions = 5;
  c.num_rel_segments = 2;
  c.decoder_enabled = decoder;
  return c;
}

const EncodedDocument kToyDoc{{4, 5}, {6, 1}, {7, 4}};
const std::vector<std::size_t> kToyReference{5, 7, 6};

Model unit_scale_model(std::uint64_t seed, const ModelConfig& c) {
  Model m(c);
  Rng rng(seed);
  m.initialize(rng);
  for (auto& p : m.params()) fill_uniform(p.value, 1.0, rng);
  return m;
}

bool is_non_embedding_encoder(const Model& m, ParamId id) {
  return id != m.extractor().embedding;
}

TEST(ExtractiveLossTest, ZeroParametersGiveNLn2) {
  const Model m(toy_config(false));
  const EncodedDocument doc{{4}, {5}, {6}, {7}};
  ad::Tape tape(&m.params());
  const std::vector<int> labels{1, 0, 0, 1};
  EXPECT_NEAR(extractive_loss(tape, m, doc, labels).scalar(), 4 * std::log(2.0), 1e-12);
  EXPECT_NEAR(extractive_loss(tape, m, doc, labels).scalar(), 2.7726, 1e-4);
}

TEST(ExtractiveLossTest, ConfidentCorrectPrediction) {
  // Only the bias is nonzero: P = sigmoid(logit(0.99)) = 0.99.
  Model m(toy_config(false));
  m.params().at("cls/bias").value.fill(std::log(0.99 / 0.01));
  ad::Tape tape(&m.params());
  const std::vector<int> labels{1};
  EXPECT_NEAR(extractive_loss(tape, m, EncodedDocument{{4}}, labels).scalar(),
              0.01005, 1e-5);
}

TEST(ExtractiveLossTest, DoublingADocumentDoublesItsLoss) {
  const Model m(toy_config(false));
  ad::Tape tape(&m.params());
  const std::vector<int> once{1, 0, 1};
  const std::vector<int> twice{1, 0, 1, 1, 0, 1};
  EncodedDocument doubled = kToyDoc;
  doubled.insert(doubled.end(), kToyDoc.begin(), kToyDoc.end());
  EXPECT_NEAR(extractive_loss(tape, m, doubled, twice).scalar(),
              2 * extractive_loss(tape, m, kToyDoc, once).scalar(), 1e-12);
}

TEST(ExtractiveLossTest, LabelCountMismatchIsPreconditionError) {
  const Model m(toy_config(false));
  ad::Tape tape(&m.params());
  const std::vector<int> labels{1};
  EXPECT_THROW(extractive_loss(tape, m, kToyDoc, labels), PreconditionError);
}

TEST(DecoderLossTest, ZeroParametersGiveUniformSoftmax) {
  const Model m(toy_config(true));
  ad::Tape tape(&m.params());
  EXPECT_NEAR(abstractive_loss(tape, m, kToyDoc, kToyReference).scalar(),
              3 * std::log(8.0), 1e-12);
}

TEST(DecoderLossTest, CraftedLogitsHandValue) {
  ModelConfig c = toy_config(true);
  c.vocab_size = 4;
  Model m(c);
  // Logits [10, 0] over the two live entries; the other two rows are pushed
  // far below so the softmax is effectively two-way.
  Tensor& b_v = m.params().at("decoder/b_v").value;
  b_v = Tensor::vector({10.0, 0.0, -1000.0, -1000.0});
  ad::Tape tape(&m.params());
  const std::vector<std::size_t> ref{0};
  const double loss = abstractive_loss(tape, m, EncodedDocument{{1}}, ref).scalar();
  EXPECT_NEAR(loss, std::log1p(std::exp(-10.0)), 1e-15);
  EXPECT_NEAR(loss, 4.54e-5, 1e-7);
}

TEST(DecoderLossTest, OutOfVocabularyTargetMapsToUnk) {
  const Model m = unit_scale_model(3, toy_config(true));
  ad::Tape tape(&m.params());
  const std::vector<std::size_t> oov{5, 99};
  const std::vector<std::size_t> unk{5, Vocabulary::kUnk};
  EXPECT_EQ(abstractive_loss(tape, m, kToyDoc, oov).scalar(),
            abstractive_loss(tape, m, kToyDoc, unk).scalar());
}

TEST(DecoderLossTest, EmptyReferenceOrNoDecoderIsPreconditionError) {
  const Model with(toy_config(true));
  const Model without(toy_config(false));
  ad::Tape t1(&with.params()), t2(&without.params());
  EXPECT_THROW(abstractive_loss(t1, with, kToyDoc, {}), PreconditionError);
  EXPECT_THROW(abstractive_loss(t2, without, kToyDoc, kToyReference), PreconditionError);
}

TEST(AbstractiveGradientTest, MatchesFiniteDifferencesAndReachesEncoder) {
  for (std::uint64_t seed : {1u, 2u}) {
    Model m = unit_scale_model(seed, toy_config(true));
    const GradCheckResult r = grad_check(
        [&](ad::Tape& t) { return abstractive_loss(t, m, kToyDoc, kToyReference); },
        m.params());
    EXPECT_LT(r.max_relative_error, 1e-4)
        << r.worst_parameter << "[" << r.worst_index << "] analytic " << r.worst_analytic
        << " numeric " << r.worst_numeric;
    // grad_check leaves the analytic gradient in the store.
    double encoder_sq = 0.0;
    for (ParamId id : m.encoder_parameter_ids())
      if (is_non_embedding_encoder(m, id)) encoder_sq += m.params()[id].grad.squared_norm();
    EXPECT_GT(encoder_sq, 0.0);
  }
}

TEST(AbstractiveGradientTest, ZeroContextMatricesCutTheEncoderOff) {
  Model m = unit_scale_model(4, toy_config(true));
  const DecoderParams& d = *m.decoder();
  for (ParamId id : {d.W_uc, d.W_rc, d.W_hc, d.W_fc}) m.params()[id].value.fill(0.0);
  m.params().zero_grad();
  ad::Tape tape(&m.params());
  tape.backward(abstractive_loss(tape, m, kToyDoc, kToyReference));
  for (ParamId id : m.encoder_parameter_ids()) {
    if (!is_non_embedding_encoder(m, id)) continue;
    for (double g : m.params()[id].grad.data()) EXPECT_EQ(g, 0.0) << m.params()[id].name;
  }
  // The shared embedding still learns through the decoder inputs.
  EXPECT_GT(m.params().at("embedding").grad.squared_norm(), 0.0);
}

TEST(ClipGradientsTest, ScalesToNorm) {
  ParameterStore s;
  const ParamId id = s.add("p", Tensor::vector({0, 0}));
  s[id].grad = Tensor::vector({3, 4});
  EXPECT_DOUBLE_EQ(clip_gradients(s, 1.0), 5.0);
  EXPECT_NEAR(s[id].grad[0], 0.6, 1e-15);
  EXPECT_NEAR(s[id].grad[1], 0.8, 1e-15);
}

TEST(ClipGradientsTest, BelowThresholdAndZeroAreNoOps) {
  ParameterStore s;
  const ParamId id = s.add("p", Tensor::vector({0, 0}));
  s[id].grad = Tensor::vector({3, 4});
  clip_gradients(s, 5.0);
  EXPECT_EQ(s[id].grad.values(), (std::vector<double>{3, 4}));
  s[id].grad = Tensor::vector({0, 0});
  EXPECT_EQ(clip_gradients(s, 1.0), 0.0);
  EXPECT_EQ(s[id].grad.values(), (std::vector<double>{0, 0}));
}

TEST(ClipGradientsTest, KeepsDirectionAcrossParameters) {
  ParameterStore s;
  Rng rng(4);
  for (int i = 0; i < 4; ++i) {
    const ParamId id = s.add("p" + std::to_string(i), Tensor(Shape::matrix(3, 2)));
    fill_uniform(s[id].grad, 10.0, rng);
  }
  std::vector<double> before;
  for (const auto& p : s) before.insert(before.end(), p.grad.data().begin(), p.grad.data().end());
  clip_gradients(s, 2.0);
  std::vector<double> after;
  for (const auto& p : s) after.insert(after.end(), p.grad.data().begin(), p.grad.data().end());
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    dot += before[i] * after[i];
    na += before[i] * before[i];
    nb += after[i] * after[i];
  }
  EXPECT_NEAR(dot / std::sqrt(na * nb), 1.0, 1e-12);
  EXPECT_NEAR(std::sqrt(nb), 2.0, 1e-12);
}

TEST(AdadeltaTest, FirstStepHandValue) {
  ParameterStore s;
  const ParamId id = s.add("p", Tensor::vector({0.0}));
  s[id].grad = Tensor::vector({1.0});
  adadelta_step(s, 0.95, 1e-6);
  EXPECT_NEAR(s[id].mean_sq_grad[0], 0.05, 1e-15);
  EXPECT_NEAR(s[id].value[0], -std::sqrt(1e-6 / 0.050001), 1e-15);
  EXPECT_NEAR(s[id].value[0], -0.0044721, 1e-7);
  const double delta = s[id].value[0];
  EXPECT_NEAR(s[id].mean_sq_delta[0], 0.05 * delta * delta, 1e-18);
}

TEST(AdadeltaTest, ZeroGradientOnlyDecaysAccumulators) {
  ParameterStore s;
  const ParamId id = s.add("p", Tensor::vector({1.5, -2.0}));
  s[id].mean_sq_grad = Tensor::vector({0.4, 0.2});
  s[id].mean_sq_delta = Tensor::vector({0.1, 0.3});
  adadelta_step(s, 0.9, 1e-6);
  EXPECT_EQ(s[id].value.values(), (std::vector<double>{1.5, -2.0}));
  EXPECT_NEAR(s[id].mean_sq_grad[0], 0.36, 1e-15);
  EXPECT_NEAR(s[id].mean_sq_delta[1], 0.27, 1e-15);
}

TEST(AdadeltaTest, StepOpposesGradientSign) {
  ParameterStore s;
  const ParamId id = s.add("p", Tensor(Shape::vector(50)));
  Rng rng(12);
  for (int round = 0; round < 5; ++round) {
    fill_uniform(s[id].grad, 3.0, rng);
    const Tensor before = s[id].value;
    adadelta_step(s, 0.95, 1e-6);
    for (std::size_t i = 0; i < 50; ++i) {
      const double g = s[id].grad[i];
      const double d = s[id].value[i] - before[i];
      if (g != 0.0) {
        EXPECT_EQ(std::signbit(d), !std::signbit(g));
      }
    }
  }
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.patience = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.clip_norm = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_train_mode("abstractive"), TrainMode::kAbstractive);
  EXPECT_EQ(train_mode_name(TrainMode::kExtractive), "extractive");
  EXPECT_THROW(parse_train_mode("both"), ConfigError);
}

TEST(MakeExamplesTest, ModeDataMismatchNamesDocuments) {
  auto docs = testing::make_labeled_corpus(1, {.documents = 3});
  const Vocabulary v = build_vocab(docs, 100);
  docs[1].labels.reset();
  docs[2].summary.reset();
  try {
    make_examples(docs, v, TrainMode::kExtractive);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(docs[1].id), std::string::npos);
  }
  try {
    make_examples(docs, v, TrainMode::kAbstractive);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(docs[2].id), std::string::npos);
  }
}

struct SmallSetup {
  std::vector<Document> docs;
  Vocabulary vocab;
  std::vector<TrainingExample> examples;
  ModelConfig config;

  explicit SmallSetup(TrainMode mode, std::size_t n = 6) {
    docs = testing::make_labeled_corpus(77, {.documents = n, .vocab = 20,
                                             .min_sentences = 3, .max_sentences = 5,
                                             .min_words = 3, .max_words = 5,
                                             .min_positive = 1, .max_positive = 2});
    vocab = build_vocab(docs, 100);
    examples = make_examples(docs, vocab, mode);
    config.vocab_size = vocab.size();
    config.embedding_dim = 6;
    config.hidden_dim = 6;
    config.position_embedding_dim = 3;
    config.max_abs_positions = 10;
    config.num_rel_segments = 3;
    config.decoder_enabled = mode == TrainMode::kAbstractive;
  }

  Model model(std::uint64_t seed) const {
    Model m(config);
    Rng rng(seed);
    m.initialize(rng);
    return m;
  }
};

TEST(TrainBatchTest, OneStepDecreasesSingleExampleLoss) {
  for (TrainMode mode : {TrainMode::kExtractive, TrainMode::kAbstractive}) {
    const SmallSetup s(mode, 3);
    Model m = s.model(5);
    TrainConfig cfg;
    cfg.mode = mode;
    const std::span<const TrainingExample> one(s.examples.data(), 1);
    const double before = evaluate_loss(m, one, mode).loss;
    const std::vector<std::size_t> batch{0};
    const LossTotals reported = train_batch(m, one, batch, cfg);
    EXPECT_DOUBLE_EQ(reported.loss, before);
    EXPECT_LT(evaluate_loss(m, one, mode).loss, before) << train_mode_name(mode);
  }
}

TEST(EvaluateLossTest, FrozenParametersGiveIdenticalValues) {
  const SmallSetup s(TrainMode::kAbstractive);
  const Model m = s.model(6);
  const LossTotals a = evaluate_loss(m, s.examples, TrainMode::kAbstractive);
  const LossTotals b = evaluate_loss(m, s.examples, TrainMode::kAbstractive);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.words, b.words);
  EXPECT_NEAR(a.perplexity(), std::exp(a.loss / double(a.words)), 1e-9);
  for (const auto& p : m.params()) EXPECT_EQ(p.grad.squared_norm(), 0.0);
}

TEST(EarlyStoppingTest, PatienceOneStopsAfterFirstWorsening) {
  EarlyStopping es(1);
  EXPECT_TRUE(es.update(2.0));
  EXPECT_FALSE(es.should_stop());
  EXPECT_FALSE(es.update(2.5));
  EXPECT_TRUE(es.should_stop());
  EXPECT_EQ(es.best_epoch(), 1u);
  EXPECT_EQ(es.best_loss(), 2.0);
}

TEST(EarlyStoppingTest, ImprovementResetsTheWindow) {
  EarlyStopping es(2);
  es.update(3.0);
  es.update(3.1);
  EXPECT_TRUE(es.update(2.9));
  es.update(3.0);
  EXPECT_FALSE(es.should_stop());
  es.update(3.0);
  EXPECT_TRUE(es.should_stop());
  EXPECT_EQ(es.best_epoch(), 3u);
}

TEST(TrainTest, StopsOnWorseningValidationAndRestoresBest) {
  // Every training label is 1 and every validation label 0, so each epoch
  // of fitting the training set makes validation worse.
  SmallSetup s(TrainMode::kExtractive);
  for (auto& ex : s.examples) std::fill(ex.labels.begin(), ex.labels.end(), 1);
  std::vector<TrainingExample> valid = s.examples;
  for (auto& ex : valid) std::fill(ex.labels.begin(), ex.labels.end(), 0);
  Model m = s.model(8);
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.max_epochs = 20;
  cfg.patience = 1;
  cfg.adadelta_eps = 1e-4;
  const TrainReport r = train(m, s.examples, valid, cfg);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.stopped_epoch, 2u);
  EXPECT_EQ(r.best_epoch, 1u);
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_TRUE(r.epochs[0].improved);
  EXPECT_FALSE(r.epochs[1].improved);
  EXPECT_GT(r.epochs[1].valid_loss, r.epochs[0].valid_loss);
  EXPECT_EQ(evaluate_loss(m, valid, TrainMode::kExtractive).mean(), r.best_valid_loss);
}

TEST(TrainTest, SameSeedGivesBitwiseIdenticalCurves) {
  for (TrainMode mode : {TrainMode::kExtractive, TrainMode::kAbstractive}) {
    const SmallSetup s(mode);
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.batch_size = 4;
    cfg.max_epochs = 3;
    cfg.seed = 11;
    Model a = s.model(1), b = s.model(1);
    const TrainReport ra = train(a, s.examples, s.examples, cfg);
    const TrainReport rb = train(b, s.examples, s.examples, cfg);
    ASSERT_EQ(ra.epochs.size(), rb.epochs.size());
    for (std::size_t e = 0; e < ra.epochs.size(); ++e) {
      EXPECT_EQ(ra.epochs[e].train_loss, rb.epochs[e].train_loss);
      EXPECT_EQ(ra.epochs[e].valid_loss, rb.epochs[e].valid_loss);
      EXPECT_EQ(ra.epochs[e].train_perplexity, rb.epochs[e].train_perplexity);
    }
    EXPECT_EQ(ra.to_json().dump(), rb.to_json().dump());
    for (std::size_t i = 0; i < a.params().size(); ++i)
      EXPECT_EQ(a.params()[i].value.values(), b.params()[i].value.values());
  }
}

TEST(TrainTest, EmptyTrainingSetIsConfigError) {
  const SmallSetup s(TrainMode::kExtractive);
  Model m = s.model(1);
  EXPECT_THROW(train(m, {}, s.examples, TrainConfig{}), ConfigError);
}

TEST(LabelAccuracyTest, ZeroModelPredictsEverythingPositive) {
  const SmallSetup s(TrainMode::kExtractive);
  const Model m(s.config);
  std::size_t pos = 0, total = 0;
  for (const auto& ex : s.examples)
    for (int y : ex.labels) {
      pos += y == 1;
      ++total;
    }
  EXPECT_DOUBLE_EQ(label_accuracy(m, s.examples), double(pos) / double(total));
}

}  // namespace
}  // namespace extsum
