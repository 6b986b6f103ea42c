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

#include <fstream>
#include <set>

#include "extsum/errors.hpp"
#include "extsum/model.hpp"

namespace extsum {

nlohmann::json checkpoint_to_json(const Model& model, const Vocabulary& vocab) {
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter& p : model.params()) {
    params.push_back({{"name", p.name},
                      {"shape", p.value.shape().dims()},
                      {"values", p.value.values()}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"model_config", model.config().to_json()},
          {"vocabulary", vocab.tokens()},
          {"parameters", std::move(params)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw ParseError("not an extsum checkpoint");
  }
  const int version = j.value("version", -1);
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint version " + std::to_string(version) +
                     " is not supported (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck{Model(ModelConfig::from_json(j.at("model_config"))),
                Vocabulary::from_tokens(
                    j.at("vocabulary").get<std::vector<std::string>>())};
  if (ck.vocab.size() != ck.model.config().vocab_size) {
    throw ParseError("checkpoint vocabulary has " + std::to_string(ck.vocab.size()) +
                     " entries but the model expects " +
                     std::to_string(ck.model.config().vocab_size));
  }

  std::set<std::string> seen;
  for (const auto& entry : j.at("parameters")) {
    const auto name = entry.at("name").get<std::string>();
    if (!ck.model.params().contains(name)) {
      throw ParseError("checkpoint holds unknown parameter '" + name + "'");
    }
    Tensor value = Tensor::from_dims(entry.at("shape").get<std::vector<std::size_t>>(),
                                     entry.at("values").get<std::vector<double>>());
    Parameter& p = ck.model.params().at(name);
    if (!(value.shape() == p.value.shape())) {
      throw ParseError("parameter '" + name + "' has shape " + value.shape().str() +
                       ", expected " + p.value.shape().str());
    }
    p.value = std::move(value);
    seen.insert(name);
  }
  for (const Parameter& p : ck.model.params()) {
    if (!seen.count(p.name)) {
      throw ParseError("checkpoint is missing parameter '" + p.name + "'");
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model, vocab).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace extsum
