#include "hetfeed/manifest.hpp"

#include "hetfeed/error.hpp"

namespace hetfeed {

using nlohmann::json;

std::string_view to_string(TrainingStage stage) {
  switch (stage) {
    case TrainingStage::sft: return "sft";
    case TrainingStage::reward: return "reward";
    case TrainingStage::rlhf: return "rlhf";
  }
  return "unknown";
}

TrainingStage parse_training_stage(std::string_view name) {
  if (name == "sft") return TrainingStage::sft;
  if (name == "reward") return TrainingStage::reward;
  if (name == "rlhf") return TrainingStage::rlhf;
  throw ValidationError("unknown training stage '" + std::string(name) +
                        "' (expected sft, reward or rlhf)");
}

TrainingManifest emit_manifest(TrainingStage stage, std::string dataset_path) {
  TrainingManifest m;
  m.stage = stage;
  m.dataset_path = std::move(dataset_path);
  switch (stage) {
    case TrainingStage::sft:
      m.hyperparameters = {
          {"learning_rate", 1e-5},
          {"max_steps", 5000},
          {"epochs", 1},
          {"optimizer", "adamw"},
          {"lr_scheduler", "cosine"},
          {"max_text_length", 512},
          {"batch_size", 4},
          {"gradient_accumulation_steps", 1},
          {"weight_decay", 0.05},
      };
      m.adapter = {{"rank", 16}, {"alpha", 32}, {"dropout", 0.05}};
      break;
    case TrainingStage::reward:
      m.hyperparameters = {
          {"learning_rate", 2e-5},
          {"epochs", 1},
          {"optimizer", "adamw"},
          {"lr_scheduler", "linear"},
          {"max_text_length", 512},
          {"batch_size", 4},
          {"gradient_accumulation_steps", 1},
          {"weight_decay", 0.001},
      };
      m.adapter = {{"rank", 8}, {"alpha", 32}, {"dropout", 0.1}};
      break;
    case TrainingStage::rlhf:
      m.hyperparameters = {
          {"learning_rate", 1.41e-5},
          {"max_steps", 20000},
          {"epochs", 4},
          {"min_generation_length", 32},
          {"max_generation_length", 128},
          {"ppo_minibatch_size", 1},
          {"batch_size", 32},
          {"gradient_accumulation_steps", 4},
      };
      m.adapter = {{"rank", 16}, {"alpha", 32}, {"dropout", 0.05}};
      break;
  }
  return m;
}

json to_json(const TrainingManifest& m) {
  return json{{"stage", to_string(m.stage)},
              {"dataset_path", m.dataset_path},
              {"hyperparameters", m.hyperparameters},
              {"lora", m.adapter}};
}

TrainingManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  for (const char* key : {"stage", "dataset_path", "hyperparameters", "lora"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("manifest lacks '") + key + "'");
    }
  }
  TrainingManifest m;
  m.stage = parse_training_stage(j.at("stage").get<std::string>());
  m.dataset_path = j.at("dataset_path").get<std::string>();
  m.hyperparameters = j.at("hyperparameters");
  m.adapter = j.at("lora");
  return m;
}

}  // namespace hetfeed
