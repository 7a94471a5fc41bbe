#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace hetfeed {

enum class TrainingStage { sft, reward, rlhf };

std::string_view to_string(TrainingStage stage);
TrainingStage parse_training_stage(std::string_view name);

/// Hyperparameters for one external training stage. `hyperparameters` and
/// `adapter` are flat JSON objects so the trainer can read them verbatim.
struct TrainingManifest {
  TrainingStage stage = TrainingStage::sft;
  nlohmann::json hyperparameters = nlohmann::json::object();
  nlohmann::json adapter = nlohmann::json::object();  // rank, alpha, dropout
  std::string dataset_path;

  bool operator==(const TrainingManifest&) const = default;
};

/// Canonical settings for `stage`, pointing at `dataset_path`. All three
/// stages are meant to share the same dataset.
TrainingManifest emit_manifest(TrainingStage stage, std::string dataset_path);

nlohmann::json to_json(const TrainingManifest& m);
TrainingManifest manifest_from_json(const nlohmann::json& j);

}  // namespace hetfeed
