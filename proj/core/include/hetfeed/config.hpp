#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/embed.hpp"
#include "hetfeed/ingest.hpp"
#include "hetfeed/select.hpp"

namespace hetfeed {

struct SourceInput {
  SourceDescriptor descriptor;
  std::filesystem::path path;
};

enum class EmbeddingProviderKind { hash, file };

struct EmbeddingConfig {
  EmbeddingProviderKind provider = EmbeddingProviderKind::hash;
  std::filesystem::path path;  // file provider only
  std::size_t dim = kDefaultEmbeddingDim;
  std::uint64_t seed = 0;
};

struct EvalInputs {
  std::filesystem::path items;
  std::filesystem::path dumps;
};

/// Everything one pipeline run needs. Loaded from a single JSON file;
/// relative paths resolve against the config file's directory.
struct RunConfig {
  std::vector<SourceInput> sources;
  EmbeddingConfig embedding;
  SelectionConfig selection;  // policies filled from `sources`
  std::size_t max_iters = 100;
  std::filesystem::path output_dir;
  std::optional<EvalInputs> eval;

  /// Throws ValidationError listing every problem found.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hetfeed
