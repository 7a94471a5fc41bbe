#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/cluster.hpp"
#include "hetfeed/config.hpp"
#include "hetfeed/embed.hpp"
#include "hetfeed/evalharness.hpp"
#include "hetfeed/select.hpp"
#include "hetfeed/unify.hpp"

namespace hetfeed {

enum class Stage { ingest, unify, embed, cluster, select };

std::string_view to_string(Stage stage);

struct SourceData {
  SourceInput input;
  std::vector<BinaryPreferenceRecord> binary;
  std::vector<ScoredResponseRecord> scored;
};

/// In-memory products of every stage that ran.
struct PipelineResult {
  Stage last_stage = Stage::ingest;
  std::vector<SourceData> sources;
  UnionResult unified;
  std::map<std::string, DiscardReport> discards;
  EmbeddingMap embeddings;
  std::optional<ClusterModel> model;
  std::optional<Selection> selection;
  nlohmann::json log = nlohmann::json::object();
};

/// Runs ingest .. `last` without touching the output directory. Any failure
/// is rethrown as StageError naming the stage.
PipelineResult run_stages(const RunConfig& cfg, Stage last = Stage::select);

struct PipelineOutputs {
  std::vector<std::filesystem::path> files;  // every file written
  std::optional<std::filesystem::path> d_train;
  std::optional<std::filesystem::path> selection_report;
  std::filesystem::path run_log;
  PipelineResult result;
};

/// run_stages plus writing the stage outputs into cfg.output_dir. With
/// `emit_manifests`, writes one training manifest per stage pointing at
/// d_train.jsonl (by file name, relative to the manifest). On failure, files written by this call are removed.
PipelineOutputs run_pipeline(const RunConfig& cfg, Stage last = Stage::select,
                             bool emit_manifests = false);

/// Reads the items and dumps files and computes every metric.
eval::MetricReport run_eval(const std::filesystem::path& items_path,
                            const std::filesystem::path& dumps_path);

}  // namespace hetfeed
