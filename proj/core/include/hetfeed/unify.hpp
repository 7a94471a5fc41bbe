#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/ingest.hpp"

namespace hetfeed {

struct ScoredResponse {
  std::string text;
  ScoreVector scores;

  bool operator==(const ScoredResponse&) const = default;
};

/// All responses to one prompt from one source, in input order.
struct PromptGroup {
  std::string prompt;  // first-seen spelling
  std::vector<ScoredResponse> responses;
  std::string source_id;
};

/// One element of the homogenized dataset.
struct UnifiedPair {
  std::string pair_id;
  std::string prompt;
  std::string chosen;
  std::string rejected;
  std::optional<double> quality;  // set only for quality-filtered sources
  std::string source_id;
  std::optional<int> cluster_id;

  bool operator==(const UnifiedPair&) const = default;
};

nlohmann::json to_json(const UnifiedPair& p);
UnifiedPair unified_pair_from_json(const nlohmann::json& j, std::size_t line = 0);
std::vector<UnifiedPair> read_unified_pairs(std::istream& in);
std::string serialize_pairs(std::span<const UnifiedPair> pairs);

struct Grouping {
  std::vector<PromptGroup> groups;
  std::size_t single_response_prompts = 0;
};

/// Groups by normalized prompt, keeping prompts with at least two responses.
/// Groups appear in order of first occurrence.
Grouping group_by_prompt(std::span<const ScoredResponseRecord> records);

/// Stable sort of the group's responses, best first.
std::vector<ScoredResponse> numerical_to_ordinal(const PromptGroup& group,
                                                 const std::string& label,
                                                 LabelDirection direction);

struct PreferencePair {
  std::string chosen;
  std::string rejected;
};

/// Best and worst endpoints of an ordered response list.
PreferencePair ordinal_to_binary(std::span<const ScoredResponse> ordered);

/// max(label) - min(label) over the group.
double quality_score(const PromptGroup& group, const std::string& label);

/// Descending by quality, stable on ties. Throws if any pair lacks quality.
std::vector<UnifiedPair> rank_pairs(std::vector<UnifiedPair> pairs);

/// `source_id/NNNNNN`.
std::string make_pair_id(const std::string& source_id, std::size_t ordinal);

struct DiscardReport {
  std::size_t single_response_prompts = 0;
  std::size_t zero_variance_groups = 0;     // kept, quality 0
  std::size_t identical_endpoint_groups = 0;  // dropped: chosen == rejected

  bool operator==(const DiscardReport&) const = default;
};

nlohmann::json to_json(const DiscardReport& r);

struct Conversion {
  std::vector<UnifiedPair> pairs;
  DiscardReport discards;
};

/// numerical -> ordinal -> binary for every prompt group of a scored source.
Conversion convert_scored_source(std::span<const ScoredResponseRecord> records,
                                 const SourceDescriptor& desc);

/// Binary sources pass through unchanged, without a quality score.
std::vector<UnifiedPair> convert_binary_source(
    std::span<const BinaryPreferenceRecord> records,
    const SourceDescriptor& desc);

struct UnionResult {
  std::vector<UnifiedPair> pairs;
  std::vector<std::pair<std::string, std::size_t>> per_source_counts;
};

/// Concatenates sources in declaration order. Throws on duplicate pair_id.
UnionResult union_sources(
    std::span<const std::pair<SourceDescriptor, std::vector<UnifiedPair>>>
        sources);

}  // namespace hetfeed
