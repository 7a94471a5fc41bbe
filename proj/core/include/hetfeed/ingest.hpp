#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetfeed {

enum class Supervision { binary, scored };
enum class LabelDirection { lower_is_better, higher_is_better };
enum class FilterPolicy { quality, random, passthrough };

std::string_view to_string(Supervision s);
std::string_view to_string(LabelDirection d);
std::string_view to_string(FilterPolicy p);
Supervision parse_supervision(std::string_view s);
LabelDirection parse_label_direction(std::string_view s);
FilterPolicy parse_filter_policy(std::string_view s);

/// How one input dataset is interpreted and filtered.
struct SourceDescriptor {
  std::string source_id;
  Supervision supervision = Supervision::binary;
  std::optional<std::string> quality_label;
  LabelDirection label_direction = LabelDirection::lower_is_better;
  FilterPolicy filter_policy = FilterPolicy::passthrough;

  bool operator==(const SourceDescriptor&) const = default;
};

/// Label name -> value. All values finite, at least one entry.
using ScoreVector = std::map<std::string, double>;

/// A prompt with a preferred (`chosen`) and a non-preferred answer.
struct BinaryPreferenceRecord {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  std::string source_id;

  bool operator==(const BinaryPreferenceRecord&) const = default;
};

/// One prompt/response pair with its label vector.
struct ScoredResponseRecord {
  std::string prompt;
  std::string response;
  ScoreVector scores;
  std::string source_id;

  bool operator==(const ScoredResponseRecord&) const = default;
};

/// Parses `{"prompt", "chosen", "rejected"}` lines. Blank lines are skipped.
/// Throws ParseError (line + field) on malformed input or chosen == rejected.
std::vector<BinaryPreferenceRecord> parse_binary_dataset(
    std::istream& in, const SourceDescriptor& desc);

/// Parses `{"prompt", "response", "scores": {label: number}}` lines.
/// Records sharing a prompt are kept as-is; grouping happens in unify.
std::vector<ScoredResponseRecord> parse_scored_dataset(
    std::istream& in, const SourceDescriptor& desc);

nlohmann::json to_json(const BinaryPreferenceRecord& r);
nlohmann::json to_json(const ScoredResponseRecord& r);
nlohmann::json to_json(const SourceDescriptor& d);
SourceDescriptor source_descriptor_from_json(const nlohmann::json& j);

struct SourceViolation {
  std::string source_id;
  std::string message;
};

using ScoredRecordsBySource =
    std::map<std::string, std::vector<ScoredResponseRecord>>;

/// Collects every descriptor problem instead of stopping at the first one:
/// empty or duplicate ids, quality_label/policy mismatches, and (when the
/// parsed records are supplied) scored records lacking the quality label.
std::vector<SourceViolation> validate_sources(
    std::span<const SourceDescriptor> descs,
    const ScoredRecordsBySource& scored = {});

}  // namespace hetfeed
