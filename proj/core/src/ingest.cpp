#include "hetfeed/ingest.hpp"

#include <set>

#include "hetfeed/error.hpp"
#include "hetfeed/jsonl.hpp"
#include "hetfeed/text.hpp"

namespace hetfeed {

using nlohmann::json;

std::string_view to_string(Supervision s) {
  return s == Supervision::binary ? "binary" : "scored";
}

std::string_view to_string(LabelDirection d) {
  return d == LabelDirection::lower_is_better ? "lower_is_better"
                                              : "higher_is_better";
}

std::string_view to_string(FilterPolicy p) {
  switch (p) {
    case FilterPolicy::quality: return "quality";
    case FilterPolicy::random: return "random";
    case FilterPolicy::passthrough: return "passthrough";
  }
  return "unknown";
}

Supervision parse_supervision(std::string_view s) {
  if (s == "binary") return Supervision::binary;
  if (s == "scored") return Supervision::scored;
  throw ValidationError("unknown supervision '" + std::string(s) + "'");
}

LabelDirection parse_label_direction(std::string_view s) {
  if (s == "lower_is_better") return LabelDirection::lower_is_better;
  if (s == "higher_is_better") return LabelDirection::higher_is_better;
  throw ValidationError("unknown label_direction '" + std::string(s) + "'");
}

FilterPolicy parse_filter_policy(std::string_view s) {
  if (s == "quality") return FilterPolicy::quality;
  if (s == "random") return FilterPolicy::random;
  if (s == "passthrough") return FilterPolicy::passthrough;
  throw ValidationError("unknown filter_policy '" + std::string(s) + "'");
}

std::vector<BinaryPreferenceRecord> parse_binary_dataset(
    std::istream& in, const SourceDescriptor& desc) {
  if (desc.supervision != Supervision::binary) {
    throw ValidationError("source '" + desc.source_id + "' is not binary");
  }
  std::vector<BinaryPreferenceRecord> out;
  jsonl::for_each_object(in, [&](const json& obj, std::size_t line) {
    BinaryPreferenceRecord r;
    r.prompt = jsonl::require_string(obj, "prompt", line);
    r.chosen = jsonl::require_string(obj, "chosen", line);
    r.rejected = jsonl::require_string(obj, "rejected", line);
    r.source_id = desc.source_id;
    if (normalize_prompt(r.chosen) == normalize_prompt(r.rejected)) {
      throw ParseError(line, "rejected", "identical to chosen");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ScoredResponseRecord> parse_scored_dataset(
    std::istream& in, const SourceDescriptor& desc) {
  if (desc.supervision != Supervision::scored) {
    throw ValidationError("source '" + desc.source_id + "' is not scored");
  }
  std::vector<ScoredResponseRecord> out;
  jsonl::for_each_object(in, [&](const json& obj, std::size_t line) {
    ScoredResponseRecord r;
    r.prompt = jsonl::require_string(obj, "prompt", line);
    r.response = jsonl::require_string(obj, "response", line);
    const json& scores = jsonl::require(obj, "scores", line);
    if (!scores.is_object()) throw ParseError(line, "scores", "expected an object");
    if (scores.empty()) throw ParseError(line, "scores", "must hold at least one label");
    for (const auto& [label, value] : scores.items()) {
      if (label.empty()) throw ParseError(line, "scores", "empty label name");
      r.scores[label] = jsonl::require_finite(value, "scores." + label, line);
    }
    r.source_id = desc.source_id;
    out.push_back(std::move(r));
  });
  return out;
}

json to_json(const BinaryPreferenceRecord& r) {
  return json{{"prompt", r.prompt}, {"chosen", r.chosen}, {"rejected", r.rejected}};
}

json to_json(const ScoredResponseRecord& r) {
  return json{{"prompt", r.prompt}, {"response", r.response}, {"scores", r.scores}};
}

json to_json(const SourceDescriptor& d) {
  json j{{"source_id", d.source_id},
         {"supervision", to_string(d.supervision)},
         {"label_direction", to_string(d.label_direction)},
         {"filter_policy", to_string(d.filter_policy)}};
  if (d.quality_label) j["quality_label"] = *d.quality_label;
  return j;
}

SourceDescriptor source_descriptor_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("source descriptor must be an object");
  SourceDescriptor d;
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw ValidationError(std::string("source descriptor field '") + key +
                            "' missing or not a string");
    }
    return it->get<std::string>();
  };
  d.source_id = str("source_id");
  d.supervision = parse_supervision(str("supervision"));
  if (j.contains("label_direction")) {
    d.label_direction = parse_label_direction(str("label_direction"));
  }
  d.filter_policy = j.contains("filter_policy")
                        ? parse_filter_policy(str("filter_policy"))
                        : (d.supervision == Supervision::scored
                               ? FilterPolicy::quality
                               : FilterPolicy::passthrough);
  if (j.contains("quality_label") && !j.at("quality_label").is_null()) {
    d.quality_label = str("quality_label");
  }
  return d;
}

std::vector<SourceViolation> validate_sources(
    std::span<const SourceDescriptor> descs,
    const ScoredRecordsBySource& scored) {
  std::vector<SourceViolation> out;
  std::set<std::string> seen;
  for (const auto& d : descs) {
    auto add = [&](std::string msg) { out.push_back({d.source_id, std::move(msg)}); };
    if (d.source_id.empty()) add("empty source_id");
    else if (!seen.insert(d.source_id).second) add("duplicate source_id");

    if (d.supervision == Supervision::binary) {
      if (d.quality_label) add("binary source must not set quality_label");
      if (d.filter_policy == FilterPolicy::quality) {
        add("binary source cannot use the quality filter_policy");
      }
      continue;
    }
    if (!d.quality_label || d.quality_label->empty()) {
      add("scored source requires quality_label");
      continue;
    }
    auto it = scored.find(d.source_id);
    if (it == scored.end()) continue;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (!it->second[i].scores.contains(*d.quality_label)) {
        add("record " + std::to_string(i + 1) + " lacks label '" +
            *d.quality_label + "'");
      }
    }
  }
  return out;
}

}  // namespace hetfeed
