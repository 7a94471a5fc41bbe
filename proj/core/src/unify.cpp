#include "hetfeed/unify.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "hetfeed/error.hpp"
#include "hetfeed/jsonl.hpp"
#include "hetfeed/text.hpp"

namespace hetfeed {

using nlohmann::json;

json to_json(const UnifiedPair& p) {
  json j{{"pair_id", p.pair_id},
         {"prompt", p.prompt},
         {"chosen", p.chosen},
         {"rejected", p.rejected},
         {"source_id", p.source_id}};
  if (p.quality) j["quality"] = *p.quality;
  if (p.cluster_id) j["cluster_id"] = *p.cluster_id;
  return j;
}

UnifiedPair unified_pair_from_json(const json& j, std::size_t line) {
  UnifiedPair p;
  p.pair_id = jsonl::require_string(j, "pair_id", line);
  p.prompt = jsonl::require_string(j, "prompt", line);
  p.chosen = jsonl::require_string(j, "chosen", line);
  p.rejected = jsonl::require_string(j, "rejected", line);
  p.source_id = jsonl::require_string(j, "source_id", line);
  if (auto it = j.find("quality"); it != j.end() && !it->is_null()) {
    const double q = jsonl::require_finite(*it, "quality", line);
    if (q < 0) throw ParseError(line, "quality", "must be >= 0");
    p.quality = q;
  }
  if (auto it = j.find("cluster_id"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError(line, "cluster_id", "expected an integer");
    p.cluster_id = it->get<int>();
  }
  return p;
}

std::vector<UnifiedPair> read_unified_pairs(std::istream& in) {
  std::vector<UnifiedPair> out;
  jsonl::for_each_object(in, [&](const json& obj, std::size_t line) {
    out.push_back(unified_pair_from_json(obj, line));
  });
  return out;
}

std::string serialize_pairs(std::span<const UnifiedPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

Grouping group_by_prompt(std::span<const ScoredResponseRecord> records) {
  std::vector<PromptGroup> all;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto key = normalize_prompt(r.prompt);
    auto [it, inserted] = index.try_emplace(std::move(key), all.size());
    if (inserted) all.push_back(PromptGroup{r.prompt, {}, r.source_id});
    all[it->second].responses.push_back({r.response, r.scores});
  }
  Grouping out;
  for (auto& g : all) {
    if (g.responses.size() >= 2) {
      out.groups.push_back(std::move(g));
    } else {
      ++out.single_response_prompts;
    }
  }
  return out;
}

namespace {

double label_of(const ScoredResponse& r, const std::string& label,
                std::size_t index) {
  auto it = r.scores.find(label);
  if (it == r.scores.end()) {
    throw ValidationError("response " + std::to_string(index) + " lacks label '" +
                          label + "'");
  }
  return it->second;
}

}  // namespace

std::vector<ScoredResponse> numerical_to_ordinal(const PromptGroup& group,
                                                 const std::string& label,
                                                 LabelDirection direction) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(group.responses.size());
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    keyed.emplace_back(label_of(group.responses[i], label, i), i);
  }
  const bool ascending = direction == LabelDirection::lower_is_better;
  std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    return ascending ? a.first < b.first : a.first > b.first;
  });
  std::vector<ScoredResponse> out;
  out.reserve(keyed.size());
  for (const auto& [value, i] : keyed) out.push_back(group.responses[i]);
  return out;
}

PreferencePair ordinal_to_binary(std::span<const ScoredResponse> ordered) {
  if (ordered.size() < 2) {
    throw ValidationError("need at least two responses, got " +
                          std::to_string(ordered.size()));
  }
  return {ordered.front().text, ordered.back().text};
}

double quality_score(const PromptGroup& group, const std::string& label) {
  if (group.responses.empty()) throw ValidationError("empty prompt group");
  double lo = label_of(group.responses[0], label, 0);
  double hi = lo;
  for (std::size_t i = 1; i < group.responses.size(); ++i) {
    const double v = label_of(group.responses[i], label, i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

std::vector<UnifiedPair> rank_pairs(std::vector<UnifiedPair> pairs) {
  for (const auto& p : pairs) {
    if (!p.quality) throw ValidationError("pair '" + p.pair_id + "' has no quality score");
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const UnifiedPair& a, const UnifiedPair& b) {
                     return *a.quality > *b.quality;
                   });
  return pairs;
}

std::string make_pair_id(const std::string& source_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", ordinal);
  return source_id + "/" + buf;
}

json to_json(const DiscardReport& r) {
  return json{{"single_response_prompts", r.single_response_prompts},
              {"zero_variance_groups", r.zero_variance_groups},
              {"identical_endpoint_groups", r.identical_endpoint_groups}};
}

Conversion convert_scored_source(std::span<const ScoredResponseRecord> records,
                                 const SourceDescriptor& desc) {
  if (desc.supervision != Supervision::scored || !desc.quality_label) {
    throw ValidationError("source '" + desc.source_id +
                          "' is not a scored source with a quality_label");
  }
  const std::string& label = *desc.quality_label;
  Grouping grouping = group_by_prompt(records);

  Conversion out;
  out.discards.single_response_prompts = grouping.single_response_prompts;
  for (const auto& group : grouping.groups) {
    auto ordered = numerical_to_ordinal(group, label, desc.label_direction);
    auto [chosen, rejected] = ordinal_to_binary(ordered);
    if (normalize_prompt(chosen) == normalize_prompt(rejected)) {
      ++out.discards.identical_endpoint_groups;
      continue;
    }
    const double q = quality_score(group, label);
    if (q == 0.0) ++out.discards.zero_variance_groups;

    UnifiedPair p;
    p.pair_id = make_pair_id(desc.source_id, out.pairs.size());
    p.prompt = group.prompt;
    p.chosen = std::move(chosen);
    p.rejected = std::move(rejected);
    if (desc.filter_policy == FilterPolicy::quality) p.quality = q;
    p.source_id = desc.source_id;
    out.pairs.push_back(std::move(p));
  }
  return out;
}

std::vector<UnifiedPair> convert_binary_source(
    std::span<const BinaryPreferenceRecord> records,
    const SourceDescriptor& desc) {
  std::vector<UnifiedPair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    UnifiedPair p;
    p.pair_id = make_pair_id(desc.source_id, out.size());
    p.prompt = r.prompt;
    p.chosen = r.chosen;
    p.rejected = r.rejected;
    p.source_id = desc.source_id;
    out.push_back(std::move(p));
  }
  return out;
}

UnionResult union_sources(
    std::span<const std::pair<SourceDescriptor, std::vector<UnifiedPair>>>
        sources) {
  UnionResult out;
  std::set<std::string> ids;
  for (const auto& [desc, pairs] : sources) {
    for (const auto& p : pairs) {
      if (!ids.insert(p.pair_id).second) {
        throw ValidationError("duplicate pair_id '" + p.pair_id + "'");
      }
      out.pairs.push_back(p);
    }
    out.per_source_counts.emplace_back(desc.source_id, pairs.size());
  }
  return out;
}

}  // namespace hetfeed
